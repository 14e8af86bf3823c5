use std::collections::{BTreeMap, BTreeSet};

use super::{emit_module, module_name, TlaError};
use crate::checker::{Bounds, CheckResult, Compiled, Counterexample, StateVector, TraceStep};
use crate::ir::{coerce, ProtocolModel};
use crate::value::{atom, Value};

/// One state of a TLC error trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TlcState {
    /// 1-based position in the trace.
    pub number: usize,
    /// Action that produced the state; `None` for the initial state.
    pub action: Option<String>,
    pub assignments: Vec<(String, Value)>,
}

/// What a TLC run reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TlcLogParse {
    pub violated: Option<String>,
    /// Present iff a violation was reported.
    pub trace: Vec<TlcState>,
    pub states_generated: u64,
    pub distinct_states: u64,
}

impl TlcLogParse {
    /// Number of transitions in the error trace.
    pub fn depth(&self) -> Option<usize> {
        self.violated.as_ref().map(|_| self.trace.len().saturating_sub(1))
    }
}

fn dialect(line: usize, message: impl Into<String>) -> TlaError {
    TlaError::Dialect {
        line,
        message: message.into(),
    }
}

fn parse_count(s: &str) -> Option<u64> {
    s.replace(',', "").parse().ok()
}

// "<n> states generated, <m> distinct states found, ..."
fn parse_stats(line: &str) -> Option<(u64, u64)> {
    let (generated, rest) = line.split_once(" states generated, ")?;
    let (distinct, _) = rest.split_once(" distinct states found")?;
    Some((parse_count(generated.trim())?, parse_count(distinct.trim())?))
}

// "<Name line 12, col 3 to ...>" or "<Initial predicate>"
fn action_name(header: &str) -> Option<Option<String>> {
    let inner = header.trim().strip_prefix('<')?.strip_suffix('>')?;
    if inner.starts_with("Initial predicate") {
        return Some(None);
    }
    let name: String = inner
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    (!name.is_empty()).then_some(Some(name))
}

struct PendingState {
    number: usize,
    action: Option<String>,
    start_line: usize,
    lines: Vec<String>,
}

impl PendingState {
    fn finish(self) -> Result<TlcState, TlaError> {
        let mut raw: Vec<(String, String)> = Vec::new();
        for l in &self.lines {
            let body = l.trim_start();
            let body = body.strip_prefix("/\\").map(str::trim_start).unwrap_or(body);
            let split = body.split_once(" = ").filter(|(name, _)| {
                !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            });
            match split {
                Some((name, v)) if l.trim_start().starts_with("/\\") || raw.is_empty() => {
                    raw.push((name.to_string(), v.to_string()))
                }
                _ => match raw.last_mut() {
                    Some((_, v)) => {
                        v.push(' ');
                        v.push_str(l.trim());
                    }
                    None => return Err(dialect(self.start_line, "state without assignments")),
                },
            }
        }
        if raw.is_empty() {
            return Err(dialect(self.start_line, "state without assignments"));
        }
        let assignments = raw
            .into_iter()
            .map(|(name, text)| {
                parse_value(&text)
                    .map(|v| (name.clone(), v))
                    .map_err(|m| dialect(self.start_line, format!("value of `{name}`: {m}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(TlcState {
            number: self.number,
            action: self.action,
            assignments,
        })
    }
}

/// Parses TLC's textual output.
///
/// Recognized lines: `Error: Invariant X is violated.` (or `... violated by
/// the initial state:`), `State N: <Action ...>` headers followed by
/// `/\ var = value` lines, `Model checking completed. No error has been
/// found.`, and the `N states generated, M distinct states found` summary.
/// Anything else is ignored. A log without a verdict or summary is rejected.
pub fn parse_tlc_output(log: &str) -> Result<TlcLogParse, TlaError> {
    let mut violated: Option<String> = None;
    let mut passed = false;
    let mut stats = None;
    let mut trace = Vec::new();
    let mut pending: Option<PendingState> = None;

    for (i, line) in log.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("Error: Invariant ") {
            let (name, tail) = rest
                .split_once(" is violated")
                .ok_or_else(|| dialect(lineno, "malformed invariant violation line"))?;
            violated = Some(name.to_string());
            if tail.starts_with(" by the initial state") {
                pending = Some(PendingState {
                    number: 1,
                    action: None,
                    start_line: lineno,
                    lines: Vec::new(),
                });
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("State ") {
            if let Some((num, header)) = rest.split_once(':') {
                if let Ok(number) = num.trim().parse::<usize>() {
                    if let Some(p) = pending.take() {
                        trace.push(p.finish()?);
                    }
                    let action = action_name(header)
                        .ok_or_else(|| dialect(lineno, "malformed state header"))?;
                    pending = Some(PendingState {
                        number,
                        action,
                        start_line: lineno,
                        lines: Vec::new(),
                    });
                    continue;
                }
            }
        }
        if trimmed.starts_with("Model checking completed. No error has been found") {
            passed = true;
            continue;
        }
        if let Some(s) = parse_stats(trimmed) {
            if let Some(p) = pending.take() {
                trace.push(p.finish()?);
            }
            stats = Some(s);
            continue;
        }
        match &mut pending {
            Some(p) if trimmed.is_empty() && !p.lines.is_empty() => {
                let p = pending.take().expect("matched");
                trace.push(p.finish()?);
            }
            Some(p) if !trimmed.is_empty() => {
                let looks_like_state = trimmed.starts_with("/\\")
                    || !p.lines.is_empty()
                    || trimmed.split_once(" = ").is_some();
                if looks_like_state {
                    p.lines.push(line.to_string());
                } else {
                    let p = pending.take().expect("matched");
                    trace.push(p.finish()?);
                }
            }
            _ => {}
        }
    }
    let end = log.lines().count();
    if let Some(p) = pending.take() {
        trace.push(p.finish()?);
    }
    let (states_generated, distinct_states) =
        stats.ok_or_else(|| dialect(end, "missing state-count summary (truncated log?)"))?;
    match (&violated, passed) {
        (None, false) => return Err(dialect(end, "no verdict found")),
        (Some(_), true) => return Err(dialect(end, "log reports both a violation and success")),
        (Some(_), false) if trace.is_empty() => {
            return Err(dialect(end, "violation without an error trace"))
        }
        (None, true) if !trace.is_empty() => {
            return Err(dialect(end, "error trace without a violation"))
        }
        _ => {}
    }
    for (i, s) in trace.iter().enumerate() {
        if s.number != i + 1 {
            return Err(dialect(end, format!("trace state {} is out of sequence", s.number)));
        }
        if (i == 0) != s.action.is_none() {
            return Err(dialect(end, format!("state {} has an unexpected action header", s.number)));
        }
    }
    Ok(TlcLogParse {
        violated,
        trace,
        states_generated,
        distinct_states,
    })
}

// TLC value syntax: TRUE, FALSE, integers, "strings", model values,
// {sets}, (k :> v @@ ...) functions, [f |-> v, ...] records, <<>>.
struct ValueParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ValueParser<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), String> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(format!("expected `{tok}` at offset {}", self.pos))
        }
    }

    fn word(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn value(&mut self) -> Result<Value, String> {
        self.ws();
        if self.eat("{") {
            let mut items = BTreeSet::new();
            if !self.eat("}") {
                loop {
                    items.insert(self.value()?);
                    if self.eat("}") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            return Ok(Value::Set(items));
        }
        if self.eat("<<") {
            self.expect(">>").map_err(|_| "non-empty sequences are not supported".to_string())?;
            return Ok(Value::Map(BTreeMap::new()));
        }
        if self.eat("(") {
            let mut entries = BTreeMap::new();
            loop {
                let key = match self.value()? {
                    Value::Atom(a) => a,
                    other => return Err(format!("function key {other} is not an atom")),
                };
                self.expect(":>")?;
                entries.insert(key, self.value()?);
                if self.eat(")") {
                    break;
                }
                self.expect("@@")?;
            }
            return Ok(Value::Map(entries));
        }
        if self.eat("[") {
            let mut entries = BTreeMap::new();
            loop {
                let key = self.word().ok_or("expected record field")?;
                self.expect("|->")?;
                entries.insert(atom(&key), self.value()?);
                if self.eat("]") {
                    break;
                }
                self.expect(",")?;
            }
            return Ok(Value::Map(entries));
        }
        if self.eat("\"") {
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos] != b'"' {
                self.pos += 1;
            }
            if self.pos == self.s.len() {
                return Err("unterminated string".into());
            }
            let text = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
            self.pos += 1;
            return Ok(Value::atom(&text));
        }
        let negative = self.eat("-");
        let w = self
            .word()
            .ok_or_else(|| format!("unexpected input at offset {}", self.pos))?;
        if let Ok(n) = w.parse::<i64>() {
            return Ok(Value::Int(if negative { -n } else { n }));
        }
        if negative {
            return Err("`-` before a non-number".into());
        }
        Ok(match w.as_str() {
            "TRUE" => Value::Bool(true),
            "FALSE" => Value::Bool(false),
            _ => Value::atom(&w),
        })
    }
}

/// Parses one TLC-printed value.
pub fn parse_value(text: &str) -> Result<Value, String> {
    let mut p = ValueParser {
        s: text.as_bytes(),
        pos: 0,
    };
    let v = p.value()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(format!("trailing input at offset {}", p.pos));
    }
    Ok(v)
}

fn state_values(c: &Compiled, s: &TlcState) -> Result<Vec<Value>, TlaError> {
    c.model
        .state_vars
        .iter()
        .map(|decl| {
            s.assignments
                .iter()
                .find(|(n, _)| *n == decl.name)
                .map(|(_, v)| coerce(v, &decl.sort))
                .ok_or_else(|| {
                    TlaError::Trace(format!("state {} does not assign `{}`", s.number, decl.name))
                })
        })
        .collect()
}

/// Rebuilds a checker counterexample from a parsed TLC trace. Action
/// parameters are not printed by TLC; they are recovered by finding the
/// binding whose successor matches the next recorded state.
pub fn to_counterexample(
    model: &ProtocolModel,
    log: &TlcLogParse,
    bounds: &Bounds,
) -> Result<Counterexample, TlaError> {
    let property = log
        .violated
        .clone()
        .ok_or_else(|| TlaError::Trace("log reports no violation".into()))?;
    let c = Compiled::new(model, bounds).map_err(TlaError::Bounds)?;
    let first = log
        .trace
        .first()
        .ok_or_else(|| TlaError::Trace("empty trace".into()))?;
    let mut state = state_values(&c, first)?;
    let initial = c.named(&state);
    let mut steps = Vec::new();
    for s in &log.trace[1..] {
        let name = s.action.as_deref().unwrap_or_default();
        let ai = c
            .action_index(name)
            .ok_or_else(|| TlaError::Trace(format!("unknown action `{name}`")))?;
        let next = state_values(&c, s)?;
        let action = &c.actions[ai];
        let mut found = None;
        for binding in &action.bindings {
            if c.fire(ai, binding, &state).map_err(TlaError::Bounds)?.as_ref() == Some(&next) {
                found = Some(binding.clone());
                break;
            }
        }
        let binding = found.ok_or_else(|| {
            TlaError::Trace(format!("no binding of `{name}` produces state {}", s.number))
        })?;
        steps.push(TraceStep {
            action: name.to_string(),
            params: action
                .transition
                .params
                .iter()
                .zip(binding)
                .map(|(p, a)| (p.name.clone(), a))
                .collect(),
            state: c.named(&next),
        });
        state = next;
    }
    Ok(Counterexample {
        model: model.name.clone(),
        property,
        depth: steps.len(),
        initial,
        steps,
    })
}

/// The checker result a TLC log corresponds to.
pub fn to_check_result(
    model: &ProtocolModel,
    log: &TlcLogParse,
    bounds: &Bounds,
) -> Result<CheckResult, TlaError> {
    let states_explored = log.distinct_states as usize;
    Ok(match log.violated {
        None => CheckResult::Pass { states_explored },
        Some(_) => CheckResult::Fail {
            cx: to_counterexample(model, log, bounds)?,
            states_explored,
        },
    })
}

fn tlc_value(v: &Value, model_values: &BTreeSet<String>) -> String {
    match v {
        Value::Bool(b) => if *b { "TRUE" } else { "FALSE" }.to_string(),
        Value::Int(n) => n.to_string(),
        Value::Atom(a) if model_values.contains(&**a) => a.to_string(),
        Value::Atom(a) => format!("\"{a}\""),
        Value::Set(items) => {
            let items: Vec<String> = items.iter().map(|i| tlc_value(i, model_values)).collect();
            format!("{{{}}}", items.join(", "))
        }
        Value::Map(entries) if entries.is_empty() => "<<>>".to_string(),
        Value::Map(entries) => {
            let items: Vec<String> = entries
                .iter()
                .map(|(k, v)| format!("{} :> {}", tlc_value(&Value::Atom(k.clone()), model_values), tlc_value(v, model_values)))
                .collect();
            format!("({})", items.join(" @@ "))
        }
    }
}

fn write_state(out: &mut String, state: &StateVector, model_values: &BTreeSet<String>) {
    for (name, v) in &state.0 {
        out.push_str(&format!("/\\ {name} = {}\n", tlc_value(v, model_values)));
    }
    out.push('\n');
}

// Line span of an action definition in emitted module text.
fn action_span(module: &str, action: &str) -> (usize, usize, usize) {
    let lines: Vec<&str> = module.lines().collect();
    let start = lines
        .iter()
        .position(|l| {
            l.strip_prefix(action)
                .is_some_and(|rest| rest.starts_with('(') || rest.starts_with(" =="))
        })
        .unwrap_or(0);
    let end = (start..lines.len())
        .find(|&i| lines.get(i + 1).is_none_or(|l| l.trim().is_empty()))
        .unwrap_or(start);
    (start + 1, end + 1, lines[end].len())
}

/// Renders a checker result in TLC's textual dialect. Used to build the
/// stored fixture logs; the first line marks the log as synthesized.
pub fn render_tlc_log(
    model: &ProtocolModel,
    property: &str,
    result: &CheckResult,
    bounds: &Bounds,
) -> Result<String, TlaError> {
    let bounded = bounds.apply(model).map_err(TlaError::Bounds)?;
    let module = emit_module(&bounded)?;
    let name = module_name(&bounded);
    let model_values: BTreeSet<String> = bounded
        .constants
        .iter()
        .flat_map(|d| d.atoms.iter().map(|a| a.to_string()))
        .collect();
    let mut out = String::new();
    out.push_str("Synthesized by agentconform from the built-in checker in TLC output format.\n");
    out.push_str(&format!("Parsing file {name}.tla\n"));
    out.push_str(&format!("Semantic processing of module {name}\n"));
    out.push_str("Starting...\nComputing initial states...\n");
    out.push_str("Finished computing initial states: 1 distinct state generated.\n");
    let explored = result.states_explored();
    match result {
        CheckResult::Pass { .. } => {
            out.push_str("Model checking completed. No error has been found.\n");
        }
        CheckResult::Fail { cx, .. } => {
            out.push_str(&format!("Error: Invariant {property} is violated.\n"));
            out.push_str("Error: The behavior up to this point is:\n");
            out.push_str("State 1: <Initial predicate>\n");
            write_state(&mut out, &cx.initial, &model_values);
            for (i, step) in cx.steps.iter().enumerate() {
                let (l1, l2, col) = action_span(&module, &step.action);
                out.push_str(&format!(
                    "State {}: <{} line {l1}, col 1 to line {l2}, col {col} of module {name}>\n",
                    i + 2,
                    step.action
                ));
                write_state(&mut out, &step.state, &model_values);
            }
        }
        CheckResult::BoundExhausted { .. } => {
            return Err(TlaError::Trace(
                "a bound-exhausted result has no TLC counterpart".into(),
            ))
        }
    }
    out.push_str(&format!(
        "{explored} states generated, {explored} distinct states found, 0 states left on queue.\n"
    ));
    out.push_str("Finished in 00s\n");
    Ok(out)
}
