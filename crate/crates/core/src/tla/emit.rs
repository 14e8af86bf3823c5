use std::collections::{BTreeMap, BTreeSet};

use super::TlaError;
use crate::checker::Bounds;
use crate::expr::{Expr, Quantifier, RelOp, SetOp};
use crate::ir::{ProtocolModel, Sort, Transition, TransitionKind, Update};
use crate::value::Value;

/// Emitted module plus one TLC configuration per property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TlaArtifact {
    pub module_name: String,
    pub module_text: String,
    pub config_texts: BTreeMap<String, String>,
}

impl TlaArtifact {
    /// `(file name, contents)` pairs: `<module>.tla` and `<module>.<property>.cfg`.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut out = vec![(format!("{}.tla", self.module_name), self.module_text.clone())];
        for (prop, text) in &self.config_texts {
            out.push((format!("{}.{prop}.cfg", self.module_name), text.clone()));
        }
        out
    }
}

const RESERVED: &[&str] = &[
    "ASSUME", "ASSUMPTION", "AXIOM", "CASE", "CHOOSE", "CONSTANT", "CONSTANTS", "DOMAIN",
    "ELSE", "ENABLED", "EXCEPT", "EXTENDS", "IF", "IN", "INSTANCE", "LET", "LOCAL", "MODULE",
    "OTHER", "SF_", "SUBSET", "THEN", "THEOREM", "UNCHANGED", "UNION", "VARIABLE", "VARIABLES",
    "WF_", "WITH", "TRUE", "FALSE", "BOOLEAN", "STRING", "Nat", "Int", "Init", "Next", "Spec",
    "vars",
];

/// TLA+ module name for a model: non-identifier characters become `_`.
pub fn module_name(model: &ProtocolModel) -> String {
    let mut s: String = model
        .name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if !s.chars().any(|c| c.is_ascii_alphabetic()) {
        s.insert_str(0, "M_");
    }
    s
}

struct Names {
    vars: BTreeSet<String>,
    domains: BTreeSet<String>,
    model_values: BTreeSet<String>,
}

impl Names {
    fn new(model: &ProtocolModel) -> Self {
        Names {
            vars: model.state_vars.iter().map(|v| v.name.clone()).collect(),
            domains: model.constants.iter().map(|d| d.name.clone()).collect(),
            model_values: model
                .constants
                .iter()
                .flat_map(|d| d.atoms.iter().map(|a| a.to_string()))
                .collect(),
        }
    }

    // Mirrors the evaluator's lookup order: bound, variable, domain, atom.
    fn ident(&self, name: &str, bound: &[String]) -> String {
        if bound.iter().any(|b| b == name)
            || self.vars.contains(name)
            || self.domains.contains(name)
            || self.model_values.contains(name)
        {
            name.to_string()
        } else {
            format!("\"{name}\"")
        }
    }

    fn atom(&self, a: &str) -> String {
        if self.model_values.contains(a) {
            a.to_string()
        } else {
            format!("\"{a}\"")
        }
    }
}

const QUANT: u8 = 0;
const IMPL: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const CMP: u8 = 5;
const TERM: u8 = 6;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Quant(..) => QUANT,
        Expr::Implies(..) => IMPL,
        Expr::Or(..) => OR,
        Expr::And(..) => AND,
        Expr::Not(..) => NOT,
        Expr::Compare(..) => CMP,
        _ => TERM,
    }
}

fn rel(op: RelOp) -> &'static str {
    match op {
        RelOp::Eq => "=",
        RelOp::Ne => "#",
        RelOp::Lt => "<",
        RelOp::Le => "<=",
        RelOp::Gt => ">",
        RelOp::Ge => ">=",
        RelOp::In => "\\in",
        RelOp::NotIn => "\\notin",
        RelOp::SubsetEq => "\\subseteq",
    }
}

struct Printer<'a> {
    names: &'a Names,
    bound: Vec<String>,
}

impl Printer<'_> {
    fn inline(&mut self, e: &Expr, ctx: u8) -> String {
        if level(e) < ctx {
            return format!("({})", self.inline(e, QUANT));
        }
        match e {
            Expr::Quant(q, var, dom, body) => {
                let head = quant_head(*q, var, dom);
                self.bound.push(var.clone());
                let body = self.inline(body, QUANT);
                self.bound.pop();
                format!("{head} {body}")
            }
            Expr::Implies(l, r) => {
                let l = self.implies_lhs(l);
                let r = self.implies_rhs(r);
                format!("{l} => {r}")
            }
            Expr::Or(l, r) => format!("{} \\/ {}", self.operand(l, OR), self.operand(r, OR)),
            Expr::And(l, r) => format!("{} /\\ {}", self.operand(l, AND), self.operand(r, AND)),
            Expr::Not(inner) => format!("~{}", self.inline(inner, TERM)),
            Expr::Compare(op, l, r) => {
                format!("{} {} {}", self.term(l), rel(*op), self.term(r))
            }
            _ => self.term(e),
        }
    }

    // Binary connective operand; quantifiers are always parenthesized since
    // they extend as far right as possible.
    fn operand(&mut self, e: &Expr, ctx: u8) -> String {
        if matches!(e, Expr::Quant(..)) {
            format!("({})", self.inline(e, QUANT))
        } else {
            self.inline(e, ctx)
        }
    }

    fn implies_lhs(&mut self, e: &Expr) -> String {
        if level(e) == TERM {
            self.term(e)
        } else {
            format!("({})", self.inline(e, QUANT))
        }
    }

    fn implies_rhs(&mut self, e: &Expr) -> String {
        if matches!(e, Expr::Quant(..)) {
            self.inline(e, QUANT)
        } else {
            self.inline(e, OR)
        }
    }

    fn term(&mut self, e: &Expr) -> String {
        match e {
            Expr::Bool(b) => if *b { "TRUE" } else { "FALSE" }.to_string(),
            Expr::Int(n) => n.to_string(),
            Expr::Ident(name) => self.names.ident(name, &self.bound),
            Expr::SetLit(items) => {
                let items: Vec<String> = items.iter().map(|i| self.term(i)).collect();
                format!("{{{}}}", items.join(", "))
            }
            Expr::Index(base, idx) => format!("{}[{}]", self.term(base), self.term(idx)),
            Expr::Add(base, n) => {
                let base = self.arith_operand(base);
                if *n < 0 {
                    format!("{base} - {}", n.unsigned_abs())
                } else {
                    format!("{base} + {n}")
                }
            }
            Expr::SetOp(op, l, r) => {
                let sym = match op {
                    SetOp::Union => "\\cup",
                    SetOp::Minus => "\\",
                };
                format!("{} {sym} {}", self.arith_operand(l), self.arith_operand(r))
            }
            other => format!("({})", self.inline(other, QUANT)),
        }
    }

    fn arith_operand(&mut self, e: &Expr) -> String {
        match e {
            Expr::Add(..) | Expr::SetOp(..) => format!("({})", self.term(e)),
            _ => self.term(e),
        }
    }

    /// Multi-line layout: each quantifier and implication opens a new,
    /// further indented line.
    fn layout(&mut self, e: &Expr, indent: usize, out: &mut Vec<String>) {
        let pad = " ".repeat(indent);
        match e {
            Expr::Quant(q, var, dom, body) => {
                out.push(format!("{pad}{}", quant_head(*q, var, dom)));
                self.bound.push(var.clone());
                self.layout(body, indent + 2, out);
                self.bound.pop();
            }
            Expr::Implies(l, r) => {
                let l = self.implies_lhs(l);
                out.push(format!("{pad}{l} =>"));
                if matches!(**r, Expr::Quant(..) | Expr::Implies(..)) {
                    if matches!(**r, Expr::Implies(..)) {
                        let r = self.inline(r, OR);
                        out.push(format!("{pad}  {r}"));
                    } else {
                        self.layout(r, indent + 2, out);
                    }
                } else {
                    let r = self.inline(r, OR);
                    out.push(format!("{pad}  {r}"));
                }
            }
            _ => {
                let s = self.inline(e, QUANT);
                out.push(format!("{pad}{s}"));
            }
        }
    }
}

fn quant_head(q: Quantifier, var: &str, dom: &str) -> String {
    let sym = match q {
        Quantifier::Forall => "\\A",
        Quantifier::Exists => "\\E",
    };
    format!("{sym} {var} \\in {dom} :")
}

fn conjuncts(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::And(l, r) => {
            conjuncts(l, out);
            conjuncts(r, out);
        }
        Expr::Bool(true) => {}
        other => out.push(other.clone()),
    }
}

fn value(v: &Value, sort: &Sort, names: &Names, depth: usize) -> String {
    match (v, sort) {
        (Value::Bool(b), _) => if *b { "TRUE" } else { "FALSE" }.to_string(),
        (Value::Int(n), _) => n.to_string(),
        (Value::Atom(a), _) => names.atom(a),
        (Value::Set(items), _) => {
            let items: Vec<String> = items
                .iter()
                .map(|i| value(i, &Sort::Bool, names, depth))
                .collect();
            format!("{{{}}}", items.join(", "))
        }
        (Value::Map(entries), Sort::Map(dom, inner)) => {
            let var = format!("key_{depth}");
            let mut distinct = entries.values().collect::<Vec<_>>();
            distinct.dedup();
            match distinct.as_slice() {
                [] => format!("[{var} \\in {{}} |-> FALSE]"),
                [only] => format!(
                    "[{var} \\in {dom} |-> {}]",
                    value(only, inner, names, depth + 1)
                ),
                _ => {
                    let arms: Vec<String> = entries
                        .iter()
                        .map(|(k, v)| {
                            format!("{var} = {} -> {}", names.atom(k), value(v, inner, names, depth + 1))
                        })
                        .collect();
                    format!("[{var} \\in {dom} |-> CASE {}]", arms.join(" [] "))
                }
            }
        }
        (Value::Map(_), _) => unreachable!("map value outside a map sort"),
    }
}

fn check_names(model: &ProtocolModel) -> Result<(), TlaError> {
    let names = model
        .state_vars
        .iter()
        .map(|v| &v.name)
        .chain(model.transitions.iter().map(|t| &t.id))
        .chain(model.properties.iter().map(|p| &p.id))
        .chain(model.constants.iter().map(|d| &d.name))
        .chain(model.transitions.iter().flat_map(|t| t.params.iter().map(|p| &p.name)));
    for n in names {
        if RESERVED.contains(&n.as_str()) {
            return Err(TlaError::ReservedName(n.clone()));
        }
    }
    Ok(())
}

fn leaf_sort<'a>(model: &'a ProtocolModel, u: &Update) -> Option<&'a Sort> {
    let mut sort = &model.var(&u.var)?.sort;
    for _ in &u.path {
        sort = match sort {
            Sort::Map(_, inner) => inner,
            _ => return None,
        };
    }
    Some(sort)
}

fn emit_action(t: &Transition, model: &ProtocolModel, names: &Names, out: &mut String) {
    if let Some(tag) = t.adversary {
        out.push_str(&format!("\\* {}\n", tag.as_str()));
    }
    let params: Vec<&str> = t.params.iter().map(|p| p.name.as_str()).collect();
    if params.is_empty() {
        out.push_str(&format!("{} ==\n", t.id));
    } else {
        out.push_str(&format!("{}({}) ==\n", t.id, params.join(", ")));
    }
    let mut p = Printer {
        names,
        bound: params.iter().map(|s| s.to_string()).collect(),
    };
    let mut lines = Vec::new();
    let mut guard = Vec::new();
    conjuncts(&t.guard, &mut guard);
    for g in &guard {
        lines.push(p.inline(g, QUANT));
    }
    for u in &t.updates {
        if let Some(Sort::Counter(max)) = leaf_sort(model, u) {
            lines.push(format!("{} \\in 0..{max}", p.inline(&u.value, CMP + 1)));
        }
    }
    let mut touched: Vec<&str> = Vec::new();
    for u in &t.updates {
        if !touched.contains(&u.var.as_str()) {
            touched.push(&u.var);
        }
    }
    for var in &touched {
        let ups: Vec<&Update> = t.updates.iter().filter(|u| u.var == *var).collect();
        let rhs = if let [whole] = ups.as_slice() {
            if whole.path.is_empty() {
                Some(p.inline(&whole.value, QUANT))
            } else {
                None
            }
        } else {
            None
        };
        let rhs = rhs.unwrap_or_else(|| {
            let clauses: Vec<String> = ups
                .iter()
                .map(|u| {
                    let path: String = u.path.iter().map(|i| format!("[{}]", p.term(i))).collect();
                    format!("!{path} = {}", p.inline(&u.value, QUANT))
                })
                .collect();
            format!("[{var} EXCEPT {}]", clauses.join(", "))
        });
        lines.push(format!("{var}' = {rhs}"));
    }
    let untouched: Vec<&str> = model
        .state_vars
        .iter()
        .map(|v| v.name.as_str())
        .filter(|v| !touched.contains(v))
        .collect();
    match untouched.as_slice() {
        [] => {}
        [one] => lines.push(format!("UNCHANGED {one}")),
        many => lines.push(format!("UNCHANGED <<{}>>", many.join(", "))),
    }
    for l in lines {
        out.push_str(&format!("  /\\ {l}\n"));
    }
    out.push('\n');
}

/// Emits the model as a TLA+ module. The model is emitted as given; apply
/// bounds first (or use [`emit`]) to fix domain sizes and counter caps.
pub fn emit_module(model: &ProtocolModel) -> Result<String, TlaError> {
    check_names(model)?;
    let names = Names::new(model);
    let mut out = String::new();
    let name = module_name(model);
    out.push_str(&format!("---- MODULE {name} ----\n"));
    out.push_str(&format!("\\* protocol {} snapshot {}\n", model.name, model.snapshot));
    out.push_str("EXTENDS Naturals\n\n");

    if !model.constants.is_empty() {
        let mut consts: Vec<String> = Vec::new();
        for d in &model.constants {
            consts.push(d.name.clone());
            consts.extend(d.atoms.iter().map(|a| a.to_string()));
        }
        out.push_str(&format!("CONSTANTS {}\n\n", consts.join(", ")));
    }

    let var_names: Vec<&str> = model.state_vars.iter().map(|v| v.name.as_str()).collect();
    if !var_names.is_empty() {
        out.push_str(&format!("VARIABLES {}\n\n", var_names.join(", ")));
    }
    out.push_str(&format!("vars == <<{}>>\n\n", var_names.join(", ")));

    out.push_str("Init ==\n");
    if model.state_vars.is_empty() {
        out.push_str("  TRUE\n");
    }
    for v in &model.state_vars {
        let init = model
            .initial_value(v)
            .map_err(|e| TlaError::Model(format!("initial value of `{}`: {e}", v.name)))?;
        out.push_str(&format!("  /\\ {} = {}\n", v.name, value(&init, &v.sort, &names, 0)));
    }
    out.push('\n');

    for kind in TransitionKind::ALL {
        let group: Vec<&Transition> = model.transitions.iter().filter(|t| t.kind == kind).collect();
        if group.is_empty() {
            continue;
        }
        out.push_str(&format!("\\* ---- {} actions ----\n\n", kind.as_str()));
        for t in group {
            emit_action(t, model, &names, &mut out);
        }
    }

    out.push_str("Next ==\n");
    if model.transitions.is_empty() {
        out.push_str("  UNCHANGED vars\n");
    }
    for kind in TransitionKind::ALL {
        for t in model.transitions.iter().filter(|t| t.kind == kind) {
            if t.params.is_empty() {
                out.push_str(&format!("  \\/ {}\n", t.id));
            } else {
                let binders: Vec<String> = t
                    .params
                    .iter()
                    .map(|p| format!("{} \\in {}", p.name, p.domain))
                    .collect();
                let args: Vec<&str> = t.params.iter().map(|p| p.name.as_str()).collect();
                out.push_str(&format!(
                    "  \\/ \\E {} : {}({})\n",
                    binders.join(", "),
                    t.id,
                    args.join(", ")
                ));
            }
        }
    }
    out.push_str("\nSpec == Init /\\ [][Next]_vars\n\n");

    for prop in &model.properties {
        out.push_str(&format!(
            "\\* {} {}\n{} ==\n",
            prop.principle.as_str(),
            prop.class.as_str(),
            prop.id
        ));
        let mut p = Printer {
            names: &names,
            bound: Vec::new(),
        };
        let mut lines = Vec::new();
        p.layout(&prop.invariant, 2, &mut lines);
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str("====\n");
    Ok(out)
}

/// TLC configuration checking exactly one invariant of `model`.
pub fn emit_config(model: &ProtocolModel, property: &str) -> Result<String, TlaError> {
    if model.property(property).is_none() {
        return Err(TlaError::UnknownProperty(property.to_string()));
    }
    let mut out = format!("\\* {} / {property}\nSPECIFICATION Spec\n", module_name(model));
    for d in &model.constants {
        let atoms: Vec<&str> = d.atoms.iter().map(|a| &**a).collect();
        out.push_str(&format!("CONSTANT {} = {{{}}}\n", d.name, atoms.join(", ")));
    }
    for d in &model.constants {
        for a in &d.atoms {
            out.push_str(&format!("CONSTANT {a} = {a}\n"));
        }
    }
    out.push_str(&format!("INVARIANT {property}\nCHECK_DEADLOCK FALSE\n"));
    Ok(out)
}

/// Applies `bounds` and emits the module with every per-property configuration.
pub fn emit(model: &ProtocolModel, bounds: &Bounds) -> Result<TlaArtifact, TlaError> {
    let bounded = bounds.apply(model).map_err(TlaError::Bounds)?;
    let module_text = emit_module(&bounded)?;
    let config_texts = bounded
        .properties
        .iter()
        .map(|p| emit_config(&bounded, &p.id).map(|c| (p.id.clone(), c)))
        .collect::<Result<_, _>>()?;
    Ok(TlaArtifact {
        module_name: module_name(&bounded),
        module_text,
        config_texts,
    })
}

/// Renders an expression in TLA+ syntax against `model`'s names.
pub fn expr_to_tla(model: &ProtocolModel, e: &Expr) -> String {
    let names = Names::new(model);
    Printer {
        names: &names,
        bound: Vec::new(),
    }
    .inline(e, QUANT)
}
