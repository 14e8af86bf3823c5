//! Two-protocol composition through a bridge, and the Composition Safety
//! invariants checked on the result.

mod patterns;

#[cfg(test)]
mod tests;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::expr::{self, Expr};
use crate::ir::{
    Domain, Init, Param, Principle, PropertyClass, ProtocolModel, Property, Sort, Source,
    StateVarDecl, Transition, TransitionKind, Update,
};
use crate::value::{atom, Atom, Value};

pub use patterns::{builtin_compositions, composition, cs_properties, Composition};

/// Bridge variables, declared once in every composed model.
pub const BRIDGE_VARS: [&str; 4] = [
    "bridge_compromised",
    "credential_forwarded",
    "bridge_op_count",
    "bridge_audited_count",
];

/// Cap of the bridge operation counters.
pub const BRIDGE_COUNTER_MAX: i64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn prefix(self) -> &'static str {
        match self {
            Side::A => "A_",
            Side::B => "B_",
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// One route through the bridge: when `source` fires on one side, the bridge
/// injects `target` on the other side in the same step.
///
/// Expressions and updates are written over composed (prefixed) symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingRule {
    pub name: String,
    pub source_side: Side,
    pub source: String,
    pub target: String,
    /// Replaces the target guard: the bridge reaches the target through its
    /// own entry point rather than the client-facing one.
    pub target_guard: Option<Expr>,
    /// Marks the routed content as tainted. A tainted route compromises the
    /// bridge.
    pub taint: Option<Expr>,
    /// Replaces the target guard on tainted routes.
    pub tainted_guard: Option<Expr>,
    /// Extra or overriding updates on tainted routes.
    pub tainted_updates: Vec<Update>,
    pub forwards_credentials: bool,
    /// Side whose audit log records the route, if any.
    pub audited_by: Option<Side>,
}

impl RoutingRule {
    pub fn new(name: &str, source_side: Side, source: &str, target: &str) -> Self {
        RoutingRule {
            name: name.to_string(),
            source_side,
            source: source.to_string(),
            target: target.to_string(),
            target_guard: None,
            taint: None,
            tainted_guard: None,
            tainted_updates: Vec::new(),
            forwards_credentials: false,
            audited_by: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BridgeSpec {
    pub name: String,
    pub rules: Vec<RoutingRule>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComposedModel {
    pub model: ProtocolModel,
    pub a: String,
    pub b: String,
    pub bridge: BridgeSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("cannot compose `{0}` with itself")]
    SameModel(String),
    #[error("routing rule `{rule}`: no transition `{transition}` in `{model}`")]
    DanglingRule {
        rule: String,
        model: String,
        transition: String,
    },
    #[error("symbol `{0}` declared twice after prefixing")]
    Collision(String),
    #[error("unknown composition pattern `{0}`")]
    UnknownPattern(String),
    #[error(transparent)]
    Model(#[from] crate::models::ModelsError),
    #[error("composed model `{model}` is invalid: {detail}")]
    Invalid { model: String, detail: String },
}

/// Prefixes every variable, domain, domain atom and parameter of one model.
struct Prefixer {
    prefix: &'static str,
    names: BTreeSet<String>,
}

impl Prefixer {
    fn new(model: &ProtocolModel, side: Side) -> Self {
        let mut names: BTreeSet<String> = model.state_vars.iter().map(|v| v.name.clone()).collect();
        for d in &model.constants {
            names.insert(d.name.clone());
            names.extend(d.atoms.iter().map(|a| a.to_string()));
        }
        for t in &model.transitions {
            names.extend(t.params.iter().map(|p| p.name.clone()));
        }
        Prefixer {
            prefix: side.prefix(),
            names,
        }
    }

    fn name(&self, s: &str) -> String {
        if self.names.contains(s) {
            format!("{}{s}", self.prefix)
        } else {
            s.to_string()
        }
    }

    fn atom(&self, a: &Atom) -> Atom {
        atom(&self.name(a))
    }

    fn expr(&self, e: &Expr) -> Expr {
        e.rename(&|s| self.names.contains(s).then(|| self.name(s)))
    }

    fn value(&self, v: &Value) -> Value {
        match v {
            Value::Atom(a) => Value::Atom(self.atom(a)),
            Value::Set(items) => Value::Set(items.iter().map(|x| self.value(x)).collect()),
            Value::Map(entries) => Value::Map(
                entries
                    .iter()
                    .map(|(k, x)| (self.atom(k), self.value(x)))
                    .collect(),
            ),
            other => other.clone(),
        }
    }

    fn sort(&self, s: &Sort) -> Sort {
        match s {
            Sort::Enum(vals) => Sort::Enum(vals.iter().map(|a| self.atom(a)).collect()),
            Sort::Set(d) => Sort::Set(self.name(d)),
            Sort::Map(d, inner) => Sort::Map(self.name(d), Box::new(self.sort(inner))),
            other => other.clone(),
        }
    }

    fn update(&self, u: &Update) -> Update {
        Update {
            var: self.name(&u.var),
            path: u.path.iter().map(|e| self.expr(e)).collect(),
            value: self.expr(&u.value),
        }
    }

    fn transition(&self, t: &Transition) -> Transition {
        Transition {
            id: format!("{}{}", self.prefix, t.id),
            params: t
                .params
                .iter()
                .map(|p| Param {
                    name: self.name(&p.name),
                    domain: self.name(&p.domain),
                })
                .collect(),
            guard: self.expr(&t.guard),
            updates: t.updates.iter().map(|u| self.update(u)).collect(),
            ..t.clone()
        }
    }

    fn property(&self, p: &Property) -> Property {
        Property {
            id: format!("{}{}", self.prefix, p.id),
            invariant: self.expr(&p.invariant),
            ..p.clone()
        }
    }
}

fn bridge_vars() -> Vec<StateVarDecl> {
    let b = |name: &str| StateVarDecl {
        name: name.to_string(),
        sort: Sort::Bool,
        init: Init::Exact(Value::Bool(false)),
    };
    let c = |name: &str| StateVarDecl {
        name: name.to_string(),
        sort: Sort::Counter(BRIDGE_COUNTER_MAX),
        init: Init::Exact(Value::Int(0)),
    };
    vec![
        b(BRIDGE_VARS[0]),
        b(BRIDGE_VARS[1]),
        c(BRIDGE_VARS[2]),
        c(BRIDGE_VARS[3]),
    ]
}

fn set_true(var: &str) -> Update {
    Update {
        var: var.to_string(),
        path: Vec::new(),
        value: Expr::Bool(true),
    }
}

fn increment(var: &str) -> Update {
    Update {
        var: var.to_string(),
        path: Vec::new(),
        value: Expr::Add(Box::new(Expr::ident(var)), 1),
    }
}

/// Later updates replace earlier ones to the same target.
fn merge(updates: impl IntoIterator<Item = Update>) -> Vec<Update> {
    let mut out: Vec<Update> = Vec::new();
    for u in updates {
        match out.iter_mut().find(|o| o.var == u.var && o.path == u.path) {
            Some(slot) => *slot = u,
            None => out.push(u),
        }
    }
    out
}

fn bridge_transitions(
    rule: &RoutingRule,
    src: &Transition,
    tgt: &Transition,
    model: &ProtocolModel,
) -> Vec<Transition> {
    let mut params = src.params.clone();
    params.extend(tgt.params.iter().cloned());
    let target_guard = rule.target_guard.clone().unwrap_or_else(|| tgt.guard.clone());
    let mut base = vec![increment("bridge_op_count")];
    if rule.forwards_credentials {
        base.push(set_true("credential_forwarded"));
    }
    if let Some(side) = rule.audited_by {
        base.push(increment("bridge_audited_count"));
        let log = format!("{}audit_count", side.prefix());
        if model.var(&log).is_some() {
            base.push(increment(&log));
        }
    }
    let routed = |guard: Expr, extra: Vec<Update>| {
        let updates = merge(
            src.updates
                .iter()
                .chain(&tgt.updates)
                .cloned()
                .chain(extra)
                .chain(base.iter().cloned()),
        );
        (guard, updates)
    };
    let make = |id: String, (guard, updates): (Expr, Vec<Update>)| Transition {
        id,
        kind: TransitionKind::Environment,
        actor: "bridge".to_string(),
        params: params.clone(),
        guard,
        updates,
        modality: None,
        adversary: None,
        sources: vec![Source::Invented],
    };
    let id = format!("BR_{}", rule.name);
    match &rule.taint {
        None => vec![make(id, routed(src.guard.clone().and(target_guard), Vec::new()))],
        Some(taint) => {
            let clean = src
                .guard
                .clone()
                .and(target_guard.clone())
                .and(Expr::Not(Box::new(taint.clone())));
            let tainted_guard = src
                .guard
                .clone()
                .and(rule.tainted_guard.clone().unwrap_or(target_guard))
                .and(taint.clone());
            let mut extra = rule.tainted_updates.clone();
            extra.push(set_true("bridge_compromised"));
            vec![
                make(id.clone(), routed(clean, Vec::new())),
                make(format!("{id}_tainted"), routed(tainted_guard, extra)),
            ]
        }
    }
}

/// Disjoint union of `a` and `b` (prefixed `A_`, `B_`) plus the bridge
/// variables and one or two bridge transitions per routing rule.
///
/// Per-model properties are carried over on their prefixed symbols.
pub fn compose(
    a: &ProtocolModel,
    b: &ProtocolModel,
    bridge: &BridgeSpec,
) -> Result<ComposedModel, ComposeError> {
    if a.name == b.name {
        return Err(ComposeError::SameModel(a.name.clone()));
    }
    let pa = Prefixer::new(a, Side::A);
    let pb = Prefixer::new(b, Side::B);
    let mut model = ProtocolModel {
        name: format!("{}+{}", a.name, b.name),
        snapshot: format!("{}+{}", a.snapshot, b.snapshot),
        constants: Vec::new(),
        state_vars: Vec::new(),
        transitions: Vec::new(),
        properties: Vec::new(),
    };
    for (m, p) in [(a, &pa), (b, &pb)] {
        model.constants.extend(m.constants.iter().map(|d| Domain {
            name: p.name(&d.name),
            atoms: d.atoms.iter().map(|x| p.atom(x)).collect(),
        }));
        model.state_vars.extend(m.state_vars.iter().map(|v| StateVarDecl {
            name: p.name(&v.name),
            sort: p.sort(&v.sort),
            init: match &v.init {
                Init::All(x) => Init::All(p.value(x)),
                Init::Exact(x) => Init::Exact(p.value(x)),
            },
        }));
        model.transitions.extend(m.transitions.iter().map(|t| p.transition(t)));
        model.properties.extend(m.properties.iter().map(|x| p.property(x)));
    }
    model.state_vars.extend(bridge_vars());

    let mut seen = BTreeSet::new();
    let symbols = model
        .constants
        .iter()
        .map(|d| &d.name)
        .chain(model.state_vars.iter().map(|v| &v.name))
        .chain(model.transitions.iter().map(|t| &t.id));
    for s in symbols {
        if !seen.insert(s.clone()) {
            return Err(ComposeError::Collision(s.clone()));
        }
    }

    let lookup = |side: Side, id: &str, rule: &str| {
        let m = if side == Side::A { a } else { b };
        let found = m.transition(id).ok_or_else(|| ComposeError::DanglingRule {
            rule: rule.to_string(),
            model: m.name.clone(),
            transition: id.to_string(),
        })?;
        Ok::<_, ComposeError>(if side == Side::A {
            pa.transition(found)
        } else {
            pb.transition(found)
        })
    };
    let mut added = Vec::new();
    for rule in &bridge.rules {
        let src = lookup(rule.source_side, &rule.source, &rule.name)?;
        let tgt = lookup(rule.source_side.other(), &rule.target, &rule.name)?;
        added.extend(bridge_transitions(rule, &src, &tgt, &model));
    }
    for t in added {
        if !seen.insert(t.id.clone()) {
            return Err(ComposeError::Collision(t.id));
        }
        model.transitions.push(t);
    }

    let report = crate::ir::validate(&model);
    if !report.is_empty() {
        return Err(ComposeError::Invalid {
            model: model.name.clone(),
            detail: report.to_string(),
        });
    }
    Ok(ComposedModel {
        model,
        a: a.name.clone(),
        b: b.name.clone(),
        bridge: bridge.clone(),
    })
}

/// A Composition Safety property over composed symbols.
pub fn cs_property(id: &str, invariant: &str) -> Property {
    Property {
        id: id.to_string(),
        principle: Principle::CS,
        class: PropertyClass::AasmHardening,
        invariant: expr::parse(invariant).unwrap_or_else(|e| panic!("{id}: {e}")),
        sources: Vec::new(),
    }
}

/// Parses `target := value` over composed symbols.
pub fn parse_update(text: &str) -> Result<Update, String> {
    let (lhs, rhs) = text
        .split_once(":=")
        .ok_or_else(|| format!("`{text}` is not an update"))?;
    let value = expr::parse(rhs).map_err(|e| e.to_string())?;
    let mut target = expr::parse_term(lhs).map_err(|e| e.to_string())?;
    let mut path = Vec::new();
    loop {
        match target {
            Expr::Ident(var) => {
                path.reverse();
                return Ok(Update { var, path, value });
            }
            Expr::Index(base, idx) => {
                path.push(*idx);
                target = *base;
            }
            _ => return Err(format!("`{lhs}` is not an assignable target")),
        }
    }
}
