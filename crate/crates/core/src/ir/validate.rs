use std::collections::BTreeSet;
use std::fmt;

use super::*;
use crate::expr::Expr;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Finding {
    /// (a) an expression mentions a name that is not a variable, domain,
    /// parameter, bound variable or declared atom.
    UndeclaredSymbol { location: String, symbol: String },
    /// (b) an initial value does not inhabit the declared sort.
    InitSortMismatch { var: String, detail: String },
    /// (c) a Protocol-kind transition cites no source document.
    MissingProvenance { transition: String },
    /// (d) an Adversary transition carries no ADV tag.
    AdversaryWithoutTag { transition: String },
    AdversaryTagOnNonAdversary { transition: String },
    UnknownDomain { location: String, domain: String },
    UnknownUpdateTarget { transition: String, var: String },
    ConflictingUpdates { transition: String, target: String },
    DuplicateSymbol { symbol: String },
    ClassMismatch { property: String, expected: PropertyClass, found: PropertyClass },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::UndeclaredSymbol { location, symbol } => {
                write!(f, "{location}: undeclared symbol `{symbol}`")
            }
            Finding::InitSortMismatch { var, detail } => {
                write!(f, "var {var}: initial value mismatch: {detail}")
            }
            Finding::MissingProvenance { transition } => {
                write!(f, "transition {transition}: Protocol-kind transition without a source reference")
            }
            Finding::AdversaryWithoutTag { transition } => {
                write!(f, "transition {transition}: Adversary transition without an ADV tag")
            }
            Finding::AdversaryTagOnNonAdversary { transition } => {
                write!(f, "transition {transition}: ADV tag on a non-Adversary transition")
            }
            Finding::UnknownDomain { location, domain } => {
                write!(f, "{location}: unknown domain `{domain}`")
            }
            Finding::UnknownUpdateTarget { transition, var } => {
                write!(f, "transition {transition}: update of undeclared variable `{var}`")
            }
            Finding::ConflictingUpdates { transition, target } => {
                write!(f, "transition {transition}: `{target}` is updated more than once")
            }
            Finding::DuplicateSymbol { symbol } => {
                write!(f, "symbol `{symbol}` is declared more than once")
            }
            Finding::ClassMismatch { property, expected, found } => write!(
                f,
                "property {property}: class {found} but the taxonomy says {expected}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

struct Scope<'m> {
    model: &'m ProtocolModel,
    declared: BTreeSet<String>,
    out: Vec<Finding>,
}

impl Scope<'_> {
    fn expr(&mut self, location: &str, e: &Expr, params: &[Param]) {
        for sym in e.free_symbols() {
            if !self.declared.contains(&sym) && !params.iter().any(|p| p.name == sym) {
                self.out.push(Finding::UndeclaredSymbol {
                    location: location.to_string(),
                    symbol: sym,
                });
            }
        }
        for dom in e.quantified_domains() {
            self.domain(location, &dom);
        }
    }

    fn domain(&mut self, location: &str, dom: &str) {
        if self.model.domain(dom).is_none() {
            self.out.push(Finding::UnknownDomain {
                location: location.to_string(),
                domain: dom.to_string(),
            });
        }
    }
}

/// Structural and provenance checks; never fails, findings are sorted.
pub fn validate(model: &ProtocolModel) -> ValidationReport {
    let mut declared = BTreeSet::new();
    let mut scope_out = Vec::new();
    let names = model
        .state_vars
        .iter()
        .map(|v| v.name.clone())
        .chain(model.constants.iter().map(|d| d.name.clone()));
    for name in names {
        if !declared.insert(name.clone()) {
            scope_out.push(Finding::DuplicateSymbol { symbol: name });
        }
    }
    for a in model.atoms() {
        if declared.contains(a.as_ref()) {
            scope_out.push(Finding::DuplicateSymbol {
                symbol: a.to_string(),
            });
        }
    }
    declared.extend(model.atoms().iter().map(|a| a.to_string()));
    let mut scope = Scope {
        model,
        declared,
        out: scope_out,
    };

    for v in &model.state_vars {
        let location = format!("var {}", v.name);
        let mut sort_ok = true;
        for d in v.sort.domains() {
            if model.domain(d).is_none() {
                scope.domain(&location, d);
                sort_ok = false;
            }
        }
        if sort_ok {
            if let Err(detail) = model.initial_value(v) {
                scope.out.push(Finding::InitSortMismatch {
                    var: v.name.clone(),
                    detail,
                });
            }
        }
    }

    for t in &model.transitions {
        let location = format!("transition {}", t.id);
        for p in &t.params {
            scope.domain(&location, &p.domain);
        }
        scope.expr(&location, &t.guard, &t.params);
        let mut targets = BTreeSet::new();
        for u in &t.updates {
            if model.var(&u.var).is_none() {
                scope.out.push(Finding::UnknownUpdateTarget {
                    transition: t.id.clone(),
                    var: u.var.clone(),
                });
            }
            for idx in &u.path {
                scope.expr(&location, idx, &t.params);
            }
            scope.expr(&location, &u.value, &t.params);
            let target = super::serialize::update_target(u);
            // Overlap: one target is a prefix of another (x and x[k]).
            let clash = targets.iter().any(|other: &String| {
                other == &target
                    || target.starts_with(&format!("{other}["))
                    || other.starts_with(&format!("{target}["))
            });
            if clash {
                scope.out.push(Finding::ConflictingUpdates {
                    transition: t.id.clone(),
                    target: target.clone(),
                });
            }
            targets.insert(target);
        }
        let has_ref = t.sources.iter().any(|s| s.as_ref().is_some());
        if t.kind == TransitionKind::Protocol && !has_ref {
            scope.out.push(Finding::MissingProvenance {
                transition: t.id.clone(),
            });
        }
        match (t.kind, t.adversary) {
            (TransitionKind::Adversary, None) => scope.out.push(Finding::AdversaryWithoutTag {
                transition: t.id.clone(),
            }),
            (TransitionKind::Adversary, Some(_)) | (_, None) => {}
            (_, Some(_)) => scope.out.push(Finding::AdversaryTagOnNonAdversary {
                transition: t.id.clone(),
            }),
        }
    }

    for p in &model.properties {
        scope.expr(&format!("property {}", p.id), &p.invariant, &[]);
        if let Some(expected) = crate::aasm::expected_class(&model.name, p.principle) {
            if expected != p.class {
                scope.out.push(Finding::ClassMismatch {
                    property: p.id.clone(),
                    expected,
                    found: p.class,
                });
            }
        }
    }

    let mut findings = scope.out;
    findings.sort();
    findings.dedup();
    ValidationReport { findings }
}
