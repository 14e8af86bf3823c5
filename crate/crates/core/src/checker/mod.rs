//! Bounded breadth-first explicit-state model checking.

mod bounds;
mod compile;
mod reduce;
mod search;
mod trace;

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::EvalError;
use crate::ir::{ProtocolModel, Property};
use crate::value::{Atom, Value};

pub use bounds::Bounds;
pub use compile::Compiled;
pub use reduce::{check_reduced, cone_of_influence, influencing_vars};
pub use trace::{validate_trace, validate_trace_for};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("{context}: {source}")]
    Eval { context: String, source: EvalError },
    #[error("bounds: {0}")]
    Bounds(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("state space exceeds bounds after {states} states")]
    Overflow { states: usize },
    #[error("malformed counterexample: {0}")]
    Malformed(String),
}

/// Assignment of every state variable, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateVector(pub Vec<(String, Value)>);

impl StateVector {
    pub fn get(&self, var: &str) -> Option<&Value> {
        self.0.iter().find(|(n, _)| n == var).map(|(_, v)| v)
    }

    pub fn values(&self) -> Vec<Value> {
        self.0.iter().map(|(_, v)| v.clone()).collect()
    }

    /// Canonical sort-tagged encoding.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (_, v) in &self.0 {
            v.encode_into(&mut out);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub action: String,
    pub params: Vec<(String, Atom)>,
    pub state: StateVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub model: String,
    pub property: String,
    pub depth: usize,
    pub initial: StateVector,
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    BoundExhausted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::BoundExhausted => "BOUND_EXHAUSTED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Pass { states_explored: usize },
    Fail { cx: Counterexample, states_explored: usize },
    BoundExhausted { states_explored: usize },
}

impl CheckResult {
    pub fn verdict(&self) -> Verdict {
        match self {
            CheckResult::Pass { .. } => Verdict::Pass,
            CheckResult::Fail { .. } => Verdict::Fail,
            CheckResult::BoundExhausted { .. } => Verdict::BoundExhausted,
        }
    }

    pub fn states_explored(&self) -> usize {
        match self {
            CheckResult::Pass { states_explored }
            | CheckResult::Fail { states_explored, .. }
            | CheckResult::BoundExhausted { states_explored } => *states_explored,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            CheckResult::Fail { cx, .. } => Some(cx),
            _ => None,
        }
    }
}

/// Checks one invariant. `property` need not be listed in the model.
pub fn check(
    model: &ProtocolModel,
    property: &Property,
    bounds: &Bounds,
) -> Result<CheckResult, CheckError> {
    let compiled = Compiled::new(model, bounds)?;
    compiled.check(property, bounds)
}

/// Independent check per property; one failure never aborts the batch.
pub fn check_all(
    model: &ProtocolModel,
    properties: &[Property],
    bounds: &Bounds,
) -> BTreeMap<String, Result<CheckResult, CheckError>> {
    let compiled = Compiled::new(model, bounds);
    properties
        .iter()
        .map(|p| {
            let r = match &compiled {
                Ok(c) => c.check(p, bounds),
                Err(e) => Err(e.clone()),
            };
            (p.id.clone(), r)
        })
        .collect()
}

/// Exact number of distinct reachable states within `bounds`.
pub fn enumerate_states(model: &ProtocolModel, bounds: &Bounds) -> Result<usize, CheckError> {
    Compiled::new(model, bounds)?.enumerate(bounds)
}
