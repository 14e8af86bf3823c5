//! Cone-of-influence reduction for invariant checks on large models.
//!
//! The reduced model keeps only the variables that can affect the invariant
//! and the transitions that write them. Guards of kept transitions read only
//! kept variables, so its reachable states are exactly the projections of
//! the full model's, and every reduced trace replays step for step on the
//! full model. Counter writes count as reads: a capped counter can disable a
//! transition.

use std::collections::BTreeSet;

use super::compile::Compiled;
use super::{Bounds, CheckError, CheckResult, Counterexample, TraceStep};
use crate::expr::Expr;
use crate::ir::{ProtocolModel, Property, Sort, Transition};

fn reads(t: &Transition) -> BTreeSet<String> {
    let params: BTreeSet<&str> = t.params.iter().map(|p| p.name.as_str()).collect();
    let mut out = t.guard.free_symbols();
    for u in &t.updates {
        out.extend(u.value.free_symbols());
        for idx in &u.path {
            out.extend(idx.free_symbols());
        }
    }
    out.retain(|s| !params.contains(s.as_str()));
    out
}

/// Variables the invariant depends on, closed under transition influence.
pub fn influencing_vars(model: &ProtocolModel, invariant: &Expr) -> BTreeSet<String> {
    let is_var = |s: &String| model.var(s).is_some();
    let mut keep: BTreeSet<String> = invariant.free_symbols().into_iter().filter(is_var).collect();
    loop {
        let before = keep.len();
        for t in &model.transitions {
            if !t.updates.iter().any(|u| keep.contains(&u.var)) {
                continue;
            }
            keep.extend(reads(t).into_iter().filter(is_var));
            for u in &t.updates {
                if matches!(model.var(&u.var).map(|d| &d.sort), Some(s) if has_counter(s)) {
                    keep.insert(u.var.clone());
                }
            }
        }
        if keep.len() == before {
            return keep;
        }
    }
}

fn has_counter(s: &Sort) -> bool {
    match s {
        Sort::Counter(_) => true,
        Sort::Map(_, v) => has_counter(v),
        _ => false,
    }
}

/// The model restricted to the cone of influence of `invariant`.
pub fn cone_of_influence(model: &ProtocolModel, invariant: &Expr) -> ProtocolModel {
    let keep = influencing_vars(model, invariant);
    let mut out = model.clone();
    out.state_vars.retain(|v| keep.contains(&v.name));
    out.transitions.retain(|t| t.updates.iter().any(|u| keep.contains(&u.var)));
    for t in &mut out.transitions {
        t.updates.retain(|u| keep.contains(&u.var));
    }
    out
}

/// Checks `property` on the cone-of-influence reduction of `model` and
/// lifts any counterexample back onto the full model.
///
/// Verdicts and minimal depths equal those of a direct check; states
/// explored are counted on the reduced model.
pub fn check_reduced(
    model: &ProtocolModel,
    property: &Property,
    bounds: &Bounds,
) -> Result<CheckResult, CheckError> {
    let reduced = cone_of_influence(model, &property.invariant);
    let result = Compiled::new(&reduced, bounds)?.check(property, bounds)?;
    match result {
        CheckResult::Fail { cx, states_explored } => Ok(CheckResult::Fail {
            cx: lift(model, &cx, bounds)?,
            states_explored,
        }),
        other => Ok(other),
    }
}

fn lift(model: &ProtocolModel, cx: &Counterexample, bounds: &Bounds) -> Result<Counterexample, CheckError> {
    let c = Compiled::new(model, bounds)?;
    let mut state = c.init.clone();
    let mut steps = Vec::with_capacity(cx.steps.len());
    for step in &cx.steps {
        let ai = c
            .action_index(&step.action)
            .ok_or_else(|| CheckError::UnknownTransition(step.action.clone()))?;
        let binding: Vec<_> = step.params.iter().map(|(_, a)| a.clone()).collect();
        state = c.fire(ai, &binding, &state)?.ok_or_else(|| {
            CheckError::Malformed(format!("reduced step `{}` is disabled on the full model", step.action))
        })?;
        steps.push(TraceStep {
            action: step.action.clone(),
            params: step.params.clone(),
            state: c.named(&state),
        });
    }
    Ok(Counterexample {
        model: cx.model.clone(),
        property: cx.property.clone(),
        depth: steps.len(),
        initial: c.initial_state(),
        steps,
    })
}
