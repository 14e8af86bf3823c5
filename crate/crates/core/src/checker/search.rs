use std::collections::HashMap;
use std::sync::Arc;

use super::compile::Compiled;
use super::{Bounds, CheckError, CheckResult, Counterexample, TraceStep};
use crate::expr::Expr;
use crate::ir::Property;
use crate::value::Value;

/// Frontier states expanded at once.
const CHUNK: usize = 4096;

struct Succ {
    key: Vec<u8>,
    action: u32,
    binding: u32,
    violated: bool,
}

enum Outcome {
    Complete,
    Violated(usize),
    Exhausted,
}

struct Search {
    /// Encoded states; the same buffers key the dedup table.
    states: Vec<Arc<[u8]>>,
    /// (parent, action, binding) for every non-initial state.
    parent: Vec<Option<(usize, u32, u32)>>,
    outcome: Outcome,
}

fn encode(state: &[Value]) -> Vec<u8> {
    let mut out = Vec::new();
    for v in state {
        v.encode_into(&mut out);
    }
    out
}

fn decode(bytes: &[u8]) -> Vec<Value> {
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < bytes.len() {
        out.push(Value::decode_from(bytes, &mut pos).expect("state encoding is well-formed"));
    }
    out
}

impl Compiled {
    fn successors(&self, state: &[Value], invariant: Option<&Expr>) -> Result<Vec<Succ>, CheckError> {
        let mut out = Vec::new();
        for (ai, action) in self.actions.iter().enumerate() {
            for (bi, binding) in action.bindings.iter().enumerate() {
                if let Some(next) = self.fire(ai, binding, state)? {
                    let violated = match invariant {
                        Some(inv) => !self.holds(inv, &next)?,
                        None => false,
                    };
                    out.push(Succ {
                        key: encode(&next),
                        action: ai as u32,
                        binding: bi as u32,
                        violated,
                    });
                }
            }
        }
        Ok(out)
    }

    fn expand(
        &self,
        frontier: &[usize],
        states: &[Arc<[u8]>],
        invariant: Option<&Expr>,
        workers: usize,
    ) -> Result<Vec<Vec<Succ>>, CheckError> {
        #[cfg(feature = "parallel")]
        if workers != 1 && frontier.len() > 1 {
            use rayon::prelude::*;
            let run = || {
                // Collect every result first so the reported error is the
                // first in frontier order, as in the sequential path.
                frontier
                    .par_iter()
                    .map(|&i| self.successors(&decode(&states[i]), invariant))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .collect::<Result<Vec<_>, _>>()
            };
            return if workers == 0 {
                run()
            } else {
                match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                    Ok(pool) => pool.install(run),
                    Err(_) => run(),
                }
            };
        }
        let _ = workers;
        frontier
            .iter()
            .map(|&i| self.successors(&decode(&states[i]), invariant))
            .collect()
    }

    // Level-synchronous BFS. Successor lists are merged in frontier order, so
    // the first violation met is at minimal depth and the result does not
    // depend on how the frontier was expanded.
    fn search(&self, invariant: Option<&Expr>, bounds: &Bounds) -> Result<Search, CheckError> {
        let init: Arc<[u8]> = encode(&self.init).into();
        let mut seen: HashMap<Arc<[u8]>, usize> = HashMap::new();
        seen.insert(init.clone(), 0);
        let mut s = Search {
            states: vec![init],
            parent: vec![None],
            outcome: Outcome::Complete,
        };
        if let Some(inv) = invariant {
            if !self.holds(inv, &self.init)? {
                s.outcome = Outcome::Violated(0);
                return Ok(s);
            }
        }
        let mut frontier = vec![0usize];
        let mut depth = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            // Chunks keep memory proportional to the state cap rather than to
            // the width of a level; merge order is unchanged.
            for chunk in frontier.chunks(CHUNK) {
                let expanded = self.expand(chunk, &s.states, invariant, bounds.workers)?;
                for (&parent, succs) in chunk.iter().zip(expanded) {
                    for succ in succs {
                        if seen.contains_key(succ.key.as_slice()) {
                            continue;
                        }
                        if depth + 1 > bounds.max_depth || s.states.len() >= bounds.max_states {
                            s.outcome = Outcome::Exhausted;
                            return Ok(s);
                        }
                        let idx = s.states.len();
                        let key: Arc<[u8]> = succ.key.into();
                        seen.insert(key.clone(), idx);
                        s.states.push(key);
                        s.parent.push(Some((parent, succ.action, succ.binding)));
                        if succ.violated {
                            s.outcome = Outcome::Violated(idx);
                            return Ok(s);
                        }
                        next.push(idx);
                    }
                }
            }
            frontier = next;
            depth += 1;
        }
        Ok(s)
    }

    pub(crate) fn check(&self, property: &Property, bounds: &Bounds) -> Result<CheckResult, CheckError> {
        let s = self.search(Some(&property.invariant), bounds)?;
        let states_explored = s.states.len();
        Ok(match s.outcome {
            Outcome::Complete => CheckResult::Pass { states_explored },
            Outcome::Exhausted => CheckResult::BoundExhausted { states_explored },
            Outcome::Violated(idx) => CheckResult::Fail {
                cx: self.trace(&s, idx, &property.id),
                states_explored,
            },
        })
    }

    pub(crate) fn enumerate(&self, bounds: &Bounds) -> Result<usize, CheckError> {
        let s = self.search(None, bounds)?;
        match s.outcome {
            Outcome::Exhausted => Err(CheckError::Overflow {
                states: s.states.len(),
            }),
            _ => Ok(s.states.len()),
        }
    }

    fn trace(&self, s: &Search, mut idx: usize, property: &str) -> Counterexample {
        let mut steps = Vec::new();
        while let Some((parent, ai, bi)) = s.parent[idx] {
            let action = &self.actions[ai as usize];
            let binding = &action.bindings[bi as usize];
            steps.push(TraceStep {
                action: action.transition.id.clone(),
                params: action
                    .transition
                    .params
                    .iter()
                    .zip(binding)
                    .map(|(p, a)| (p.name.clone(), a.clone()))
                    .collect(),
                state: self.named(&decode(&s.states[idx])),
            });
            idx = parent;
        }
        steps.reverse();
        Counterexample {
            model: self.model.name.clone(),
            property: property.to_string(),
            depth: steps.len(),
            initial: self.named(&self.init),
            steps,
        }
    }
}
