use std::collections::{BTreeSet, HashMap};

use super::{Bounds, CheckError, StateVector};
use crate::expr::{Env, EvalError, Evaluator};
use crate::ir::{ProtocolModel, Sort, Transition};
use crate::value::{Atom, Value};

pub(crate) struct Action {
    pub transition: Transition,
    /// Parameter bindings in sorted order.
    pub bindings: Vec<Vec<Atom>>,
}

/// A bounded model prepared for exploration.
pub struct Compiled {
    pub model: ProtocolModel,
    index: HashMap<String, usize>,
    atoms: BTreeSet<Atom>,
    pub(crate) actions: Vec<Action>,
    pub(crate) init: Vec<Value>,
}

pub(crate) struct StateEnv<'a> {
    c: &'a Compiled,
    state: &'a [Value],
}

impl Env for StateEnv<'_> {
    fn var(&self, name: &str) -> Option<&Value> {
        self.c.index.get(name).map(|&i| &self.state[i])
    }

    fn domain(&self, name: &str) -> Option<&[Atom]> {
        self.c.model.domain(name)
    }

    fn atom(&self, name: &str) -> Option<Atom> {
        self.c.atoms.get(name).cloned()
    }
}

fn cartesian(domains: &[&[Atom]]) -> Vec<Vec<Atom>> {
    let mut out = vec![Vec::new()];
    for dom in domains {
        let mut sorted = dom.to_vec();
        sorted.sort();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                sorted.iter().map(move |a| {
                    let mut next = prefix.clone();
                    next.push(a.clone());
                    next
                })
            })
            .collect();
    }
    out
}

impl Compiled {
    pub fn new(model: &ProtocolModel, bounds: &Bounds) -> Result<Self, CheckError> {
        let model = bounds.apply(model)?;
        let index = model
            .state_vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        let init = model
            .state_vars
            .iter()
            .map(|v| {
                model
                    .initial_value(v)
                    .map_err(|e| CheckError::Bounds(format!("initial value of `{}`: {e}", v.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut transitions = model.transitions.clone();
        transitions.sort_by(|a, b| a.id.cmp(&b.id));
        let actions = transitions
            .into_iter()
            .map(|t| {
                let doms = t
                    .params
                    .iter()
                    .map(|p| {
                        model.domain(&p.domain).ok_or_else(|| CheckError::Eval {
                            context: format!("transition {}", t.id),
                            source: EvalError::UnknownDomain(p.domain.clone()),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Action {
                    bindings: cartesian(&doms),
                    transition: t,
                })
            })
            .collect::<Result<Vec<_>, CheckError>>()?;
        Ok(Compiled {
            atoms: model.atoms(),
            model,
            index,
            actions,
            init,
        })
    }

    pub(crate) fn env<'a>(&'a self, state: &'a [Value]) -> StateEnv<'a> {
        StateEnv { c: self, state }
    }

    pub fn initial_state(&self) -> StateVector {
        self.named(&self.init)
    }

    pub(crate) fn named(&self, state: &[Value]) -> StateVector {
        StateVector(
            self.model
                .state_vars
                .iter()
                .zip(state)
                .map(|(d, v)| (d.name.clone(), v.clone()))
                .collect(),
        )
    }

    pub(crate) fn action_index(&self, id: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.transition.id == id)
    }

    pub(crate) fn holds(&self, invariant: &crate::expr::Expr, state: &[Value]) -> Result<bool, CheckError> {
        let env = self.env(state);
        Evaluator::new(&env)
            .eval_bool(invariant)
            .map_err(|source| CheckError::Eval {
                context: "invariant".into(),
                source,
            })
    }

    /// Successor of `state` under action `ai` with binding `binding`, or
    /// `None` when the guard fails or a counter would exceed its cap.
    pub(crate) fn fire(
        &self,
        ai: usize,
        binding: &[Atom],
        state: &[Value],
    ) -> Result<Option<Vec<Value>>, CheckError> {
        let t = &self.actions[ai].transition;
        let ctx = |source| CheckError::Eval {
            context: format!("transition {}", t.id),
            source,
        };
        let env = self.env(state);
        let mut ev = Evaluator::new(&env);
        for (p, a) in t.params.iter().zip(binding) {
            ev.bind(&p.name, Value::Atom(a.clone()));
        }
        if !ev.eval_bool(&t.guard).map_err(ctx)? {
            return Ok(None);
        }
        let mut writes = Vec::with_capacity(t.updates.len());
        for u in &t.updates {
            let vi = *self
                .index
                .get(&u.var)
                .ok_or_else(|| ctx(EvalError::Unbound(u.var.clone())))?;
            let mut keys = Vec::with_capacity(u.path.len());
            let mut sort = &self.model.state_vars[vi].sort;
            for idx in &u.path {
                match ev.eval(idx).map_err(ctx)? {
                    Value::Atom(a) => keys.push(a),
                    other => {
                        return Err(ctx(EvalError::Type(format!(
                            "map index must be an Atom, found {}",
                            other.kind()
                        ))))
                    }
                }
                sort = match sort {
                    Sort::Map(_, inner) => inner,
                    other => {
                        return Err(ctx(EvalError::Type(format!("cannot index into {other}"))))
                    }
                };
            }
            let value = ev.eval(&u.value).map_err(ctx)?;
            if let (Sort::Counter(max), Value::Int(n)) = (sort, &value) {
                if n > max || *n < 0 {
                    return Ok(None);
                }
            }
            self.model
                .check_sort(&value, sort)
                .map_err(|e| ctx(EvalError::Type(e)))?;
            writes.push((vi, keys, value));
        }
        let mut next = state.to_vec();
        for (vi, keys, value) in writes {
            let mut slot = &mut next[vi];
            for k in &keys {
                slot = match slot {
                    Value::Map(entries) => entries
                        .get_mut(k)
                        .ok_or_else(|| ctx(EvalError::KeyOutsideDomain { key: k.to_string() }))?,
                    other => {
                        return Err(ctx(EvalError::Type(format!(
                            "cannot index into {}",
                            other.kind()
                        ))))
                    }
                };
            }
            *slot = value;
        }
        Ok(Some(next))
    }
}
