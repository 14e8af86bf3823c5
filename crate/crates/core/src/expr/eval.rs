use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Expr, Quantifier, RelOp, SetOp};
use crate::value::{atom, Atom, Value};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type error: {0}")]
    Type(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("index `{key}` is outside the key domain of the map")]
    KeyOutsideDomain { key: String },
}

/// Symbol resolution for evaluation.
pub trait Env {
    fn var(&self, name: &str) -> Option<&Value>;
    fn domain(&self, name: &str) -> Option<&[Atom]>;
    /// Resolves an identifier that is neither a variable nor a domain.
    fn atom(&self, name: &str) -> Option<Atom>;
}

/// Simple owned environment.
///
/// With `known_atoms` unset, every otherwise-unresolved identifier is read as
/// an atom literal; with it set, only listed atoms resolve and anything else is
/// an unbound symbol.
#[derive(Clone, Debug, Default)]
pub struct MapEnv {
    pub state: BTreeMap<String, Value>,
    pub constants: BTreeMap<String, Vec<Atom>>,
    pub known_atoms: Option<BTreeSet<Atom>>,
}

impl Env for MapEnv {
    fn var(&self, name: &str) -> Option<&Value> {
        self.state.get(name)
    }

    fn domain(&self, name: &str) -> Option<&[Atom]> {
        self.constants.get(name).map(Vec::as_slice)
    }

    fn atom(&self, name: &str) -> Option<Atom> {
        match &self.known_atoms {
            None => Some(atom(name)),
            Some(known) => known.get(name).cloned(),
        }
    }
}

/// Evaluates a boolean expression against a state and constant domains.
pub fn evaluate(
    expr: &Expr,
    state: &BTreeMap<String, Value>,
    constants: &BTreeMap<String, Vec<Atom>>,
) -> Result<bool, EvalError> {
    let env = MapEnv {
        state: state.clone(),
        constants: constants.clone(),
        known_atoms: None,
    };
    Evaluator::new(&env).eval_bool(expr)
}

/// Evaluates any expression to a value.
pub fn evaluate_value(expr: &Expr, env: &impl Env) -> Result<Value, EvalError> {
    Evaluator::new(env).eval(expr)
}

/// Evaluator with a stack of quantifier and parameter bindings.
pub struct Evaluator<'a, E: Env + ?Sized> {
    env: &'a E,
    bound: Vec<(String, Value)>,
}

impl<'a, E: Env + ?Sized> Evaluator<'a, E> {
    pub fn new(env: &'a E) -> Self {
        Evaluator {
            env,
            bound: Vec::new(),
        }
    }

    /// Binds `name` for subsequent evaluations (transition parameters).
    pub fn bind(&mut self, name: &str, value: Value) {
        self.bound.push((name.to_string(), value));
    }

    pub fn eval_bool(&mut self, e: &Expr) -> Result<bool, EvalError> {
        match self.eval_cow(e)?.as_ref() {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::Type(format!(
                "expected Bool, found {} in `{e}`",
                other.kind()
            ))),
        }
    }

    fn lookup(&self, name: &str) -> Result<Cow<'a, Value>, EvalError> {
        if let Some((_, v)) = self.bound.iter().rev().find(|(n, _)| n == name) {
            return Ok(Cow::Owned(v.clone()));
        }
        let env: &'a E = self.env;
        if let Some(v) = env.var(name) {
            return Ok(Cow::Borrowed(v));
        }
        if let Some(dom) = env.domain(name) {
            return Ok(Cow::Owned(Value::Set(
                dom.iter().cloned().map(Value::Atom).collect(),
            )));
        }
        env.atom(name)
            .map(|a| Cow::Owned(Value::Atom(a)))
            .ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        self.eval_cow(e).map(Cow::into_owned)
    }

    fn eval_cow(&mut self, e: &Expr) -> Result<Cow<'a, Value>, EvalError> {
        if let Expr::Ident(name) = e {
            return self.lookup(name);
        }
        if let Expr::Index(base, idx) = e {
            let base = self.eval_cow(base)?;
            let key = self.eval(idx)?;
            return Ok(match base {
                Cow::Borrowed(b) => Cow::Borrowed(index(b, &key)?),
                Cow::Owned(b) => Cow::Owned(index(&b, &key)?.clone()),
            });
        }
        Ok(Cow::Owned(match e {
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Int(n) => Value::Int(*n),
            Expr::Ident(_) | Expr::Index(..) => unreachable!(),
            Expr::SetLit(items) => Value::Set(
                items
                    .iter()
                    .map(|i| self.eval(i))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Add(base, n) => match self.eval(base)? {
                Value::Int(i) => Value::Int(
                    i.checked_add(*n)
                        .ok_or_else(|| EvalError::Type("integer overflow".into()))?,
                ),
                other => {
                    return Err(EvalError::Type(format!(
                        "`+` needs Int, found {}",
                        other.kind()
                    )))
                }
            },
            Expr::SetOp(op, l, r) => {
                let (l, r) = (self.eval(l)?, self.eval(r)?);
                match (l, r) {
                    (Value::Set(a), Value::Set(b)) => Value::Set(match op {
                        SetOp::Union => a.union(&b).cloned().collect(),
                        SetOp::Minus => a.difference(&b).cloned().collect(),
                    }),
                    (a, b) => {
                        return Err(EvalError::Type(format!(
                            "`{}` needs two Sets, found {} and {}",
                            op.keyword(),
                            a.kind(),
                            b.kind()
                        )))
                    }
                }
            }
            Expr::Compare(op, l, r) => {
                let (l, r) = (self.eval_cow(l)?, self.eval_cow(r)?);
                Value::Bool(compare(*op, &l, &r)?)
            }
            Expr::Not(inner) => Value::Bool(!self.eval_bool(inner)?),
            Expr::And(l, r) => Value::Bool(self.eval_bool(l)? && self.eval_bool(r)?),
            Expr::Or(l, r) => Value::Bool(self.eval_bool(l)? || self.eval_bool(r)?),
            Expr::Implies(l, r) => Value::Bool(!self.eval_bool(l)? || self.eval_bool(r)?),
            Expr::Quant(q, var, dom, body) => {
                let env: &'a E = self.env;
                let atoms = env
                    .domain(dom)
                    .ok_or_else(|| EvalError::UnknownDomain(dom.clone()))?;
                let mut result = matches!(q, Quantifier::Forall);
                for a in atoms {
                    self.bound.push((var.clone(), Value::Atom(a.clone())));
                    let holds = self.eval_bool(body);
                    self.bound.pop();
                    let holds = holds?;
                    match q {
                        Quantifier::Forall if !holds => {
                            result = false;
                            break;
                        }
                        Quantifier::Exists if holds => {
                            result = true;
                            break;
                        }
                        _ => {}
                    }
                }
                Value::Bool(result)
            }
        }))
    }
}

pub(crate) fn index<'v>(base: &'v Value, key: &Value) -> Result<&'v Value, EvalError> {
    match (base, key) {
        (Value::Map(entries), Value::Atom(k)) => {
            entries
                .get(k)
                .ok_or_else(|| EvalError::KeyOutsideDomain { key: k.to_string() })
        }
        (Value::Map(_), other) => Err(EvalError::Type(format!(
            "map index must be an Atom, found {}",
            other.kind()
        ))),
        (other, _) => Err(EvalError::Type(format!(
            "cannot index into {}",
            other.kind()
        ))),
    }
}

fn compare(op: RelOp, l: &Value, r: &Value) -> Result<bool, EvalError> {
    let mismatch = || {
        EvalError::Type(format!(
            "`{}` between {} and {}",
            op.symbol(),
            l.kind(),
            r.kind()
        ))
    };
    match op {
        RelOp::Eq | RelOp::Ne => {
            if !l.same_kind(r) {
                return Err(mismatch());
            }
            Ok((l == r) == (op == RelOp::Eq))
        }
        RelOp::Lt | RelOp::Le | RelOp::Gt | RelOp::Ge => match (l, r) {
            (Value::Int(a), Value::Int(b)) => Ok(match op {
                RelOp::Lt => a < b,
                RelOp::Le => a <= b,
                RelOp::Gt => a > b,
                _ => a >= b,
            }),
            _ => Err(mismatch()),
        },
        RelOp::In | RelOp::NotIn => match r {
            Value::Set(items) => Ok(items.contains(l) == (op == RelOp::In)),
            _ => Err(mismatch()),
        },
        RelOp::SubsetEq => match (l, r) {
            (Value::Set(a), Value::Set(b)) => Ok(a.is_subset(b)),
            _ => Err(mismatch()),
        },
    }
}
