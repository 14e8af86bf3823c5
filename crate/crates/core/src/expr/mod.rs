//! Guard and invariant expressions over finite domains.
//!
//! The surface syntax is a small first-order language: quantifiers over
//! constant domains, implication, boolean connectives, comparisons, set
//! membership and inclusion, map indexing, set literals and `+ INT` on
//! counters. Terms additionally support `union` and `minus` so that
//! transition updates can grow and shrink sets.

mod eval;
mod lexer;
mod parser;
mod print;

use std::collections::BTreeSet;
use std::fmt;

pub use lexer::is_keyword;
pub use eval::{evaluate, evaluate_value, Env, EvalError, Evaluator, MapEnv};
pub use parser::{parse, parse_term, ParseError};
pub use print::print;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    SubsetEq,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Ne => "#",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::In => "in",
            RelOp::NotIn => "notin",
            RelOp::SubsetEq => "subseteq",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetOp {
    Union,
    Minus,
}

impl SetOp {
    pub fn keyword(self) -> &'static str {
        match self {
            SetOp::Union => "union",
            SetOp::Minus => "minus",
        }
    }
}

/// Expression AST. Boolean formulas and terms share one type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    /// Variable, bound variable, constant domain, or atom literal; which one
    /// is decided at evaluation time.
    Ident(String),
    SetLit(Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, i64),
    SetOp(SetOp, Box<Expr>, Box<Expr>),
    Compare(RelOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Quant(Quantifier, String, String, Box<Expr>),
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    pub fn and(self, rhs: Expr) -> Expr {
        Expr::And(Box::new(self), Box::new(rhs))
    }

    /// Conjunction of all `parts`, `true` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Expr>) -> Expr {
        parts
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or(Expr::Bool(true))
    }

    /// Identifiers that are not bound by an enclosing quantifier.
    ///
    /// Quantifier domains are constant names and are not included; atom
    /// literals are syntactically identifiers and are.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Bool(_) | Expr::Int(_) => {}
            Expr::Ident(name) => {
                if !bound.contains(&name.as_str()) {
                    out.insert(name.clone());
                }
            }
            Expr::SetLit(items) => items.iter().for_each(|e| e.collect_free(bound, out)),
            Expr::Add(e, _) | Expr::Not(e) => e.collect_free(bound, out),
            Expr::Index(a, b)
            | Expr::SetOp(_, a, b)
            | Expr::Compare(_, a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Expr::Quant(_, var, _, body) => {
                bound.push(var);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Constant domain names used by quantifiers.
    pub fn quantified_domains(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Quant(_, _, dom, _) = e {
                out.insert(dom.clone());
            }
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Ident(_) => {}
            Expr::SetLit(items) => items.iter().for_each(|e| e.walk(f)),
            Expr::Add(e, _) | Expr::Not(e) | Expr::Quant(_, _, _, e) => e.walk(f),
            Expr::Index(a, b)
            | Expr::SetOp(_, a, b)
            | Expr::Compare(_, a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::Implies(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// Renames free identifiers and quantifier domains through `f`.
    /// Bound variables shadow renaming inside their quantifier body.
    pub fn rename(&self, f: &impl Fn(&str) -> Option<String>) -> Expr {
        let mut bound = Vec::new();
        self.rename_inner(f, &mut bound)
    }

    fn rename_inner(&self, f: &impl Fn(&str) -> Option<String>, bound: &mut Vec<String>) -> Expr {
        let go = |e: &Expr, bound: &mut Vec<String>| Box::new(e.rename_inner(f, bound));
        match self {
            Expr::Bool(_) | Expr::Int(_) => self.clone(),
            Expr::Ident(name) => {
                if bound.contains(name) {
                    self.clone()
                } else {
                    Expr::Ident(f(name).unwrap_or_else(|| name.clone()))
                }
            }
            Expr::SetLit(items) => {
                Expr::SetLit(items.iter().map(|e| e.rename_inner(f, bound)).collect())
            }
            Expr::Index(a, b) => Expr::Index(go(a, bound), go(b, bound)),
            Expr::Add(e, n) => Expr::Add(go(e, bound), *n),
            Expr::SetOp(op, a, b) => Expr::SetOp(*op, go(a, bound), go(b, bound)),
            Expr::Compare(op, a, b) => Expr::Compare(*op, go(a, bound), go(b, bound)),
            Expr::Not(e) => Expr::Not(go(e, bound)),
            Expr::And(a, b) => Expr::And(go(a, bound), go(b, bound)),
            Expr::Or(a, b) => Expr::Or(go(a, bound), go(b, bound)),
            Expr::Implies(a, b) => Expr::Implies(go(a, bound), go(b, bound)),
            Expr::Quant(q, var, dom, body) => {
                let dom = f(dom).unwrap_or_else(|| dom.clone());
                bound.push(var.clone());
                let body = body.rename_inner(f, bound);
                bound.pop();
                Expr::Quant(*q, var.clone(), dom, Box::new(body))
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

#[cfg(test)]
mod tests;
