//! Conformance checking for AI agent protocols: a typed protocol IR, an
//! explicit-state model checker, TLA+ emission, trace replay against mock
//! implementations and triaged conformance reports.

pub mod aasm;
pub mod checker;
pub mod composer;
pub mod expr;
pub mod ir;
pub mod models;
pub mod replay;
pub mod report;
pub mod tla;
pub mod value;
