//! TLA+ module and TLC configuration emission, and TLC log parsing.

mod emit;
mod tlc;


use thiserror::Error;

use crate::checker::CheckError;

pub use emit::{emit, emit_config, emit_module, expr_to_tla, module_name, TlaArtifact};
pub use tlc::{
    parse_tlc_output, parse_value, render_tlc_log, to_check_result, to_counterexample,
    TlcLogParse, TlcState,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TlaError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("`{0}` is reserved in TLA+")]
    ReservedName(String),
    #[error("{0}")]
    Model(String),
    #[error(transparent)]
    Bounds(CheckError),
    #[error("line {line}: unrecognized TLC output: {message}")]
    Dialect { line: usize, message: String },
    #[error("trace: {0}")]
    Trace(String),
}
