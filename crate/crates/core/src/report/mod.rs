//! Triage of model and replay results, the conformance matrix and its
//! rendering.

mod matrix;
mod render;

#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::checker::Verdict;
use crate::ir::PropertyClass;
use crate::replay::Outcome;

pub use matrix::{
    build_matrix, bundled_matrix, collect_results, collect_results_for, CellResult, CompositionRow, ConformanceMatrix,
    MatrixCell, Results, Totals,
};
pub use render::{render, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TriageVerdict {
    SpecFail,
    ImplFail,
    BothFail,
    ModelFail,
    AmbiguityFail,
    Pass,
}

impl TriageVerdict {
    pub const ALL: [TriageVerdict; 6] = [
        TriageVerdict::SpecFail,
        TriageVerdict::ImplFail,
        TriageVerdict::BothFail,
        TriageVerdict::ModelFail,
        TriageVerdict::AmbiguityFail,
        TriageVerdict::Pass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TriageVerdict::SpecFail => "spec-fail",
            TriageVerdict::ImplFail => "impl-fail",
            TriageVerdict::BothFail => "both-fail",
            TriageVerdict::ModelFail => "model-fail",
            TriageVerdict::AmbiguityFail => "ambiguity-fail",
            TriageVerdict::Pass => "pass",
        }
    }

    /// Findings that originate in the specification itself.
    pub fn is_spec_level(self) -> bool {
        matches!(
            self,
            TriageVerdict::SpecFail | TriageVerdict::BothFail | TriageVerdict::AmbiguityFail
        )
    }
}

/// Replay result as seen by triage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReplayVerdict {
    Violated,
    Upheld,
    NotRun,
}

impl ReplayVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ReplayVerdict::Violated => "VIOLATED",
            ReplayVerdict::Upheld => "UPHELD",
            ReplayVerdict::NotRun => "NOT_RUN",
        }
    }
}

impl From<Option<Outcome>> for ReplayVerdict {
    fn from(o: Option<Outcome>) -> Self {
        match o {
            Some(Outcome::Violated) => ReplayVerdict::Violated,
            Some(Outcome::Upheld) => ReplayVerdict::Upheld,
            None => ReplayVerdict::NotRun,
        }
    }
}

/// Per-cell annotations supplied alongside the results.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Annotations {
    /// The model itself is known to be wrong for this cell.
    pub model_fail: bool,
    /// Ambiguity-flagged clauses the property cites.
    pub ambiguous_clauses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TriageError {
    #[error("annotation conflict: manual model-fail flag on a passing spec-mandated property that was never replayed")]
    AnnotationConflict,
}

/// Classifies one cell. Rules apply in order; the first match wins.
///
/// 1. manual model-fail flag: model-fail
/// 2. FAIL citing an ambiguous clause: ambiguity-fail
/// 3. PASS, VIOLATED: impl-fail
/// 4. FAIL, not VIOLATED: spec-fail
/// 5. FAIL, VIOLATED: both-fail
/// 6. PASS, not VIOLATED: pass
///
/// A model run that exhausted its bounds has no verdict and counts as
/// model-fail.
pub fn triage(
    model: Verdict,
    replay: ReplayVerdict,
    class: PropertyClass,
    annotations: &Annotations,
) -> Result<TriageVerdict, TriageError> {
    use TriageVerdict::*;
    if annotations.model_fail
        && model == Verdict::Pass
        && class == PropertyClass::SpecMandated
        && replay == ReplayVerdict::NotRun
    {
        return Err(TriageError::AnnotationConflict);
    }
    if annotations.model_fail || model == Verdict::BoundExhausted {
        return Ok(ModelFail);
    }
    let failed = model == Verdict::Fail;
    let violated = replay == ReplayVerdict::Violated;
    Ok(match (failed, violated) {
        (true, _) if !annotations.ambiguous_clauses.is_empty() => AmbiguityFail,
        (false, true) => ImplFail,
        (true, false) => SpecFail,
        (true, true) => BothFail,
        (false, false) => Pass,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("incomplete matrix, missing: {}", .0.iter().map(|(p, q)| format!("{p}/{q}")).collect::<Vec<_>>().join(", "))]
    Incomplete(Vec<(String, String)>),
    #[error("duplicate cell {0}/{1}")]
    Duplicate(String, String),
    #[error(transparent)]
    Triage(#[from] TriageError),
}
