//! Bundled protocol models, their clause sets and the APS layer-gap table.

use std::fmt;

use thiserror::Error;

use crate::aasm::{aps_layer, template, ApsLayer, RoleBinding};
use crate::checker::{check_all, Bounds, Verdict};
use crate::ir::{
    coverage, parse_clauses, parse_model, validate, NormativeClause, Principle, ProtocolModel,
};


/// Bundled model name, model text, clause text.
const ASSETS: [(&str, &str, &str); 5] = [
    (
        "mcp",
        include_str!("../models/mcp.ir"),
        include_str!("../clauses/mcp.clauses"),
    ),
    (
        "a2a",
        include_str!("../models/a2a.ir"),
        include_str!("../clauses/a2a.clauses"),
    ),
    (
        "anp",
        include_str!("../models/anp.ir"),
        include_str!("../clauses/anp.clauses"),
    ),
    (
        "acp-cap",
        include_str!("../models/acp-cap.ir"),
        include_str!("../clauses/acp-cap.clauses"),
    ),
    (
        "acp-client",
        include_str!("../models/acp-client.ir"),
        include_str!("../clauses/acp-client.clauses"),
    ),
];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelsError {
    #[error("unknown protocol `{0}` (bundled: {list})", list = names().join(", "))]
    Unknown(String),
}

/// Names of the bundled models in canonical order.
pub fn names() -> Vec<&'static str> {
    ASSETS.iter().map(|a| a.0).collect()
}

fn asset(name: &str) -> Result<&'static (&'static str, &'static str, &'static str), ModelsError> {
    ASSETS
        .iter()
        .find(|a| a.0 == name)
        .ok_or_else(|| ModelsError::Unknown(name.to_string()))
}

/// Bundled model text, as shipped.
pub fn source(name: &str) -> Result<&'static str, ModelsError> {
    asset(name).map(|a| a.1)
}

/// Bundled clause text, as shipped.
pub fn clause_source(name: &str) -> Result<&'static str, ModelsError> {
    asset(name).map(|a| a.2)
}

/// Parsed and validated bundled model.
pub fn builtin(name: &str) -> Result<ProtocolModel, ModelsError> {
    let src = source(name)?;
    let model = parse_model(src).unwrap_or_else(|e| panic!("bundled model {name}: {e}"));
    let report = validate(&model);
    assert!(report.is_empty(), "bundled model {name}: {report}");
    Ok(model)
}

/// Parsed clause set of a bundled protocol.
pub fn builtin_clauses(name: &str) -> Result<Vec<NormativeClause>, ModelsError> {
    let src = clause_source(name)?;
    Ok(parse_clauses(src).unwrap_or_else(|e| panic!("bundled clauses {name}: {e}")))
}

/// Role binding used to instantiate `principle` against a bundled model.
///
/// Roles not listed are bound to the symbol of the same name.
pub fn binding(name: &str, principle: Principle) -> RoleBinding {
    let pairs: &[(&str, &str)] = match (name, principle) {
        ("mcp", Principle::P2) => &[("Principals", "Tools"), ("capability_used", "executed")],
        ("mcp", Principle::P5) => &[("Ops", "Tools")],
        ("a2a" | "anp", Principle::P2) => &[("Principals", "AgentID")],
        ("a2a" | "anp", Principle::P5) => &[("Ops", "AgentID"), ("executed", "capability_used")],
        ("acp-cap", Principle::P2) => &[("Principals", "Ops"), ("capability_used", "executed")],
        ("acp-client", Principle::P2) => &[
            ("Principals", "Ops"),
            ("capability_used", "executed"),
            ("manifest_attested", "capabilities_verified"),
        ],
        _ => &[],
    };
    let mut b = RoleBinding::identity(template(principle));
    for (role, symbol) in pairs {
        b.roles.insert(role.to_string(), symbol.to_string());
    }
    b
}

/// Protocols covered by the APS table, in column order.
pub const APS_PROTOCOLS: [&str; 4] = ["mcp", "a2a", "anp", "acp-cap"];

/// Layers in row order.
pub const APS_LAYERS: [ApsLayer; 6] = [
    ApsLayer::L1,
    ApsLayer::L2,
    ApsLayer::L3,
    ApsLayer::L4,
    ApsLayer::L5,
    ApsLayer::L6,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ApsStatus {
    Specified,
    SpecGap,
    Underconstrained,
}

impl ApsStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ApsStatus::Specified => "SPECIFIED",
            ApsStatus::SpecGap => "SPEC_GAP",
            ApsStatus::Underconstrained => "UNDERCONSTRAINED",
        }
    }

    /// Table abbreviation.
    pub fn short(self) -> &'static str {
        match self {
            ApsStatus::Specified => "ok",
            ApsStatus::SpecGap => "SPEC",
            ApsStatus::Underconstrained => "UC",
        }
    }
}

impl fmt::Display for ApsStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApsCell {
    pub layer: ApsLayer,
    pub protocol: String,
    pub status: ApsStatus,
}

/// Status of one layer given `(failed, touches an ambiguous clause)` for
/// each property the layer holds.
///
/// A layer with no failing property is specified; a failure traced to an
/// ambiguous clause makes it underconstrained, any other failure a gap.
pub fn layer_status(properties: impl IntoIterator<Item = (bool, bool)>) -> ApsStatus {
    let mut status = ApsStatus::Specified;
    for (failed, ambiguous) in properties {
        if failed && ambiguous {
            return ApsStatus::Underconstrained;
        }
        if failed {
            status = ApsStatus::SpecGap;
        }
    }
    status
}

/// Layer-gap grid for the four APS protocols, checked at default bounds.
///
/// Rows follow [`APS_LAYERS`], columns [`APS_PROTOCOLS`].
pub fn aps_table() -> Vec<ApsCell> {
    let bounds = Bounds::default();
    let mut per_protocol = Vec::new();
    for name in APS_PROTOCOLS {
        let model = builtin(name).expect("bundled");
        let clauses = builtin_clauses(name).expect("bundled");
        let cov = coverage(&model, &clauses).expect("bundled clause set matches its model");
        let results = check_all(&model, &model.properties, &bounds);
        let rows: Vec<(ApsLayer, bool, bool)> = model
            .properties
            .iter()
            .map(|p| {
                let failed = results[&p.id]
                    .as_ref()
                    .map_or(true, |r| r.verdict() != Verdict::Pass);
                let ambiguous = cov.ambiguous_by_property.get(&p.id).is_some_and(|a| !a.is_empty());
                (aps_layer(p.principle), failed, ambiguous)
            })
            .collect();
        per_protocol.push((name, rows));
    }
    let mut out = Vec::new();
    for layer in APS_LAYERS {
        for (name, rows) in &per_protocol {
            let status = layer_status(
                rows.iter()
                    .filter(|r| r.0 == layer)
                    .map(|r| (r.1, r.2)),
            );
            out.push(ApsCell {
                layer,
                protocol: name.to_string(),
                status,
            });
        }
    }
    out
}
