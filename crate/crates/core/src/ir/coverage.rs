use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution {
    /// Source refs matched these clause ids.
    Clauses(Vec<String>),
    /// Modeling assumption; nothing to resolve.
    Invented,
    /// Cites documents but no clause matches.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub protocol: String,
    /// Per transition id, in model order.
    pub transitions: Vec<(String, Resolution)>,
    /// MUST clauses no transition or property refers to.
    pub uncovered_must: Vec<String>,
    /// Ambiguity-flagged clauses each property touches.
    pub ambiguous_by_property: BTreeMap<String, Vec<String>>,
    /// Ambiguous clauses over all clauses (0 for an empty set).
    pub ambiguity_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("clause `{clause}` belongs to `{found}`, model is `{expected}`")]
    ProtocolMismatch {
        clause: String,
        expected: String,
        found: String,
    },
}

fn matches(r: &SourceRef, c: &NormativeClause) -> bool {
    if let Some(id) = &r.clause {
        return *id == c.id;
    }
    if r.document != c.source.document {
        return false;
    }
    let (a, b) = (r.quote.trim(), c.source.quote.trim());
    let quote_overlap = !a.is_empty() && !b.is_empty() && (a.contains(b) || b.contains(a));
    quote_overlap || (!r.section.is_empty() && r.section == c.source.section)
}

fn resolve(sources: &[Source], clauses: &[NormativeClause]) -> Resolution {
    let refs: Vec<&SourceRef> = sources.iter().filter_map(Source::as_ref).collect();
    if refs.is_empty() {
        return if sources.is_empty() {
            Resolution::Unresolved
        } else {
            Resolution::Invented
        };
    }
    let ids: BTreeSet<String> = refs
        .iter()
        .flat_map(|r| clauses.iter().filter(|c| matches(r, c)).map(|c| c.id.clone()))
        .collect();
    if ids.is_empty() {
        Resolution::Unresolved
    } else {
        Resolution::Clauses(ids.into_iter().collect())
    }
}

/// Resolves model provenance against a clause set.
pub fn coverage(
    model: &ProtocolModel,
    clauses: &[NormativeClause],
) -> Result<CoverageReport, CoverageError> {
    if let Some(c) = clauses.iter().find(|c| c.protocol != model.name) {
        return Err(CoverageError::ProtocolMismatch {
            clause: c.id.clone(),
            expected: model.name.clone(),
            found: c.protocol.clone(),
        });
    }
    let mut referenced = BTreeSet::new();
    let transitions: Vec<(String, Resolution)> = model
        .transitions
        .iter()
        .map(|t| {
            let r = resolve(&t.sources, clauses);
            if let Resolution::Clauses(ids) = &r {
                referenced.extend(ids.iter().cloned());
            }
            (t.id.clone(), r)
        })
        .collect();
    let mut ambiguous_by_property = BTreeMap::new();
    for p in &model.properties {
        if let Resolution::Clauses(ids) = resolve(&p.sources, clauses) {
            let amb: Vec<String> = ids
                .iter()
                .filter(|id| clauses.iter().any(|c| &c.id == *id && c.ambiguous))
                .cloned()
                .collect();
            referenced.extend(ids);
            ambiguous_by_property.insert(p.id.clone(), amb);
        } else {
            ambiguous_by_property.insert(p.id.clone(), Vec::new());
        }
    }
    let uncovered_must = clauses
        .iter()
        .filter(|c| c.modality == Modality::Must && !referenced.contains(&c.id))
        .map(|c| c.id.clone())
        .collect();
    Ok(CoverageReport {
        protocol: model.name.clone(),
        transitions,
        uncovered_must,
        ambiguous_by_property,
        ambiguity_ratio: ambiguity_ratio(clauses),
    })
}

pub(crate) fn ambiguity_ratio(clauses: &[NormativeClause]) -> f64 {
    if clauses.is_empty() {
        return 0.0;
    }
    clauses.iter().filter(|c| c.ambiguous).count() as f64 / clauses.len() as f64
}
