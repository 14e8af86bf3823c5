use std::collections::BTreeSet;

use serde_json::{json, Value as Json};

use super::{triage, Annotations, MatrixError, ReplayVerdict, TriageVerdict};
use crate::aasm::{aps_layer, expected_class, ApsLayer, PROTOCOLS};
use crate::checker::{check, check_reduced, Bounds, CheckResult, Counterexample, Verdict};
use crate::composer::{builtin_compositions, cs_properties};
use crate::ir::{coverage, NormativeClause, Principle, PropertyClass, ProtocolModel};
use crate::models::{self, ApsCell};
use crate::replay::{self, AdapterReport, Mode, Outcome, Profile};

/// Everything known about one (protocol, principle) pair before triage.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub protocol: String,
    pub principle: Principle,
    /// Property checked for the cell; `None` when the protocol has none.
    pub property: Option<String>,
    pub model: Option<Verdict>,
    pub class: Option<PropertyClass>,
    pub states: Option<usize>,
    pub replay: Option<Outcome>,
    pub annotations: Annotations,
    pub counterexample: Option<Counterexample>,
    pub report: Option<AdapterReport>,
}

impl CellResult {
    fn not_applicable(protocol: &str, principle: Principle) -> Self {
        CellResult {
            protocol: protocol.to_string(),
            principle,
            property: None,
            model: None,
            class: expected_class(protocol, principle),
            states: None,
            replay: None,
            annotations: Annotations::default(),
            counterexample: None,
            report: None,
        }
    }
}

/// One CS invariant of one bundled composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionRow {
    pub pattern: String,
    pub title: String,
    pub protocols: (String, String),
    pub invariant: String,
    pub verdict: Verdict,
    pub depth: Option<usize>,
    pub states: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixCell {
    pub protocol: String,
    pub principle: Principle,
    pub property: Option<String>,
    /// `None` when the protocol has no property for the principle.
    pub model: Option<Verdict>,
    pub replay: ReplayVerdict,
    /// `None` when the taxonomy does not catalog the pair.
    pub class: Option<PropertyClass>,
    pub triage: TriageVerdict,
    pub depth: Option<usize>,
    pub layer: ApsLayer,
    pub ambiguous_clauses: Vec<String>,
    /// Relative path of the counterexample document, if any.
    pub counterexample: Option<String>,
    /// Relative path of the adapter report, if any.
    pub report: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Totals {
    /// Count per verdict, in [`TriageVerdict::ALL`] order.
    pub by_verdict: Vec<(TriageVerdict, usize)>,
    pub spec_level: usize,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConformanceMatrix {
    /// Row-major: protocols in bundle order, principles in catalog order.
    pub cells: Vec<MatrixCell>,
    pub totals: Totals,
    pub snapshots: Vec<(String, String)>,
    pub aps: Vec<ApsCell>,
    pub compositions: Vec<CompositionRow>,
    /// Linked documents: relative path and content.
    pub documents: Vec<(String, String)>,
}

impl ConformanceMatrix {
    pub fn cell(&self, protocol: &str, principle: Principle) -> Option<&MatrixCell> {
        self.cells
            .iter()
            .find(|c| c.protocol == protocol && c.principle == principle)
    }

    pub fn count(&self, v: TriageVerdict) -> usize {
        self.cells.iter().filter(|c| c.triage == v).count()
    }

    pub fn has_violations(&self) -> bool {
        self.cells.iter().any(|c| c.triage != TriageVerdict::Pass)
    }
}

/// Raw results of a full bundled run, before triage.
#[derive(Clone, Debug, PartialEq)]
pub struct Results {
    pub cells: Vec<CellResult>,
    pub snapshots: Vec<(String, String)>,
    pub compositions: Vec<(CompositionRow, Option<Counterexample>)>,
}

fn protocol_cells(model: &ProtocolModel, clauses: &[NormativeClause], bounds: &Bounds) -> Vec<CellResult> {
    let name = model.name.as_str();
    let ambiguous = coverage(model, clauses)
        .map(|c| c.ambiguous_by_property)
        .unwrap_or_default();
    let mut out = Vec::new();
    for principle in Principle::ALL.into_iter().filter(|p| *p != Principle::CS) {
        let Some(p) = model.properties_for(principle).next() else {
            out.push(CellResult::not_applicable(name, principle));
            continue;
        };
        let r = check(model, p, bounds);
        let (verdict, states, cx) = match &r {
            Ok(r) => (r.verdict(), Some(r.states_explored()), r.counterexample().cloned()),
            Err(_) => (Verdict::BoundExhausted, None, None),
        };
        let (replay, report) = match cx.as_ref().map(replay::generate_test) {
            Some(Ok(test)) => {
                let rep = replay::run(&test, Profile::Vulnerable, &Mode::Mock).ok();
                (rep.as_ref().map(|r| r.outcome), rep)
            }
            _ => (None, None),
        };
        out.push(CellResult {
            protocol: name.to_string(),
            principle,
            property: Some(p.id.clone()),
            model: Some(verdict),
            class: Some(p.class),
            states,
            replay,
            annotations: Annotations {
                model_fail: false,
                ambiguous_clauses: ambiguous.get(&p.id).cloned().unwrap_or_default(),
            },
            counterexample: cx,
            report,
        });
    }
    out
}

fn composition_rows(bounds: &Bounds) -> Vec<(CompositionRow, Option<Counterexample>)> {
    let mut out = Vec::new();
    for c in builtin_compositions() {
        let composed = c.build().expect("bundled composition");
        for p in cs_properties(&c) {
            let (verdict, depth, states, cx) = match check_reduced(&composed.model, &p, bounds) {
                Ok(CheckResult::Fail { cx, states_explored }) => {
                    (Verdict::Fail, Some(cx.depth), states_explored, Some(cx))
                }
                Ok(r) => (r.verdict(), None, r.states_explored(), None),
                Err(_) => (Verdict::BoundExhausted, None, 0, None),
            };
            out.push((
                CompositionRow {
                    pattern: c.id.to_string(),
                    title: c.title.to_string(),
                    protocols: (c.a.to_string(), c.b.to_string()),
                    invariant: p.id.clone(),
                    verdict,
                    depth,
                    states,
                },
                cx,
            ));
        }
    }
    out
}

/// CS cell of `protocol`: its worst verdict over the compositions it takes
/// part in, represented by the shallowest counterexample of that verdict.
fn cs_cell(protocol: &str, rows: &[(CompositionRow, Option<Counterexample>)]) -> CellResult {
    let mut cell = CellResult::not_applicable(protocol, Principle::CS);
    let mine: Vec<_> = rows
        .iter()
        .filter(|(r, _)| r.protocols.0 == protocol || r.protocols.1 == protocol)
        .collect();
    if mine.is_empty() {
        return cell;
    }
    let rank = |v: Verdict| match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::BoundExhausted => 2,
    };
    let worst = mine.iter().map(|(r, _)| r.verdict).max_by_key(|v| rank(*v)).expect("non-empty");
    let pick = mine
        .iter()
        .filter(|(r, _)| r.verdict == worst)
        .min_by_key(|(r, _)| r.depth.unwrap_or(usize::MAX))
        .expect("worst verdict is present");
    cell.property = Some(format!("{}:{}", pick.0.pattern, pick.0.invariant));
    cell.model = Some(worst);
    cell.states = Some(mine.iter().map(|(r, _)| r.states).sum());
    cell.counterexample = pick.1.clone();
    cell
}

/// Runs every bundled check, composition and replay at `bounds`.
pub fn collect_results(bounds: &Bounds) -> Results {
    let bundled: Vec<_> = PROTOCOLS
        .iter()
        .map(|n| {
            (
                models::builtin(n).expect("bundled model"),
                models::builtin_clauses(n).expect("bundled clauses"),
            )
        })
        .collect();
    collect_results_for(&bundled, bounds)
}

/// Like [`collect_results`], for the given models and clause sets. CS cells
/// always come from the bundled compositions.
///
/// Protocols are checked concurrently; results are assembled in input
/// order, so the outcome does not depend on scheduling.
pub fn collect_results_for(
    protocols: &[(ProtocolModel, Vec<NormativeClause>)],
    bounds: &Bounds,
) -> Results {
    let (mut per_protocol, compositions) = std::thread::scope(|s| {
        let handles: Vec<_> = protocols
            .iter()
            .map(|(m, c)| s.spawn(move || protocol_cells(m, c, bounds)))
            .collect();
        let comps = s.spawn(|| composition_rows(bounds));
        let cells: Vec<Vec<CellResult>> = handles.into_iter().map(|h| h.join().expect("checker thread")).collect();
        (cells, comps.join().expect("composition thread"))
    });
    let mut cells = Vec::new();
    for ((m, _), row) in protocols.iter().zip(per_protocol.iter_mut()) {
        cells.append(row);
        cells.push(cs_cell(&m.name, &compositions));
    }
    let snapshots = protocols
        .iter()
        .map(|(m, _)| (m.name.clone(), m.snapshot.clone()))
        .collect();
    Results {
        cells,
        snapshots,
        compositions,
    }
}

fn cx_doc(cx: &Counterexample) -> String {
    serde_json::to_string_pretty(&cx.to_json()).expect("counterexample serializes") + "\n"
}

/// Triages every cell and checks the grid is complete.
pub fn build_matrix(results: &Results) -> Result<ConformanceMatrix, MatrixError> {
    let mut seen = BTreeSet::new();
    for r in &results.cells {
        if !seen.insert((r.protocol.clone(), r.principle)) {
            return Err(MatrixError::Duplicate(r.protocol.clone(), r.principle.as_str().into()));
        }
    }
    let missing: Vec<(String, String)> = PROTOCOLS
        .iter()
        .flat_map(|p| Principle::ALL.map(|q| (p.to_string(), q)))
        .filter(|k| !seen.contains(k))
        .map(|(p, q)| (p, q.as_str().to_string()))
        .collect();
    if !missing.is_empty() {
        return Err(MatrixError::Incomplete(missing));
    }

    let mut documents = Vec::new();
    let mut cells = Vec::new();
    for protocol in PROTOCOLS {
        for principle in Principle::ALL {
            let r = results
                .cells
                .iter()
                .find(|c| c.protocol == protocol && c.principle == principle)
                .expect("completeness checked");
            let replay = ReplayVerdict::from(r.replay);
            let verdict = match (r.model, r.class) {
                (Some(m), Some(class)) => triage(m, replay, class, &r.annotations)?,
                (Some(m), None) => triage(m, replay, PropertyClass::AasmHardening, &r.annotations)?,
                (None, _) => TriageVerdict::Pass,
            };
            let counterexample = r.counterexample.as_ref().map(|cx| {
                let property = r.property.clone().unwrap_or_default();
                let path = match property.split_once(':') {
                    Some((pattern, invariant)) => format!("counterexamples/{pattern}.{invariant}.json"),
                    None => format!("counterexamples/{protocol}.{property}.json"),
                };
                documents.push((path.clone(), cx_doc(cx)));
                path
            });
            let report = r.report.as_ref().map(|rep| {
                let path = format!("reports/{}.{}.json", rep.test, rep.profile.as_str());
                documents.push((path.clone(), rep.render()));
                path
            });
            cells.push(MatrixCell {
                protocol: protocol.to_string(),
                principle,
                property: r.property.clone(),
                model: r.model,
                replay,
                class: r.class,
                triage: verdict,
                depth: r.counterexample.as_ref().map(|c| c.depth),
                layer: aps_layer(principle),
                ambiguous_clauses: r.annotations.ambiguous_clauses.clone(),
                counterexample,
                report,
            });
        }
    }
    for (row, cx) in &results.compositions {
        if let Some(cx) = cx {
            let path = format!("counterexamples/{}.{}.json", row.pattern, row.invariant);
            if !documents.iter().any(|(p, _)| *p == path) {
                documents.push((path, cx_doc(cx)));
            }
        }
    }
    documents.sort();
    documents.dedup_by(|a, b| a.0 == b.0);

    let by_verdict: Vec<(TriageVerdict, usize)> = TriageVerdict::ALL
        .iter()
        .map(|v| (*v, cells.iter().filter(|c| c.triage == *v).count()))
        .collect();
    let totals = Totals {
        spec_level: cells.iter().filter(|c| c.triage.is_spec_level()).count(),
        cells: cells.len(),
        by_verdict,
    };
    Ok(ConformanceMatrix {
        cells,
        totals,
        snapshots: results.snapshots.clone(),
        aps: models::aps_table(),
        compositions: results.compositions.iter().map(|(r, _)| r.clone()).collect(),
        documents,
    })
}

/// The full bundled run at default bounds.
pub fn bundled_matrix() -> Result<ConformanceMatrix, MatrixError> {
    build_matrix(&collect_results(&Bounds::default()))
}

pub(super) fn cell_json(c: &MatrixCell) -> Json {
    json!({
        "protocol": c.protocol,
        "principle": c.principle.as_str(),
        "property": c.property,
        "model": c.model.map_or("N/A", Verdict::as_str),
        "replay": c.replay.as_str(),
        "class": c.class.map_or("NOT_CATALOGED", PropertyClass::as_str),
        "triage": c.triage.as_str(),
        "depth": c.depth,
        "layer": format!("{:?}", c.layer),
        "ambiguous_clauses": c.ambiguous_clauses,
        "counterexample": c.counterexample,
        "report": c.report,
    })
}
