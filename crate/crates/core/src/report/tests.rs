use std::path::PathBuf;
use std::sync::OnceLock;

use proptest::prelude::*;

use super::*;
use crate::checker::{Bounds, Verdict};
use crate::ir::{Principle, PropertyClass};

fn matrix() -> &'static ConformanceMatrix {
    static M: OnceLock<ConformanceMatrix> = OnceLock::new();
    M.get_or_init(|| bundled_matrix().unwrap())
}

fn ann(model_fail: bool, ambiguous: bool) -> Annotations {
    Annotations {
        model_fail,
        ambiguous_clauses: if ambiguous { vec!["C1".into()] } else { Vec::new() },
    }
}

#[test]
fn decision_table_examples() {
    use PropertyClass::*;
    let none = ann(false, false);
    assert_eq!(triage(Verdict::Fail, ReplayVerdict::Violated, SpecRecommended, &none), Ok(TriageVerdict::BothFail));
    assert_eq!(triage(Verdict::Pass, ReplayVerdict::Violated, SpecMandated, &none), Ok(TriageVerdict::ImplFail));
    assert_eq!(
        triage(Verdict::Fail, ReplayVerdict::NotRun, SpecMandated, &ann(false, true)),
        Ok(TriageVerdict::AmbiguityFail)
    );
    assert_eq!(triage(Verdict::Fail, ReplayVerdict::Upheld, SpecMandated, &none), Ok(TriageVerdict::SpecFail));
    assert_eq!(triage(Verdict::Pass, ReplayVerdict::NotRun, AasmHardening, &none), Ok(TriageVerdict::Pass));
    assert_eq!(
        triage(Verdict::BoundExhausted, ReplayVerdict::NotRun, AasmHardening, &none),
        Ok(TriageVerdict::ModelFail)
    );
    assert_eq!(
        triage(Verdict::Pass, ReplayVerdict::NotRun, SpecMandated, &ann(true, false)),
        Err(TriageError::AnnotationConflict)
    );
}

fn verdicts() -> impl Strategy<Value = Verdict> {
    prop_oneof![Just(Verdict::Pass), Just(Verdict::Fail), Just(Verdict::BoundExhausted)]
}

fn replays() -> impl Strategy<Value = ReplayVerdict> {
    prop_oneof![Just(ReplayVerdict::Violated), Just(ReplayVerdict::Upheld), Just(ReplayVerdict::NotRun)]
}

fn classes() -> impl Strategy<Value = PropertyClass> {
    prop_oneof![
        Just(PropertyClass::SpecMandated),
        Just(PropertyClass::SpecRecommended),
        Just(PropertyClass::AasmHardening),
        Just(PropertyClass::ApsCompleteness),
    ]
}

proptest! {
    #[test]
    fn triage_is_total_and_consistent(
        m in verdicts(), r in replays(), c in classes(), mf in any::<bool>(), amb in any::<bool>()
    ) {
        let got = triage(m, r, c, &ann(mf, amb));
        let conflict = mf && m == Verdict::Pass && c == PropertyClass::SpecMandated && r == ReplayVerdict::NotRun;
        prop_assert_eq!(got.is_err(), conflict);
        let Ok(v) = got else { return Ok(()) };
        if mf || m == Verdict::BoundExhausted {
            prop_assert_eq!(v, TriageVerdict::ModelFail);
        } else if m == Verdict::Fail {
            prop_assert!(v.is_spec_level());
            prop_assert_eq!(v == TriageVerdict::AmbiguityFail, amb);
        } else {
            prop_assert!(!v.is_spec_level());
            prop_assert_eq!(v == TriageVerdict::ImplFail, r == ReplayVerdict::Violated);
        }
    }
}

#[test]
fn bundled_totals() {
    let m = matrix();
    assert_eq!(m.cells.len(), 55);
    assert_eq!(m.totals.cells, 55);
    assert_eq!(m.totals.by_verdict.iter().map(|(_, n)| n).sum::<usize>(), 55);
    assert_eq!(m.totals.spec_level, 33);
    assert_eq!(m.compositions.len(), 21);
    assert_eq!(m.compositions.iter().filter(|r| r.verdict == Verdict::Fail).count(), 20);
    for c in m.cells.iter().filter(|c| c.model.is_none()) {
        assert_eq!(c.triage, TriageVerdict::Pass, "{}/{}", c.protocol, c.principle.as_str());
    }
}

#[test]
fn replayed_cells_are_both_fail() {
    let m = matrix();
    let c = m.cell("mcp", Principle::P8).unwrap();
    assert_eq!(c.replay, ReplayVerdict::Violated);
    assert_eq!(c.triage, TriageVerdict::BothFail);
    let c = m.cell("anp", Principle::P8).unwrap();
    assert!(!c.ambiguous_clauses.is_empty());
    assert_eq!(c.replay, ReplayVerdict::NotRun);
    assert_eq!(c.triage, TriageVerdict::AmbiguityFail);
    assert_eq!(m.cell("acp-cap", Principle::P2).unwrap().triage, TriageVerdict::SpecFail);
    assert_eq!(m.cell("mcp", Principle::P1).unwrap().triage, TriageVerdict::Pass);
}

#[test]
fn linked_documents_exist() {
    let m = matrix();
    let paths: Vec<&str> = m.documents.iter().map(|(p, _)| p.as_str()).collect();
    for c in &m.cells {
        for link in c.counterexample.iter().chain(&c.report) {
            assert!(paths.contains(&link.as_str()), "{link}");
        }
        assert_eq!(c.counterexample.is_some(), c.model == Some(Verdict::Fail), "{}/{}", c.protocol, c.principle.as_str());
    }
}

#[test]
fn missing_protocol_is_an_error() {
    let mut r = collect_results(&Bounds::default());
    r.cells.retain(|c| c.protocol != "anp");
    match build_matrix(&r) {
        Err(MatrixError::Incomplete(missing)) => {
            assert_eq!(missing.len(), 11);
            assert!(missing.iter().all(|(p, _)| p == "anp"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn format_parsing() {
    assert_eq!("".parse::<Format>(), Ok(Format::Table));
    assert_eq!("structured".parse::<Format>(), Ok(Format::Structured));
    assert!("xml".parse::<Format>().is_err());
}

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden").join(name);
    if std::env::var_os("AGENTCONFORM_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} drifted; rerun with AGENTCONFORM_BLESS=1 to accept");
}

#[test]
fn golden_reports() {
    let m = matrix();
    golden("matrix.txt", &render(m, Format::Table));
    golden("matrix.json", &render(m, Format::Structured));
    assert_eq!(render(m, Format::Table), render(&bundled_matrix().unwrap(), Format::Table));
}
