use std::path::PathBuf;

use agentconform::checker::{check, Bounds, CheckResult};
use agentconform::models;
use agentconform::tla::{parse_tlc_output, render_tlc_log, to_check_result};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/tlc")
}

#[test]
fn fixture_logs_agree_with_the_checker() {
    let bless = std::env::var_os("AGENTCONFORM_BLESS").is_some();
    let bounds = Bounds::default();
    let mut seen = 0;
    for name in models::names() {
        let m = models::builtin(name).unwrap();
        for p in &m.properties {
            let ours = check(&m, p, &bounds).unwrap();
            let path = dir().join(format!("{name}.{}.log", p.id));
            if bless {
                std::fs::write(&path, render_tlc_log(&m, &p.id, &ours, &bounds).unwrap()).unwrap();
            }
            let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let log = parse_tlc_output(&text).unwrap();
            let theirs = to_check_result(&m, &log, &bounds).unwrap();
            assert_eq!(theirs.verdict(), ours.verdict(), "{name}/{}", p.id);
            assert_eq!(theirs.states_explored(), ours.states_explored(), "{name}/{}", p.id);
            if let (CheckResult::Fail { cx: a, .. }, CheckResult::Fail { cx: b, .. }) = (&theirs, &ours) {
                assert_eq!(a, b, "{name}/{}", p.id);
                assert_eq!(log.depth(), Some(b.depth));
            }
            seen += 1;
        }
    }
    let logs = std::fs::read_dir(dir())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "log"))
        .count();
    assert_eq!(logs, seen, "stray fixture logs");
}

#[test]
fn catalog_reference_is_in_sync() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/aasm.md");
    let doc = agentconform::aasm::reference_doc();
    if std::env::var_os("AGENTCONFORM_BLESS").is_some() {
        std::fs::write(&path, &doc).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap(), doc, "rerun with AGENTCONFORM_BLESS=1");
}
