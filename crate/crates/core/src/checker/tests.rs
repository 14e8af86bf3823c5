use super::*;
use crate::expr::parse;
use crate::ir::{parse_model, Principle, PropertyClass};

fn prop(id: &str, src: &str) -> Property {
    Property {
        id: id.into(),
        principle: Principle::P6,
        class: PropertyClass::AasmHardening,
        invariant: parse(src).unwrap(),
        sources: Vec::new(),
    }
}

const TOGGLE: &str = "protocol: t\nsnapshot: s\nvar b : BOOL init false\ntransition Toggle { kind: Environment  source: invented\n update: b := not b\n}\n";

const SESSIONS: &str = r#"
protocol: t
snapshot: s
constants { Sessions: [s1, s2] }
var session_state : MAP(Sessions -> ENUM[NONE, OPEN, CLOSED]) init all NONE
var credentials : MAP(Sessions -> ENUM[NONE, ACTIVE, REVOKED]) init all NONE
var msgs : COUNTER(5) init 0
transition Open { kind: Environment  source: invented
  params: s in Sessions
  guard: session_state[s] = NONE
  update: session_state[s] := OPEN
  update: credentials[s] := ACTIVE
}
transition Close { kind: Environment  source: invented
  params: s in Sessions
  guard: session_state[s] = OPEN
  update: session_state[s] := CLOSED
}
transition Send { kind: Environment  source: invented
  params: s in Sessions
  guard: session_state[s] = OPEN
  update: msgs := msgs + 1
}
"#;

const P8: &str = "forall s in Sessions: session_state[s] = CLOSED => credentials[s] = REVOKED";

#[test]
fn toggle_has_two_states() {
    let m = parse_model(TOGGLE).unwrap();
    assert_eq!(enumerate_states(&m, &Bounds::default()).unwrap(), 2);
}

#[test]
fn stuttering_model_has_one_state() {
    let m = parse_model("protocol: t\nsnapshot: s\nvar b : BOOL init false\n").unwrap();
    assert_eq!(enumerate_states(&m, &Bounds::default()).unwrap(), 1);
    let r = check(&m, &prop("T", "true"), &Bounds::default()).unwrap();
    assert_eq!(r, CheckResult::Pass { states_explored: 1 });
}

#[test]
fn true_property_passes() {
    let m = parse_model(SESSIONS).unwrap();
    let r = check(&m, &prop("T", "true"), &Bounds::default()).unwrap();
    assert_eq!(r.verdict(), Verdict::Pass);
}

#[test]
fn revocation_violation_is_depth_two_and_replays() {
    let m = parse_model(SESSIONS).unwrap();
    let p = prop("P8", P8);
    let r = check(&m, &p, &Bounds::default()).unwrap();
    let cx = r.counterexample().expect("violation");
    assert_eq!(cx.depth, 2);
    let actions: Vec<&str> = cx.steps.iter().map(|s| s.action.as_str()).collect();
    assert_eq!(actions, ["Open", "Close"]);
    assert_eq!(cx.steps[0].params, vec![("s".to_string(), crate::value::atom("s1"))]);
    assert!(validate_trace_for(&m, &p, cx, &Bounds::default()).unwrap());

    let mut edited = cx.clone();
    edited.steps[1].state.0[1].1 = crate::value::Value::Map(
        [("s1", "REVOKED"), ("s2", "NONE")]
            .iter()
            .map(|(k, v)| (crate::value::atom(k), crate::value::Value::atom(v)))
            .collect(),
    );
    assert!(!validate_trace_for(&m, &p, &edited, &Bounds::default()).unwrap());

    let mut unknown = cx.clone();
    unknown.steps[0].action = "Nope".into();
    assert_eq!(
        validate_trace_for(&m, &p, &unknown, &Bounds::default()),
        Err(CheckError::UnknownTransition("Nope".into()))
    );
}

#[test]
fn counterexample_json_round_trip() {
    let m = parse_model(SESSIONS).unwrap();
    let r = check(&m, &prop("P8", P8), &Bounds::default()).unwrap();
    let cx = r.counterexample().unwrap();
    let j = cx.to_json();
    assert_eq!(j["steps"][1]["action"], "Close");
    assert_eq!(j["initial"]["msgs"], 0);
    let keys: Vec<&String> = j["initial"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["session_state", "credentials", "msgs"]);
    assert_eq!(&Counterexample::from_json(&j).unwrap(), cx);
}

#[test]
fn counters_are_capped_by_bounds() {
    let m = parse_model(SESSIONS).unwrap();
    // sessions: 3 states each (NONE, OPEN, CLOSED) -> 9 combos, msgs only moves while open
    let full = enumerate_states(&m, &Bounds::default()).unwrap();
    let lower = enumerate_states(
        &m,
        &Bounds {
            counter_max: Some(1),
            ..Bounds::default()
        },
    )
    .unwrap();
    assert!(lower < full);
    let r = check(&m, &prop("Cap", "msgs <= 3"), &Bounds::default()).unwrap();
    assert_eq!(r.verdict(), Verdict::Pass);
}

#[test]
fn initial_violation_has_depth_zero() {
    let m = parse_model(TOGGLE).unwrap();
    let cx = check(&m, &prop("B", "b = true"), &Bounds::default())
        .unwrap()
        .counterexample()
        .cloned()
        .unwrap();
    assert_eq!(cx.depth, 0);
    assert!(validate_trace_for(&m, &prop("B", "b = true"), &cx, &Bounds::default()).unwrap());
}

#[test]
fn bound_exhaustion_is_not_a_pass() {
    let m = parse_model(SESSIONS).unwrap();
    let tight = Bounds {
        max_states: 3,
        ..Bounds::default()
    };
    let r = check(&m, &prop("T", "true"), &tight).unwrap();
    assert_eq!(r.verdict(), Verdict::BoundExhausted);
    assert!(matches!(enumerate_states(&m, &tight), Err(CheckError::Overflow { .. })));
    let shallow = Bounds {
        max_depth: 1,
        ..Bounds::default()
    };
    assert_eq!(check(&m, &prop("T", "true"), &shallow).unwrap().verdict(), Verdict::BoundExhausted);
}

#[test]
fn domain_bounds_resize() {
    let m = parse_model(SESSIONS).unwrap();
    let one = Bounds::default().with_domain("Sessions", 1);
    let three = Bounds::default().with_domain("Sessions", 3);
    let n1 = enumerate_states(&m, &one).unwrap();
    let n3 = enumerate_states(&m, &three).unwrap();
    assert!(n1 < enumerate_states(&m, &Bounds::default()).unwrap());
    assert!(n3 > n1);
    let applied = three.apply(&m).unwrap();
    assert_eq!(applied.domain("Sessions").unwrap().len(), 3);
    assert_eq!(&*applied.domain("Sessions").unwrap()[2], "s3");
    assert_eq!(Bounds::default().cap_for("AgentID"), Some(2));
    assert_eq!(Bounds::default().cap_for("Tools"), None);
}

#[test]
fn type_errors_surface() {
    let m = parse_model(TOGGLE).unwrap();
    assert!(matches!(
        check(&m, &prop("Bad", "b = 1"), &Bounds::default()),
        Err(CheckError::Eval { .. })
    ));
    let mut batch = check_all(&m, &[prop("Bad", "b = 1"), prop("Ok", "true")], &Bounds::default());
    assert!(batch.remove("Bad").unwrap().is_err());
    assert!(batch.remove("Ok").unwrap().is_ok());
    assert!(check_all(&m, &[], &Bounds::default()).is_empty());
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_change_results() {
    let m = parse_model(SESSIONS).unwrap();
    let props = [prop("P8", P8), prop("T", "true"), prop("M", "msgs < 2")];
    let base = check_all(&m, &props, &Bounds::default());
    for workers in [0, 2, 4] {
        let b = Bounds {
            workers,
            ..Bounds::default()
        };
        assert_eq!(check_all(&m, &props, &b), base, "workers={workers}");
    }
}

#[test]
fn reduction_preserves_verdicts_and_depths() {
    for name in crate::models::names() {
        let m = crate::models::builtin(name).unwrap();
        let b = Bounds::default();
        for p in &m.properties {
            let direct = check(&m, p, &b).unwrap();
            let reduced = check_reduced(&m, p, &b).unwrap();
            assert_eq!(direct.verdict(), reduced.verdict(), "{name}/{}", p.id);
            assert!(reduced.states_explored() <= direct.states_explored());
            if let Some(cx) = reduced.counterexample() {
                assert_eq!(Some(cx.depth), direct.counterexample().map(|c| c.depth));
                assert!(validate_trace(&m, cx, &b).unwrap(), "{name}/{}", p.id);
            }
        }
    }
}

#[test]
fn cone_keeps_guard_dependencies() {
    let m = parse_model(SESSIONS).unwrap();
    let vars = influencing_vars(&m, &crate::expr::parse(P8).unwrap());
    assert!(vars.contains("session_state") && vars.contains("credentials"));
    let reduced = cone_of_influence(&m, &crate::expr::parse("true").unwrap());
    assert!(reduced.state_vars.is_empty() && reduced.transitions.is_empty());
}

#[test]
fn bounds_overrides() {
    let b = Bounds::default().with_overrides("agents=3, caps=1,depth=5,workers=2").unwrap();
    assert_eq!(b.domains["Agents"], 3);
    assert_eq!(b.domains["Caps"], 1);
    assert_eq!((b.max_depth, b.workers), (5, 2));
    let b = Bounds::default().with_overrides("tools=1").unwrap();
    assert_eq!(b.cap_for("Tools"), Some(1));
    assert_eq!(Bounds::default().with_overrides("").unwrap(), Bounds::default());
    assert!(Bounds::default().with_overrides("agents").is_err());
    assert!(Bounds::default().with_overrides("agents=-1").is_err());
    assert!(Bounds::default().with_overrides("=2").is_err());
}
