use super::*;
use crate::checker::{check_reduced, validate_trace_for, Bounds, CheckResult, Verdict};
use crate::models::builtin;

fn run(c: &Composition) -> Vec<(String, CheckResult)> {
    let composed = c.build().unwrap();
    cs_properties(c)
        .iter()
        .map(|p| {
            let r = check_reduced(&composed.model, p, &Bounds::default()).unwrap();
            (p.id.clone(), r)
        })
        .collect()
}

#[test]
fn same_model_is_rejected() {
    let m = builtin("mcp").unwrap();
    assert_eq!(
        compose(&m, &m, &BridgeSpec::default()),
        Err(ComposeError::SameModel("mcp".into()))
    );
}

#[test]
fn dangling_rule_is_rejected() {
    let bridge = BridgeSpec {
        name: "x".into(),
        rules: vec![RoutingRule::new("r", Side::A, "CallTool", "Nope")],
    };
    let err = compose(&builtin("mcp").unwrap(), &builtin("a2a").unwrap(), &bridge).unwrap_err();
    assert!(matches!(err, ComposeError::DanglingRule { .. }), "{err}");
}

#[test]
fn prefixing_keeps_models_disjoint() {
    let c = composition("federated-delegation").unwrap().build().unwrap();
    let m = &c.model;
    assert_eq!(m.name, "a2a+anp");
    assert!(m.var("A_delegation").is_some() && m.var("B_delegation").is_some());
    assert_eq!(m.domain("A_AgentID").unwrap()[0].as_ref(), "A_a1");
    assert!(m.transition("A_Redelegate").is_some());
    assert!(m.transition("BR_federate").is_some());
    assert!(m.transition("BR_federate_tainted").is_some());
    for v in BRIDGE_VARS {
        assert!(m.var(v).is_some(), "{v}");
    }
    assert!(crate::ir::validate(m).is_empty());
}

#[test]
fn update_parser() {
    let u = parse_update("A_executed[A_write_file] := true").unwrap();
    assert_eq!(u.var, "A_executed");
    assert_eq!(u.path.len(), 1);
    assert!(parse_update("x + 1 := 2").is_err());
    assert!(parse_update("x = 2").is_err());
}

#[test]
fn twenty_one_invariants_twenty_fail() {
    let mut fails = 0;
    let mut total = 0;
    for c in builtin_compositions() {
        for (id, r) in run(&c) {
            total += 1;
            let expect_pass = id == "CS_FederatedDomainIsolation";
            assert_eq!(
                r.verdict(),
                if expect_pass { Verdict::Pass } else { Verdict::Fail },
                "{}/{id}",
                c.id
            );
            if r.verdict() == Verdict::Fail {
                fails += 1;
            }
        }
    }
    assert_eq!((total, fails), (21, 20));
}

#[test]
fn chained_pattern_fails_everything() {
    let c = composition("chained-tools").unwrap();
    let results = run(&c);
    assert_eq!(results.len(), 5);
    assert!(results.iter().all(|(_, r)| r.verdict() == Verdict::Fail));
}

#[test]
fn leakage_needs_adversary_and_bridge() {
    for c in builtin_compositions() {
        let composed = c.build().unwrap();
        let p = cs_properties(&c).into_iter().find(|p| p.id == "CS_NoLeakage").unwrap();
        let r = check_reduced(&composed.model, &p, &Bounds::default()).unwrap();
        let CheckResult::Fail { cx, .. } = r else {
            panic!("{}: {r:?}", c.id)
        };
        validate_trace_for(&composed.model, &p, &cx, &Bounds::default()).unwrap();
        let kind = |a: &str| composed.model.transition(a).unwrap().kind;
        assert!(
            cx.steps.iter().any(|s| kind(&s.action) == crate::ir::TransitionKind::Adversary),
            "{}",
            c.id
        );
        assert!(cx.steps.iter().any(|s| s.action.starts_with("BR_")), "{}", c.id);
    }
}

#[test]
fn empty_bridge_is_safe() {
    for c in builtin_compositions() {
        let composed = c.build_with(&BridgeSpec::default()).unwrap();
        for p in cs_properties(&c) {
            let r = check_reduced(&composed.model, &p, &Bounds::default()).unwrap();
            assert_eq!(r.verdict(), Verdict::Pass, "{}/{}", c.id, p.id);
        }
    }
}
