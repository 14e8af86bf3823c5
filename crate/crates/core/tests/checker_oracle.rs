mod common;

use agentconform::checker::{check, enumerate_states, Bounds, CheckResult};
use agentconform::{ir, models};
use proptest::prelude::*;

use common::tiny::tiny_nontrivial;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn checker_matches_direct_interpreter(t in tiny_nontrivial()) {
        let m = ir::parse_model(&t.text()).unwrap();
        let (depth, states) = t.explore();
        let r = check(&m, m.property("Inv").unwrap(), &Bounds::default()).unwrap();
        match r {
            CheckResult::Pass { states_explored } => {
                prop_assert_eq!(depth, None);
                prop_assert_eq!(states_explored, states);
            }
            CheckResult::Fail { cx, .. } => prop_assert_eq!(Some(cx.depth), depth),
            other => prop_assert!(false, "{other:?}"),
        }
        prop_assert_eq!(enumerate_states(&m, &Bounds::default()).unwrap(), states);
    }
}

#[test]
fn bundled_state_spaces_match_naive_search() {
    let b = Bounds::default();
    for name in models::names() {
        let m = models::builtin(name).unwrap();
        assert_eq!(enumerate_states(&m, &b).unwrap(), common::naive_state_count(&m, &b), "{name}");
    }
}

#[test]
fn bundled_violation_depths_are_minimal() {
    let b = Bounds::default();
    for name in models::names() {
        let m = models::builtin(name).unwrap();
        for p in &m.properties {
            let r = check(&m, p, &b).unwrap();
            let naive = common::naive_min_depth(&m, &p.id, &b, b.max_depth);
            assert_eq!(r.counterexample().map(|c| c.depth), naive, "{name}/{}", p.id);
            if let Some(cx) = r.counterexample() {
                assert!(common::replays(&m, cx, &b), "{name}/{}", p.id);
            }
        }
    }
}
