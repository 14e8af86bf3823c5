use super::*;
use crate::expr::print;
use crate::ir::parse_model;

const A2A_LIKE: &str = r#"
protocol: a2a
snapshot: test
constants { AgentID: [a1, a2]  Caps: [c1, c2] }
var delegation : MAP(AgentID -> MAP(AgentID -> SET(Caps))) init all {}
var original_caps : MAP(AgentID -> SET(Caps)) init {a1: {c1}, a2: {c2}}
var audit_count : COUNTER(3) init 0
var msg_count : COUNTER(3) init 0
"#;

#[test]
fn p3_matches_listing() {
    let m = parse_model(A2A_LIKE).unwrap();
    let p = instantiate(template(Principle::P3), &m, &RoleBinding::identity(template(Principle::P3))).unwrap();
    assert_eq!(p.id, "P3_DelegationMonotonicity");
    assert_eq!(p.class, PropertyClass::AasmHardening);
    assert_eq!(
        print(&p.invariant),
        "forall ag1 in AgentID: forall ag2 in AgentID: ag1 # ag2 => delegation[ag1][ag2] subseteq original_caps[ag1]"
    );
}

#[test]
fn p6_is_audit_comparison() {
    let m = parse_model(A2A_LIKE).unwrap();
    let t = template(Principle::P6);
    let p = instantiate(t, &m, &RoleBinding::identity(t)).unwrap();
    assert_eq!(print(&p.invariant), "audit_count >= msg_count");
}

#[test]
fn missing_role_is_an_error() {
    let m = parse_model(A2A_LIKE).unwrap();
    let binding = RoleBinding::new(&[("AgentID", "AgentID"), ("delegation", "delegation")]);
    let err = instantiate(template(Principle::P3), &m, &binding).unwrap_err();
    assert_eq!(
        err,
        InstantiateError::MissingRole {
            principle: Principle::P3,
            role: "original_caps".into()
        }
    );
}

#[test]
fn sort_mismatch_is_an_error() {
    let m = parse_model(A2A_LIKE).unwrap();
    let binding = RoleBinding::new(&[("audit_count", "audit_count"), ("msg_count", "original_caps")]);
    assert!(matches!(
        instantiate(template(Principle::P6), &m, &binding),
        Err(InstantiateError::SortMismatch { .. })
    ));
}

#[test]
fn renaming_reaches_domains() {
    let m = parse_model(A2A_LIKE).unwrap();
    let binding = RoleBinding::new(&[
        ("AgentID", "AgentID"),
        ("delegation", "delegation"),
        ("original_caps", "original_caps"),
    ]);
    let p = instantiate(template(Principle::P3), &m, &binding).unwrap();
    assert_eq!(p.invariant.quantified_domains().into_iter().collect::<Vec<_>>(), ["AgentID"]);
}

#[test]
fn taxonomy_rows() {
    assert_eq!(
        taxonomy("mcp", Principle::P4),
        Taxonomy::Cataloged {
            class: PropertyClass::SpecMandated,
            modality: Modality::Must,
            note: "MUST sanitize"
        }
    );
    assert_eq!(
        taxonomy("mcp", Principle::P7),
        Taxonomy::Cataloged {
            class: PropertyClass::SpecMandated,
            modality: Modality::Must,
            note: "MUST return 401"
        }
    );
    assert_eq!(
        taxonomy("a2a", Principle::P3),
        Taxonomy::Cataloged {
            class: PropertyClass::AasmHardening,
            modality: Modality::NotSpecified,
            note: "NS"
        }
    );
    for (proto, p, class, note) in [
        ("mcp", Principle::P8, PropertyClass::SpecRecommended, "SHOULD expire"),
        ("mcp", Principle::P5, PropertyClass::SpecRecommended, "SHOULD consent"),
        ("mcp", Principle::P6, PropertyClass::SpecRecommended, "SHOULD log"),
        ("mcp", Principle::P2, PropertyClass::AasmHardening, "NS"),
        ("anp", Principle::WF, PropertyClass::ApsCompleteness, "NS"),
        ("anp", Principle::SL, PropertyClass::ApsCompleteness, "NS"),
    ] {
        match taxonomy(proto, p) {
            Taxonomy::Cataloged { class: c, note: n, .. } => {
                assert_eq!((c, n), (class, note), "{proto} {p}")
            }
            other => panic!("{proto} {p}: {other:?}"),
        }
    }
    assert!(matches!(taxonomy("nope", Principle::P1), Taxonomy::NotCataloged { .. }));
}

#[test]
fn taxonomy_is_total_over_bundled_grid() {
    for proto in PROTOCOLS {
        for p in Principle::ALL {
            match taxonomy(proto, p) {
                Taxonomy::Cataloged { .. } => {}
                Taxonomy::NotCataloged { reason } => assert_ne!(reason, "unknown protocol"),
            }
        }
    }
    // 7 principles checked for ACP-Cap among P1..P8, WF, SL.
    let checked = Principle::ALL[..10]
        .iter()
        .filter(|p| expected_class("acp-cap", **p).is_some())
        .count();
    assert_eq!(checked, 7);
}

#[test]
fn layers() {
    assert_eq!(aps_layer(Principle::P6), ApsLayer::L6);
    assert_eq!(aps_layer(Principle::WF), ApsLayer::L2);
    assert_eq!(aps_layer(Principle::CS), ApsLayer::CrossLayer);
    assert_eq!(aps_layer(Principle::P7), ApsLayer::L3);
    assert_eq!(aps_layer(Principle::P5), ApsLayer::L5);
}

#[test]
fn every_schematic_parses_and_mentions_its_roles() {
    for t in templates() {
        let e = t.schematic_expr();
        let mut symbols = e.free_symbols();
        symbols.extend(e.quantified_domains());
        for (role, _) in t.roles {
            assert!(symbols.contains(*role), "{}: {role}", t.id);
        }
    }
}
