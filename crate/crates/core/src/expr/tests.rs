use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::value::{atom, Atom, Value};

const P3: &str = "forall a in Agents: forall b in Agents: a # b => delegation[a][b] subseteq original_caps[a]";
const P8: &str = "forall s in Sessions: session_state[s] = CLOSED => credentials[s] = REVOKED";

fn id(s: &str) -> Box<Expr> {
    Box::new(Expr::ident(s))
}

fn map(entries: &[(&str, Value)]) -> Value {
    Value::Map(entries.iter().map(|(k, v)| (atom(k), v.clone())).collect())
}

fn atoms(names: &[&str]) -> Vec<Atom> {
    names.iter().map(|n| atom(n)).collect()
}

fn caps(names: &[&str]) -> Value {
    Value::set(names.iter().map(|n| Value::atom(n)))
}

#[test]
fn parses_delegation_monotonicity_shape() {
    let e = parse(P3).unwrap();
    let expected = Expr::Quant(
        Quantifier::Forall,
        "a".into(),
        "Agents".into(),
        Box::new(Expr::Quant(
            Quantifier::Forall,
            "b".into(),
            "Agents".into(),
            Box::new(Expr::Implies(
                Box::new(Expr::Compare(RelOp::Ne, id("a"), id("b"))),
                Box::new(Expr::Compare(
                    RelOp::SubsetEq,
                    Box::new(Expr::Index(
                        Box::new(Expr::Index(id("delegation"), id("a"))),
                        id("b"),
                    )),
                    Box::new(Expr::Index(id("original_caps"), id("a"))),
                )),
            )),
        )),
    );
    assert_eq!(e, expected);
}

#[test]
fn parses_audit_comparison_and_literals() {
    assert_eq!(
        parse("audit_count >= msg_count").unwrap(),
        Expr::Compare(RelOp::Ge, id("audit_count"), id("msg_count"))
    );
    assert_eq!(parse("true").unwrap(), Expr::Bool(true));
    assert_eq!(parse("a != b").unwrap(), parse("a # b").unwrap());
}

#[test]
fn precedence_follows_grammar() {
    // not > comparison > and > or > =>
    let e = parse("not a = b and c or d => e").unwrap();
    let expected = Expr::Implies(
        Box::new(Expr::Or(
            Box::new(Expr::And(
                Box::new(Expr::Not(Box::new(Expr::Compare(RelOp::Eq, id("a"), id("b"))))),
                id("c"),
            )),
            id("d"),
        )),
        id("e"),
    );
    assert_eq!(e, expected);
    // implication is right associative
    assert_eq!(
        parse("a => b => c").unwrap(),
        Expr::Implies(id("a"), Box::new(Expr::Implies(id("b"), id("c"))))
    );
}

#[test]
fn quantifier_body_extends_right() {
    let e = parse("forall x in D: p or q").unwrap();
    match e {
        Expr::Quant(_, _, _, body) => assert!(matches!(*body, Expr::Or(..))),
        other => panic!("unexpected {other:?}"),
    }
    assert!(parse("p and forall x in D: q").is_err());
    assert!(parse("p => forall x in D: q").is_ok());
}

#[test]
fn syntax_errors_carry_position() {
    let err = parse("a = b &&c").unwrap_err();
    assert_eq!((err.line, err.column), (1, 7));
    assert!(err.message.contains("unknown operator"), "{err}");
    let err = parse("forall x Agents: true").unwrap_err();
    assert_eq!(err.column, 10);
    assert!(parse("a = ").is_err());
    assert!(parse("(a = b").is_err());
    assert!(parse("x + y").is_err());
}

#[test]
fn evaluates_credential_revocation_violation() {
    let state = BTreeMap::from([
        ("session_state".to_string(), map(&[("s1", Value::atom("CLOSED"))])),
        ("credentials".to_string(), map(&[("s1", Value::atom("ACTIVE"))])),
    ]);
    let constants = BTreeMap::from([("Sessions".to_string(), atoms(&["s1"]))]);
    assert!(!evaluate(&parse(P8).unwrap(), &state, &constants).unwrap());
}

#[test]
fn evaluates_audit_zero_case() {
    let state = BTreeMap::from([
        ("audit_count".to_string(), Value::Int(0)),
        ("msg_count".to_string(), Value::Int(0)),
    ]);
    let e = parse("audit_count >= msg_count").unwrap();
    assert!(evaluate(&e, &state, &BTreeMap::new()).unwrap());
}

#[test]
fn evaluates_delegation_amplification() {
    let empty = caps(&[]);
    let state = BTreeMap::from([
        (
            "delegation".to_string(),
            map(&[
                ("a1", map(&[("a1", empty.clone()), ("a2", caps(&["c1", "c2"]))])),
                ("a2", map(&[("a1", empty.clone()), ("a2", empty.clone())])),
            ]),
        ),
        (
            "original_caps".to_string(),
            map(&[("a1", caps(&["c1"])), ("a2", caps(&["c2"]))]),
        ),
    ]);
    let constants = BTreeMap::from([("Agents".to_string(), atoms(&["a1", "a2"]))]);
    assert!(!evaluate(&parse(P3).unwrap(), &state, &constants).unwrap());
}

#[test]
fn evaluation_errors() {
    let state = BTreeMap::from([
        ("n".to_string(), Value::Int(1)),
        ("flag".to_string(), Value::Bool(true)),
        ("m".to_string(), map(&[("k1", Value::Int(0))])),
    ]);
    let constants = BTreeMap::new();
    let eval = |src: &str| evaluate(&parse(src).unwrap(), &state, &constants);
    assert!(matches!(eval("n = flag"), Err(EvalError::Type(_))));
    assert!(matches!(eval("n"), Err(EvalError::Type(_))));
    assert!(matches!(
        eval("m[k9] = 0"),
        Err(EvalError::KeyOutsideDomain { .. })
    ));
    assert!(matches!(
        eval("forall x in Nope: true"),
        Err(EvalError::UnknownDomain(_))
    ));

    let strict = MapEnv {
        state,
        constants: BTreeMap::new(),
        known_atoms: Some(Default::default()),
    };
    assert!(matches!(
        Evaluator::new(&strict).eval_bool(&parse("n = undeclared").unwrap()),
        Err(EvalError::Unbound(_))
    ));
}

#[test]
fn counters_and_set_ops() {
    let state = BTreeMap::from([
        ("n".to_string(), Value::Int(2)),
        ("s".to_string(), caps(&["c1"])),
    ]);
    let c = BTreeMap::from([("Caps".to_string(), atoms(&["c1", "c2"]))]);
    let eval = |src: &str| evaluate(&parse(src).unwrap(), &state, &c).unwrap();
    assert!(eval("n + 1 = 3"));
    assert!(eval("s union {c2} = Caps"));
    assert!(eval("Caps minus s = {c2}"));
    assert!(eval("c2 notin s"));
    assert!(eval("s subseteq Caps"));
}

#[test]
fn free_symbols_examples() {
    let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<std::collections::BTreeSet<_>>();
    assert_eq!(
        parse(P3).unwrap().free_symbols(),
        set(&["delegation", "original_caps"])
    );
    assert!(parse("forall a in Agents: a = a").unwrap().free_symbols().is_empty());
    assert_eq!(parse("x >= y").unwrap().free_symbols(), set(&["x", "y"]));
}

#[test]
fn rename_respects_shadowing() {
    let e = parse("forall a in Agents: a = b and held[a] = a").unwrap();
    let renamed = e.rename(&|s: &str| Some(format!("B_{s}")));
    assert_eq!(
        print(&renamed),
        "forall a in B_Agents: a = B_b and B_held[a] = a"
    );
}

// --- property tests -------------------------------------------------------

fn ident_strategy() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,4}".prop_filter("keyword", |s| !is_keyword(s))
}

fn postfix_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        ident_strategy().prop_map(Expr::Ident),
        (0i64..50).prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(b, i)| Expr::Index(Box::new(b), Box::new(i))),
            prop::collection::vec(inner, 0..3).prop_map(Expr::SetLit),
        ]
    })
}

fn term_strategy() -> impl Strategy<Value = Expr> {
    (
        postfix_strategy(),
        prop::collection::vec((0u8..3, postfix_strategy(), 1i64..4), 0..2),
    )
        .prop_map(|(first, rest)| {
            rest.into_iter().fold(first, |acc, (kind, rhs, n)| match kind {
                0 => Expr::SetOp(SetOp::Union, Box::new(acc), Box::new(rhs)),
                1 => Expr::SetOp(SetOp::Minus, Box::new(acc), Box::new(rhs)),
                _ => Expr::Add(Box::new(acc), n),
            })
        })
}

fn relop_strategy() -> impl Strategy<Value = RelOp> {
    prop::sample::select(vec![
        RelOp::Eq,
        RelOp::Ne,
        RelOp::Lt,
        RelOp::Le,
        RelOp::Gt,
        RelOp::Ge,
        RelOp::In,
        RelOp::NotIn,
        RelOp::SubsetEq,
    ])
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let atom = prop_oneof![
        term_strategy(),
        (relop_strategy(), term_strategy(), term_strategy())
            .prop_map(|(op, l, r)| Expr::Compare(op, Box::new(l), Box::new(r))),
    ];
    atom.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Implies(Box::new(a), Box::new(b))),
            (any::<bool>(), ident_strategy(), ident_strategy(), inner).prop_map(
                |(all, v, d, body)| {
                    let q = if all { Quantifier::Forall } else { Quantifier::Exists };
                    Expr::Quant(q, v, d, Box::new(body))
                }
            ),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in expr_strategy()) {
        let printed = print(&e);
        let reparsed = parse(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(reparsed, e);
    }

    #[test]
    fn quantifier_duality(
        values in prop::collection::vec(0i64..3, 1..4),
        threshold in 0i64..3,
    ) {
        let keys: Vec<String> = (0..values.len()).map(|i| format!("k{i}")).collect();
        let m = Value::Map(keys.iter().zip(&values).map(|(k, v)| (atom(k), Value::Int(*v))).collect());
        let state = BTreeMap::from([("m".to_string(), m), ("t".to_string(), Value::Int(threshold))]);
        let constants = BTreeMap::from([("K".to_string(), keys.iter().map(|k| atom(k)).collect())]);
        let lhs = parse("not (forall x in K: m[x] >= t)").unwrap();
        let rhs = parse("exists x in K: not m[x] >= t").unwrap();
        prop_assert_eq!(
            evaluate(&lhs, &state, &constants).unwrap(),
            evaluate(&rhs, &state, &constants).unwrap()
        );
        let lhs = parse("not (exists x in K: m[x] = t)").unwrap();
        let rhs = parse("forall x in K: m[x] # t").unwrap();
        prop_assert_eq!(
            evaluate(&lhs, &state, &constants).unwrap(),
            evaluate(&rhs, &state, &constants).unwrap()
        );
    }
}
