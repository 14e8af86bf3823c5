use std::net::TcpListener;

use super::*;
use crate::checker::check;

fn cx(model: &str, property: &str) -> Counterexample {
    let m = models::builtin(model).unwrap();
    match check(&m, m.property(property).unwrap(), &Bounds::default()).unwrap() {
        CheckResult::Fail { cx, .. } => cx,
        other => panic!("{model}/{property}: {other:?}"),
    }
}

#[test]
fn adapter_tables() {
    assert_eq!(adapter_table("mcp").unwrap().len(), 7);
    assert_eq!(adapter_table("a2a").unwrap().len(), 6);
    assert_eq!(adapter_table("anp"), Err(ReplayError::Unsupported("anp".into())));
    assert!(adapter_is_total("mcp").unwrap());
    assert!(adapter_is_total("a2a").unwrap());
    let names: Vec<&str> = adapter_table("mcp").unwrap().actions.values().map(|o| o.name).collect();
    for n in ["initialize", "tools/list", "tools/call", "shutdown", "inject_output"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn empty_counterexample_list() {
    assert_eq!(generate_tests(&[]), Suite::default());
}

#[test]
fn unsupported_models_are_skipped() {
    let suite = generate_tests(&[cx("anp", "WF_WireFormatIntegrity")]);
    assert!(suite.tests.is_empty());
    assert_eq!(suite.skipped.len(), 1);
    assert!(suite.skipped[0].1.contains("anp"));
}

#[test]
fn mcp_p8_test_shape() {
    let t = generate_test(&cx("mcp", "P8_CredRevocation")).unwrap();
    let ops: Vec<&str> = t.steps.iter().map(|s| s.operation.as_str()).collect();
    assert_eq!(ops, ["initialize", "close_session"]);
    assert_eq!(t.oracle, Oracle::CredentialRevoked);
    let vulnerable = run(&t, Profile::Vulnerable, &Mode::Mock).unwrap();
    assert_eq!(vulnerable.outcome, Outcome::Violated);
    assert_eq!(vulnerable.probes.len(), 1);
    assert_eq!(vulnerable.probes[0].status, Status::Accepted);
    let hardened = run(&t, Profile::Hardened, &Mode::Mock).unwrap();
    assert_eq!(hardened.outcome, Outcome::Upheld);
    assert_eq!(hardened.probes[0].status, Status::Rejected(mcp::REVOKED));
}

#[test]
fn a2a_p3_ends_in_redelegation() {
    let t = generate_test(&cx("a2a", "P3_DelegationMonotonicity")).unwrap();
    assert_eq!(t.steps.last().unwrap().operation, "redelegate");
    assert_eq!(run(&t, Profile::Vulnerable, &Mode::Mock).unwrap().outcome, Outcome::Violated);
    assert_eq!(run(&t, Profile::Hardened, &Mode::Mock).unwrap().outcome, Outcome::Upheld);
}

#[test]
fn every_generated_test_discriminates() {
    let suite = generate_tests(&builtin_counterexamples());
    assert!(suite.skipped.is_empty(), "{:?}", suite.skipped);
    assert_eq!(suite.tests.len(), 13);
    for t in &suite.tests {
        for (profile, expected) in &t.expected {
            let r = run(t, *profile, &Mode::Mock).unwrap();
            assert_eq!(r.outcome, *expected, "{} on {}: {}", t.id, profile.as_str(), r.detail);
        }
    }
}

#[test]
fn transcripts_align_with_traces() {
    for t in generate_tests(&builtin_counterexamples()).tests {
        let r = run(&t, Profile::Vulnerable, &Mode::Mock).unwrap();
        assert_eq!(r.transcript.len(), t.counterexample.steps.len());
        for (ex, step) in r.transcript.iter().zip(&t.counterexample.steps) {
            assert_eq!(ex.transition, step.action);
        }
    }
}

#[test]
fn mock_runs_are_byte_identical() {
    for t in generate_tests(&builtin_counterexamples()).tests {
        for p in Profile::ALL {
            let a = run(&t, p, &Mode::Mock).unwrap().render();
            let b = run(&t, p, &Mode::Mock).unwrap().render();
            assert_eq!(a, b, "{}", t.id);
        }
    }
}

#[test]
fn test_case_round_trips_through_json() {
    let t = generate_test(&cx("a2a", "P8_CredRevocation")).unwrap();
    let back = TestCase::from_json(&t.to_json()).unwrap();
    assert_eq!(back, t);
}

#[test]
fn framing_depends_on_read_boundaries() {
    let line = b"{\"jsonrpc\":\"2.0\",\"id\":1,\"method\":\"ping\"}\n";
    for (profile, want) in [(Profile::Vulnerable, Status::Malformed), (Profile::Hardened, Status::Accepted)] {
        let mut m = mcp::McpMock::new(profile);
        let mut out = m.feed(&line[..10]);
        out.extend(m.feed(&line[10..]));
        assert_eq!(mcp::status_of(&out, 1), want, "{}", profile.as_str());
    }
}

#[test]
fn a2a_mock_routes() {
    let mut m = a2a::A2aMock::new(Profile::Vulnerable);
    let get = |m: &mut a2a::A2aMock, raw: &str| a2a::parse_response(&m.handle(raw.as_bytes())).unwrap();
    let (code, card) = get(&mut m, "GET /.well-known/agent-card?agent=a2 HTTP/1.1\r\nHost: x\r\n\r\n");
    assert_eq!(code, 200);
    assert_eq!(card["capabilities"][0], "c2");
    assert!(card.get("signature").is_none());
    assert_eq!(get(&mut m, "GET /nowhere HTTP/1.1\r\nHost: x\r\n\r\n").0, 404);
    assert_eq!(get(&mut m, "garbage").0, 400);
}

#[test]
fn live_mode_against_served_mock() {
    for (model, property) in [("mcp", "P8_CredRevocation"), ("a2a", "P8_CredRevocation")] {
        let t = generate_test(&cx(model, property)).unwrap();
        for profile in Profile::ALL {
            let listener = TcpListener::bind("127.0.0.1:0").unwrap();
            let addr = listener.local_addr().unwrap().to_string();
            let connections = if model == "mcp" { 1 } else { t.steps.len() + 1 };
            let name = model.to_string();
            let server = std::thread::spawn(move || serve(&name, profile, listener, Some(connections)));
            let r = run(&t, profile, &Mode::Live(addr)).unwrap();
            assert_eq!(r.mode, "live");
            let expected = t.expected.iter().find(|(p, _)| *p == profile).unwrap().1;
            assert_eq!(r.outcome, expected, "{model} {}", profile.as_str());
            server.join().unwrap().unwrap();
        }
    }
}
