//! Implementation-level oracles, one per principle.

use serde_json::Value as Json;

use super::{a2a, Exchange, Outcome, Status, TestCase, DIRECTIVE};
use crate::ir::Principle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Oracle {
    /// P1: requests without credentials are refused.
    Authenticated,
    /// P2: every capability used is backed by an attested manifest.
    ManifestAttested,
    /// P3: re-delegation beyond granted scope is refused.
    DelegationBounded,
    /// P4: injected directives never come back unsanitized.
    PromptSanitized,
    /// P5: no capability runs without a prior consent grant.
    ConsentRequired,
    /// P6: operations issued never outnumber audit-log entries.
    AuditComplete,
    /// P7: a failed task accepts no further work.
    FailSecure,
    /// P8: credentials of a closed session are refused.
    CredentialRevoked,
    /// WF: a request split across writes gets exactly one well-formed reply.
    FramingIntact,
    /// SL: requests on a shut-down session get a defined error.
    LifecycleDefined,
}

impl Oracle {
    pub fn for_principle(p: Principle) -> Option<Oracle> {
        Some(match p {
            Principle::P1 => Oracle::Authenticated,
            Principle::P2 => Oracle::ManifestAttested,
            Principle::P3 => Oracle::DelegationBounded,
            Principle::P4 => Oracle::PromptSanitized,
            Principle::P5 => Oracle::ConsentRequired,
            Principle::P6 => Oracle::AuditComplete,
            Principle::P7 => Oracle::FailSecure,
            Principle::P8 => Oracle::CredentialRevoked,
            Principle::WF => Oracle::FramingIntact,
            Principle::SL => Oracle::LifecycleDefined,
            Principle::CS => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Oracle::Authenticated => "authenticated",
            Oracle::ManifestAttested => "manifest-attested",
            Oracle::DelegationBounded => "delegation-bounded",
            Oracle::PromptSanitized => "prompt-sanitized",
            Oracle::ConsentRequired => "consent-required",
            Oracle::AuditComplete => "audit-complete",
            Oracle::FailSecure => "fail-secure",
            Oracle::CredentialRevoked => "credential-revoked",
            Oracle::FramingIntact => "framing-intact",
            Oracle::LifecycleDefined => "lifecycle-defined",
        }
    }

    pub fn parse(s: &str) -> Option<Oracle> {
        ALL.iter().copied().find(|o| o.as_str() == s)
    }

    pub fn describe(self) -> &'static str {
        match self {
            Oracle::Authenticated => "a request without credentials must be refused",
            Oracle::ManifestAttested => "every tool or agent used must carry an attestation in its manifest",
            Oracle::DelegationBounded => "re-delegation beyond granted scope must be refused",
            Oracle::PromptSanitized => "an injected directive must not appear unsanitized in returned context",
            Oracle::ConsentRequired => "no capability may execute before consent is granted",
            Oracle::AuditComplete => "operation count must not exceed audit-log entry count",
            Oracle::FailSecure => "a failed task must refuse further work",
            Oracle::CredentialRevoked => "closed-session credential reuse must be rejected",
            Oracle::FramingIntact => "a request split across writes must get exactly one well-formed reply",
            Oracle::LifecycleDefined => "a request on a shut-down session must get a defined error",
        }
    }
}

const ALL: [Oracle; 10] = [
    Oracle::Authenticated,
    Oracle::ManifestAttested,
    Oracle::DelegationBounded,
    Oracle::PromptSanitized,
    Oracle::ConsentRequired,
    Oracle::AuditComplete,
    Oracle::FailSecure,
    Oracle::CredentialRevoked,
    Oracle::FramingIntact,
    Oracle::LifecycleDefined,
];

fn response_json(protocol: &str, ex: &Exchange) -> Json {
    if protocol == "a2a" {
        a2a::parse_response(ex.response.as_bytes())
            .map(|(_, b)| b)
            .unwrap_or(Json::Null)
    } else {
        ex.response
            .lines()
            .next()
            .and_then(|l| serde_json::from_str::<Json>(l).ok())
            .and_then(|r| r.get("result").cloned())
            .unwrap_or(Json::Null)
    }
}

/// Operations that reach the endpoint's own surface, as opposed to
/// harness-only control steps.
fn counted(ex: &Exchange) -> bool {
    !matches!(ex.operation.as_str(), "complete_task" | "task_error") && ex.error.is_none()
}

fn verdict(violations: Vec<String>, checked: usize) -> (Outcome, String) {
    if violations.is_empty() {
        (Outcome::Upheld, format!("{checked} check(s) held"))
    } else {
        (Outcome::Violated, violations.join("; "))
    }
}

/// Judges the oracle of `test` on what the endpoint did.
pub fn evaluate(test: &TestCase, transcript: &[Exchange], probes: &[Exchange]) -> (Outcome, String) {
    let protocol = test.model.as_str();
    let steps = |op: &'static str| transcript.iter().filter(move |e| e.operation == op);
    let mut bad = Vec::new();
    let mut checked = 0;
    match test.oracle {
        Oracle::Authenticated => {
            for e in steps("unauthenticated_request") {
                checked += 1;
                if e.status == Status::Accepted {
                    bad.push(format!("step {}: unauthenticated request accepted", e.step));
                }
            }
        }
        Oracle::ManifestAttested => {
            let key = if protocol == "a2a" { "signature" } else { "attestation" };
            for p in probes.iter().filter(|p| p.operation != "initialize") {
                let body = response_json(protocol, p);
                let entries: Vec<Json> = match body.get("tools").and_then(Json::as_array) {
                    Some(tools) => tools.clone(),
                    None => vec![body],
                };
                for entry in entries {
                    checked += 1;
                    if entry.get(key).and_then(Json::as_str).is_none() {
                        let name = entry.get("name").and_then(Json::as_str).unwrap_or("?");
                        bad.push(format!("`{name}` has no {key}"));
                    }
                }
            }
        }
        Oracle::DelegationBounded => {
            for e in steps("redelegate") {
                checked += 1;
                if e.status == Status::Accepted {
                    bad.push(format!("step {}: re-delegation accepted", e.step));
                }
            }
        }
        Oracle::PromptSanitized => {
            for e in transcript {
                checked += 1;
                if e.response.contains(DIRECTIVE) {
                    bad.push(format!("step {}: directive returned verbatim", e.step));
                }
            }
        }
        Oracle::ConsentRequired => {
            let mut consented = std::collections::BTreeSet::new();
            for e in transcript {
                match e.operation.as_str() {
                    "consent_prompt" if e.status == Status::Accepted => {
                        consented.insert(e.param("a").unwrap_or("a1").to_string());
                    }
                    "send_task" if e.status == Status::Accepted => {
                        checked += 1;
                        let agent = e.param("a").unwrap_or("a1");
                        let state = response_json(protocol, e)["state"].as_str().unwrap_or("").to_string();
                        if state == "working" && !consented.contains(agent) {
                            bad.push(format!("step {}: task started for `{agent}` without consent", e.step));
                        }
                    }
                    "tools/call" => {
                        checked += 1;
                        if e.status == Status::Accepted {
                            bad.push(format!("step {}: tool executed without consent", e.step));
                        }
                    }
                    _ => {}
                }
            }
        }
        Oracle::AuditComplete => {
            let ops = transcript.iter().filter(|e| counted(e)).count();
            for p in probes {
                checked += 1;
                let entries = response_json(protocol, p)["entries"]
                    .as_array()
                    .map_or(0, Vec::len);
                if ops > entries {
                    bad.push(format!("{ops} operation(s) but {entries} audit entr(ies)"));
                }
            }
        }
        Oracle::FailSecure | Oracle::CredentialRevoked => {
            for p in probes {
                checked += 1;
                if p.status == Status::Accepted {
                    bad.push(format!("probe `{}` accepted", p.operation));
                }
            }
        }
        Oracle::FramingIntact => {
            for e in steps("split_write") {
                checked += 1;
                if e.status != Status::Accepted {
                    bad.push(format!("step {}: split request answered as {}", e.step, e.status));
                }
            }
        }
        Oracle::LifecycleDefined => {
            for p in probes {
                checked += 1;
                if !matches!(p.status, Status::Rejected(_)) {
                    bad.push(format!("request after shutdown answered as {}", p.status));
                }
            }
        }
    }
    verdict(bad, checked)
}
