//! The five bundled composition patterns and their CS invariants.

use super::{compose, cs_property, parse_update, BridgeSpec, ComposeError, ComposedModel, RoutingRule, Side};
use crate::expr;
use crate::ir::Property;
use crate::models;

const ISOLATION: (&str, &str) = ("CS_IsolationHolds", "not bridge_compromised");
/// Every routed operation lands in some side's audit log.
const AUDIT_CHAIN: (&str, &str) = ("CS_AuditChain", "bridge_op_count <= bridge_audited_count");

const A_AMPLIFIED: &str = "exists x in A_AgentID: exists y in A_AgentID: \
     x # y and not (A_delegation[x][y] subseteq A_original_caps[x])";

const B_DELEGATION_BOUNDED: &str = "bridge_compromised => forall ag1 in B_AgentID: \
     forall ag2 in B_AgentID: ag1 # ag2 => B_delegation[ag1][ag2] subseteq B_original_caps[ag1]";

const B_GATED_CONSENT: &str =
    "forall op in B_GatedOps: B_executed[op] => B_consent_granted[op]";

/// A named pairing of two bundled models with a bridge and CS invariants.
#[derive(Clone, Debug)]
pub struct Composition {
    pub id: &'static str,
    pub title: &'static str,
    pub a: &'static str,
    pub b: &'static str,
    pub bridge: BridgeSpec,
    pub invariants: Vec<(&'static str, String)>,
}

impl Composition {
    /// Composes the two bundled models through this pattern's bridge.
    pub fn build(&self) -> Result<ComposedModel, ComposeError> {
        self.build_with(&self.bridge)
    }

    /// Same models, different bridge (for example an empty one).
    pub fn build_with(&self, bridge: &BridgeSpec) -> Result<ComposedModel, ComposeError> {
        let a = models::builtin(self.a)?;
        let b = models::builtin(self.b)?;
        compose(&a, &b, bridge)
    }
}

/// CS properties of a composition, in declaration order.
pub fn cs_properties(c: &Composition) -> Vec<Property> {
    c.invariants.iter().map(|(id, inv)| cs_property(id, inv)).collect()
}

fn e(src: &str) -> expr::Expr {
    expr::parse(src).unwrap_or_else(|err| panic!("`{src}`: {err}"))
}

fn u(src: &str) -> crate::ir::Update {
    parse_update(src).unwrap_or_else(|err| panic!("`{src}`: {err}"))
}

fn shared(mut rest: Vec<(&'static str, String)>) -> Vec<(&'static str, String)> {
    let mut out = vec![(ISOLATION.0, ISOLATION.1.to_string())];
    out.append(&mut rest);
    out.push((AUDIT_CHAIN.0, AUDIT_CHAIN.1.to_string()));
    out
}

fn tool_delegation() -> Composition {
    let mut rule = RoutingRule::new("call_to_delegate", Side::A, "CallTool", "Delegate");
    rule.taint = Some(e("A_output_poisoned"));
    rule.tainted_guard = Some(e("B_from # B_to"));
    rule.tainted_updates = vec![u("B_prompt_tainted := true")];
    Composition {
        id: "tool-delegation",
        title: "Tool + Delegation",
        a: "mcp",
        b: "a2a",
        bridge: BridgeSpec {
            name: "mcp-a2a".into(),
            rules: vec![rule],
        },
        invariants: shared(vec![
            ("CS_NoLeakage", B_DELEGATION_BOUNDED.to_string()),
            ("CS_TaintContainment", "B_prompt_tainted = false".to_string()),
        ]),
    }
}

fn chained_tools() -> Composition {
    let mut rule = RoutingRule::new("read_via_tool", Side::A, "fs_read", "CallTool");
    rule.forwards_credentials = true;
    rule.taint = Some(e("B_output_poisoned"));
    rule.tainted_updates = vec![
        u("A_prompt_tainted := true"),
        u("A_executed[A_write_file] := true"),
    ];
    Composition {
        id: "chained-tools",
        title: "Chained tool servers",
        a: "acp-client",
        b: "mcp",
        bridge: BridgeSpec {
            name: "acp-client-mcp".into(),
            rules: vec![rule],
        },
        invariants: shared(vec![
            (
                "CS_NoLeakage",
                "bridge_compromised => forall op in A_Ops: A_executed[op] => A_consent_granted[op]"
                    .to_string(),
            ),
            ("CS_NoCredentialForwarding", "not credential_forwarded".to_string()),
            ("CS_TransitiveTrust", "A_prompt_tainted => A_content_poisoned".to_string()),
        ]),
    }
}

fn tool_capability() -> Composition {
    let mut rule = RoutingRule::new("call_to_op", Side::A, "CallTool", "RunOp");
    rule.target_guard = Some(e("B_session_state[B_s] = OPEN and B_credentials[B_s] = ACTIVE"));
    rule.taint = Some(e("A_output_poisoned"));
    Composition {
        id: "tool-capability",
        title: "Tool + Capability",
        a: "mcp",
        b: "acp-cap",
        bridge: BridgeSpec {
            name: "mcp-acp-cap".into(),
            rules: vec![rule],
        },
        invariants: shared(vec![
            ("CS_NoLeakage", format!("bridge_compromised => {B_GATED_CONSENT}")),
            ("CS_ConsentPreserved", B_GATED_CONSENT.to_string()),
        ]),
    }
}

fn delegation_capability() -> Composition {
    let mut rule = RoutingRule::new("delegate_to_op", Side::A, "Delegate", "RunOp");
    rule.forwards_credentials = true;
    rule.taint = Some(e(A_AMPLIFIED));
    rule.tainted_guard = Some(e("B_session_state[B_s] = OPEN and B_credentials[B_s] = ACTIVE"));
    Composition {
        id: "delegation-capability",
        title: "Delegation + Capability",
        a: "a2a",
        b: "acp-cap",
        bridge: BridgeSpec {
            name: "a2a-acp-cap".into(),
            rules: vec![rule],
        },
        invariants: shared(vec![
            ("CS_NoLeakage", format!("bridge_compromised => {B_GATED_CONSENT}")),
            (
                "CS_CredentialLifecycle",
                "forall s in B_Sessions: (B_session_state[s] = CLOSED and credential_forwarded) \
                 => forall t in A_Sessions: A_credentials[t] # ACTIVE"
                    .to_string(),
            ),
        ]),
    }
}

fn federated_delegation() -> Composition {
    let mut rule = RoutingRule::new("federate", Side::A, "Delegate", "Delegate");
    rule.taint = Some(e(A_AMPLIFIED));
    Composition {
        id: "federated-delegation",
        title: "Federated delegation",
        a: "a2a",
        b: "anp",
        bridge: BridgeSpec {
            name: "a2a-anp".into(),
            rules: vec![rule],
        },
        invariants: shared(vec![
            ("CS_NoLeakage", B_DELEGATION_BOUNDED.to_string()),
            (
                "CS_FederatedDomainIsolation",
                "forall x in A_AgentID: forall y in B_AgentID: x # y".to_string(),
            ),
        ]),
    }
}

pub fn builtin_compositions() -> Vec<Composition> {
    vec![
        tool_delegation(),
        chained_tools(),
        tool_capability(),
        delegation_capability(),
        federated_delegation(),
    ]
}

pub fn composition(id: &str) -> Result<Composition, ComposeError> {
    builtin_compositions()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| ComposeError::UnknownPattern(id.to_string()))
}
