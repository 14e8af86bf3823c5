//! Principle templates, the property taxonomy and the APS layer map.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{parse, Expr};
use crate::ir::{Modality, Principle, ProtocolModel, Property, PropertyClass, Sort};

/// Expected sort of a template role.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoleSort {
    /// A constant domain.
    Domain,
    Bool,
    Counter,
    /// ENUM containing the given atoms.
    EnumWith(&'static [&'static str]),
    /// MAP(D -> BOOL)
    MapToBool,
    /// MAP(D -> SET(_))
    MapToSet,
    /// MAP(D -> MAP(D -> SET(_)))
    MapToMapToSet,
    /// MAP(D -> ENUM) containing the given atoms.
    MapToEnumWith(&'static [&'static str]),
}

impl fmt::Display for RoleSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoleSort::Domain => f.write_str("domain"),
            RoleSort::Bool => f.write_str("BOOL"),
            RoleSort::Counter => f.write_str("COUNTER"),
            RoleSort::EnumWith(v) => write!(f, "ENUM ∋ {}", v.join(", ")),
            RoleSort::MapToBool => f.write_str("MAP(D -> BOOL)"),
            RoleSort::MapToSet => f.write_str("MAP(D -> SET)"),
            RoleSort::MapToMapToSet => f.write_str("MAP(D -> MAP(D -> SET))"),
            RoleSort::MapToEnumWith(v) => write!(f, "MAP(D -> ENUM ∋ {})", v.join(", ")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrincipleTemplate {
    pub id: Principle,
    pub name: &'static str,
    /// Invariant over role names.
    pub schematic: &'static str,
    pub roles: &'static [(&'static str, RoleSort)],
    /// True when the formula is written out in the source material; false
    /// when it was reconstructed from a prose definition.
    pub printed_formula: bool,
}

impl PrincipleTemplate {
    pub fn schematic_expr(&self) -> Expr {
        parse(self.schematic).expect("catalog schematics parse")
    }

    /// Conventional property id, e.g. `P3_DelegationMonotonicity`.
    pub fn property_id(&self) -> String {
        format!("{}_{}", self.id, self.name.replace([' ', '-', '&'], ""))
    }
}

static TEMPLATES: [PrincipleTemplate; 11] = [
    PrincipleTemplate {
        id: Principle::P1,
        name: "IdentityVerifiability",
        schematic: "msgs_from_unauthenticated = 0",
        roles: &[("msgs_from_unauthenticated", RoleSort::Counter)],
        printed_formula: false,
    },
    PrincipleTemplate {
        id: Principle::P2,
        name: "CapabilityAttestation",
        schematic: "forall x in Principals: capability_used[x] => manifest_attested[x]",
        roles: &[
            ("Principals", RoleSort::Domain),
            ("capability_used", RoleSort::MapToBool),
            ("manifest_attested", RoleSort::MapToBool),
        ],
        printed_formula: false,
    },
    PrincipleTemplate {
        id: Principle::P3,
        name: "DelegationMonotonicity",
        schematic: "forall ag1 in AgentID: forall ag2 in AgentID: ag1 # ag2 => delegation[ag1][ag2] subseteq original_caps[ag1]",
        roles: &[
            ("AgentID", RoleSort::Domain),
            ("delegation", RoleSort::MapToMapToSet),
            ("original_caps", RoleSort::MapToSet),
        ],
        printed_formula: true,
    },
    PrincipleTemplate {
        id: Principle::P4,
        name: "PromptIntegrity",
        schematic: "prompt_tainted = false",
        roles: &[("prompt_tainted", RoleSort::Bool)],
        printed_formula: false,
    },
    PrincipleTemplate {
        id: Principle::P5,
        name: "ConsentExplicitness",
        schematic: "forall op in Ops: executed[op] => consent_granted[op]",
        roles: &[
            ("Ops", RoleSort::Domain),
            ("executed", RoleSort::MapToBool),
            ("consent_granted", RoleSort::MapToBool),
        ],
        printed_formula: false,
    },
    PrincipleTemplate {
        id: Principle::P6,
        name: "AuditCompleteness",
        schematic: "audit_count >= msg_count",
        roles: &[
            ("audit_count", RoleSort::Counter),
            ("msg_count", RoleSort::Counter),
        ],
        printed_formula: true,
    },
    PrincipleTemplate {
        id: Principle::P7,
        name: "FailSecureDefaults",
        schematic: "error_raised => error_mode = RESTRICTIVE",
        roles: &[
            ("error_raised", RoleSort::Bool),
            ("error_mode", RoleSort::EnumWith(&["RESTRICTIVE", "PERMISSIVE"])),
        ],
        printed_formula: false,
    },
    PrincipleTemplate {
        id: Principle::P8,
        name: "CredRevocation",
        schematic: "forall s in Sessions: session_state[s] = CLOSED => credentials[s] = REVOKED",
        roles: &[
            ("Sessions", RoleSort::Domain),
            ("session_state", RoleSort::MapToEnumWith(&["CLOSED"])),
            ("credentials", RoleSort::MapToEnumWith(&["REVOKED"])),
        ],
        printed_formula: true,
    },
    PrincipleTemplate {
        id: Principle::WF,
        name: "WireFormatIntegrity",
        schematic: "msg_wellformed = true",
        roles: &[("msg_wellformed", RoleSort::Bool)],
        printed_formula: false,
    },
    PrincipleTemplate {
        id: Principle::SL,
        name: "SessionLifecycle",
        schematic: "forall s in Sessions: session_state[s] # UNDEFINED",
        roles: &[
            ("Sessions", RoleSort::Domain),
            ("session_state", RoleSort::MapToEnumWith(&["UNDEFINED"])),
        ],
        printed_formula: false,
    },
    PrincipleTemplate {
        id: Principle::CS,
        name: "CompositionSafety",
        schematic: "not bridge_compromised",
        roles: &[("bridge_compromised", RoleSort::Bool)],
        printed_formula: false,
    },
];

pub fn templates() -> &'static [PrincipleTemplate] {
    &TEMPLATES
}

pub fn template(p: Principle) -> &'static PrincipleTemplate {
    TEMPLATES.iter().find(|t| t.id == p).expect("one template per principle")
}

/// Role name to model symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoleBinding {
    pub roles: BTreeMap<String, String>,
    /// Class used when the (protocol, principle) pair is not in the taxonomy.
    pub class: Option<PropertyClass>,
}

impl RoleBinding {
    pub fn new(pairs: &[(&str, &str)]) -> Self {
        RoleBinding {
            roles: pairs
                .iter()
                .map(|(r, s)| (r.to_string(), s.to_string()))
                .collect(),
            class: None,
        }
    }

    /// Binds every role to the symbol of the same name.
    pub fn identity(t: &PrincipleTemplate) -> Self {
        let pairs: Vec<(&str, &str)> = t.roles.iter().map(|(r, _)| (*r, *r)).collect();
        Self::new(&pairs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("{principle}: role `{role}` is not bound")]
    MissingRole { principle: Principle, role: String },
    #[error("{principle}: role `{role}` bound to `{symbol}`, which {problem}")]
    SortMismatch {
        principle: Principle,
        role: String,
        symbol: String,
        problem: String,
    },
    #[error("{principle} is not cataloged for `{protocol}` and the binding names no class")]
    NoClass { principle: Principle, protocol: String },
}

fn enum_has(sort: &Sort, atoms: &[&str]) -> bool {
    matches!(sort, Sort::Enum(vals) if atoms.iter().all(|a| vals.iter().any(|v| &**v == *a)))
}

fn sort_matches(model: &ProtocolModel, symbol: &str, want: RoleSort) -> Result<(), String> {
    if want == RoleSort::Domain {
        return match model.domain(symbol) {
            Some(_) => Ok(()),
            None => Err("is not a constant domain".into()),
        };
    }
    let decl = model
        .var(symbol)
        .ok_or_else(|| "is not a state variable".to_string())?;
    let s = &decl.sort;
    let ok = match want {
        RoleSort::Domain => unreachable!(),
        RoleSort::Bool => *s == Sort::Bool,
        RoleSort::Counter => matches!(s, Sort::Counter(_)),
        RoleSort::EnumWith(atoms) => enum_has(s, atoms),
        RoleSort::MapToBool => matches!(s, Sort::Map(_, v) if **v == Sort::Bool),
        RoleSort::MapToSet => matches!(s, Sort::Map(_, v) if matches!(**v, Sort::Set(_))),
        RoleSort::MapToMapToSet => matches!(
            s,
            Sort::Map(_, v) if matches!(&**v, Sort::Map(_, w) if matches!(**w, Sort::Set(_)))
        ),
        RoleSort::MapToEnumWith(atoms) => matches!(s, Sort::Map(_, v) if enum_has(v, atoms)),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("has sort {s}, expected {want}"))
    }
}

/// Instantiates `template` against `model` through `binding`.
pub fn instantiate(
    template: &PrincipleTemplate,
    model: &ProtocolModel,
    binding: &RoleBinding,
) -> Result<Property, InstantiateError> {
    for (role, want) in template.roles {
        let symbol = binding
            .roles
            .get(*role)
            .ok_or_else(|| InstantiateError::MissingRole {
                principle: template.id,
                role: role.to_string(),
            })?;
        sort_matches(model, symbol, *want).map_err(|problem| InstantiateError::SortMismatch {
            principle: template.id,
            role: role.to_string(),
            symbol: symbol.clone(),
            problem,
        })?;
    }
    let class = match taxonomy(&model.name, template.id) {
        Taxonomy::Cataloged { class, .. } => class,
        Taxonomy::NotCataloged { .. } => binding.class.ok_or_else(|| InstantiateError::NoClass {
            principle: template.id,
            protocol: model.name.clone(),
        })?,
    };
    let invariant = template
        .schematic_expr()
        .rename(&|s| binding.roles.get(s).cloned());
    Ok(Property {
        id: template.property_id(),
        principle: template.id,
        class,
        invariant,
        sources: Vec::new(),
    })
}

/// Row of the taxonomy table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Taxonomy {
    Cataloged {
        class: PropertyClass,
        modality: Modality,
        /// Spec-modality note such as "MUST sanitize", or "NS".
        note: &'static str,
    },
    NotCataloged {
        reason: &'static str,
    },
}

/// Bundled protocol names.
pub const PROTOCOLS: [&str; 5] = ["mcp", "a2a", "anp", "acp-cap", "acp-client"];

const NO_SURFACE: &str = "the protocol has no modeled surface for this principle";
const UNCHECKED: &str = "not among the principles checked for this protocol";

/// Taxonomy lookup; unknown protocols and unlisted pairs are `NotCataloged`.
pub fn taxonomy(protocol: &str, principle: Principle) -> Taxonomy {
    use Modality::*;
    use Principle::*;
    use PropertyClass::*;
    let c = |class, modality, note| Taxonomy::Cataloged {
        class,
        modality,
        note,
    };
    let ns = |class| c(class, NotSpecified, "NS");
    let nc = |reason| Taxonomy::NotCataloged { reason };
    match (protocol, principle) {
        // Composition is outside every single-protocol specification.
        (p, CS) if PROTOCOLS.contains(&p) => ns(AasmHardening),

        ("mcp", P1) => c(SpecMandated, Must, "MUST authorize"),
        ("mcp", P2) => ns(AasmHardening),
        ("mcp", P3) => nc(NO_SURFACE),
        ("mcp", P4) => c(SpecMandated, Must, "MUST sanitize"),
        ("mcp", P5) => c(SpecRecommended, Should, "SHOULD consent"),
        ("mcp", P6) => c(SpecRecommended, Should, "SHOULD log"),
        ("mcp", P7) => c(SpecMandated, Must, "MUST return 401"),
        ("mcp", P8) => c(SpecRecommended, Should, "SHOULD expire"),
        ("mcp", WF | SL) => ns(ApsCompleteness),

        ("a2a", P1) => c(SpecMandated, Must, "MUST authenticate"),
        ("a2a", P2) => c(AasmHardening, May, "MAY sign"),
        ("a2a", P3 | P4 | P5 | P6 | P7 | P8) => ns(AasmHardening),
        ("a2a", WF | SL) => ns(ApsCompleteness),

        ("anp", P1) => c(SpecMandated, Must, "MUST verify DID"),
        ("anp", P2 | P3 | P5 | P6 | P8) => ns(AasmHardening),
        ("anp", P4 | P7) => nc(NO_SURFACE),
        ("anp", WF | SL) => ns(ApsCompleteness),

        ("acp-cap", P2 | P6 | P7) => ns(AasmHardening),
        ("acp-cap", P5) => c(SpecRecommended, Should, "SHOULD gate"),
        ("acp-cap", P8) => c(SpecRecommended, Should, "SHOULD revoke"),
        ("acp-cap", WF | SL) => ns(ApsCompleteness),
        ("acp-cap", P1 | P3 | P4) => nc(UNCHECKED),

        ("acp-client", P2) => c(SpecMandated, Must, "MUST verify capabilities"),
        ("acp-client", P4 | P6 | P7) => ns(AasmHardening),
        ("acp-client", P5) => c(AasmHardening, May, "MAY request permission"),
        ("acp-client", WF | SL) => ns(ApsCompleteness),
        ("acp-client", P1 | P3 | P8) => nc(NO_SURFACE),

        _ => nc("unknown protocol"),
    }
}

/// Class the taxonomy assigns, if the pair is cataloged.
pub fn expected_class(protocol: &str, principle: Principle) -> Option<PropertyClass> {
    match taxonomy(protocol, principle) {
        Taxonomy::Cataloged { class, .. } => Some(class),
        Taxonomy::NotCataloged { .. } => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ApsLayer {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    CrossLayer,
}

impl ApsLayer {
    pub fn title(self) -> &'static str {
        match self {
            ApsLayer::L1 => "L1: Transport Security",
            ApsLayer::L2 => "L2: Message Transport & Wire Format",
            ApsLayer::L3 => "L3: Session & Resilience",
            ApsLayer::L4 => "L4: Identity, Capability & Trust",
            ApsLayer::L5 => "L5: Semantic Operations & Consent",
            ApsLayer::L6 => "L6: Audit & Accountability",
            ApsLayer::CrossLayer => "cross-layer",
        }
    }
}

pub fn aps_layer(p: Principle) -> ApsLayer {
    use Principle::*;
    match p {
        WF => ApsLayer::L2,
        SL | P7 => ApsLayer::L3,
        P1 | P2 | P3 | P8 => ApsLayer::L4,
        P4 | P5 => ApsLayer::L5,
        P6 => ApsLayer::L6,
        CS => ApsLayer::CrossLayer,
    }
}

/// Markdown reference document for the catalog.
pub fn reference_doc() -> String {
    let mut out = String::from("# AASM principle catalog\n\n");
    out.push_str("Generated by `agentconform catalog`. Do not edit by hand.\n\n");
    for t in templates() {
        out.push_str(&format!("## {} {}\n\n", t.id, t.name));
        out.push_str(&format!("- layer: {}\n", aps_layer(t.id).title()));
        out.push_str(&format!("- schematic: `{}`\n", t.schematic));
        if !t.printed_formula {
            out.push_str("- formula reconstructed from the prose definition\n");
        }
        out.push_str("- roles:\n");
        for (role, sort) in t.roles {
            out.push_str(&format!("  - `{role}`: {sort}\n"));
        }
        out.push_str("\n| protocol | class | modality |\n|---|---|---|\n");
        for p in PROTOCOLS {
            match taxonomy(p, t.id) {
                Taxonomy::Cataloged { class, note, .. } => {
                    out.push_str(&format!("| {p} | {} | {note} |\n", class.short()))
                }
                Taxonomy::NotCataloged { reason } => {
                    out.push_str(&format!("| {p} | NOT_CATALOGED | {reason} |\n"))
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests;
