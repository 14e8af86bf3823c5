//! Clause store and typed protocol IR.

mod clauses;
mod coverage;
mod error;
mod load;
mod serialize;
mod syntax;
mod validate;


use std::fmt;
use std::str::FromStr;

use crate::expr::Expr;
use crate::value::{atom, Atom, Value};

pub use clauses::{load_clauses, parse_clauses, serialize_clauses};
pub use coverage::{coverage, CoverageError, CoverageReport, Resolution};
pub use error::{IrError, IrErrorKind};
pub use load::{load_model, parse_model};
pub use serialize::serialize_model;
pub use validate::{validate, Finding, ValidationReport};

/// Marker text for transitions that are modeling assumptions rather than
/// spec-derived behavior.
pub const INVENTED_MARKER: &str = "invented \u{2014} modeling assumption";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Must,
    Should,
    May,
    NotSpecified,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Must => "MUST",
            Modality::Should => "SHOULD",
            Modality::May => "MAY",
            Modality::NotSpecified => "NOT_SPECIFIED",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionKind {
    Protocol,
    Environment,
    Adversary,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 3] = [
        TransitionKind::Protocol,
        TransitionKind::Environment,
        TransitionKind::Adversary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransitionKind::Protocol => "Protocol",
            TransitionKind::Environment => "Environment",
            TransitionKind::Adversary => "Adversary",
        }
    }
}

/// Attacker capability an Adversary transition exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdvTag {
    /// Tool and content injection.
    Adv1,
    /// Discovery or manifest spoofing.
    Adv2,
    /// Delegation amplification.
    Adv3,
}

impl AdvTag {
    pub fn as_str(self) -> &'static str {
        match self {
            AdvTag::Adv1 => "ADV-1",
            AdvTag::Adv2 => "ADV-2",
            AdvTag::Adv3 => "ADV-3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Principle {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    WF,
    SL,
    CS,
}

impl Principle {
    pub const ALL: [Principle; 11] = [
        Principle::P1,
        Principle::P2,
        Principle::P3,
        Principle::P4,
        Principle::P5,
        Principle::P6,
        Principle::P7,
        Principle::P8,
        Principle::WF,
        Principle::SL,
        Principle::CS,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Principle::P1 => "P1",
            Principle::P2 => "P2",
            Principle::P3 => "P3",
            Principle::P4 => "P4",
            Principle::P5 => "P5",
            Principle::P6 => "P6",
            Principle::P7 => "P7",
            Principle::P8 => "P8",
            Principle::WF => "WF",
            Principle::SL => "SL",
            Principle::CS => "CS",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyClass {
    SpecMandated,
    SpecRecommended,
    AasmHardening,
    ApsCompleteness,
}

impl PropertyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PropertyClass::SpecMandated => "spec-mandated",
            PropertyClass::SpecRecommended => "spec-recommended",
            PropertyClass::AasmHardening => "aasm-hardening",
            PropertyClass::ApsCompleteness => "aps-completeness",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            PropertyClass::SpecMandated => "SM",
            PropertyClass::SpecRecommended => "SR",
            PropertyClass::AasmHardening => "AH",
            PropertyClass::ApsCompleteness => "AC",
        }
    }
}

macro_rules! string_enum {
    ($ty:ident, $what:literal, [$($variant:expr),* $(,)?]) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                [$($variant),*]
                    .into_iter()
                    .find(|v: &$ty| v.as_str() == s)
                    .ok_or_else(|| format!(concat!("unknown ", $what, " `{}`"), s))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

string_enum!(Modality, "modality", [Modality::Must, Modality::Should, Modality::May, Modality::NotSpecified]);
string_enum!(TransitionKind, "transition kind", [TransitionKind::Protocol, TransitionKind::Environment, TransitionKind::Adversary]);
string_enum!(AdvTag, "adversary tag", [AdvTag::Adv1, AdvTag::Adv2, AdvTag::Adv3]);
string_enum!(Principle, "principle", [
    Principle::P1, Principle::P2, Principle::P3, Principle::P4, Principle::P5, Principle::P6,
    Principle::P7, Principle::P8, Principle::WF, Principle::SL, Principle::CS,
]);
string_enum!(PropertyClass, "property class", [
    PropertyClass::SpecMandated, PropertyClass::SpecRecommended,
    PropertyClass::AasmHardening, PropertyClass::ApsCompleteness,
]);

/// Pointer into a specification document.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceRef {
    pub document: String,
    pub section: String,
    pub quote: String,
    /// Optional explicit link to a clause id.
    pub clause: Option<String>,
}

/// Provenance entry of a transition or property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Ref(SourceRef),
    Invented,
}

impl Source {
    pub fn as_ref(&self) -> Option<&SourceRef> {
        match self {
            Source::Ref(r) => Some(r),
            Source::Invented => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormativeClause {
    pub id: String,
    pub protocol: String,
    pub modality: Modality,
    pub actor: String,
    pub behavior: String,
    pub source: SourceRef,
    pub ambiguous: bool,
    /// 1 = normative text ... 5 = conventions.
    pub precedence: u8,
    /// Clauses this one conflicts with; conflicts are kept, never resolved.
    pub conflicts_with: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Counter(i64),
    Enum(Vec<Atom>),
    Set(String),
    Map(String, Box<Sort>),
}

impl Sort {
    /// Domains referenced anywhere in the sort.
    pub fn domains(&self) -> Vec<&str> {
        match self {
            Sort::Bool | Sort::Counter(_) | Sort::Enum(_) => Vec::new(),
            Sort::Set(d) => vec![d.as_str()],
            Sort::Map(d, inner) => {
                let mut out = vec![d.as_str()];
                out.extend(inner.domains());
                out
            }
        }
    }

    /// Counter maxima with `f` applied, recursively.
    pub fn map_counters(&self, f: &impl Fn(i64) -> i64) -> Sort {
        match self {
            Sort::Counter(m) => Sort::Counter(f(*m)),
            Sort::Map(d, inner) => Sort::Map(d.clone(), Box::new(inner.map_counters(f))),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("BOOL"),
            Sort::Counter(m) => write!(f, "COUNTER({m})"),
            Sort::Enum(vals) => {
                f.write_str("ENUM[")?;
                for (i, v) in vals.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(v)?;
                }
                f.write_str("]")
            }
            Sort::Set(d) => write!(f, "SET({d})"),
            Sort::Map(d, inner) => write!(f, "MAP({d} -> {inner})"),
        }
    }
}

/// Initial value as written in the model file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Init {
    /// `init all v`: every leaf of a (nested) map starts at `v`.
    All(Value),
    /// `init v`: the literal value itself.
    Exact(Value),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVarDecl {
    pub name: String,
    pub sort: Sort,
    pub init: Init,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub domain: String,
}

/// `var[i][j] := value`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Update {
    pub var: String,
    pub path: Vec<Expr>,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub kind: TransitionKind,
    pub actor: String,
    pub params: Vec<Param>,
    pub guard: Expr,
    pub updates: Vec<Update>,
    pub modality: Option<Modality>,
    pub adversary: Option<AdvTag>,
    pub sources: Vec<Source>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Property {
    pub id: String,
    pub principle: Principle,
    pub class: PropertyClass,
    pub invariant: Expr,
    pub sources: Vec<Source>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub atoms: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolModel {
    pub name: String,
    pub snapshot: String,
    pub constants: Vec<Domain>,
    pub state_vars: Vec<StateVarDecl>,
    pub transitions: Vec<Transition>,
    pub properties: Vec<Property>,
}

impl ProtocolModel {
    pub fn domain(&self, name: &str) -> Option<&[Atom]> {
        self.constants
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.atoms.as_slice())
    }

    pub fn var(&self, name: &str) -> Option<&StateVarDecl> {
        self.state_vars.iter().find(|v| v.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.state_vars.iter().position(|v| v.name == name)
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn property(&self, id: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.id == id)
    }

    pub fn properties_for(&self, principle: Principle) -> impl Iterator<Item = &Property> {
        self.properties
            .iter()
            .filter(move |p| p.principle == principle)
    }

    /// Every atom literal the model can mention: domain members and enum values.
    pub fn atoms(&self) -> std::collections::BTreeSet<Atom> {
        let mut out: std::collections::BTreeSet<Atom> = self
            .constants
            .iter()
            .flat_map(|d| d.atoms.iter().cloned())
            .collect();
        fn enums(sort: &Sort, out: &mut std::collections::BTreeSet<Atom>) {
            match sort {
                Sort::Enum(vals) => out.extend(vals.iter().cloned()),
                Sort::Map(_, inner) => enums(inner, out),
                _ => {}
            }
        }
        for v in &self.state_vars {
            enums(&v.sort, &mut out);
        }
        out
    }

    /// Materializes the initial value of `decl` against the model's domains.
    pub fn initial_value(&self, decl: &StateVarDecl) -> Result<Value, String> {
        let value = match &decl.init {
            Init::Exact(v) => coerce(v, &decl.sort),
            Init::All(v) => self.fill(&decl.sort, v)?,
        };
        self.check_sort(&value, &decl.sort)?;
        Ok(value)
    }

    fn fill(&self, sort: &Sort, leaf: &Value) -> Result<Value, String> {
        match sort {
            Sort::Map(dom, inner) => {
                let keys = self
                    .domain(dom)
                    .ok_or_else(|| format!("unknown domain `{dom}`"))?;
                let mut entries = std::collections::BTreeMap::new();
                for k in keys {
                    entries.insert(k.clone(), self.fill(inner, leaf)?);
                }
                Ok(Value::Map(entries))
            }
            other => Ok(coerce(leaf, other)),
        }
    }

    /// Checks that `value` inhabits `sort` under the model's domains.
    pub fn check_sort(&self, value: &Value, sort: &Sort) -> Result<(), String> {
        let bad = || format!("value {value} does not inhabit {sort}");
        match (sort, value) {
            (Sort::Bool, Value::Bool(_)) => Ok(()),
            (Sort::Counter(max), Value::Int(n)) if (0..=*max).contains(n) => Ok(()),
            (Sort::Enum(vals), Value::Atom(a)) if vals.contains(a) => Ok(()),
            (Sort::Set(dom), Value::Set(items)) => {
                let atoms = self
                    .domain(dom)
                    .ok_or_else(|| format!("unknown domain `{dom}`"))?;
                if items
                    .iter()
                    .all(|i| matches!(i, Value::Atom(a) if atoms.contains(a)))
                {
                    Ok(())
                } else {
                    Err(bad())
                }
            }
            (Sort::Map(dom, inner), Value::Map(entries)) => {
                let atoms = self
                    .domain(dom)
                    .ok_or_else(|| format!("unknown domain `{dom}`"))?;
                if entries.len() != atoms.len() || !atoms.iter().all(|a| entries.contains_key(a)) {
                    return Err(format!("map keys of {value} do not match domain `{dom}`"));
                }
                entries.values().try_for_each(|v| self.check_sort(v, inner))
            }
            _ => Err(bad()),
        }
    }
}

// An empty literal `{}` is read as a set; for a map sort it denotes the empty map.
pub(crate) fn coerce(v: &Value, sort: &Sort) -> Value {
    match (v, sort) {
        (Value::Set(items), Sort::Map(..)) if items.is_empty() => Value::Map(Default::default()),
        (Value::Map(entries), Sort::Map(_, inner)) => Value::Map(
            entries
                .iter()
                .map(|(k, v)| (k.clone(), coerce(v, inner)))
                .collect(),
        ),
        _ => v.clone(),
    }
}

/// Convenience for building domains in code.
pub fn domain(name: &str, atoms: &[&str]) -> Domain {
    Domain {
        name: name.to_string(),
        atoms: atoms.iter().map(|a| atom(a)).collect(),
    }
}
