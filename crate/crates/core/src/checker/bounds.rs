use std::collections::BTreeMap;

use super::CheckError;
use crate::ir::{Domain, Init, ProtocolModel, Sort};
use crate::value::{atom, Atom, Value};

/// Exploration limits.
///
/// Domain caps are matched to model domains case-insensitively, either by
/// exact name or when the domain name starts with the singular of the key
/// (`Agents` caps `AgentID`). A cap below the declared size keeps the first
/// atoms; a cap above it appends generated atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub domains: BTreeMap<String, usize>,
    /// Upper bound on every counter maximum.
    pub counter_max: Option<i64>,
    pub max_depth: usize,
    pub max_states: usize,
    /// Frontier expansion threads; 1 is sequential, 0 lets the pool decide.
    pub workers: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            domains: [("Agents", 2), ("Caps", 2), ("Sessions", 2)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            counter_max: Some(3),
            max_depth: 20,
            max_states: 1_000_000,
            workers: 1,
        }
    }
}

impl Bounds {
    /// Bounds that leave the model's declared domains and counters untouched.
    pub fn unbounded_domains() -> Self {
        Bounds {
            domains: BTreeMap::new(),
            counter_max: None,
            ..Bounds::default()
        }
    }

    /// Applies comma-separated `key=value` overrides to these bounds.
    ///
    /// `depth`, `states`, `counter` and `workers` set the matching limits;
    /// any other key is a domain cap (`agents=3`).
    pub fn with_overrides(mut self, spec: &str) -> Result<Self, String> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("`{item}`: expected key=value"))?;
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| format!("`{item}`: `{v}` is not a non-negative integer"))?;
            match k.trim() {
                "depth" => self.max_depth = n,
                "states" => self.max_states = n,
                "counter" => self.counter_max = Some(n as i64),
                "workers" => self.workers = n,
                "" => return Err(format!("`{item}`: empty key")),
                key => {
                    let key = key.to_ascii_lowercase();
                    let existing = self.domains.keys().find(|d| d.to_ascii_lowercase() == key).cloned();
                    let name = existing.unwrap_or_else(|| key[..1].to_ascii_uppercase() + &key[1..]);
                    self.domains.insert(name, n);
                }
            }
        }
        Ok(self)
    }

    pub fn with_domain(mut self, key: &str, n: usize) -> Self {
        self.domains.insert(key.to_string(), n);
        self
    }

    /// Cap for `domain`, matched case-insensitively on the full name or a
    /// singular prefix (`sessions` caps `Sessions` and `SessionIDs`). The
    /// `A_`/`B_` prefixes of composed models are ignored.
    pub fn cap_for(&self, domain: &str) -> Option<usize> {
        let lower = domain.to_ascii_lowercase();
        let d = lower
            .strip_prefix("a_")
            .or_else(|| lower.strip_prefix("b_"))
            .unwrap_or(&lower);
        if let Some((_, n)) = self.domains.iter().find(|(k, _)| k.to_ascii_lowercase() == d) {
            return Some(*n);
        }
        self.domains.iter().find_map(|(k, n)| {
            let k = k.to_ascii_lowercase();
            let singular = k.strip_suffix('s').unwrap_or(&k);
            (!singular.is_empty() && d.starts_with(singular)).then_some(*n)
        })
    }

    /// Applies the bounds, producing the finite instance actually explored.
    pub fn apply(&self, model: &ProtocolModel) -> Result<ProtocolModel, CheckError> {
        if self.max_depth == 0 || self.max_states == 0 {
            return Err(CheckError::Bounds("depth and state limits must be positive".into()));
        }
        let mut m = model.clone();
        for d in &mut m.constants {
            if let Some(n) = self.cap_for(&d.name) {
                if n == 0 {
                    return Err(CheckError::Bounds(format!("domain `{}` capped at 0", d.name)));
                }
                resize(d, n);
            }
        }
        let resized = m.clone();
        for v in &mut m.state_vars {
            if let Init::Exact(value) = &v.init {
                v.init = Init::Exact(fit(&resized, value, &v.sort));
            }
        }
        if let Some(cap) = self.counter_max {
            for v in &mut m.state_vars {
                v.sort = v.sort.map_counters(&|max| max.min(cap));
            }
        }
        Ok(m)
    }
}

fn resize(d: &mut Domain, n: usize) {
    if n <= d.atoms.len() {
        d.atoms.truncate(n);
        return;
    }
    // Continue a trailing-number naming scheme (a1, a2 -> a3) when present.
    let stem = d
        .atoms
        .last()
        .map(|a| a.trim_end_matches(|c: char| c.is_ascii_digit()).to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("{}_", d.name.to_ascii_lowercase()));
    let mut i = d.atoms.len() + 1;
    while d.atoms.len() < n {
        let candidate: Atom = atom(&format!("{stem}{i}"));
        if !d.atoms.contains(&candidate) {
            d.atoms.push(candidate);
        }
        i += 1;
    }
}

fn zero(model: &ProtocolModel, sort: &Sort) -> Value {
    match sort {
        Sort::Bool => Value::Bool(false),
        Sort::Counter(_) => Value::Int(0),
        Sort::Enum(vals) => Value::Atom(vals[0].clone()),
        Sort::Set(_) => Value::set([]),
        Sort::Map(dom, inner) => Value::Map(
            model
                .domain(dom)
                .unwrap_or_default()
                .iter()
                .map(|k| (k.clone(), zero(model, inner)))
                .collect(),
        ),
    }
}

// Fits an exact initial value to resized domains: members outside a domain
// are dropped and new map keys start at the sort's zero value.
fn fit(model: &ProtocolModel, value: &Value, sort: &Sort) -> Value {
    match (sort, value) {
        (Sort::Set(dom), Value::Set(items)) => match model.domain(dom) {
            Some(atoms) => Value::Set(
                items
                    .iter()
                    .filter(|i| matches!(i, Value::Atom(a) if atoms.contains(a)))
                    .cloned()
                    .collect(),
            ),
            None => value.clone(),
        },
        (Sort::Map(dom, inner), Value::Map(entries)) => match model.domain(dom) {
            Some(atoms) => Value::Map(
                atoms
                    .iter()
                    .map(|k| {
                        let v = match entries.get(k) {
                            Some(v) => fit(model, v, inner),
                            None => zero(model, inner),
                        };
                        (k.clone(), v)
                    })
                    .collect(),
            ),
            None => value.clone(),
        },
        _ => value.clone(),
    }
}
