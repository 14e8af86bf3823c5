//! Runtime values for the finite-domain expression language.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde_json::Value as Json;

/// Interned symbolic constant (`OPEN`, `a1`, `c2`, ...).
pub type Atom = Arc<str>;

pub fn atom(s: &str) -> Atom {
    Arc::from(s)
}

/// A value of one of the IR sorts.
///
/// The derived ordering is only used for canonical ordering of set elements
/// and state vectors; it has no semantic meaning across kinds.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Atom(Atom),
    Set(BTreeSet<Value>),
    Map(BTreeMap<Atom, Value>),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "Bool",
            Value::Int(_) => "Int",
            Value::Atom(_) => "Atom",
            Value::Set(_) => "Set",
            Value::Map(_) => "Map",
        }
    }

    pub fn same_kind(&self, other: &Value) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    pub fn atom(s: &str) -> Value {
        Value::Atom(atom(s))
    }

    pub fn set<I: IntoIterator<Item = Value>>(items: I) -> Value {
        Value::Set(items.into_iter().collect())
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Appends the sort-tagged canonical encoding of this value.
    ///
    /// Tags: `B` bool, `I` int, `A` atom, `S` set, `M` map; lengths are
    /// little-endian `u32`, so the encoding is prefix-free.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Value::Bool(b) => {
                out.push(b'B');
                out.push(*b as u8);
            }
            Value::Int(i) => {
                out.push(b'I');
                out.extend_from_slice(&i.to_le_bytes());
            }
            Value::Atom(a) => {
                out.push(b'A');
                encode_str(a, out);
            }
            Value::Set(items) => {
                out.push(b'S');
                out.extend_from_slice(&(items.len() as u32).to_le_bytes());
                for item in items {
                    item.encode_into(out);
                }
            }
            Value::Map(entries) => {
                out.push(b'M');
                out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
                for (k, v) in entries {
                    encode_str(k, out);
                    v.encode_into(out);
                }
            }
        }
    }

    /// Reads one value written by [`Value::encode_into`] starting at `*pos`.
    /// Returns `None` on malformed input.
    pub fn decode_from(bytes: &[u8], pos: &mut usize) -> Option<Value> {
        let tag = *bytes.get(*pos)?;
        *pos += 1;
        Some(match tag {
            b'B' => {
                let b = *bytes.get(*pos)?;
                *pos += 1;
                Value::Bool(b != 0)
            }
            b'I' => Value::Int(i64::from_le_bytes(take(bytes, pos, 8)?.try_into().ok()?)),
            b'A' => Value::Atom(decode_str(bytes, pos)?),
            b'S' => {
                let n = decode_len(bytes, pos)?;
                let mut items = BTreeSet::new();
                for _ in 0..n {
                    items.insert(Value::decode_from(bytes, pos)?);
                }
                Value::Set(items)
            }
            b'M' => {
                let n = decode_len(bytes, pos)?;
                let mut entries = BTreeMap::new();
                for _ in 0..n {
                    let k = decode_str(bytes, pos)?;
                    entries.insert(k, Value::decode_from(bytes, pos)?);
                }
                Value::Map(entries)
            }
            _ => return None,
        })
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Bool(b) => Json::Bool(*b),
            Value::Int(i) => Json::from(*i),
            Value::Atom(a) => Json::String(a.to_string()),
            Value::Set(items) => Json::Array(items.iter().map(Value::to_json).collect()),
            Value::Map(entries) => Json::Object(
                entries
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_json()))
                    .collect(),
            ),
        }
    }

    pub fn from_json(json: &Json) -> Result<Value, String> {
        Ok(match json {
            Json::Bool(b) => Value::Bool(*b),
            Json::Number(n) => Value::Int(
                n.as_i64()
                    .ok_or_else(|| format!("non-integer number {n}"))?,
            ),
            Json::String(s) => Value::atom(s),
            Json::Array(items) => Value::Set(
                items
                    .iter()
                    .map(Value::from_json)
                    .collect::<Result<_, _>>()?,
            ),
            Json::Object(entries) => Value::Map(
                entries
                    .iter()
                    .map(|(k, v)| Ok((atom(k), Value::from_json(v)?)))
                    .collect::<Result<_, String>>()?,
            ),
            Json::Null => return Err("null is not a value".into()),
        })
    }
}

fn encode_str(s: &str, out: &mut Vec<u8>) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Option<&'a [u8]> {
    let out = bytes.get(*pos..pos.checked_add(n)?)?;
    *pos += n;
    Some(out)
}

fn decode_len(bytes: &[u8], pos: &mut usize) -> Option<usize> {
    Some(u32::from_le_bytes(take(bytes, pos, 4)?.try_into().ok()?) as usize)
}

fn decode_str(bytes: &[u8], pos: &mut usize) -> Option<Atom> {
    let n = decode_len(bytes, pos)?;
    std::str::from_utf8(take(bytes, pos, n)?).ok().map(atom)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Atom(a) => write!(f, "{a}"),
            Value::Set(items) => {
                f.write_str("{")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("}")
            }
            Value::Map(entries) => {
                f.write_str("[")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_distinguishes_kinds() {
        let mut a = Vec::new();
        Value::Bool(true).encode_into(&mut a);
        let mut b = Vec::new();
        Value::Int(1).encode_into(&mut b);
        assert_ne!(a, b);
    }

    #[test]
    fn json_round_trip() {
        let v = Value::Map(
            [
                (atom("s1"), Value::set([Value::atom("c1")])),
                (atom("s2"), Value::set([])),
            ]
            .into_iter()
            .collect(),
        );
        assert_eq!(Value::from_json(&v.to_json()).unwrap(), v);
    }

    fn value() -> impl proptest::strategy::Strategy<Value = Value> {
        use proptest::prelude::*;
        let leaf = prop_oneof![
            any::<bool>().prop_map(Value::Bool),
            any::<i64>().prop_map(Value::Int),
            "[a-z][a-z0-9_]{0,6}".prop_map(|s| Value::atom(&s)),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                proptest::collection::btree_set(inner.clone(), 0..4).prop_map(Value::Set),
                proptest::collection::btree_map("[a-z]{1,3}".prop_map(|s| atom(&s)), inner, 0..4)
                    .prop_map(Value::Map),
            ]
        })
    }

    proptest::proptest! {
        #[test]
        fn encoding_round_trips(vs in proptest::collection::vec(value(), 0..5)) {
            let mut bytes = Vec::new();
            for v in &vs {
                v.encode_into(&mut bytes);
            }
            let mut pos = 0;
            let mut back = Vec::new();
            while pos < bytes.len() {
                back.push(Value::decode_from(&bytes, &mut pos).unwrap());
            }
            proptest::prop_assert_eq!(back, vs);
        }
    }
}
