use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::object::Object;
use crate::xml::XmlElement;

/// The semantic universe: element values and finite sets of them.
///
/// Sets are ordered by the canonical value order, which respects
/// alpha-equality of objects, so iteration order is deterministic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Uri(String),
    Obj(Object),
    Xml(XmlElement),
    /// At least two components.
    Tuple(Vec<Value>),
    /// Element values only.
    Set(BTreeSet<Value>),
}

impl Value {
    pub fn uri(u: impl Into<String>) -> Value {
        Value::Uri(u.into())
    }

    /// Builds a tuple; a single component collapses to the component itself.
    pub fn tuple(mut components: Vec<Value>) -> Value {
        debug_assert!(!components.is_empty());
        debug_assert!(components.iter().all(Value::is_element));
        if components.len() == 1 {
            components.pop().unwrap()
        } else {
            Value::Tuple(components)
        }
    }

    pub fn set(elements: impl IntoIterator<Item = Value>) -> Value {
        let s: BTreeSet<Value> = elements.into_iter().collect();
        debug_assert!(s.iter().all(Value::is_element), "sets never nest");
        Value::Set(s)
    }

    pub fn empty_set() -> Value {
        Value::Set(BTreeSet::new())
    }

    pub fn is_element(&self) -> bool {
        !matches!(self, Value::Set(_))
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_set(self) -> Option<BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_uri(&self) -> Option<&str> {
        match self {
            Value::Uri(u) => Some(u),
            _ => None,
        }
    }

    pub fn as_obj(&self) -> Option<&Object> {
        match self {
            Value::Obj(o) => Some(o),
            _ => None,
        }
    }

    /// Components of a tuple, or the value itself as a 1-tuple.
    pub fn components(&self) -> &[Value] {
        match self {
            Value::Tuple(vs) => vs,
            other => std::slice::from_ref(other),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Uri(u) => f.write_str(u),
            Value::Obj(o) => write!(f, "{o}"),
            Value::Xml(x) => write!(f, "{x}"),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Value::Set(vs) => {
                f.write_str("{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum WireValue {
    Uri(String),
    Obj(Object),
    Xml(String),
    Tuple(Vec<Value>),
    Set(Vec<Value>),
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let w = match self {
            Value::Uri(u) => WireValue::Uri(u.clone()),
            Value::Obj(o) => WireValue::Obj(o.clone()),
            Value::Xml(x) => WireValue::Xml(x.to_string()),
            Value::Tuple(vs) => WireValue::Tuple(vs.clone()),
            Value::Set(vs) => WireValue::Set(vs.iter().cloned().collect()),
        };
        w.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        Ok(match WireValue::deserialize(d)? {
            WireValue::Uri(u) => Value::Uri(u),
            WireValue::Obj(o) => Value::Obj(o),
            WireValue::Xml(x) => Value::Xml(XmlElement::parse(&x).map_err(D::Error::custom)?),
            WireValue::Tuple(vs) => {
                if vs.len() < 2 || !vs.iter().all(Value::is_element) {
                    return Err(D::Error::custom("tuples have at least two element components"));
                }
                Value::Tuple(vs)
            }
            WireValue::Set(vs) => {
                if !vs.iter().all(Value::is_element) {
                    return Err(D::Error::custom("sets never nest"));
                }
                Value::Set(vs.into_iter().collect())
            }
        })
    }
}
