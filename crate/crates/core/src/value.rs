//! Concrete values, events and finite types.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A concrete communication: channel name plus optional data.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub channel: String,
    pub data: Option<Box<Value>>,
}

impl Event {
    pub fn pure(channel: &str) -> Self {
        Event { channel: channel.to_string(), data: None }
    }

    pub fn with(channel: &str, data: Value) -> Self {
        Event { channel: channel.to_string(), data: Some(Box::new(data)) }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            None => write!(f, "{}", self.channel),
            Some(d) => write!(f, "{}.{}", self.channel, d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
    /// Enumeration constant.
    Sym(String),
    Seq(Vec<Value>),
    Event(Event),
    Set(BTreeSet<Value>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_seq(&self) -> Option<&[Value]> {
        match self {
            Value::Seq(s) => Some(s),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Sym(_) => "enum",
            Value::Seq(_) => "seq",
            Value::Event(_) => "event",
            Value::Set(_) => "set",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Seq(items) => {
                write!(f, "<")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ">")
            }
            Value::Event(e) => write!(f, "{e}"),
            Value::Set(items) => {
                write!(f, "{{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Finite value domains for state variables and channel data.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Type {
    Bool,
    Int { lo: i64, hi: i64 },
    Enum(Vec<String>),
    Seq { max_len: usize, elem: Box<Type> },
}

impl Type {
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Type::Bool, Value::Bool(_)) => true,
            (Type::Int { lo, hi }, Value::Int(i)) => lo <= i && i <= hi,
            (Type::Enum(names), Value::Sym(s)) => names.contains(s),
            (Type::Seq { max_len, elem }, Value::Seq(items)) => {
                items.len() <= *max_len && items.iter().all(|x| elem.contains(x))
            }
            _ => false,
        }
    }

    /// Number of values, saturating.
    pub fn size(&self) -> u128 {
        match self {
            Type::Bool => 2,
            Type::Int { lo, hi } => {
                if hi < lo {
                    0
                } else {
                    (*hi as i128 - *lo as i128 + 1) as u128
                }
            }
            Type::Enum(names) => names.len() as u128,
            Type::Seq { max_len, elem } => {
                let n = elem.size();
                let mut total: u128 = 0;
                let mut layer: u128 = 1;
                for _ in 0..=*max_len {
                    total = total.saturating_add(layer);
                    layer = layer.saturating_mul(n);
                }
                total
            }
        }
    }

    /// All values in a fixed order. Callers check `size` first.
    pub fn values(&self) -> Vec<Value> {
        match self {
            Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Type::Int { lo, hi } => (*lo..=*hi).map(Value::Int).collect(),
            Type::Enum(names) => names.iter().cloned().map(Value::Sym).collect(),
            Type::Seq { max_len, elem } => {
                let base = elem.values();
                let mut out = vec![Value::Seq(vec![])];
                let mut layer: Vec<Vec<Value>> = vec![vec![]];
                for _ in 0..*max_len {
                    let mut next = Vec::new();
                    for prefix in &layer {
                        for v in &base {
                            let mut s = prefix.clone();
                            s.push(v.clone());
                            next.push(s);
                        }
                    }
                    out.extend(next.iter().cloned().map(Value::Seq));
                    layer = next;
                }
                out
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => write!(f, "bool"),
            Type::Int { lo, hi } => write!(f, "int[{lo}..{hi}]"),
            Type::Enum(names) => write!(f, "enum{{{}}}", names.join(",")),
            Type::Seq { max_len, elem } => write!(f, "seq[{max_len}] {elem}"),
        }
    }
}
