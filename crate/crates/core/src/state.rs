//! Finite state spaces, concrete states and variable-set lenses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{Type, Value};

/// Default ceiling on enumerated states.
pub const DEFAULT_STATE_LIMIT: u128 = 1 << 20;

/// Unchecked variable bindings. Intermediate symbolic images may leave the
/// declared domains, so only [`State`] carries the domain guarantee.
pub type Valuation = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("domain error: {var} = {value} is outside {ty}")]
    Domain { var: String, value: Value, ty: Type },
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("variable `{0}` declared twice")]
    Duplicate(String),
    #[error("missing binding for `{0}`")]
    Missing(String),
    #[error("state space has {count} states, limit is {limit}")]
    SpaceTooLarge { count: u128, limit: u128 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct StateSpace {
    vars: Vec<(String, Type)>,
}

impl StateSpace {
    pub fn new(vars: Vec<(String, Type)>) -> Result<Self, StateError> {
        let mut seen = BTreeSet::new();
        for (name, _) in &vars {
            if !seen.insert(name.clone()) {
                return Err(StateError::Duplicate(name.clone()));
            }
        }
        Ok(StateSpace { vars })
    }

    pub fn vars(&self) -> &[(String, Type)] {
        &self.vars
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|(n, _)| n.as_str())
    }

    pub fn var_type(&self, name: &str) -> Option<&Type> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn state_count(&self) -> u128 {
        self.vars.iter().fold(1u128, |acc, (_, t)| acc.saturating_mul(t.size()))
    }

    /// Every state, in lexicographic order of the declared domains.
    pub fn states(&self) -> Result<Vec<State>, StateError> {
        self.states_limited(DEFAULT_STATE_LIMIT)
    }

    pub fn states_limited(&self, limit: u128) -> Result<Vec<State>, StateError> {
        let count = self.state_count();
        if count > limit {
            return Err(StateError::SpaceTooLarge { count, limit });
        }
        let mut out = vec![Valuation::new()];
        for (name, ty) in &self.vars {
            let vals = ty.values();
            let mut next = Vec::with_capacity(out.len() * vals.len());
            for partial in &out {
                for v in &vals {
                    let mut b = partial.clone();
                    b.insert(name.clone(), v.clone());
                    next.push(b);
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(State).collect())
    }

    /// Validates a valuation as a total in-domain state.
    pub fn state(&self, bindings: Valuation) -> Result<State, StateError> {
        for (name, ty) in &self.vars {
            match bindings.get(name) {
                None => return Err(StateError::Missing(name.clone())),
                Some(v) if !ty.contains(v) => {
                    return Err(StateError::Domain { var: name.clone(), value: v.clone(), ty: ty.clone() })
                }
                Some(_) => {}
            }
        }
        for name in bindings.keys() {
            if self.var_type(name).is_none() {
                return Err(StateError::UnknownVar(name.clone()));
            }
        }
        Ok(State(bindings))
    }

    pub fn lens(&self, names: &[&str]) -> Result<LensSet, StateError> {
        let mut vars = BTreeSet::new();
        for n in names {
            if self.var_type(n).is_none() {
                return Err(StateError::UnknownVar(n.to_string()));
            }
            vars.insert(n.to_string());
        }
        Ok(LensSet { vars })
    }

    /// The 1-lens.
    pub fn full_lens(&self) -> LensSet {
        LensSet { vars: self.names().map(str::to_string).collect() }
    }

    pub fn put(&self, l: &LensSet, s: &State, v: &Valuation) -> Result<State, StateError> {
        let mut b = s.0.clone();
        for name in &l.vars {
            let ty = self.var_type(name).ok_or_else(|| StateError::UnknownVar(name.clone()))?;
            let val = v.get(name).ok_or_else(|| StateError::Missing(name.clone()))?;
            if !ty.contains(val) {
                return Err(StateError::Domain { var: name.clone(), value: val.clone(), ty: ty.clone() });
            }
            b.insert(name.clone(), val.clone());
        }
        Ok(State(b))
    }
}

/// A total, in-domain valuation of a [`StateSpace`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct State(Valuation);

impl State {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn bindings(&self) -> &Valuation {
        &self.0
    }

    pub fn into_bindings(self) -> Valuation {
        self.0
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        write!(f, "}}")
    }
}

/// A lens given by the set of variables it views.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct LensSet {
    pub vars: BTreeSet<String>,
}

impl LensSet {
    /// The 0-lens.
    pub fn zero() -> Self {
        LensSet::default()
    }

    pub fn of<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        LensSet { vars: names.into_iter().map(Into::into).collect() }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains(name)
    }

    pub fn get(&self, s: &State) -> Valuation {
        s.0.iter().filter(|(k, _)| self.vars.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    pub fn independent(&self, other: &LensSet) -> bool {
        self.vars.is_disjoint(&other.vars)
    }

    pub fn sublens(&self, other: &LensSet) -> bool {
        self.vars.is_subset(&other.vars)
    }

    pub fn union(&self, other: &LensSet) -> LensSet {
        LensSet { vars: self.vars.union(&other.vars).cloned().collect() }
    }
}

impl fmt::Display for LensSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.vars.iter().map(String::as_str).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Replaces the `l` region of `s1` with that of `s2`.
pub fn lens_override(s1: &State, s2: &State, l: &LensSet) -> State {
    let mut b = s1.0.clone();
    for name in &l.vars {
        if let Some(v) = s2.0.get(name) {
            b.insert(name.clone(), v.clone());
        }
    }
    State(b)
}

/// Same as [`lens_override`] but over unchecked valuations.
pub fn valuation_override(s1: &Valuation, s2: &Valuation, l: &LensSet) -> Valuation {
    let mut b = s1.clone();
    for name in &l.vars {
        if let Some(v) = s2.get(name) {
            b.insert(name.clone(), v.clone());
        }
    }
    b
}
