//! Substitutions: finite maps from variables to expressions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, Expr};
use crate::state::{LensSet, State, StateError, StateSpace, Valuation, DEFAULT_STATE_LIMIT};

/// Identity outside the map. Entries of the form `x ↦ x` are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subst {
    map: BTreeMap<String, Expr>,
}

impl Subst {
    pub fn id() -> Self {
        Subst::default()
    }

    pub fn single(x: &str, e: Expr) -> Self {
        Subst::id().update(x, e)
    }

    pub fn is_id(&self) -> bool {
        self.map.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &Expr)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn get(&self, x: &str) -> Expr {
        self.map.get(x).cloned().unwrap_or_else(|| Expr::Var(x.to_string()))
    }

    /// `σ(x ↦ e)`.
    pub fn update(mut self, x: &str, e: Expr) -> Self {
        let e = e.fold();
        if e == Expr::Var(x.to_string()) {
            self.map.remove(x);
        } else {
            self.map.insert(x.to_string(), e);
        }
        self
    }

    /// `σ † e`, folded.
    pub fn apply(&self, e: &Expr) -> Expr {
        if self.map.is_empty() {
            return e.fold();
        }
        e.map_vars(&|n| self.map.get(n).cloned()).fold()
    }

    /// `σ2 ∘ σ1`: first `σ1`, then `σ2`.
    pub fn compose(s2: &Subst, s1: &Subst) -> Subst {
        let mut out = Subst::id();
        let keys: BTreeSet<&String> = s1.map.keys().chain(s2.map.keys()).collect();
        for x in keys {
            let e = s1.apply(&s2.get(x));
            out = out.update(x, e);
        }
        out
    }

    /// Pointwise image of a valuation.
    pub fn image(&self, s: &Valuation) -> Result<Valuation, EvalError> {
        let mut out = s.clone();
        for (x, e) in &self.map {
            out.insert(x.clone(), e.eval(s)?);
        }
        Ok(out)
    }

    /// Keeps `σ1`'s updates inside `ns1` and `σ2`'s inside `ns2`.
    pub fn par_merge(s1: &Subst, ns1: &LensSet, s2: &Subst, ns2: &LensSet) -> Subst {
        let mut out = Subst::id();
        for (x, e) in &s1.map {
            if ns1.contains(x) {
                out = out.update(x, e.clone());
            }
        }
        for (x, e) in &s2.map {
            if ns2.contains(x) {
                out = out.update(x, e.clone());
            }
        }
        out
    }

    pub fn map_exprs(&self, f: &dyn Fn(&Expr) -> Expr) -> Subst {
        let mut out = Subst::id();
        for (x, e) in &self.map {
            out = out.update(x, f(e));
        }
        out
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, e)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}:={e}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImplyError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Exhaustive check of `c1 ⇒ c2`. Returns the first counterexample state.
pub fn implication_witness(c1: &Expr, c2: &Expr, sp: &StateSpace) -> Result<Option<State>, ImplyError> {
    let c1 = c1.fold();
    let c2 = c2.fold();
    if c1.is_false() || c2.is_true() || c1 == c2 {
        return Ok(None);
    }
    for s in sp.states_limited(DEFAULT_STATE_LIMIT)? {
        if c1.eval_bool(&s)? && !c2.eval_bool(&s)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

pub fn cond_implies_bounded(c1: &Expr, c2: &Expr, sp: &StateSpace) -> Result<bool, ImplyError> {
    Ok(implication_witness(c1, c2, sp)?.is_none())
}

/// Whether some state satisfies `c`.
pub fn satisfiable(c: &Expr, sp: &StateSpace) -> Result<bool, ImplyError> {
    let c = c.fold();
    if c.is_false() {
        return Ok(false);
    }
    if c.is_true() {
        return Ok(true);
    }
    for s in sp.states_limited(DEFAULT_STATE_LIMIT)? {
        if c.eval_bool(&s)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{bin, int, var, BinOp};
    use crate::value::{Type, Value};

    #[test]
    fn self_update_is_identity() {
        assert_eq!(Subst::id().update("x", var("x")), Subst::id());
    }

    #[test]
    fn later_update_wins() {
        let a = Subst::id().update("x", int(1)).update("x", int(2));
        assert_eq!(a, Subst::single("x", int(2)));
    }

    #[test]
    fn compose_example() {
        let s1 = Subst::single("x", int(1));
        let s2 = Subst::single("x", bin(BinOp::Add, var("x"), int(2)));
        assert_eq!(Subst::compose(&s2, &s1), Subst::single("x", int(3)));
        let s3 = Subst::single("y", var("x"));
        let c = Subst::compose(&s3, &s1);
        assert_eq!(c, Subst::id().update("x", int(1)).update("y", int(1)));
    }

    #[test]
    fn apply_folds() {
        let s = Subst::single("x", int(2));
        assert_eq!(s.apply(&bin(BinOp::Add, var("x"), int(2))), int(4));
    }

    #[test]
    fn implication() {
        let sp = StateSpace::new(vec![("x".into(), Type::Int { lo: 0, hi: 3 })]).unwrap();
        let gt = |n| bin(BinOp::Gt, var("x"), int(n));
        assert!(cond_implies_bounded(&gt(1), &gt(0), &sp).unwrap());
        let w = implication_witness(&gt(0), &gt(1), &sp).unwrap().unwrap();
        assert_eq!(w.get("x"), Some(&Value::Int(1)));
    }
}
