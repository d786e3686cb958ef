//! Normal-form reactive relations built from I, E and Φ terms.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, and, ite, not, or, EvalError, Env, Expr};
use crate::state::StateSpace;
use crate::subst::{self, ImplyError, Subst};
use crate::value::{Event, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("terms have different traces: {0} and {1}")]
    TraceMismatch(String, String),
    #[error("expected at least one term")]
    Empty,
}

/// A symbolic event `channel.data`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventExpr {
    pub channel: String,
    pub data: Option<Expr>,
}

impl EventExpr {
    pub fn pure(channel: &str) -> Self {
        EventExpr { channel: channel.to_string(), data: None }
    }

    pub fn with(channel: &str, data: Expr) -> Self {
        EventExpr { channel: channel.to_string(), data: Some(data.fold()) }
    }

    pub fn lit(e: &Event) -> Self {
        EventExpr { channel: e.channel.clone(), data: e.data.as_ref().map(|d| Expr::Lit((**d).clone())) }
    }

    pub fn eval(&self, env: &dyn Env) -> Result<Event, EvalError> {
        let data = match &self.data {
            Some(d) => Some(Box::new(d.eval(env)?)),
            None => None,
        };
        Ok(Event { channel: self.channel.clone(), data })
    }

    pub fn subst(&self, s: &Subst) -> Self {
        EventExpr { channel: self.channel.clone(), data: self.data.as_ref().map(|d| s.apply(d)) }
    }

    pub fn fold(&self) -> Self {
        EventExpr { channel: self.channel.clone(), data: self.data.as_ref().map(Expr::fold) }
    }

    /// Condition under which two events denote the same concrete event.
    pub fn same_as(&self, other: &EventExpr) -> Expr {
        if self.channel != other.channel {
            return expr::ff();
        }
        match (&self.data, &other.data) {
            (None, None) => expr::tt(),
            (Some(a), Some(b)) => expr::eq(a.clone(), b.clone()),
            _ => expr::ff(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::EventCons { channel: self.channel.clone(), data: self.data.clone().map(Box::new) }.fold()
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            None => write!(f, "{}", self.channel),
            Some(d) => write!(f, "{}", Expr::EventCons { channel: self.channel.clone(), data: Some(Box::new(d.clone())) }),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraceExpr(pub Vec<EventExpr>);

impl TraceExpr {
    pub fn empty() -> Self {
        TraceExpr(vec![])
    }

    pub fn single(e: EventExpr) -> Self {
        TraceExpr(vec![e])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, env: &dyn Env) -> Result<Vec<Event>, EvalError> {
        self.0.iter().map(|e| e.eval(env)).collect()
    }

    pub fn subst(&self, s: &Subst) -> Self {
        TraceExpr(self.0.iter().map(|e| e.subst(s)).collect())
    }

    pub fn fold(&self) -> Self {
        TraceExpr(self.0.iter().map(EventExpr::fold).collect())
    }

    pub fn concat(&self, other: &TraceExpr) -> Self {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        TraceExpr(v)
    }

    /// Structural prefix test.
    pub fn is_prefix_of(&self, other: &TraceExpr) -> bool {
        self.len() <= other.len() && other.0[..self.len()] == self.0[..]
    }

    pub fn to_expr(&self) -> Expr {
        Expr::SeqLit(self.0.iter().map(EventExpr::to_expr).collect()).fold()
    }
}

impl fmt::Display for TraceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ">")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AcceptEntry {
    pub guard: Expr,
    pub event: EventExpr,
}

/// The state-dependent event set `⋃ {event | guard}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AcceptSpec(pub Vec<AcceptEntry>);

impl AcceptSpec {
    pub fn empty() -> Self {
        AcceptSpec(vec![])
    }

    pub fn of(events: Vec<EventExpr>) -> Self {
        AcceptSpec(events.into_iter().map(|event| AcceptEntry { guard: expr::tt(), event }).collect()).normalize()
    }

    pub fn eval(&self, env: &dyn Env) -> Result<BTreeSet<Event>, EvalError> {
        let mut out = BTreeSet::new();
        for entry in &self.0 {
            if entry.guard.eval_bool(env)? {
                out.insert(entry.event.eval(env)?);
            }
        }
        Ok(out)
    }

    pub fn subst(&self, s: &Subst) -> Self {
        AcceptSpec(
            self.0
                .iter()
                .map(|e| AcceptEntry { guard: s.apply(&e.guard), event: e.event.subst(s) })
                .collect(),
        )
        .normalize()
    }

    pub fn guarded(&self, c: &Expr) -> Self {
        AcceptSpec(
            self.0.iter().map(|e| AcceptEntry { guard: and(c.clone(), e.guard.clone()), event: e.event.clone() }).collect(),
        )
        .normalize()
    }

    pub fn union(&self, other: &AcceptSpec) -> Self {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        AcceptSpec(v).normalize()
    }

    /// Entries restricted to channels inside (`keep_in`) or outside a set.
    pub fn filter_channels(&self, cs: &BTreeSet<String>, keep_in: bool) -> Self {
        AcceptSpec(self.0.iter().filter(|e| cs.contains(&e.event.channel) == keep_in).cloned().collect())
    }

    /// Folds guards, drops false ones and merges duplicate events.
    pub fn normalize(self) -> Self {
        let mut merged: Vec<AcceptEntry> = Vec::new();
        for e in self.0 {
            let guard = e.guard.fold();
            if guard.is_false() {
                continue;
            }
            let event = e.event.fold();
            if let Some(prev) = merged.iter_mut().find(|p| p.event == event) {
                prev.guard = or(prev.guard.clone(), guard);
            } else {
                merged.push(AcceptEntry { guard, event });
            }
        }
        merged.sort();
        AcceptSpec(merged)
    }
}

impl fmt::Display for AcceptSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if e.guard.is_true() {
                write!(f, "{}", e.event)?;
            } else {
                write!(f, "{} if {}", e.event, e.guard)?;
            }
        }
        write!(f, "}}")
    }
}

/// Assumption `I(s | t)`: from states satisfying `s`, the trace must not reach `t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ITerm {
    pub cond: Expr,
    pub trace: TraceExpr,
}

/// Quiescent observation `E(s, t, E)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ETerm {
    pub cond: Expr,
    pub trace: TraceExpr,
    pub accepts: AcceptSpec,
}

/// Final observation `Φ(s, σ, t)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhiTerm {
    pub cond: Expr,
    pub update: Subst,
    pub trace: TraceExpr,
}

impl ITerm {
    pub fn new(cond: Expr, trace: TraceExpr) -> Self {
        ITerm { cond: cond.fold(), trace: trace.fold() }
    }
}

impl ETerm {
    pub fn new(cond: Expr, trace: TraceExpr, accepts: AcceptSpec) -> Self {
        ETerm { cond: cond.fold(), trace: trace.fold(), accepts: accepts.normalize() }
    }

    pub fn guarded(&self, c: &Expr) -> Self {
        ETerm::new(and(c.clone(), self.cond.clone()), self.trace.clone(), self.accepts.clone())
    }
}

impl PhiTerm {
    pub fn new(cond: Expr, update: Subst, trace: TraceExpr) -> Self {
        PhiTerm { cond: cond.fold(), update, trace: trace.fold() }
    }

    /// `⌈s⌉ = Φ(s, id, ⟨⟩)`.
    pub fn test(s: Expr) -> Self {
        PhiTerm::new(s, Subst::id(), TraceExpr::empty())
    }

    pub fn skip() -> Self {
        PhiTerm::test(expr::tt())
    }

    pub fn guarded(&self, c: &Expr) -> Self {
        PhiTerm::new(and(c.clone(), self.cond.clone()), self.update.clone(), self.trace.clone())
    }

    /// `Φ;Φ`.
    pub fn seq(&self, q: &PhiTerm) -> PhiTerm {
        let s = &self.update;
        PhiTerm::new(
            and(self.cond.clone(), s.apply(&q.cond)),
            Subst::compose(&q.update, s),
            self.trace.concat(&q.trace.subst(s)),
        )
    }

    /// `Φ;E`.
    pub fn seq_quiescent(&self, q: &ETerm) -> ETerm {
        let s = &self.update;
        ETerm::new(and(self.cond.clone(), s.apply(&q.cond)), self.trace.concat(&q.trace.subst(s)), q.accepts.subst(s))
    }

    /// `Φ wp I`. With `None` the target is `false`.
    pub fn wp(&self, q: Option<&ITerm>) -> ITerm {
        match q {
            None => ITerm::new(self.cond.clone(), self.trace.clone()),
            Some(q) => {
                let s = &self.update;
                ITerm::new(and(self.cond.clone(), s.apply(&q.cond)), self.trace.concat(&q.trace.subst(s)))
            }
        }
    }
}

impl fmt::Display for ITerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C({} | {})", self.cond, self.trace)
    }
}

impl fmt::Display for ETerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({}, {}, {})", self.cond, self.trace, self.accepts)
    }
}

impl fmt::Display for PhiTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phi({}, {}, {})", self.cond, self.update, self.trace)
    }
}

/// Conjunction of assumptions. Empty is `true_r`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreRel {
    pub terms: Vec<ITerm>,
}

/// Disjunction of quiescent observations. Empty is `false`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriRel {
    pub terms: Vec<ETerm>,
}

/// Disjunction of final observations. Empty is `false`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PostRel {
    pub terms: Vec<PhiTerm>,
}

impl PreRel {
    pub fn truer() -> Self {
        PreRel::default()
    }

    pub fn falsity() -> Self {
        PreRel { terms: vec![ITerm::new(expr::tt(), TraceExpr::empty())] }
    }

    pub fn of(terms: Vec<ITerm>) -> Self {
        PreRel { terms }.normalize()
    }

    pub fn is_true(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.terms.iter().any(|t| t.trace.is_empty() && t.cond.is_true())
    }

    pub fn and(&self, other: &PreRel) -> PreRel {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PreRel { terms }.normalize()
    }

    /// Drops false terms, merges equal traces by disjoining conditions,
    /// removes terms subsumed by an unconditional shorter trace, and
    /// collapses to `false` when the empty trace is unconditionally barred.
    pub fn normalize(self) -> PreRel {
        let mut merged: Vec<ITerm> = Vec::new();
        for t in self.terms {
            let t = ITerm::new(t.cond, t.trace);
            if t.cond.is_false() {
                continue;
            }
            if let Some(prev) = merged.iter_mut().find(|p| p.trace == t.trace) {
                prev.cond = or(prev.cond.clone(), t.cond);
            } else {
                merged.push(t);
            }
        }
        if merged.iter().any(|t| t.trace.is_empty() && t.cond.is_true()) {
            return PreRel::falsity();
        }
        let keep: Vec<ITerm> = merged
            .iter()
            .filter(|b| {
                !merged.iter().any(|a| {
                    a.trace.len() < b.trace.len()
                        && a.trace.is_prefix_of(&b.trace)
                        && (a.cond.is_true() || a.cond == b.cond)
                })
            })
            .cloned()
            .collect();
        let mut terms = keep;
        terms.sort();
        terms.dedup();
        PreRel { terms }
    }

    /// Conditional `self ◁ c ▷ other`.
    pub fn cond(&self, c: &Expr, other: &PreRel) -> PreRel {
        let nc = not(c.clone());
        let mut terms: Vec<ITerm> =
            self.terms.iter().map(|t| ITerm::new(and(c.clone(), t.cond.clone()), t.trace.clone())).collect();
        terms.extend(other.terms.iter().map(|t| ITerm::new(and(nc.clone(), t.cond.clone()), t.trace.clone())));
        PreRel { terms }.normalize()
    }

    pub fn truncate(self, cap: Option<usize>) -> PreRel {
        match cap {
            None => self,
            Some(n) => PreRel { terms: self.terms.into_iter().filter(|t| t.trace.len() <= n).collect() },
        }
    }
}

fn sorted_dedup<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

impl PeriRel {
    pub fn falsity() -> Self {
        PeriRel::default()
    }

    pub fn of(terms: Vec<ETerm>) -> Self {
        PeriRel { terms }.normalize()
    }

    pub fn normalize(self) -> PeriRel {
        let terms = self
            .terms
            .into_iter()
            .map(|t| ETerm::new(t.cond, t.trace, t.accepts))
            .filter(|t| !t.cond.is_false())
            .collect();
        PeriRel { terms: sorted_dedup(terms) }
    }

    pub fn or(&self, other: &PeriRel) -> PeriRel {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PeriRel { terms }.normalize()
    }

    /// Conditional, merging same-trace pairs into guarded accept sets.
    pub fn cond(&self, c: &Expr, other: &PeriRel) -> PeriRel {
        let nc = not(c.clone());
        let mut terms = Vec::new();
        for p in &self.terms {
            let partners: Vec<&ETerm> = other.terms.iter().filter(|q| q.trace == p.trace).collect();
            if partners.is_empty() {
                terms.push(p.guarded(c));
            }
            for q in partners {
                terms.push(ETerm::new(
                    ite(c.clone(), p.cond.clone(), q.cond.clone()),
                    p.trace.clone(),
                    p.accepts.guarded(c).union(&q.accepts.guarded(&nc)),
                ));
            }
        }
        for q in &other.terms {
            if !self.terms.iter().any(|p| p.trace == q.trace) {
                terms.push(q.guarded(&nc));
            }
        }
        PeriRel { terms }.normalize()
    }

    /// Keeps terms whose trace is nonempty (`R4`) or empty (`R5`).
    pub fn filter(&self, nonempty: bool) -> PeriRel {
        PeriRel { terms: self.terms.iter().filter(|t| t.trace.is_empty() != nonempty).cloned().collect() }
    }

    pub fn truncate(self, cap: Option<usize>) -> PeriRel {
        match cap {
            None => self,
            Some(n) => PeriRel { terms: self.terms.into_iter().filter(|t| t.trace.len() <= n).collect() },
        }
    }
}

impl PostRel {
    pub fn falsity() -> Self {
        PostRel::default()
    }

    pub fn skip() -> Self {
        PostRel { terms: vec![PhiTerm::skip()] }
    }

    pub fn of(terms: Vec<PhiTerm>) -> Self {
        PostRel { terms }.normalize()
    }

    pub fn normalize(self) -> PostRel {
        let terms = self
            .terms
            .into_iter()
            .map(|t| PhiTerm::new(t.cond, t.update, t.trace))
            .filter(|t| !t.cond.is_false())
            .collect();
        PostRel { terms: sorted_dedup(terms) }
    }

    pub fn or(&self, other: &PostRel) -> PostRel {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PostRel { terms }.normalize()
    }

    pub fn seq(&self, q: &PostRel) -> PostRel {
        let mut terms = Vec::with_capacity(self.terms.len() * q.terms.len());
        for p in &self.terms {
            for r in &q.terms {
                terms.push(p.seq(r));
            }
        }
        PostRel { terms }.normalize()
    }

    pub fn seq_peri(&self, q: &PeriRel) -> PeriRel {
        let mut terms = Vec::with_capacity(self.terms.len() * q.terms.len());
        for p in &self.terms {
            for r in &q.terms {
                terms.push(p.seq_quiescent(r));
            }
        }
        PeriRel { terms }.normalize()
    }

    /// `self wp q`, distributing over both the disjunction and the conjunction.
    pub fn wp(&self, q: &PreRel) -> PreRel {
        let mut terms = Vec::new();
        for p in &self.terms {
            for i in &q.terms {
                terms.push(p.wp(Some(i)));
            }
        }
        PreRel { terms }.normalize()
    }

    /// Conditional in split form.
    pub fn cond(&self, c: &Expr, other: &PostRel) -> PostRel {
        let nc = not(c.clone());
        let mut terms: Vec<PhiTerm> = self.terms.iter().map(|t| t.guarded(c)).collect();
        terms.extend(other.terms.iter().map(|t| t.guarded(&nc)));
        PostRel { terms }.normalize()
    }

    pub fn filter(&self, nonempty: bool) -> PostRel {
        PostRel { terms: self.terms.iter().filter(|t| t.trace.is_empty() != nonempty).cloned().collect() }
    }

    pub fn truncate(self, cap: Option<usize>) -> PostRel {
        match cap {
            None => self,
            Some(n) => PostRel { terms: self.terms.into_iter().filter(|t| t.trace.len() <= n).collect() },
        }
    }

    /// `⋁_{n ≤ n_max} selfⁿ`. Terms longer than `cap` are dropped after each step.
    pub fn star(&self, n_max: usize, cap: Option<usize>) -> PostRel {
        let mut all = PostRel::skip();
        let mut layer = PostRel::skip();
        for _ in 0..n_max {
            layer = layer.seq(self).truncate(cap);
            if layer.terms.is_empty() {
                break;
            }
            all = all.or(&layer);
        }
        all
    }
}

fn check_same_trace(terms: &[ETerm]) -> Result<&TraceExpr, RelError> {
    let first = terms.first().ok_or(RelError::Empty)?;
    for t in &terms[1..] {
        if t.trace != first.trace {
            return Err(RelError::TraceMismatch(first.trace.to_string(), t.trace.to_string()));
        }
    }
    Ok(&first.trace)
}

/// `⋀ E(sᵢ, t, Eᵢ) = E(⋀ sᵢ, t, ⋃ Eᵢ)`.
pub fn conj_quiescent(terms: &[ETerm]) -> Result<ETerm, RelError> {
    let trace = check_same_trace(terms)?.clone();
    let cond = expr::conj(terms.iter().map(|t| t.cond.clone()));
    let accepts = terms.iter().fold(AcceptSpec::empty(), |acc, t| acc.union(&t.accepts));
    Ok(ETerm::new(cond, trace, accepts))
}

/// `E(⋁ sᵢ, t, ⋂ Eᵢ)`. This over-approximates the disjunction: every
/// observation of some `E(sᵢ, t, Eᵢ)` is an observation of the result.
pub fn disj_quiescent(terms: &[ETerm]) -> Result<ETerm, RelError> {
    let trace = check_same_trace(terms)?.clone();
    let cond = expr::disj(terms.iter().map(|t| t.cond.clone()));
    let mut accepts: Option<AcceptSpec> = None;
    for t in terms {
        accepts = Some(match accepts {
            None => t.accepts.clone(),
            Some(acc) => intersect_accepts(&acc, &t.accepts),
        });
    }
    Ok(ETerm::new(cond, trace, accepts.unwrap_or_default()))
}

/// Symbolic intersection of two guarded event sets.
pub fn intersect_accepts(a: &AcceptSpec, b: &AcceptSpec) -> AcceptSpec {
    let mut out = Vec::new();
    for x in &a.0 {
        for y in &b.0 {
            let same = x.event.same_as(&y.event);
            if same.is_false() {
                continue;
            }
            out.push(AcceptEntry { guard: expr::conj([x.guard.clone(), y.guard.clone(), same]), event: x.event.clone() });
        }
    }
    AcceptSpec(out).normalize()
}

/// `E(s1,t,E1) ⊑ E(s2,t,E2)`: every observation of the second is one of the
/// first. `None` when the traces differ structurally.
pub fn refines_quiescent(spec: &ETerm, imp: &ETerm, sp: &StateSpace) -> Result<Option<bool>, ImplyError> {
    if spec.trace != imp.trace {
        return Ok(None);
    }
    if !subst::cond_implies_bounded(&imp.cond, &spec.cond, sp)? {
        return Ok(Some(false));
    }
    for s in sp.states()? {
        if !imp.cond.eval_bool(&s)? {
            continue;
        }
        let e1 = spec.accepts.eval(&s)?;
        let e2 = imp.accepts.eval(&s)?;
        if !e1.is_subset(&e2) {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// Flat list of event values for a literal trace, if fully folded.
pub fn literal_trace(t: &TraceExpr) -> Option<Vec<Event>> {
    t.eval(&crate::state::Valuation::new()).ok()
}

pub fn event_value(e: &Event) -> Value {
    Value::Event(e.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{bin, int, var, BinOp};

    fn a(x: Expr) -> EventExpr {
        EventExpr::with("a", x)
    }

    #[test]
    fn phi_then_quiescent_substitutes() {
        let p = PhiTerm::new(expr::tt(), Subst::single("x", int(1)), TraceExpr::empty());
        let e = ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::of(vec![a(var("x"))]));
        let r = p.seq_quiescent(&e);
        assert_eq!(r, ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::of(vec![a(int(1))])));
    }

    #[test]
    fn phi_then_phi_composes_updates() {
        let p = PhiTerm::new(expr::tt(), Subst::single("x", int(1)), TraceExpr::single(a(int(1))));
        let q = PhiTerm::new(expr::tt(), Subst::single("x", bin(BinOp::Add, var("x"), int(2))), TraceExpr::empty());
        assert_eq!(p.seq(&q), PhiTerm::new(expr::tt(), Subst::single("x", int(3)), TraceExpr::single(a(int(1)))));
    }

    #[test]
    fn wp_against_false() {
        let p = PhiTerm::new(expr::tt(), Subst::id(), TraceExpr::single(EventExpr::pure("b")));
        assert_eq!(p.wp(None), ITerm::new(expr::tt(), TraceExpr::single(EventExpr::pure("b"))));
        assert!(PostRel { terms: vec![p] }.wp(&PreRel::truer()).is_true());
    }

    #[test]
    fn pre_normalization() {
        let t = TraceExpr::single(EventExpr::pure("a"));
        assert!(PreRel::of(vec![ITerm::new(expr::ff(), t.clone())]).is_true());
        assert!(PreRel::of(vec![ITerm::new(expr::tt(), TraceExpr::empty())]).is_false());
        let merged = PreRel::of(vec![
            ITerm::new(bin(BinOp::Gt, var("x"), int(0)), t.clone()),
            ITerm::new(bin(BinOp::Eq, var("x"), int(0)), t.clone()),
        ]);
        assert_eq!(merged.terms.len(), 1);
    }

    #[test]
    fn conj_and_mismatch() {
        let e = |ev: &str| ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::of(vec![EventExpr::pure(ev)]));
        let r = conj_quiescent(&[e("a"), e("c")]).unwrap();
        assert_eq!(r.accepts, AcceptSpec::of(vec![EventExpr::pure("a"), EventExpr::pure("c")]));
        assert_eq!(conj_quiescent(&[e("a"), e("a")]).unwrap(), e("a"));
        let other = ETerm::new(expr::tt(), TraceExpr::single(EventExpr::pure("a")), AcceptSpec::empty());
        assert!(matches!(conj_quiescent(&[e("a"), other]), Err(RelError::TraceMismatch(..))));
    }

    #[test]
    fn guard_merges_into_accept_entry() {
        let bf = var("bf");
        let out = EventExpr::with("out", crate::expr::un(crate::expr::UnOp::Head, bf.clone()));
        let p = PeriRel::of(vec![ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::of(vec![out.clone()]))]);
        let stop = PeriRel::of(vec![ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::empty())]);
        let g = bin(BinOp::Lt, int(0), crate::expr::un(crate::expr::UnOp::Len, bf));
        let r = p.cond(&g, &stop);
        assert_eq!(r.terms.len(), 1);
        assert!(r.terms[0].cond.is_true());
        assert_eq!(r.terms[0].accepts.0, vec![AcceptEntry { guard: g, event: out }]);
    }

    #[test]
    fn star_of_increment() {
        let p = PostRel::of(vec![PhiTerm::new(
            expr::tt(),
            Subst::single("x", bin(BinOp::Add, var("x"), int(1))),
            TraceExpr::single(EventExpr::pure("a")),
        )]);
        let s = p.star(2, None);
        assert_eq!(s.terms.len(), 3);
        let two = PhiTerm::new(
            expr::tt(),
            Subst::single("x", bin(BinOp::Add, var("x"), int(2))),
            TraceExpr(vec![EventExpr::pure("a"), EventExpr::pure("a")]),
        );
        assert!(s.terms.contains(&two));
    }

    #[test]
    fn filters() {
        let e0 = ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::empty());
        let e1 = ETerm::new(expr::tt(), TraceExpr::single(EventExpr::pure("a")), AcceptSpec::empty());
        let p = PeriRel::of(vec![e0.clone(), e1.clone()]);
        assert_eq!(p.filter(true).terms, vec![e1]);
        assert_eq!(p.filter(false).terms, vec![e0]);
        assert!(PostRel::skip().filter(true).terms.is_empty());
    }
}
