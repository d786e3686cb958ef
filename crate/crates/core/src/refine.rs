//! Refinement between contracts, deadlock freedom and the loop-invariant rule.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::{CalcConfig, CalcError, Context, Contract};
use crate::expr::{self, EvalError, Expr, Overlay};
use crate::oracle::{Bounds, Observation, ObsSet};
use crate::rel::{refines_quiescent, PeriRel, PostRel, PreRel};
use crate::state::{State, StateError, Valuation};
use crate::subst::{self, ImplyError};
use crate::value::{Event, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("contracts are over different alphabets or state spaces")]
    AlphabetMismatch,
    #[error("loop body is not productive")]
    NonProductiveBody,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Imply(#[from] ImplyError),
    #[error("too many {0} to enumerate")]
    TooLarge(&'static str),
}

/// A relation given either in normal form or as a predicate over one
/// observation. Predicates see the initial state by name, `tt` (the trace),
/// `acc` (accepted events) and `x'` (final value of `x`).
#[derive(Clone, Debug, PartialEq)]
pub enum SpecRel<R> {
    Normal(R),
    Opaque(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecContract {
    pub pre: SpecRel<PreRel>,
    pub peri: SpecRel<PeriRel>,
    pub post: SpecRel<PostRel>,
    pub ctx: Arc<Context>,
}

impl From<&Contract> for SpecContract {
    fn from(c: &Contract) -> Self {
        SpecContract {
            pre: SpecRel::Normal(c.pre.clone()),
            peri: SpecRel::Normal(c.peri.clone()),
            post: SpecRel::Normal(c.post.clone()),
            ctx: c.ctx.clone(),
        }
    }
}

impl SpecContract {
    /// `[true_r ⊢ some event accepted | true]`.
    pub fn deadlock_free(ctx: &Arc<Context>) -> SpecContract {
        let some = expr::bin(expr::BinOp::Gt, expr::un(expr::UnOp::Len, expr::var("acc")), expr::int(0));
        SpecContract {
            pre: SpecRel::Normal(PreRel::truer()),
            peri: SpecRel::Opaque(some),
            post: SpecRel::Opaque(expr::tt()),
            ctx: ctx.clone(),
        }
    }

    pub fn opaque(ctx: &Arc<Context>, pre: Option<Expr>, peri: Expr, post: Expr) -> SpecContract {
        SpecContract {
            pre: match pre {
                Some(p) => SpecRel::Opaque(p),
                None => SpecRel::Normal(PreRel::truer()),
            },
            peri: SpecRel::Opaque(peri),
            post: SpecRel::Opaque(post),
            ctx: ctx.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: String,
    pub trace: Vec<String>,
    pub state: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptances: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Witness {
    pub fn of(obs: &Observation, init: &Valuation, detail: Option<String>) -> Witness {
        let show = |t: &[Event]| t.iter().map(|e| e.to_string()).collect();
        let state = init.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        match obs {
            Observation::Quiescent { trace, accepts } => Witness {
                kind: "quiescent".into(),
                trace: show(trace),
                state,
                acceptances: Some(accepts.iter().map(|e| e.to_string()).collect()),
                detail,
            },
            Observation::Terminated { trace, state: fin } => {
                let fin: Vec<String> = fin.iter().map(|(k, v)| format!("{k}'={v}")).collect();
                let detail = Some(match detail {
                    Some(d) => format!("{d}; final {}", fin.join(", ")),
                    None => format!("final {}", fin.join(", ")),
                });
                Witness { kind: "terminated".into(), trace: show(trace), state, acceptances: None, detail }
            }
            Observation::Divergence { trace } => {
                Witness { kind: "divergence".into(), trace: show(trace), state, acceptances: None, detail }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    /// Set when a trace or star bound truncated some quantifier.
    pub bounded: bool,
    pub witnesses: Vec<Witness>,
    /// Which quantifiers were truncated, and other remarks.
    pub notes: Vec<String>,
}

const MAX_WITNESSES: usize = 8;

impl Verdict {
    pub fn holds(bounded: bool) -> Verdict {
        Verdict { holds: true, bounded, witnesses: vec![], notes: vec![] }
    }

    fn fail(w: Witness) -> Verdict {
        Verdict { holds: false, bounded: true, witnesses: vec![w], notes: vec![] }
    }

    /// Conjunction: witnesses are merged, shortest traces first.
    pub fn and(mut self, other: Verdict) -> Verdict {
        self.holds &= other.holds;
        self.bounded |= other.bounded;
        self.witnesses.extend(other.witnesses);
        self.witnesses.sort_by_key(|w| w.trace.len());
        self.witnesses.truncate(MAX_WITNESSES);
        for n in other.notes {
            if !self.notes.contains(&n) {
                self.notes.push(n);
            }
        }
        self
    }

    fn note(mut self, n: impl Into<String>) -> Verdict {
        let n = n.into();
        if !self.notes.contains(&n) {
            self.notes.push(n);
        }
        self
    }
}

fn is_prefix(p: &[Event], t: &[Event]) -> bool {
    p.len() <= t.len() && &t[..p.len()] == p
}

fn trace_value(t: &[Event]) -> Value {
    Value::Seq(t.iter().map(|e| Value::Event(e.clone())).collect())
}

/// Evaluates an observation predicate.
pub fn eval_predicate(
    p: &Expr,
    init: &Valuation,
    trace: &[Event],
    acc: Option<&BTreeSet<Event>>,
    fin: Option<&Valuation>,
) -> Result<bool, EvalError> {
    let mut extra = BTreeMap::new();
    extra.insert("tt".to_string(), trace_value(trace));
    if let Some(a) = acc {
        extra.insert("acc".to_string(), Value::Set(a.iter().map(|e| Value::Event(e.clone())).collect()));
    }
    if let Some(f) = fin {
        for (k, v) in f {
            extra.insert(format!("{k}'"), v.clone());
        }
    }
    p.eval_bool(&Overlay { base: init, extra: &extra })
}

/// Observations of a contract at one state, without domain checks on final
/// states.
pub fn observe(c: &Contract, init: &Valuation, trace_len: usize) -> Result<ObsSet, RefineError> {
    let mut out = Vec::new();
    for t in &c.pre.terms {
        if t.cond.eval_bool(init)? {
            let trace = t.trace.eval(init)?;
            if trace.len() <= trace_len {
                out.push(Observation::Divergence { trace });
            }
        }
    }
    for t in &c.peri.terms {
        if t.cond.eval_bool(init)? {
            let trace = t.trace.eval(init)?;
            if trace.len() <= trace_len {
                out.push(Observation::Quiescent { trace, accepts: t.accepts.eval(init)? });
            }
        }
    }
    for t in &c.post.terms {
        if t.cond.eval_bool(init)? {
            let trace = t.trace.eval(init)?;
            if trace.len() <= trace_len {
                out.push(Observation::Terminated { trace, state: t.update.image(init)? });
            }
        }
    }
    Ok(ObsSet::from_obs(out))
}

/// Whether any term of `c` was cut by the trace bound.
fn truncated(c: &Contract, trace_len: usize) -> bool {
    c.star_bound.is_some()
        || c.pre.terms.iter().any(|t| t.trace.len() > trace_len)
        || c.peri.terms.iter().any(|t| t.trace.len() > trace_len)
        || c.post.terms.iter().any(|t| t.trace.len() > trace_len)
}

struct SpecAt<'a> {
    spec: &'a SpecContract,
    init: &'a Valuation,
    /// Evaluated spec assumptions, for normal-form preconditions.
    bars: Vec<Vec<Event>>,
    universe: BTreeSet<Event>,
}

impl<'a> SpecAt<'a> {
    fn new(spec: &'a SpecContract, init: &'a Valuation) -> Result<Self, RefineError> {
        let mut bars = Vec::new();
        if let SpecRel::Normal(pre) = &spec.pre {
            for t in &pre.terms {
                if t.cond.eval_bool(init)? {
                    bars.push(t.trace.eval(init)?);
                }
            }
        }
        let universe = spec.ctx.alphabet.events().into_iter().collect();
        Ok(SpecAt { spec, init, bars, universe })
    }

    /// The required contract tolerates divergence at `t`.
    fn permits_divergence(&self, t: &[Event]) -> Result<bool, RefineError> {
        match &self.spec.pre {
            SpecRel::Normal(_) => Ok(self.bars.iter().any(|b| is_prefix(b, t))),
            SpecRel::Opaque(p) => {
                for k in 0..=t.len() {
                    if !eval_predicate(p, self.init, &t[..k], None, None)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn admits_quiescent(&self, t: &[Event], acc: &BTreeSet<Event>) -> Result<bool, RefineError> {
        match &self.spec.peri {
            SpecRel::Opaque(p) => Ok(eval_predicate(p, self.init, t, Some(acc), None)?),
            SpecRel::Normal(peri) => {
                for e in &peri.terms {
                    if !e.cond.eval_bool(self.init)? || e.trace.eval(self.init)? != t {
                        continue;
                    }
                    let need = e.accepts.eval(self.init)?;
                    if need.iter().all(|ev| acc.contains(ev) || !self.universe.contains(ev)) {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn admits_final(&self, t: &[Event], fin: &Valuation) -> Result<bool, RefineError> {
        match &self.spec.post {
            SpecRel::Opaque(p) => Ok(eval_predicate(p, self.init, t, None, Some(fin))?),
            SpecRel::Normal(post) => {
                for f in &post.terms {
                    if f.cond.eval_bool(self.init)?
                        && f.trace.eval(self.init)? == t
                        && &f.update.image(self.init)? == fin
                    {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// Checks every implementation observation at one state against the required contract.
fn check_observations(spec: &SpecContract, init: &Valuation, obs: &ObsSet) -> Result<Vec<Witness>, RefineError> {
    let at = SpecAt::new(spec, init)?;
    let mut out = Vec::new();
    for o in &obs.obs {
        let t = o.trace();
        let ok = match o {
            Observation::Divergence { trace } => at.permits_divergence(trace)?,
            _ if at.permits_divergence(t)? => true,
            Observation::Quiescent { trace, accepts } => at.admits_quiescent(trace, accepts)?,
            Observation::Terminated { trace, state } => at.admits_final(trace, state)?,
        };
        if !ok {
            let why = match o {
                Observation::Divergence { .. } => "implementation diverges where the required contract does not",
                Observation::Quiescent { .. } => "quiescent observation not allowed by the required contract",
                Observation::Terminated { .. } => "final observation not allowed by the required contract",
            };
            out.push(Witness::of(o, init, Some(why.into())));
        }
    }
    Ok(out)
}

/// Structural sufficient condition. `Some(true)` is conclusive; `None`
/// means the fast path could not decide.
pub fn refines_fast(spec: &Contract, imp: &Contract) -> Result<Option<bool>, RefineError> {
    if spec == imp {
        return Ok(Some(true));
    }
    let sp = &spec.ctx.space;
    for i in &imp.pre.terms {
        let mut covered = false;
        for s in &spec.pre.terms {
            if s.trace.is_prefix_of(&i.trace) && subst::cond_implies_bounded(&i.cond, &s.cond, sp)? {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(None);
        }
    }
    for e in &imp.peri.terms {
        let mut covered = false;
        for s in &spec.peri.terms {
            if refines_quiescent(s, e, sp)? == Some(true) {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(None);
        }
    }
    for f in &imp.post.terms {
        let covered = spec.post.terms.iter().any(|s| s.trace == f.trace && s.update == f.update)
            && spec
                .post
                .terms
                .iter()
                .filter(|s| s.trace == f.trace && s.update == f.update)
                .map(|s| subst::cond_implies_bounded(&f.cond, &s.cond, sp))
                .collect::<Result<Vec<bool>, _>>()?
                .into_iter()
                .any(|b| b);
        if !covered {
            return Ok(None);
        }
    }
    Ok(Some(true))
}

fn check_ctx(a: &Arc<Context>, b: &Arc<Context>) -> Result<(), RefineError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(RefineError::AlphabetMismatch)
    }
}

/// `spec ⊑ imp` under bounds.
pub fn refines_contract(spec: &SpecContract, imp: &Contract, b: &Bounds) -> Result<Verdict, RefineError> {
    check_ctx(&spec.ctx, &imp.ctx)?;
    if let (SpecRel::Normal(pre), SpecRel::Normal(peri), SpecRel::Normal(post)) = (&spec.pre, &spec.peri, &spec.post) {
        let sc = Contract {
            pre: pre.clone(),
            peri: peri.clone(),
            post: post.clone(),
            ctx: spec.ctx.clone(),
            star_bound: None,
        };
        if refines_fast(&sc, imp)? == Some(true) {
            let v = Verdict::holds(imp.star_bound.is_some());
            return Ok(match imp.star_bound {
                Some(n) => v.note(format!("loops unrolled {n} times")),
                None => v,
            });
        }
    }
    let mut v = Verdict::holds(true).note(format!("traces up to {} events", b.trace_len));
    if let Some(n) = imp.star_bound {
        v = v.note(format!("loops unrolled {n} times"));
    }
    if !truncated(imp, b.trace_len) {
        v.bounded = false;
    }
    for init in imp.ctx.space.states_limited(b.state_limit)? {
        let init = init.into_bindings();
        let obs = observe(imp, &init, b.trace_len)?;
        let ws = check_observations(spec, &init, &obs)?;
        if !ws.is_empty() {
            v = v.and(Verdict { holds: false, bounded: true, witnesses: ws, notes: vec![] });
        }
    }
    Ok(v)
}

/// Refinement against the deadlock-freedom contract.
pub fn deadlock_check(c: &Contract, b: &Bounds) -> Result<Verdict, RefineError> {
    let spec = SpecContract::deadlock_free(&c.ctx);
    // Fast path: every reachable quiescent observation accepts something.
    let mut fast = true;
    'terms: for e in &c.peri.terms {
        for s in c.ctx.space.states_limited(b.state_limit)? {
            if e.cond.eval_bool(&s)? && e.accepts.eval(&s)?.is_empty() {
                fast = false;
                break 'terms;
            }
        }
    }
    if fast {
        let v = Verdict::holds(c.star_bound.is_some());
        return Ok(match c.star_bound {
            Some(n) => v.note(format!("loops unrolled {n} times")),
            None => v,
        });
    }
    refines_contract(&spec, c, b)
}

/// Refinement both ways.
pub fn equal_contracts(c1: &Contract, c2: &Contract, b: &Bounds) -> Result<Verdict, RefineError> {
    check_ctx(&c1.ctx, &c2.ctx)?;
    if c1 == c2 {
        return Ok(Verdict::holds(c1.star_bound.is_some() || c2.star_bound.is_some()));
    }
    let a = refines_contract(&SpecContract::from(c1), c2, b)?;
    let z = refines_contract(&SpecContract::from(c2), c1, b)?;
    Ok(a.and(z))
}

/// Reactive invariant `[I1 ⊢ I2 | I3]` given by observation predicates.
#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub pre: Option<Expr>,
    pub peri: Expr,
    pub post: Expr,
}

fn all_traces(events: &[Event], max: usize) -> Vec<Vec<Event>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for t in &layer {
            for e in events {
                let mut t2: Vec<Event> = t.clone();
                t2.push(e.clone());
                next.push(t2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn mentions(e: &Expr, name: &str) -> bool {
    let mut vs = BTreeSet::new();
    e.vars(&mut vs);
    vs.contains(name)
}

const MAX_ENUM: usize = 1 << 16;

/// Acceptance sets to quantify over for a predicate.
fn acceptance_sets(p: &Expr, events: &[Event]) -> Result<Vec<BTreeSet<Event>>, RefineError> {
    if !mentions(p, "acc") {
        return Ok(vec![BTreeSet::new()]);
    }
    if events.len() > 12 {
        return Err(RefineError::TooLarge("acceptance sets"));
    }
    Ok((0..1usize << events.len())
        .map(|m| events.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, e)| e.clone()).collect())
        .collect())
}

struct InvCtx<'a> {
    states: Vec<Valuation>,
    inv: &'a Invariant,
    trace_len: usize,
}

impl InvCtx<'_> {
    fn i1(&self, s: &Valuation, t: &[Event]) -> Result<bool, RefineError> {
        match &self.inv.pre {
            None => Ok(true),
            Some(p) => {
                for k in 0..=t.len() {
                    if !eval_predicate(p, s, &t[..k], None, None)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// Observations of `⌈c⌉ ; body` at `s`, or nothing when `c` fails.
    fn body_obs(&self, body: &Contract, c: &Expr, s: &Valuation) -> Result<Option<ObsSet>, RefineError> {
        if !c.eval_bool(s)? {
            return Ok(None);
        }
        Ok(Some(observe(body, s, self.trace_len)?))
    }
}

/// Reactive invariant rule for `while b do body`: (1) productivity,
/// (2) assumption weakening, (3) quiescent invariant, (4) final invariant.
/// Each item is checked over all states and all traces within the bound.
pub fn loop_invariant_check(
    b_cond: &Expr,
    body: &Contract,
    inv: &Invariant,
    bounds: &Bounds,
) -> Result<Vec<(String, Verdict)>, RefineError> {
    let flags = body.health_flags()?;
    if !flags.productive {
        return Err(RefineError::NonProductiveBody);
    }
    let mut out = vec![("productive".to_string(), Verdict::holds(false))];
    let events = body.ctx.alphabet.events();
    let states: Vec<Valuation> =
        body.ctx.space.states_limited(bounds.state_limit)?.into_iter().map(State::into_bindings).collect();
    let ic = InvCtx { states, inv, trace_len: bounds.trace_len };
    let traces = all_traces(&events, bounds.trace_len);
    if traces.len() * ic.states.len() > MAX_ENUM * 16 {
        return Err(RefineError::TooLarge("traces"));
    }
    let note = format!("traces up to {} events", bounds.trace_len);
    let not_b = expr::not(b_cond.clone());

    // (2) The loop's assumption holds wherever I1 does.
    let cfg = CalcConfig { star_bound: bounds.star_bound.max(bounds.trace_len), trace_cap: Some(bounds.trace_len) };
    let lp = Contract::while_loop(b_cond, body, cfg)?;
    let mut v2 = Verdict::holds(true).note(note.clone());
    for s in &ic.states {
        let obs = observe(&lp, s, bounds.trace_len)?;
        for d in obs.divergences() {
            if ic.i1(s, d)? {
                let o = Observation::Divergence { trace: d.clone() };
                v2 = v2.and(Verdict::fail(Witness::of(&o, s, Some("loop may diverge where I1 holds".into()))));
            }
        }
    }
    out.push(("assumption".to_string(), v2));

    // (3) I2 ⊑ ⌈b⌉;Q2 and I2 ⊑ ⌈b⌉;Q3;I2.
    let accs = acceptance_sets(&inv.peri, &events)?;
    let mut v3 = Verdict::holds(true).note(note.clone());
    for s in &ic.states {
        let Some(obs) = ic.body_obs(body, b_cond, s)? else { continue };
        for o in &obs.obs {
            if obs.diverges_at(o.trace()) || !ic.i1(s, o.trace())? {
                continue;
            }
            match o {
                Observation::Quiescent { trace, accepts } => {
                    if !eval_predicate(&inv.peri, s, trace, Some(accepts), None)? {
                        v3 = v3.and(Verdict::fail(Witness::of(o, s, Some("body quiescence breaks I2".into()))));
                    }
                }
                Observation::Terminated { trace: t1, state: s1 } => {
                    for t2 in traces.iter().filter(|t| t.len() + t1.len() <= bounds.trace_len) {
                        let whole: Vec<Event> = t1.iter().chain(t2).cloned().collect();
                        if !ic.i1(s, &whole)? {
                            continue;
                        }
                        for a in &accs {
                            if eval_predicate(&inv.peri, s1, t2, Some(a), None)?
                                && !eval_predicate(&inv.peri, s, &whole, Some(a), None)?
                            {
                                let w = Observation::Quiescent { trace: whole.clone(), accepts: a.clone() };
                                let d = format!("I2 not preserved by one iteration ending in {}", show_state(s1));
                                v3 = v3.and(Verdict::fail(Witness::of(&w, s, Some(d))));
                            }
                        }
                    }
                }
                Observation::Divergence { .. } => {}
            }
        }
    }
    out.push(("quiescent".to_string(), v3));

    // (4) I3 ⊑ ⌈¬b⌉ and I3 ⊑ ⌈b⌉;Q3;I3.
    let mut v4 = Verdict::holds(true).note(note);
    for s in &ic.states {
        if not_b.eval_bool(s)? && !eval_predicate(&inv.post, s, &[], None, Some(s))? {
            let o = Observation::Terminated { trace: vec![], state: s.clone() };
            v4 = v4.and(Verdict::fail(Witness::of(&o, s, Some("loop exit breaks I3".into()))));
        }
        let Some(obs) = ic.body_obs(body, b_cond, s)? else { continue };
        for o in &obs.obs {
            let Observation::Terminated { trace: t1, state: s1 } = o else { continue };
            if obs.diverges_at(t1) {
                continue;
            }
            for t2 in traces.iter().filter(|t| t.len() + t1.len() <= bounds.trace_len) {
                let whole: Vec<Event> = t1.iter().chain(t2).cloned().collect();
                if !ic.i1(s, &whole)? {
                    continue;
                }
                for s2 in &ic.states {
                    if eval_predicate(&inv.post, s1, t2, None, Some(s2))?
                        && !eval_predicate(&inv.post, s, &whole, None, Some(s2))?
                    {
                        let w = Observation::Terminated { trace: whole.clone(), state: s2.clone() };
                        let d = format!("I3 not preserved by one iteration ending in {}", show_state(s1));
                        v4 = v4.and(Verdict::fail(Witness::of(&w, s, Some(d))));
                    }
                }
            }
        }
    }
    out.push(("final".to_string(), v4));
    Ok(out)
}

fn show_state(s: &Valuation) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// `spec ⊑ init ; [I1 ⊢ I2 | I3]`, where `init` is an instantaneous prefix
/// given as a contract with no quiescent observations.
pub fn refines_via_invariant(
    spec: &SpecContract,
    init: &Contract,
    inv: &Invariant,
    bounds: &Bounds,
) -> Result<Verdict, RefineError> {
    check_ctx(&spec.ctx, &init.ctx)?;
    let events = init.ctx.alphabet.events();
    let traces = all_traces(&events, bounds.trace_len);
    let states: Vec<Valuation> =
        init.ctx.space.states_limited(bounds.state_limit)?.into_iter().map(State::into_bindings).collect();
    let accs = acceptance_sets(&inv.peri, &events)?;
    let ic = InvCtx { states, inv, trace_len: bounds.trace_len };
    let mut v = Verdict::holds(true).note(format!("traces up to {} events", bounds.trace_len));
    for s in &ic.states {
        let first = observe(init, s, 0)?;
        let mut obs = Vec::new();
        if !first.obs.iter().all(|o| matches!(o, Observation::Terminated { .. })) {
            return Err(RefineError::Calc(CalcError::NonProductiveBody));
        }
        for o in &first.obs {
            let Observation::Terminated { state: s1, .. } = o else { continue };
            for t in &traces {
                if !ic.i1(s1, t)? {
                    obs.push(Observation::Divergence { trace: t.clone() });
                    continue;
                }
                for a in &accs {
                    if eval_predicate(&inv.peri, s1, t, Some(a), None)? {
                        obs.push(Observation::Quiescent { trace: t.clone(), accepts: a.clone() });
                    }
                }
                for s2 in &ic.states {
                    if eval_predicate(&inv.post, s1, t, None, Some(s2))? {
                        obs.push(Observation::Terminated { trace: t.clone(), state: s2.clone() });
                    }
                }
            }
        }
        // Invariant observations are read as raw relations, not refusal sets.
        let ws = check_raw(spec, s, &obs)?;
        if !ws.is_empty() {
            v = v.and(Verdict { holds: false, bounded: true, witnesses: ws, notes: vec![] });
        }
    }
    Ok(v)
}

fn check_raw(spec: &SpecContract, init: &Valuation, obs: &[Observation]) -> Result<Vec<Witness>, RefineError> {
    let set = ObsSet { obs: obs.iter().cloned().collect() };
    check_observations(spec, init, &set)
}
