//! Bounded brute-force semantics. Contracts are read pointwise into
//! observation sets, programs are run by small steps, and the two are
//! compared.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::Contract;
use crate::dsl::{Ast, AstKind, Comm, Model};
use crate::expr::EvalError;
use crate::state::{State, StateError, StateSpace, Valuation, DEFAULT_STATE_LIMIT};
use crate::value::{Event, Type, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub trace_len: usize,
    pub star_bound: usize,
    pub state_limit: u128,
}

impl Bounds {
    pub fn new(trace_len: usize, star_bound: usize) -> Bounds {
        Bounds { trace_len, star_bound, state_limit: DEFAULT_STATE_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("final state outside its domain: {0}")]
    Domain(StateError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Observation {
    Quiescent { trace: Vec<Event>, accepts: BTreeSet<Event> },
    Terminated { trace: Vec<Event>, state: Valuation },
    Divergence { trace: Vec<Event> },
}

impl Observation {
    pub fn trace(&self) -> &[Event] {
        match self {
            Observation::Quiescent { trace, .. }
            | Observation::Terminated { trace, .. }
            | Observation::Divergence { trace } => trace,
        }
    }
}

/// Observation set in canonical form: minimal divergences, nothing at or
/// above a divergence, and minimal acceptances per trace. Two sets denote
/// the same failures-divergences behaviour iff their canonical forms match.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsSet {
    pub obs: BTreeSet<Observation>,
}

fn is_prefix(p: &[Event], t: &[Event]) -> bool {
    p.len() <= t.len() && &t[..p.len()] == p
}

impl ObsSet {
    pub fn from_obs<I: IntoIterator<Item = Observation>>(it: I) -> ObsSet {
        let all: Vec<Observation> = it.into_iter().collect();
        let divs: Vec<&Vec<Event>> = all
            .iter()
            .filter_map(|o| match o {
                Observation::Divergence { trace } => Some(trace),
                _ => None,
            })
            .collect();
        let min_divs: BTreeSet<Vec<Event>> =
            divs.iter().filter(|t| !divs.iter().any(|p| p.len() < t.len() && is_prefix(p, t))).map(|t| (*t).clone()).collect();
        let mut accepts: BTreeMap<Vec<Event>, Vec<BTreeSet<Event>>> = BTreeMap::new();
        let mut obs = BTreeSet::new();
        for o in all {
            if let Observation::Divergence { .. } = o {
                continue;
            }
            if min_divs.iter().any(|d| is_prefix(d, o.trace())) {
                continue;
            }
            match o {
                Observation::Quiescent { trace, accepts: a } => accepts.entry(trace).or_default().push(a),
                other => {
                    obs.insert(other);
                }
            }
        }
        for (trace, sets) in accepts {
            for a in &sets {
                if !sets.iter().any(|b| b.len() < a.len() && b.is_subset(a)) {
                    obs.insert(Observation::Quiescent { trace: trace.clone(), accepts: a.clone() });
                }
            }
        }
        obs.extend(min_divs.into_iter().map(|trace| Observation::Divergence { trace }));
        ObsSet { obs }
    }

    pub fn divergences(&self) -> impl Iterator<Item = &Vec<Event>> {
        self.obs.iter().filter_map(|o| match o {
            Observation::Divergence { trace } => Some(trace),
            _ => None,
        })
    }

    /// Whether `t` is at or above some divergence.
    pub fn diverges_at(&self, t: &[Event]) -> bool {
        self.divergences().any(|d| is_prefix(d, t))
    }
}

fn validate(space: &StateSpace, v: Valuation) -> Result<Valuation, OracleError> {
    space.state(v).map(State::into_bindings).map_err(OracleError::Domain)
}

/// Pointwise reading of a contract at one initial state.
pub fn denote_bounded(c: &Contract, init: &State, b: &Bounds) -> Result<ObsSet, OracleError> {
    let mut out = Vec::new();
    for t in &c.pre.terms {
        if t.cond.eval_bool(init)? {
            let trace = t.trace.eval(init)?;
            if trace.len() <= b.trace_len {
                out.push(Observation::Divergence { trace });
            }
        }
    }
    for t in &c.peri.terms {
        if t.cond.eval_bool(init)? {
            let trace = t.trace.eval(init)?;
            if trace.len() <= b.trace_len {
                out.push(Observation::Quiescent { trace, accepts: t.accepts.eval(init)? });
            }
        }
    }
    for t in &c.post.terms {
        if t.cond.eval_bool(init)? {
            let trace = t.trace.eval(init)?;
            if trace.len() <= b.trace_len {
                let state = validate(&c.ctx.space, t.update.image(init.bindings())?)?;
                out.push(Observation::Terminated { trace, state });
            }
        }
    }
    let set = ObsSet::from_obs(out);
    debug_assert!(set.obs.iter().all(|o| o.trace().len() <= b.trace_len));
    Ok(set)
}

// Small-step semantics.

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Tau,
    Event(Event),
    Tick,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Running(Proc, Valuation),
    Done(Valuation),
}

/// Runtime process term. Choice and parallel branches keep their own
/// state until the choice resolves or both branches finish.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Proc {
    Ast(Rc<Ast>),
    Seq(Box<Proc>, Rc<Ast>),
    Ext(Vec<(Proc, Valuation)>),
    Par { ns1: Rc<Vec<String>>, cs: Rc<BTreeSet<String>>, ns2: Rc<Vec<String>>, base: Valuation, left: Box<Side>, right: Box<Side> },
}

/// Result of one step. A diverging configuration has no useful moves.
#[derive(Debug, Default)]
pub struct Steps {
    pub moves: Vec<(Label, Proc, Valuation)>,
    pub diverges: bool,
    pub miracle: bool,
}

pub struct Machine<'m> {
    model: &'m Model,
}

fn leaf(a: &Ast) -> Proc {
    Proc::Ast(Rc::new(a.clone()))
}

impl<'m> Machine<'m> {
    pub fn new(model: &'m Model) -> Self {
        Machine { model }
    }

    /// Opens structural nodes without a step.
    pub fn enter(&self, a: &Ast, s: &Valuation) -> Result<Proc, OracleError> {
        Ok(match &a.kind {
            AstKind::Seq(p, q) => Proc::Seq(Box::new(self.enter(p, s)?), Rc::new((**q).clone())),
            AstKind::Ext(p, q) => Proc::Ext(vec![(self.enter(p, s)?, s.clone()), (self.enter(q, s)?, s.clone())]),
            AstKind::Par { ns1, cs, ns2, left, right } => Proc::Par {
                ns1: Rc::new(ns1.clone()),
                cs: Rc::new(cs.iter().cloned().collect()),
                ns2: Rc::new(ns2.clone()),
                base: s.clone(),
                left: Box::new(Side::Running(self.enter(left, s)?, s.clone())),
                right: Box::new(Side::Running(self.enter(right, s)?, s.clone())),
            },
            AstKind::Interleave(l, r) => Proc::Par {
                ns1: Rc::new(vec![]),
                cs: Rc::new(BTreeSet::new()),
                ns2: Rc::new(vec![]),
                base: s.clone(),
                left: Box::new(Side::Running(self.enter(l, s)?, s.clone())),
                right: Box::new(Side::Running(self.enter(r, s)?, s.clone())),
            },
            AstKind::Ref(n) => {
                let def = self.model.process(n).ok_or_else(|| OracleError::UnknownProcess(n.clone()))?;
                self.enter(&def.body, s)?
            }
            _ => leaf(a),
        })
    }

    fn channel_values(&self, ch: &str) -> Vec<Value> {
        self.model.channel_type(ch).cloned().flatten().map(|t: Type| t.values()).unwrap_or_default()
    }

    pub fn step(&self, p: &Proc, s: &Valuation) -> Result<Steps, OracleError> {
        let mut st = Steps::default();
        match p {
            Proc::Ast(a) => self.step_ast(a, s, &mut st)?,
            Proc::Seq(p, q) => {
                let inner = self.step(p, s)?;
                st.diverges = inner.diverges;
                st.miracle = inner.miracle;
                for (l, p2, s2) in inner.moves {
                    match l {
                        Label::Tick => {
                            let next = self.enter(q, &s2)?;
                            st.moves.push((Label::Tau, next, s2));
                        }
                        l => st.moves.push((l, Proc::Seq(Box::new(p2), q.clone()), s2)),
                    }
                }
            }
            Proc::Ext(branches) => {
                for (i, (bp, bs)) in branches.iter().enumerate() {
                    let inner = self.step(bp, bs)?;
                    st.diverges |= inner.diverges;
                    st.miracle |= inner.miracle;
                    for (l, p2, s2) in inner.moves {
                        match l {
                            Label::Tau => {
                                let mut nb = branches.clone();
                                nb[i] = (p2, s2);
                                st.moves.push((Label::Tau, Proc::Ext(nb), s.clone()));
                            }
                            l => st.moves.push((l, p2, s2)),
                        }
                    }
                }
            }
            Proc::Par { ns1, cs, ns2, base, left, right } => {
                let rebuild = |l: Side, r: Side| Proc::Par {
                    ns1: ns1.clone(),
                    cs: cs.clone(),
                    ns2: ns2.clone(),
                    base: base.clone(),
                    left: Box::new(l),
                    right: Box::new(r),
                };
                let side_steps = |side: &Side| -> Result<Steps, OracleError> {
                    match side {
                        Side::Running(p, ls) => self.step(p, ls),
                        Side::Done(_) => Ok(Steps::default()),
                    }
                };
                let ls = side_steps(left)?;
                let rs = side_steps(right)?;
                st.diverges = ls.diverges || rs.diverges;
                st.miracle = ls.miracle || rs.miracle;
                for (l, p2, s2) in &ls.moves {
                    match l {
                        Label::Tau => st.moves.push((Label::Tau, rebuild(Side::Running(p2.clone(), s2.clone()), (**right).clone()), s.clone())),
                        Label::Tick => st.moves.push((Label::Tau, rebuild(Side::Done(s2.clone()), (**right).clone()), s.clone())),
                        Label::Event(e) if !cs.contains(&e.channel) => st.moves.push((
                            l.clone(),
                            rebuild(Side::Running(p2.clone(), s2.clone()), (**right).clone()),
                            s.clone(),
                        )),
                        Label::Event(e) => {
                            for (rl, rp, rs2) in &rs.moves {
                                if rl == &Label::Event(e.clone()) {
                                    st.moves.push((
                                        l.clone(),
                                        rebuild(Side::Running(p2.clone(), s2.clone()), Side::Running(rp.clone(), rs2.clone())),
                                        s.clone(),
                                    ));
                                }
                            }
                        }
                    }
                }
                for (l, p2, s2) in &rs.moves {
                    match l {
                        Label::Tau => st.moves.push((Label::Tau, rebuild((**left).clone(), Side::Running(p2.clone(), s2.clone())), s.clone())),
                        Label::Tick => st.moves.push((Label::Tau, rebuild((**left).clone(), Side::Done(s2.clone())), s.clone())),
                        Label::Event(e) if !cs.contains(&e.channel) => st.moves.push((
                            l.clone(),
                            rebuild((**left).clone(), Side::Running(p2.clone(), s2.clone())),
                            s.clone(),
                        )),
                        Label::Event(_) => {}
                    }
                }
                if let (Side::Done(lv), Side::Done(rv)) = (&**left, &**right) {
                    let mut fin = base.clone();
                    for x in ns1.iter() {
                        if let Some(v) = lv.get(x) {
                            fin.insert(x.clone(), v.clone());
                        }
                    }
                    for x in ns2.iter() {
                        if let Some(v) = rv.get(x) {
                            fin.insert(x.clone(), v.clone());
                        }
                    }
                    st.moves.push((Label::Tick, leaf(&Ast::new(AstKind::Skip)), fin));
                }
            }
        }
        Ok(st)
    }

    fn step_ast(&self, a: &Ast, s: &Valuation, st: &mut Steps) -> Result<(), OracleError> {
        use AstKind::*;
        let tau = |st: &mut Steps, a: &Ast, s: Valuation| -> Result<(), OracleError> {
            let p = self.enter(a, &s)?;
            st.moves.push((Label::Tau, p, s));
            Ok(())
        };
        match &a.kind {
            Skip => st.moves.push((Label::Tick, leaf(a), s.clone())),
            Stop => {}
            Chaos => st.diverges = true,
            Miracle => st.miracle = true,
            Assign(x, e) => {
                let mut s2 = s.clone();
                s2.insert(x.clone(), e.eval(s)?);
                st.moves.push((Label::Tau, leaf(&Ast::new(Skip)), s2));
            }
            Prefix { channel, comm, cont } => match comm {
                Comm::None => {
                    st.moves.push((Label::Event(Event::pure(channel)), self.enter(cont, s)?, s.clone()));
                }
                Comm::Output(e) => {
                    let v = e.eval(s)?;
                    st.moves.push((Label::Event(Event::with(channel, v)), self.enter(cont, s)?, s.clone()));
                }
                Comm::Input(x) => {
                    for v in self.channel_values(channel) {
                        let body = cont.subst_input(x, &v);
                        st.moves.push((Label::Event(Event::with(channel, v)), self.enter(&body, s)?, s.clone()));
                    }
                }
            },
            Guard(g, p) => {
                if g.eval_bool(s)? {
                    tau(st, p, s.clone())?;
                } else {
                    tau(st, &Ast::new(Stop), s.clone())?;
                }
            }
            If(c, p, q) => {
                let next = if c.eval_bool(s)? { p } else { q };
                tau(st, next, s.clone())?;
            }
            Int(p, q) => {
                tau(st, p, s.clone())?;
                tau(st, q, s.clone())?;
            }
            While(c, body) => {
                let unfolded = Ast::new(If(
                    c.clone(),
                    Box::new(Ast::new(Seq(body.clone(), Box::new(a.clone())))),
                    Box::new(Ast::new(Skip)),
                ));
                tau(st, &unfolded, s.clone())?;
            }
            Seq(..) | Ext(..) | Par { .. } | Interleave(..) | Ref(_) => {
                let p = self.enter(a, s)?;
                let inner = self.step(&p, s)?;
                st.moves.extend(inner.moves);
                st.diverges |= inner.diverges;
                st.miracle |= inner.miracle;
            }
        }
        Ok(())
    }
}

type Config = (Proc, Valuation);

/// Breadth-first closure of the step relation up to `b.trace_len` events.
pub fn explore_bounded(model: &Model, ast: &Ast, init: &State, b: &Bounds) -> Result<ObsSet, OracleError> {
    let m = Machine::new(model);
    let space = StateSpace::new(model.vars.clone())?;
    let s0 = init.bindings().clone();
    let mut out: Vec<Observation> = Vec::new();
    let mut frontier: Vec<(Vec<Event>, HashSet<Config>)> = vec![(vec![], HashSet::from([(m.enter(ast, &s0)?, s0)]))];
    let mut explored = 0usize;
    while let Some((trace, roots)) = frontier.pop() {
        // τ-closure of this trace's configurations.
        let mut seen: HashSet<Config> = HashSet::new();
        let mut order: Vec<Config> = Vec::new();
        let mut edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut index: std::collections::HashMap<Config, usize> = std::collections::HashMap::new();
        let mut stack: Vec<Config> = roots.into_iter().collect();
        let mut steps_of: Vec<Steps> = Vec::new();
        while let Some(cfg) = stack.pop() {
            if !seen.insert(cfg.clone()) {
                continue;
            }
            explored += 1;
            if explored > 2_000_000 {
                return Err(OracleError::BoundExceeded("more than 2000000 configurations".into()));
            }
            let id = order.len();
            index.insert(cfg.clone(), id);
            let st = m.step(&cfg.0, &cfg.1)?;
            for (l, p, s) in &st.moves {
                if *l == Label::Tau {
                    stack.push((p.clone(), s.clone()));
                }
            }
            order.push(cfg);
            steps_of.push(st);
        }
        for (i, st) in steps_of.iter().enumerate() {
            for (l, p, s) in &st.moves {
                if *l == Label::Tau {
                    let j = index[&(p.clone(), s.clone())];
                    edges.entry(i).or_default().push(j);
                }
            }
        }
        if steps_of.iter().any(|s| s.diverges) || has_cycle(order.len(), &edges) {
            out.push(Observation::Divergence { trace });
            continue;
        }
        let mut next: BTreeMap<Event, HashSet<Config>> = BTreeMap::new();
        for st in &steps_of {
            let tau_or_tick = st.moves.iter().any(|(l, _, _)| matches!(l, Label::Tau | Label::Tick));
            let offered: BTreeSet<Event> = st
                .moves
                .iter()
                .filter_map(|(l, _, _)| match l {
                    Label::Event(e) => Some(e.clone()),
                    _ => None,
                })
                .collect();
            if !tau_or_tick && !st.miracle {
                out.push(Observation::Quiescent { trace: trace.clone(), accepts: offered });
            }
            for (l, p, s) in &st.moves {
                match l {
                    Label::Tick => {
                        let state = validate(&space, s.clone())?;
                        out.push(Observation::Terminated { trace: trace.clone(), state });
                    }
                    Label::Event(e) if trace.len() < b.trace_len => {
                        next.entry(e.clone()).or_default().insert((p.clone(), s.clone()));
                    }
                    _ => {}
                }
            }
        }
        for (e, cfgs) in next {
            let mut t = trace.clone();
            t.push(e);
            frontier.push((t, cfgs));
        }
    }
    Ok(ObsSet::from_obs(out))
}

fn has_cycle(n: usize, edges: &BTreeMap<usize, Vec<usize>>) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = finished
    let mut color = vec![0u8; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        while let Some((v, k)) = stack.pop() {
            let succ = edges.get(&v).map(Vec::as_slice).unwrap_or(&[]);
            if k < succ.len() {
                stack.push((v, k + 1));
                let w = succ[k];
                match color[w] {
                    1 => return true,
                    0 => {
                        color[w] = 1;
                        stack.push((w, 0));
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub state: Valuation,
    pub only_denotational: Vec<Observation>,
    pub only_operational: Vec<Observation>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossReport {
    pub states: usize,
    /// States where both sides leave the declared domains.
    pub skipped: usize,
    pub mismatches: Vec<Mismatch>,
    /// States where exactly one side failed, with its message.
    pub errors: Vec<(Valuation, String)>,
}

impl CrossReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.errors.is_empty()
    }
}

/// Compares both semantics at every initial state of the model.
pub fn cross_check(model: &Model, ast: &Ast, c: &Contract, b: &Bounds) -> Result<CrossReport, OracleError> {
    let mut rep = CrossReport::default();
    for init in c.ctx.space.states_limited(b.state_limit)? {
        rep.states += 1;
        let d = denote_bounded(c, &init, b);
        let o = explore_bounded(model, ast, &init, b);
        match (d, o) {
            (Ok(d), Ok(o)) => {
                if d != o {
                    rep.mismatches.push(Mismatch {
                        state: init.bindings().clone(),
                        only_denotational: d.obs.difference(&o.obs).cloned().collect(),
                        only_operational: o.obs.difference(&d.obs).cloned().collect(),
                    });
                }
            }
            (Err(_), Err(_)) => rep.skipped += 1,
            (Err(e), Ok(_)) => rep.errors.push((init.bindings().clone(), format!("denotational: {e}"))),
            (Ok(_), Err(e)) => rep.errors.push((init.bindings().clone(), format!("operational: {e}"))),
        }
    }
    Ok(rep)
}
