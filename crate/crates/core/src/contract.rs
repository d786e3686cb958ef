//! Contracts `[pre ⊢ peri | post]` and their calculation laws.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, not, Expr};
use crate::rel::{conj_quiescent, AcceptSpec, ETerm, EventExpr, ITerm, PeriRel, PhiTerm, PostRel, PreRel, RelError, TraceExpr};
use crate::state::StateSpace;
use crate::subst::{self, ImplyError, Subst};
use crate::value::{Event, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error("contracts are over different alphabets or state spaces")]
    AlphabetMismatch,
    #[error("choice over an empty set of contracts")]
    EmptyChoice,
    #[error("loop body is not productive: some iteration can terminate without an event")]
    NonProductiveBody,
    #[error("name sets {0} and {1} overlap")]
    LensOverlap(String, String),
    #[error("trace extension exceeds the bound of {0} events")]
    ExtensionBoundExceeded(usize),
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error(transparent)]
    Imply(#[from] ImplyError),
}

/// Declared channels and their data domains.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub channels: Vec<(String, Option<Type>)>,
}

impl Alphabet {
    pub fn channel_type(&self, name: &str) -> Option<&Option<Type>> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Every concrete event.
    pub fn events(&self) -> Vec<Event> {
        let mut out = Vec::new();
        for (name, ty) in &self.channels {
            match ty {
                None => out.push(Event::pure(name)),
                Some(t) => out.extend(t.values().into_iter().map(|v| Event::with(name, v))),
            }
        }
        out
    }
}

/// State space plus alphabet shared by every contract of one model.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    pub space: StateSpace,
    pub alphabet: Alphabet,
}

impl Context {
    pub fn new(space: StateSpace, alphabet: Alphabet) -> Arc<Self> {
        Arc::new(Context { space, alphabet })
    }
}

/// Bounds used while calculating loops and iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CalcConfig {
    pub star_bound: usize,
    /// Terms with longer traces are irrelevant to bounded checks and may be dropped.
    pub trace_cap: Option<usize>,
}

impl Default for CalcConfig {
    fn default() -> Self {
        CalcConfig { star_bound: 3, trace_cap: None }
    }
}

#[derive(Clone, Debug)]
pub struct Contract {
    pub pre: PreRel,
    pub peri: PeriRel,
    pub post: PostRel,
    pub ctx: Arc<Context>,
    /// Set when the contract came from a bounded star unrolling.
    pub star_bound: Option<usize>,
}

impl PartialEq for Contract {
    fn eq(&self, other: &Self) -> bool {
        self.pre == other.pre && self.peri == other.peri && self.post == other.post && self.ctx == other.ctx
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthFlags {
    pub productive: bool,
    pub instantaneous: bool,
    pub cacc: bool,
    pub cdc: bool,
}

fn merge_bounds(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Largest projected space enumerated when deciding a condition.
const DECIDE_LIMIT: u128 = 1 << 12;

/// `Some(true)` when `c` is valid, `Some(false)` when unsatisfiable, over
/// the variables it mentions. `None` when undecided.
fn decide(c: &Expr, sp: &StateSpace) -> Option<bool> {
    if c.is_true() {
        return Some(true);
    }
    if c.is_false() {
        return Some(false);
    }
    let mut names = std::collections::BTreeSet::new();
    c.vars(&mut names);
    let mut vars = Vec::new();
    for n in &names {
        vars.push((n.clone(), sp.var_type(n)?.clone()));
    }
    let sub = StateSpace::new(vars).ok()?;
    if sub.state_count() > DECIDE_LIMIT {
        return None;
    }
    let (mut some_t, mut some_f) = (false, false);
    for s in sub.states().ok()? {
        match c.eval_bool(&s).ok()? {
            true => some_t = true,
            false => some_f = true,
        }
        if some_t && some_f {
            return None;
        }
    }
    match (some_t, some_f) {
        (true, false) => Some(true),
        (false, true) => Some(false),
        _ => None,
    }
}

fn same_ctx(cs: &[&Contract]) -> Result<Arc<Context>, CalcError> {
    let first = cs.first().ok_or(CalcError::EmptyChoice)?;
    for c in &cs[1..] {
        if !Arc::ptr_eq(&first.ctx, &c.ctx) && first.ctx != c.ctx {
            return Err(CalcError::AlphabetMismatch);
        }
    }
    Ok(first.ctx.clone())
}

impl Contract {
    pub fn new(ctx: &Arc<Context>, pre: PreRel, peri: PeriRel, post: PostRel) -> Contract {
        Contract { pre, peri, post, ctx: ctx.clone(), star_bound: None }.normalize()
    }

    /// A false precondition makes peri and post irrelevant.
    pub fn normalize(mut self) -> Contract {
        let sp = &self.ctx.space;
        let pre_terms = std::mem::take(&mut self.pre.terms)
            .into_iter()
            .filter_map(|t| match decide(&t.cond, sp) {
                Some(true) => Some(ITerm::new(expr::tt(), t.trace)),
                Some(false) => None,
                None => Some(t),
            })
            .collect();
        self.pre = PreRel { terms: pre_terms }.normalize();
        self.peri.terms.retain(|t| decide(&t.cond, sp) != Some(false));
        self.post.terms.retain(|t| decide(&t.cond, sp) != Some(false));
        if self.pre.is_false() {
            self.peri = PeriRel::falsity();
            self.post = PostRel::falsity();
        } else {
            self.peri = self.peri.normalize();
            self.post = self.post.normalize();
        }
        self
    }

    pub fn skip(ctx: &Arc<Context>) -> Contract {
        Contract::new(ctx, PreRel::truer(), PeriRel::falsity(), PostRel::skip())
    }

    pub fn assign(ctx: &Arc<Context>, s: Subst) -> Contract {
        let post = PostRel::of(vec![PhiTerm::new(expr::tt(), s, TraceExpr::empty())]);
        Contract::new(ctx, PreRel::truer(), PeriRel::falsity(), post)
    }

    pub fn do_event(ctx: &Arc<Context>, e: EventExpr) -> Contract {
        let peri = PeriRel::of(vec![ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::of(vec![e.clone()]))]);
        let post = PostRel::of(vec![PhiTerm::new(expr::tt(), Subst::id(), TraceExpr::single(e))]);
        Contract::new(ctx, PreRel::truer(), peri, post)
    }

    pub fn stop(ctx: &Arc<Context>) -> Contract {
        let peri = PeriRel::of(vec![ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::empty())]);
        Contract::new(ctx, PreRel::truer(), peri, PostRel::falsity())
    }

    pub fn chaos(ctx: &Arc<Context>) -> Contract {
        Contract::new(ctx, PreRel::falsity(), PeriRel::falsity(), PostRel::falsity())
    }

    pub fn miracle(ctx: &Arc<Context>) -> Contract {
        Contract::new(ctx, PreRel::truer(), PeriRel::falsity(), PostRel::falsity())
    }

    /// Quiescent forever, refusing nothing.
    pub fn accept(ctx: &Arc<Context>) -> Contract {
        let all = ctx.alphabet.events().iter().map(EventExpr::lit).collect();
        let peri = PeriRel::of(vec![ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::of(all))]);
        Contract::new(ctx, PreRel::truer(), peri, PostRel::falsity())
    }

    /// `⌈s⌉`.
    pub fn test(ctx: &Arc<Context>, s: Expr) -> Contract {
        Contract::new(ctx, PreRel::truer(), PeriRel::falsity(), PostRel::of(vec![PhiTerm::test(s)]))
    }

    pub fn seq(&self, q: &Contract) -> Result<Contract, CalcError> {
        let ctx = same_ctx(&[self, q])?;
        let pre = self.pre.and(&self.post.wp(&q.pre));
        let peri = self.peri.or(&self.post.seq_peri(&q.peri));
        let post = self.post.seq(&q.post);
        let mut c = Contract::new(&ctx, pre, peri, post);
        c.star_bound = merge_bounds(self.star_bound, q.star_bound);
        Ok(c)
    }

    pub fn intchoice(cs: &[Contract]) -> Result<Contract, CalcError> {
        let refs: Vec<&Contract> = cs.iter().collect();
        let ctx = same_ctx(&refs)?;
        let mut pre = PreRel::truer();
        let mut peri = PeriRel::falsity();
        let mut post = PostRel::falsity();
        let mut bound = None;
        for c in cs {
            pre = pre.and(&c.pre);
            peri = peri.or(&c.peri);
            post = post.or(&c.post);
            bound = merge_bounds(bound, c.star_bound);
        }
        let mut c = Contract::new(&ctx, pre, peri, post);
        c.star_bound = bound;
        Ok(c)
    }

    /// `self ◁ b ▷ other`.
    pub fn cond(&self, b: &Expr, other: &Contract) -> Result<Contract, CalcError> {
        let ctx = same_ctx(&[self, other])?;
        let b = b.fold();
        if b.is_true() {
            return Ok(self.clone());
        }
        if b.is_false() {
            return Ok(other.clone());
        }
        let mut c = Contract::new(
            &ctx,
            self.pre.cond(&b, &other.pre),
            self.peri.cond(&b, &other.peri),
            self.post.cond(&b, &other.post),
        );
        c.star_bound = merge_bounds(self.star_bound, other.star_bound);
        Ok(c)
    }

    /// `g & self`.
    pub fn guard(&self, g: &Expr) -> Result<Contract, CalcError> {
        self.cond(g, &Contract::stop(&self.ctx))
    }

    pub fn extchoice(cs: &[Contract]) -> Result<Contract, CalcError> {
        let refs: Vec<&Contract> = cs.iter().collect();
        let ctx = same_ctx(&refs)?;
        if cs.len() == 1 {
            return Ok(cs[0].clone());
        }
        let mut pre = PreRel::truer();
        let mut post = PostRel::falsity();
        let mut resolved = PeriRel::falsity();
        let mut waiting: Vec<ETerm> = vec![ETerm::new(expr::tt(), TraceExpr::empty(), AcceptSpec::empty())];
        let mut bound = None;
        for c in cs {
            pre = pre.and(&c.pre);
            post = post.or(&c.post);
            resolved = resolved.or(&c.peri.filter(true));
            let initial = c.peri.filter(false);
            let mut next = Vec::with_capacity(waiting.len() * initial.terms.len());
            for w in &waiting {
                for t in &initial.terms {
                    next.push(conj_quiescent(&[w.clone(), t.clone()])?);
                }
            }
            waiting = PeriRel::of(next).terms;
            bound = merge_bounds(bound, c.star_bound);
        }
        let peri = PeriRel::of(waiting).or(&resolved);
        let mut c = Contract::new(&ctx, pre, peri, post);
        c.star_bound = bound;
        Ok(c)
    }

    pub fn health_flags(&self) -> Result<HealthFlags, CalcError> {
        let productive = self.post.terms.iter().all(|t| !t.trace.is_empty());
        let instantaneous = self.peri.terms.is_empty() && self.post.terms.iter().all(|t| t.trace.is_empty());
        let cacc = if self.pre.is_false() {
            true
        } else {
            let waiting = expr::disj(self.peri.filter(false).terms.iter().map(|t| t.cond.clone()));
            subst::cond_implies_bounded(&expr::tt(), &waiting, &self.ctx.space)?
        };
        Ok(HealthFlags { productive, instantaneous, cacc, cdc: true })
    }

    /// Some final observation is possible from some state.
    pub fn post_feasible(&self) -> Result<bool, CalcError> {
        for t in &self.post.terms {
            if subst::satisfiable(&t.cond, &self.ctx.space)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `while b do self`, unrolled up to `cfg.star_bound` iterations.
    pub fn while_loop(b: &Expr, body: &Contract, cfg: CalcConfig) -> Result<Contract, CalcError> {
        let ctx = body.ctx.clone();
        let b = b.fold();
        if b.is_false() {
            return Ok(Contract::skip(&ctx));
        }
        let test = PostRel::of(vec![PhiTerm::test(b.clone())]);
        let exit = PostRel::of(vec![PhiTerm::test(not(b.clone()))]);
        let mut step = Vec::new();
        for t in test.seq(&body.post).terms {
            if subst::satisfiable(&t.cond, &ctx.space)? {
                step.push(t);
            }
        }
        if step.iter().any(|t| t.trace.is_empty()) {
            let flags = body.health_flags()?;
            if b.is_true() && flags.instantaneous && body.post_feasible()? {
                return Ok(Contract::chaos(&ctx));
            }
            return Err(CalcError::NonProductiveBody);
        }
        let star = PostRel { terms: step }.star(cfg.star_bound, cfg.trace_cap);
        let enter = star.seq(&test);
        let pre = enter.wp(&body.pre).truncate(cfg.trace_cap);
        let peri = enter.seq_peri(&body.peri).truncate(cfg.trace_cap);
        let post = star.seq(&exit).truncate(cfg.trace_cap);
        let mut c = Contract::new(&ctx, pre, peri, post);
        c.star_bound = Some(merge_bounds(Some(cfg.star_bound), body.star_bound).unwrap_or(cfg.star_bound));
        Ok(c)
    }

    /// `self★`, unrolled up to `cfg.star_bound` iterations.
    pub fn iterate(&self, cfg: CalcConfig) -> Contract {
        let star = self.post.star(cfg.star_bound, cfg.trace_cap);
        let pre = star.wp(&self.pre).truncate(cfg.trace_cap);
        let peri = star.seq_peri(&self.peri).truncate(cfg.trace_cap);
        let mut c = Contract::new(&self.ctx, pre, peri, star);
        c.star_bound = Some(cfg.star_bound);
        c
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pre: ")?;
        if self.pre.is_true() {
            writeln!(f, "true_r")?;
        } else if self.pre.is_false() {
            writeln!(f, "false")?;
        } else {
            let parts: Vec<String> = self.pre.terms.iter().map(|t| t.to_string()).collect();
            writeln!(f, "{}", parts.join(" ∧ "))?;
        }
        write!(f, "peri: ")?;
        if self.peri.terms.is_empty() {
            writeln!(f, "false")?;
        } else {
            let parts: Vec<String> = self.peri.terms.iter().map(|t| t.to_string()).collect();
            writeln!(f, "{}", parts.join(" ∨ "))?;
        }
        write!(f, "post: ")?;
        if self.post.terms.is_empty() {
            write!(f, "false")
        } else {
            let parts: Vec<String> = self.post.terms.iter().map(|t| t.to_string()).collect();
            write!(f, "{}", parts.join(" ∨ "))
        }
    }
}
