//! Parallel composition: trace merge, observation merges and weakest rely.

use std::collections::BTreeSet;

use crate::contract::{CalcError, Contract};
use crate::expr::{self, and, Expr};
use crate::rel::{intersect_accepts, AcceptSpec, ETerm, EventExpr, ITerm, PeriRel, PhiTerm, PostRel, PreRel, TraceExpr};
use crate::state::LensSet;
use crate::subst::Subst;
use crate::value::Event;

pub type ChannelSet = BTreeSet<String>;

/// One symbolic outcome of a trace merge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MergeResidual {
    pub cond: Expr,
    pub trace: TraceExpr,
}

/// The recursive merge on ground traces. Blocked synchronisations truncate.
pub fn trace_merge_concrete(t1: &[Event], t2: &[Event], cs: &ChannelSet) -> BTreeSet<Vec<Event>> {
    let in_cs = |e: &Event| cs.contains(&e.channel);
    let cons = |e: &Event, rest: BTreeSet<Vec<Event>>| -> BTreeSet<Vec<Event>> {
        rest.into_iter()
            .map(|mut t| {
                t.insert(0, e.clone());
                t
            })
            .collect()
    };
    match (t1.split_first(), t2.split_first()) {
        (None, None) => BTreeSet::from([vec![]]),
        (Some((e, t)), None) => {
            if in_cs(e) {
                BTreeSet::from([vec![]])
            } else {
                cons(e, trace_merge_concrete(t, &[], cs))
            }
        }
        (None, Some((e, t))) => {
            if in_cs(e) {
                BTreeSet::from([vec![]])
            } else {
                cons(e, trace_merge_concrete(&[], t, cs))
            }
        }
        (Some((e1, r1)), Some((e2, r2))) => {
            if e1 == e2 {
                if in_cs(e1) {
                    cons(e1, trace_merge_concrete(r1, r2, cs))
                } else {
                    let mut a = trace_merge_concrete(r1, t2, cs);
                    a.extend(trace_merge_concrete(t1, r2, cs));
                    cons(e1, a)
                }
            } else {
                match (in_cs(e1), in_cs(e2)) {
                    (true, true) => BTreeSet::from([vec![]]),
                    (true, false) => cons(e2, trace_merge_concrete(t1, r2, cs)),
                    (false, true) => cons(e1, trace_merge_concrete(r1, t2, cs)),
                    (false, false) => {
                        let mut a = cons(e1, trace_merge_concrete(r1, t2, cs));
                        a.extend(cons(e2, trace_merge_concrete(t1, r2, cs)));
                        a
                    }
                }
            }
        }
    }
}

/// Prefers a literal over a symbolic data expression for synchronised events.
fn pick(e1: &EventExpr, e2: &EventExpr) -> EventExpr {
    match (&e1.data, &e2.data) {
        (Some(d1), Some(d2)) if !d1.is_lit() && d2.is_lit() => e2.clone(),
        _ => e1.clone(),
    }
}

fn merge_rec(
    t1: &[EventExpr],
    t2: &[EventExpr],
    cs: &ChannelSet,
    prefix: &mut Vec<EventExpr>,
    cond: &Expr,
    out: &mut Vec<MergeResidual>,
) {
    let e1 = t1.first();
    let e2 = t2.first();
    if e1.is_none() && e2.is_none() {
        out.push(MergeResidual { cond: cond.clone(), trace: TraceExpr(prefix.clone()) });
        return;
    }
    let free1 = e1.is_some_and(|e| !cs.contains(&e.channel));
    let free2 = e2.is_some_and(|e| !cs.contains(&e.channel));
    if free1 {
        prefix.push(t1[0].clone());
        merge_rec(&t1[1..], t2, cs, prefix, cond, out);
        prefix.pop();
    }
    if free2 {
        prefix.push(t2[0].clone());
        merge_rec(t1, &t2[1..], cs, prefix, cond, out);
        prefix.pop();
    }
    if let (Some(a), Some(b)) = (e1, e2) {
        if !free1 && !free2 {
            let same = a.same_as(b);
            if same.is_false() {
                return;
            }
            let c = and(cond.clone(), same);
            if c.is_false() {
                return;
            }
            prefix.push(pick(a, b));
            merge_rec(&t1[1..], &t2[1..], cs, prefix, &c, out);
            prefix.pop();
        }
    }
}

/// Merge of symbolic traces whose `cs` projections agree. Data of
/// synchronised events becomes an equality constraint.
pub fn trace_merge_symbolic(t1: &TraceExpr, t2: &TraceExpr, cs: &ChannelSet) -> Vec<MergeResidual> {
    let mut out = Vec::new();
    merge_rec(&t1.0, &t2.0, cs, &mut Vec::new(), &expr::tt(), &mut out);
    for r in &mut out {
        r.trace = r.trace.fold();
    }
    out.sort();
    out.dedup();
    out
}

pub fn subst_par_merge(s1: &Subst, ns1: &LensSet, s2: &Subst, ns2: &LensSet) -> Result<Subst, CalcError> {
    if !ns1.independent(ns2) {
        return Err(CalcError::LensOverlap(ns1.to_string(), ns2.to_string()));
    }
    Ok(Subst::par_merge(s1, ns1, s2, ns2))
}

pub fn merge_finalisers(
    p: &PhiTerm,
    q: &PhiTerm,
    ns1: &LensSet,
    cs: &ChannelSet,
    ns2: &LensSet,
) -> Result<PostRel, CalcError> {
    let update = subst_par_merge(&p.update, ns1, &q.update, ns2)?;
    let base = and(p.cond.clone(), q.cond.clone());
    let terms = trace_merge_symbolic(&p.trace, &q.trace, cs)
        .into_iter()
        .map(|r| PhiTerm::new(and(base.clone(), r.cond), update.clone(), r.trace))
        .collect();
    Ok(PostRel::of(terms))
}

/// Both sides quiescent: shared events need both, the rest need either.
pub fn merge_quiescent(p: &ETerm, q: &ETerm, cs: &ChannelSet) -> PeriRel {
    let base = and(p.cond.clone(), q.cond.clone());
    let shared = intersect_accepts(&p.accepts.filter_channels(cs, true), &q.accepts.filter_channels(cs, true));
    let free = p.accepts.filter_channels(cs, false).union(&q.accepts.filter_channels(cs, false));
    let accepts = shared.union(&free);
    let terms = trace_merge_symbolic(&p.trace, &q.trace, cs)
        .into_iter()
        .map(|r| ETerm::new(and(base.clone(), r.cond), r.trace, accepts.clone()))
        .collect();
    PeriRel::of(terms)
}

/// One side quiescent, the other terminated: only the quiescent side's
/// events outside `cs` remain possible.
pub fn merge_quiescent_final(p: &ETerm, q: &PhiTerm, cs: &ChannelSet) -> PeriRel {
    let base = and(p.cond.clone(), q.cond.clone());
    let accepts: AcceptSpec = p.accepts.filter_channels(cs, false).normalize();
    let terms = trace_merge_symbolic(&p.trace, &q.trace, cs)
        .into_iter()
        .map(|r| ETerm::new(and(base.clone(), r.cond), r.trace, accepts.clone()))
        .collect();
    PeriRel::of(terms)
}

/// Trace-carrying left operand of `wrely`.
#[derive(Clone, Debug)]
pub struct RelyOperand {
    pub cond: Expr,
    pub trace: TraceExpr,
    /// Set for a precondition violation, which covers every extension of `trace`.
    pub extensible: bool,
}

fn projection(t: &TraceExpr, cs: &ChannelSet) -> Vec<EventExpr> {
    t.0.iter().filter(|e| cs.contains(&e.channel)).cloned().collect()
}

/// `p wrely q` over one assumption, as a conjunction of assumptions on the
/// merged traces. Only prefix-minimal merged traces are produced.
pub fn wrely(p: &RelyOperand, q: &ITerm, cs: &ChannelSet, ext_bound: Option<usize>) -> Result<PreRel, CalcError> {
    let p1 = projection(&p.trace, cs);
    let p2 = projection(&q.trace, cs);
    let k = p1.len().min(p2.len());
    if (0..k).any(|i| p1[i].channel != p2[i].channel) {
        return Ok(PreRel::truer());
    }
    let (own, other) = if p2.len() > p1.len() {
        if !p.extensible {
            return Ok(PreRel::truer());
        }
        (p.trace.concat(&TraceExpr(p2[k..].to_vec())), q.trace.clone())
    } else {
        (p.trace.clone(), q.trace.concat(&TraceExpr(p1[k..].to_vec())))
    };
    let bound = ext_bound.unwrap_or(p.trace.len() + q.trace.len());
    let base = and(p.cond.clone(), q.cond.clone());
    let residuals = trace_merge_symbolic(&other, &own, cs);
    let mut terms: Vec<ITerm> = Vec::new();
    for r in residuals {
        if r.trace.len() > bound {
            return Err(CalcError::ExtensionBoundExceeded(bound));
        }
        terms.push(ITerm::new(and(base.clone(), r.cond), r.trace));
    }
    Ok(PreRel::of(terms))
}

fn rely_operands(c: &Contract, with_peri: bool) -> Vec<RelyOperand> {
    let mut out: Vec<RelyOperand> = c
        .pre
        .terms
        .iter()
        .map(|t| RelyOperand { cond: t.cond.clone(), trace: t.trace.clone(), extensible: true })
        .collect();
    if with_peri {
        out.extend(c.peri.terms.iter().map(|t| RelyOperand { cond: t.cond.clone(), trace: t.trace.clone(), extensible: false }));
    }
    out.extend(c.post.terms.iter().map(|t| RelyOperand { cond: t.cond.clone(), trace: t.trace.clone(), extensible: false }));
    out
}

fn rely_all(ops: &[RelyOperand], pre: &PreRel, cs: &ChannelSet) -> Result<PreRel, CalcError> {
    let mut acc = PreRel::truer();
    for q in &pre.terms {
        for p in ops {
            acc = acc.and(&wrely(p, q, cs, None)?);
        }
    }
    Ok(acc)
}

/// `P ⟦ns1 | cs | ns2⟧ Q`.
pub fn par_contract(
    p: &Contract,
    ns1: &LensSet,
    cs: &ChannelSet,
    ns2: &LensSet,
    q: &Contract,
) -> Result<Contract, CalcError> {
    if !ns1.independent(ns2) {
        return Err(CalcError::LensOverlap(ns1.to_string(), ns2.to_string()));
    }
    if p.ctx != q.ctx {
        return Err(CalcError::AlphabetMismatch);
    }
    let pre = rely_all(&rely_operands(p, true), &q.pre, cs)?.and(&rely_all(&rely_operands(q, true), &p.pre, cs)?);

    let mut peri = Vec::new();
    for a in &p.peri.terms {
        for b in &q.peri.terms {
            peri.extend(merge_quiescent(a, b, cs).terms);
        }
        for b in &q.post.terms {
            peri.extend(merge_quiescent_final(a, b, cs).terms);
        }
    }
    for a in &p.post.terms {
        for b in &q.peri.terms {
            peri.extend(merge_quiescent_final(b, a, cs).terms);
        }
    }
    let mut post = Vec::new();
    for a in &p.post.terms {
        for b in &q.post.terms {
            post.extend(merge_finalisers(a, b, ns1, cs, ns2)?.terms);
        }
    }
    let mut c = Contract::new(&p.ctx, pre, PeriRel::of(peri), PostRel::of(post));
    c.star_bound = match (p.star_bound, q.star_bound) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    Ok(c)
}
