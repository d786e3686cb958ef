use std::collections::BTreeMap;
use std::sync::Arc;

use super::ast::{Ast, AstKind, Comm, Model};
use super::check::check_model;
use super::DslError;
use crate::contract::{Alphabet, CalcConfig, CalcError, Context, Contract};
use crate::parallel::{par_contract, ChannelSet};
use crate::rel::EventExpr;
use crate::state::{LensSet, StateSpace};
use crate::subst::Subst;
use crate::value::Type;

impl Model {
    pub fn context(&self) -> Result<Arc<Context>, DslError> {
        let space = StateSpace::new(self.vars.clone())?;
        Ok(Context::new(space, Alphabet { channels: self.channels.clone() }))
    }
}

/// Maps each process to its contract by structural recursion.
pub struct Elaborator<'m> {
    model: &'m Model,
    ctx: Arc<Context>,
    cfg: CalcConfig,
    cache: BTreeMap<String, Contract>,
}

impl<'m> Elaborator<'m> {
    pub fn new(model: &'m Model, cfg: CalcConfig) -> Result<Self, DslError> {
        check_model(model)?;
        Ok(Elaborator { model, ctx: model.context()?, cfg, cache: BTreeMap::new() })
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn process(&mut self, name: &str) -> Result<Contract, DslError> {
        if let Some(c) = self.cache.get(name) {
            return Ok(c.clone());
        }
        let def = self
            .model
            .process(name)
            .ok_or_else(|| DslError::UnknownName { pos: Default::default(), name: name.to_string() })?;
        let c = self.ast(&def.body)?;
        self.cache.insert(name.to_string(), c.clone());
        Ok(c)
    }

    pub fn ast(&mut self, a: &Ast) -> Result<Contract, DslError> {
        let pos = a.pos;
        let calc = |e: CalcError| DslError::Calc { pos, source: e };
        let ctx = self.ctx.clone();
        use AstKind::*;
        Ok(match &a.kind {
            Skip => Contract::skip(&ctx),
            Stop => Contract::stop(&ctx),
            Chaos => Contract::chaos(&ctx),
            Miracle => Contract::miracle(&ctx),
            Assign(x, e) => Contract::assign(&ctx, Subst::single(x, e.fold())),
            Prefix { channel, comm, cont } => match comm {
                Comm::None => Contract::do_event(&ctx, EventExpr::pure(channel)).seq(&self.ast(cont)?).map_err(calc)?,
                Comm::Output(e) => {
                    Contract::do_event(&ctx, EventExpr::with(channel, e.fold())).seq(&self.ast(cont)?).map_err(calc)?
                }
                Comm::Input(x) => {
                    let ty: Type = self
                        .model
                        .channel_type(channel)
                        .cloned()
                        .flatten()
                        .ok_or_else(|| DslError::Type { pos, msg: format!("`{channel}` carries no data") })?;
                    let mut branches = Vec::new();
                    for v in ty.values() {
                        let body = self.ast(&cont.subst_input(x, &v))?;
                        let ev = EventExpr::with(channel, crate::expr::Expr::Lit(v));
                        branches.push(Contract::do_event(&ctx, ev).seq(&body).map_err(calc)?);
                    }
                    Contract::extchoice(&branches).map_err(calc)?
                }
            },
            Guard(g, p) => self.ast(p)?.guard(&g.fold()).map_err(calc)?,
            Seq(x, y) => {
                let cx = self.ast(x)?;
                cx.seq(&self.ast(y)?).map_err(calc)?
            }
            Ext(x, y) => {
                let cx = self.ast(x)?;
                Contract::extchoice(&[cx, self.ast(y)?]).map_err(calc)?
            }
            Int(x, y) => {
                let cx = self.ast(x)?;
                Contract::intchoice(&[cx, self.ast(y)?]).map_err(calc)?
            }
            If(c, x, y) => {
                let cx = self.ast(x)?;
                cx.cond(&c.fold(), &self.ast(y)?).map_err(calc)?
            }
            While(c, body) => {
                let cb = self.ast(body)?;
                Contract::while_loop(&c.fold(), &cb, self.cfg).map_err(calc)?
            }
            Par { ns1, cs, ns2, left, right } => {
                let cl = self.ast(left)?;
                let cr = self.ast(right)?;
                let cs: ChannelSet = cs.iter().cloned().collect();
                par_contract(&cl, &LensSet::of(ns1.iter().cloned()), &cs, &LensSet::of(ns2.iter().cloned()), &cr)
                    .map_err(calc)?
            }
            Interleave(x, y) => {
                let cl = self.ast(x)?;
                let cr = self.ast(y)?;
                par_contract(&cl, &LensSet::zero(), &ChannelSet::new(), &LensSet::zero(), &cr).map_err(calc)?
            }
            Ref(n) => self.process(n)?,
        })
    }
}

pub fn elaborate(m: &Model, name: &str, cfg: CalcConfig) -> Result<Contract, DslError> {
    Elaborator::new(m, cfg)?.process(name)
}
