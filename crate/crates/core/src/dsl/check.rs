use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Ast, AstKind, Comm, Model, Pos};
use super::DslError;
use crate::expr::{BinOp, Expr, UnOp};
use crate::value::{Type, Value};

/// Static types of expressions. `Any` is the element type of `<>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SType {
    Bool,
    Int,
    Sym,
    Event,
    Seq(Box<SType>),
    Set(Box<SType>),
    Any,
}

impl SType {
    pub fn of(t: &Type) -> SType {
        match t {
            Type::Bool => SType::Bool,
            Type::Int { .. } => SType::Int,
            Type::Enum(_) => SType::Sym,
            Type::Seq { elem, .. } => SType::Seq(Box::new(SType::of(elem))),
        }
    }

    fn name(&self) -> String {
        match self {
            SType::Bool => "bool".into(),
            SType::Int => "int".into(),
            SType::Sym => "enum".into(),
            SType::Event => "event".into(),
            SType::Seq(e) => format!("seq {}", e.name()),
            SType::Set(e) => format!("set {}", e.name()),
            SType::Any => "any".into(),
        }
    }
}

fn unify(a: &SType, b: &SType) -> Option<SType> {
    match (a, b) {
        (SType::Any, x) | (x, SType::Any) => Some(x.clone()),
        (SType::Seq(x), SType::Seq(y)) => Some(SType::Seq(Box::new(unify(x, y)?))),
        (SType::Set(x), SType::Set(y)) => Some(SType::Set(Box::new(unify(x, y)?))),
        (x, y) if x == y => Some(x.clone()),
        _ => None,
    }
}

/// Names visible to an expression.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub names: BTreeMap<String, SType>,
    /// Channels known to `proj`, with the type their projection yields.
    pub channels: BTreeMap<String, SType>,
}

impl Scope {
    pub fn of_model(m: &Model) -> Scope {
        let mut s = Scope::default();
        for (n, t) in &m.vars {
            s.names.insert(n.clone(), SType::of(t));
        }
        for (c, t) in &m.channels {
            s.channels.insert(c.clone(), t.as_ref().map_or(SType::Event, SType::of));
        }
        s
    }

    /// Adds the observation names usable in predicates: `tt`, `acc` and
    /// primed state variables.
    pub fn with_observations(mut self) -> Scope {
        let vars: Vec<(String, SType)> = self.names.iter().map(|(n, t)| (n.clone(), t.clone())).collect();
        for (n, t) in vars {
            self.names.insert(format!("{n}'"), t);
        }
        self.names.insert("tt".into(), SType::Seq(Box::new(SType::Event)));
        self.names.insert("acc".into(), SType::Set(Box::new(SType::Event)));
        self
    }
}

fn err(pos: Pos, msg: String) -> DslError {
    DslError::Type { pos, msg }
}

pub fn type_of(e: &Expr, sc: &Scope, pos: Pos) -> Result<SType, DslError> {
    let need = |e: &Expr, want: SType, what: &str| -> Result<(), DslError> {
        let t = type_of(e, sc, pos)?;
        if unify(&t, &want).is_none() {
            return Err(err(pos, format!("{what} expects {}, found {} in `{e}`", want.name(), t.name())));
        }
        Ok(())
    };
    match e {
        Expr::Lit(v) => Ok(value_type(v)),
        Expr::Var(n) => match sc.names.get(n) {
            Some(t) => Ok(t.clone()),
            None if n == "tt" => Err(err(pos, "`tt` is reserved for trace predicates".into())),
            None => Err(DslError::UnknownName { pos, name: n.clone() }),
        },
        Expr::Unary(op, a) => match op {
            UnOp::Not => need(a, SType::Bool, "not").map(|_| SType::Bool),
            UnOp::Neg => need(a, SType::Int, "-").map(|_| SType::Int),
            UnOp::Len => match type_of(a, sc, pos)? {
                SType::Seq(_) | SType::Set(_) | SType::Any => Ok(SType::Int),
                t => Err(err(pos, format!("# expects a sequence, found {}", t.name()))),
            },
            UnOp::Head | UnOp::Tail => match type_of(a, sc, pos)? {
                SType::Seq(el) => Ok(if *op == UnOp::Head { *el } else { SType::Seq(el) }),
                t => Err(err(pos, format!("head/tail expect a sequence, found {}", t.name()))),
            },
        },
        Expr::Binary(op, a, b) => {
            let ta = type_of(a, sc, pos)?;
            let tb = type_of(b, sc, pos)?;
            let mismatch = || err(pos, format!("operands of `{e}` have types {} and {}", ta.name(), tb.name()));
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    need(a, SType::Int, "arithmetic")?;
                    need(b, SType::Int, "arithmetic")?;
                    Ok(SType::Int)
                }
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    need(a, SType::Bool, "logic")?;
                    need(b, SType::Bool, "logic")?;
                    Ok(SType::Bool)
                }
                BinOp::Eq | BinOp::Ne => unify(&ta, &tb).map(|_| SType::Bool).ok_or_else(mismatch),
                BinOp::Lt | BinOp::Gt | BinOp::Ge => {
                    need(a, SType::Int, "comparison")?;
                    need(b, SType::Int, "comparison")?;
                    Ok(SType::Bool)
                }
                BinOp::Le => match unify(&ta, &tb) {
                    Some(SType::Int) | Some(SType::Seq(_)) | Some(SType::Any) => Ok(SType::Bool),
                    _ => Err(mismatch()),
                },
                BinOp::Concat => match unify(&ta, &tb) {
                    Some(t @ SType::Seq(_)) => Ok(t),
                    Some(SType::Any) => Ok(SType::Seq(Box::new(SType::Any))),
                    _ => Err(mismatch()),
                },
                BinOp::In => match &tb {
                    SType::Seq(el) | SType::Set(el) if unify(&ta, el).is_some() => Ok(SType::Bool),
                    _ => Err(mismatch()),
                },
            }
        }
        Expr::SeqLit(items) => {
            let mut t = SType::Any;
            for i in items {
                let ti = type_of(i, sc, pos)?;
                t = unify(&t, &ti).ok_or_else(|| err(pos, format!("mixed element types in `{e}`")))?;
            }
            Ok(SType::Seq(Box::new(t)))
        }
        Expr::Cond { cond, then, els } => {
            need(cond, SType::Bool, "if")?;
            let a = type_of(then, sc, pos)?;
            let b = type_of(els, sc, pos)?;
            unify(&a, &b).ok_or_else(|| err(pos, format!("branches of `{e}` differ in type")))
        }
        Expr::EventCons { .. } => Ok(SType::Event),
        Expr::Filter(a, _) => {
            need(a, SType::Seq(Box::new(SType::Event)), "filter")?;
            Ok(SType::Seq(Box::new(SType::Event)))
        }
        Expr::Proj(a, ch) => {
            need(a, SType::Seq(Box::new(SType::Event)), "proj")?;
            match sc.channels.get(ch) {
                Some(t) => Ok(SType::Seq(Box::new(t.clone()))),
                None => Err(DslError::UnknownName { pos, name: ch.clone() }),
            }
        }
    }
}

fn value_type(v: &Value) -> SType {
    match v {
        Value::Bool(_) => SType::Bool,
        Value::Int(_) => SType::Int,
        Value::Sym(_) => SType::Sym,
        Value::Event(_) => SType::Event,
        Value::Seq(items) => SType::Seq(Box::new(items.first().map_or(SType::Any, value_type))),
        Value::Set(items) => SType::Set(Box::new(items.iter().next().map_or(SType::Any, value_type))),
    }
}

fn expect_bool(e: &Expr, sc: &Scope, pos: Pos) -> Result<(), DslError> {
    let t = type_of(e, sc, pos)?;
    if unify(&t, &SType::Bool).is_none() {
        return Err(err(pos, format!("condition `{e}` has type {}", t.name())));
    }
    Ok(())
}

/// Checks a boolean predicate over observations.
pub fn check_predicate(e: &Expr, m: &Model) -> Result<(), DslError> {
    expect_bool(e, &Scope::of_model(m).with_observations(), Pos::default())
}

/// Types every process and rejects unknown names and cyclic references.
pub fn check_model(m: &Model) -> Result<(), DslError> {
    let base = Scope::of_model(m);
    for (c, _) in &m.channels {
        if m.var_type(c).is_some() || m.process(c).is_some() {
            return Err(err(Pos::default(), format!("`{c}` names both a channel and something else")));
        }
    }
    for p in &m.processes {
        check_ast(&p.body, m, &base)?;
    }
    for p in &m.processes {
        let mut stack = Vec::new();
        find_cycle(m, &p.name, &mut stack, p.pos)?;
    }
    Ok(())
}

fn find_cycle(m: &Model, name: &str, stack: &mut Vec<String>, pos: Pos) -> Result<(), DslError> {
    if stack.iter().any(|s| s == name) {
        return Err(err(pos, format!("recursive reference to `{name}`; use `while` instead")));
    }
    stack.push(name.to_string());
    let mut refs = BTreeSet::new();
    if let Some(p) = m.process(name) {
        collect_refs(&p.body, &mut refs);
    }
    for r in refs {
        find_cycle(m, &r, stack, pos)?;
    }
    stack.pop();
    Ok(())
}

fn collect_refs(a: &Ast, out: &mut BTreeSet<String>) {
    use AstKind::*;
    match &a.kind {
        Ref(n) => {
            out.insert(n.clone());
        }
        Prefix { cont, .. } | Guard(_, cont) | While(_, cont) => collect_refs(cont, out),
        Seq(x, y) | Ext(x, y) | Int(x, y) | If(_, x, y) | Interleave(x, y) | Par { left: x, right: y, .. } => {
            collect_refs(x, out);
            collect_refs(y, out);
        }
        _ => {}
    }
}

fn check_ast(a: &Ast, m: &Model, sc: &Scope) -> Result<(), DslError> {
    use AstKind::*;
    let pos = a.pos;
    match &a.kind {
        Skip | Stop | Chaos | Miracle => Ok(()),
        Assign(x, e) => {
            let want = match m.var_type(x) {
                Some(t) => SType::of(t),
                None if sc.names.contains_key(x) => {
                    return Err(err(pos, format!("input `{x}` cannot be assigned")));
                }
                None => return Err(DslError::UnknownName { pos, name: x.clone() }),
            };
            let t = type_of(e, sc, pos)?;
            if unify(&t, &want).is_none() {
                return Err(err(pos, format!("`{x}` has type {} but `{e}` has type {}", want.name(), t.name())));
            }
            Ok(())
        }
        Prefix { channel, comm, cont } => {
            let ct = m.channel_type(channel).ok_or_else(|| DslError::UnknownName { pos, name: channel.clone() })?;
            match (comm, ct) {
                (Comm::None, None) => check_ast(cont, m, sc),
                (Comm::Output(e), Some(t)) => {
                    let te = type_of(e, sc, pos)?;
                    if unify(&te, &SType::of(t)).is_none() {
                        return Err(err(pos, format!("`{channel}` carries {} but `{e}` has type {}", t, te.name())));
                    }
                    check_ast(cont, m, sc)
                }
                (Comm::Input(x), Some(t)) => {
                    if m.var_type(x).is_some() || m.channel_type(x).is_some() {
                        return Err(err(pos, format!("input `{x}` shadows a declared name")));
                    }
                    let mut inner = sc.clone();
                    inner.names.insert(x.clone(), SType::of(t));
                    check_ast(cont, m, &inner)
                }
                (Comm::None, Some(_)) => Err(err(pos, format!("`{channel}` carries data; use `!` or `?`"))),
                (_, None) => Err(err(pos, format!("`{channel}` carries no data"))),
            }
        }
        Guard(g, p) | While(g, p) => {
            expect_bool(g, sc, pos)?;
            check_ast(p, m, sc)
        }
        If(c, x, y) => {
            expect_bool(c, sc, pos)?;
            check_ast(x, m, sc)?;
            check_ast(y, m, sc)
        }
        Seq(x, y) | Ext(x, y) | Int(x, y) | Interleave(x, y) => {
            check_ast(x, m, sc)?;
            check_ast(y, m, sc)
        }
        Par { ns1, cs, ns2, left, right } => {
            for n in ns1.iter().chain(ns2) {
                if m.var_type(n).is_none() {
                    return Err(DslError::UnknownName { pos, name: n.clone() });
                }
            }
            if let Some(n) = ns1.iter().find(|n| ns2.contains(n)) {
                return Err(err(pos, format!("`{n}` is in both name sets")));
            }
            for c in cs {
                if m.channel_type(c).is_none() {
                    return Err(DslError::UnknownName { pos, name: c.clone() });
                }
            }
            check_ast(left, m, sc)?;
            check_ast(right, m, sc)
        }
        Ref(n) => match m.process(n) {
            Some(_) => Ok(()),
            None => Err(DslError::UnknownName { pos, name: n.clone() }),
        },
    }
}
