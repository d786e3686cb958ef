//! Symbolic expressions: evaluation, folding and printing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{State, Valuation};
use crate::value::{Event, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{0} of empty sequence")]
    EmptySeq(&'static str),
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("`{op}` cannot be applied to {found}")]
    Type { op: &'static str, found: String },
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
    Head,
    Tail,
    Len,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    /// Integer order, or prefix order on sequences.
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Concat,
    /// Membership in a set or sequence.
    In,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "=>",
            BinOp::Concat => "^",
            BinOp::In => "in",
        }
    }

    fn prec(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::In => 5,
            BinOp::Add | BinOp::Sub | BinOp::Concat => 6,
            BinOp::Mul => 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Expr {
    Lit(Value),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    SeqLit(Vec<Expr>),
    Cond { cond: Box<Expr>, then: Box<Expr>, els: Box<Expr> },
    EventCons { channel: String, data: Option<Box<Expr>> },
    /// Restriction of an event sequence to a channel set.
    Filter(Box<Expr>, BTreeSet<String>),
    /// Data carried by the events of one channel, in order.
    Proj(Box<Expr>, String),
}

/// Name lookup for evaluation.
pub trait Env {
    fn lookup(&self, name: &str) -> Option<&Value>;
}

impl Env for Valuation {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

impl Env for State {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

/// Extra bindings layered over a base environment.
pub struct Overlay<'a> {
    pub base: &'a dyn Env,
    pub extra: &'a BTreeMap<String, Value>,
}

impl Env for Overlay<'_> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.extra.get(name).or_else(|| self.base.lookup(name))
    }
}

pub fn tt() -> Expr {
    Expr::Lit(Value::Bool(true))
}

pub fn ff() -> Expr {
    Expr::Lit(Value::Bool(false))
}

pub fn int(i: i64) -> Expr {
    Expr::Lit(Value::Int(i))
}

pub fn var(name: &str) -> Expr {
    Expr::Var(name.to_string())
}

pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary(op, Box::new(a), Box::new(b))
}

pub fn un(op: UnOp, a: Expr) -> Expr {
    Expr::Unary(op, Box::new(a))
}

pub fn and(a: Expr, b: Expr) -> Expr {
    bin(BinOp::And, a, b).fold()
}

pub fn or(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Or, a, b).fold()
}

pub fn not(a: Expr) -> Expr {
    un(UnOp::Not, a).fold()
}

pub fn eq(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Eq, a, b).fold()
}

pub fn ite(cond: Expr, then: Expr, els: Expr) -> Expr {
    Expr::Cond { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) }.fold()
}

pub fn conj<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
    items.into_iter().fold(tt(), and)
}

pub fn disj<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
    items.into_iter().fold(ff(), or)
}

fn type_err(op: &'static str, v: &Value) -> EvalError {
    EvalError::Type { op, found: v.kind().to_string() }
}

fn expect_bool(op: &'static str, v: Value) -> Result<bool, EvalError> {
    v.as_bool().ok_or_else(|| type_err(op, &v))
}

fn expect_int(op: &'static str, v: &Value) -> Result<i64, EvalError> {
    v.as_int().ok_or_else(|| type_err(op, v))
}

fn expect_seq(op: &'static str, v: Value) -> Result<Vec<Value>, EvalError> {
    match v {
        Value::Seq(s) => Ok(s),
        other => Err(type_err(op, &other)),
    }
}

impl Expr {
    pub fn is_lit(&self) -> bool {
        matches!(self, Expr::Lit(_))
    }

    pub fn as_bool_lit(&self) -> Option<bool> {
        match self {
            Expr::Lit(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int_lit(&self) -> Option<i64> {
        match self {
            Expr::Lit(Value::Int(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn is_true(&self) -> bool {
        self.as_bool_lit() == Some(true)
    }

    pub fn is_false(&self) -> bool {
        self.as_bool_lit() == Some(false)
    }

    pub fn eval(&self, env: &dyn Env) -> Result<Value, EvalError> {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(n) => env.lookup(n).cloned().ok_or_else(|| EvalError::Unbound(n.clone())),
            Expr::Unary(op, a) => {
                let v = a.eval(env)?;
                match op {
                    UnOp::Not => Ok(Value::Bool(!expect_bool("not", v)?)),
                    UnOp::Neg => {
                        let i = expect_int("-", &v)?;
                        i.checked_neg().map(Value::Int).ok_or(EvalError::Overflow("-"))
                    }
                    UnOp::Head => {
                        let s = expect_seq("head", v)?;
                        s.into_iter().next().ok_or(EvalError::EmptySeq("head"))
                    }
                    UnOp::Tail => {
                        let mut s = expect_seq("tail", v)?;
                        if s.is_empty() {
                            return Err(EvalError::EmptySeq("tail"));
                        }
                        s.remove(0);
                        Ok(Value::Seq(s))
                    }
                    UnOp::Len => match v {
                        Value::Seq(s) => Ok(Value::Int(s.len() as i64)),
                        Value::Set(s) => Ok(Value::Int(s.len() as i64)),
                        other => Err(type_err("#", &other)),
                    },
                }
            }
            Expr::Binary(op, a, b) => eval_binary(*op, a, b, env),
            Expr::SeqLit(items) => Ok(Value::Seq(items.iter().map(|e| e.eval(env)).collect::<Result<_, _>>()?)),
            Expr::Cond { cond, then, els } => {
                if expect_bool("if", cond.eval(env)?)? {
                    then.eval(env)
                } else {
                    els.eval(env)
                }
            }
            Expr::EventCons { channel, data } => {
                let data = match data {
                    Some(d) => Some(Box::new(d.eval(env)?)),
                    None => None,
                };
                Ok(Value::Event(Event { channel: channel.clone(), data }))
            }
            Expr::Filter(e, cs) => {
                let s = expect_seq("filter", e.eval(env)?)?;
                let mut out = Vec::new();
                for v in s {
                    match &v {
                        Value::Event(ev) if cs.contains(&ev.channel) => out.push(v),
                        Value::Event(_) => {}
                        other => return Err(type_err("filter", other)),
                    }
                }
                Ok(Value::Seq(out))
            }
            Expr::Proj(e, ch) => {
                let s = expect_seq("proj", e.eval(env)?)?;
                let mut out = Vec::new();
                for v in s {
                    match v {
                        Value::Event(ev) if &ev.channel == ch => match ev.data {
                            Some(d) => out.push(*d),
                            None => out.push(Value::Event(ev)),
                        },
                        Value::Event(_) => {}
                        other => return Err(type_err("proj", &other)),
                    }
                }
                Ok(Value::Seq(out))
            }
        }
    }

    pub fn eval_bool(&self, env: &dyn Env) -> Result<bool, EvalError> {
        expect_bool("condition", self.eval(env)?)
    }

    /// Free variable names.
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Unary(_, a) | Expr::Filter(a, _) | Expr::Proj(a, _) => a.vars(out),
            Expr::Binary(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::SeqLit(items) => items.iter().for_each(|e| e.vars(out)),
            Expr::Cond { cond, then, els } => {
                cond.vars(out);
                then.vars(out);
                els.vars(out);
            }
            Expr::EventCons { data, .. } => {
                if let Some(d) = data {
                    d.vars(out)
                }
            }
        }
    }

    /// Rebuilds the tree bottom-up, replacing variables via `f`.
    pub fn map_vars(&self, f: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Lit(_) => self.clone(),
            Expr::Var(n) => f(n).unwrap_or_else(|| self.clone()),
            Expr::Unary(op, a) => un(*op, a.map_vars(f)),
            Expr::Binary(op, a, b) => bin(*op, a.map_vars(f), b.map_vars(f)),
            Expr::SeqLit(items) => Expr::SeqLit(items.iter().map(|e| e.map_vars(f)).collect()),
            Expr::Cond { cond, then, els } => Expr::Cond {
                cond: Box::new(cond.map_vars(f)),
                then: Box::new(then.map_vars(f)),
                els: Box::new(els.map_vars(f)),
            },
            Expr::EventCons { channel, data } => {
                Expr::EventCons { channel: channel.clone(), data: data.as_ref().map(|d| Box::new(d.map_vars(f))) }
            }
            Expr::Filter(a, cs) => Expr::Filter(Box::new(a.map_vars(f)), cs.clone()),
            Expr::Proj(a, ch) => Expr::Proj(Box::new(a.map_vars(f)), ch.clone()),
        }
    }

    /// True when evaluation cannot fail on a well-typed environment.
    fn is_total(&self) -> bool {
        match self {
            Expr::Lit(_) | Expr::Var(_) => true,
            Expr::Unary(UnOp::Head | UnOp::Tail | UnOp::Neg, _) => false,
            Expr::Unary(_, a) | Expr::Filter(a, _) | Expr::Proj(a, _) => a.is_total(),
            Expr::Binary(BinOp::Add | BinOp::Sub | BinOp::Mul, _, _) => false,
            Expr::Binary(_, a, b) => a.is_total() && b.is_total(),
            Expr::SeqLit(items) => items.iter().all(Expr::is_total),
            Expr::Cond { cond, then, els } => cond.is_total() && then.is_total() && els.is_total(),
            Expr::EventCons { data, .. } => data.as_ref().is_none_or(|d| d.is_total()),
        }
    }

    fn seq_elems(&self) -> Option<Vec<Expr>> {
        match self {
            Expr::SeqLit(items) => Some(items.clone()),
            Expr::Lit(Value::Seq(vs)) => Some(vs.iter().cloned().map(Expr::Lit).collect()),
            _ => None,
        }
    }

    /// Constant folding plus a handful of identities. Preserves the value
    /// on every environment where the original evaluates.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Lit(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => fold_unary(*op, a.fold()),
            Expr::Binary(op, a, b) => fold_binary(*op, a.fold(), b.fold()),
            Expr::SeqLit(items) => {
                let items: Vec<Expr> = items.iter().map(Expr::fold).collect();
                if items.iter().all(Expr::is_lit) {
                    Expr::Lit(Value::Seq(
                        items
                            .into_iter()
                            .map(|e| match e {
                                Expr::Lit(v) => v,
                                _ => unreachable!(),
                            })
                            .collect(),
                    ))
                } else {
                    Expr::SeqLit(items)
                }
            }
            Expr::Cond { cond, then, els } => {
                let c = cond.fold();
                let t = then.fold();
                let e = els.fold();
                match c.as_bool_lit() {
                    Some(true) => t,
                    Some(false) => e,
                    None if t == e => t,
                    None if t.is_true() && e.is_false() => c,
                    None if t.is_false() && e.is_true() => fold_unary(UnOp::Not, c),
                    None => Expr::Cond { cond: Box::new(c), then: Box::new(t), els: Box::new(e) },
                }
            }
            Expr::EventCons { channel, data } => {
                let data = data.as_ref().map(|d| d.fold());
                match &data {
                    None => Expr::Lit(Value::Event(Event { channel: channel.clone(), data: None })),
                    Some(Expr::Lit(v)) => Expr::Lit(Value::Event(Event::with(channel, v.clone()))),
                    Some(_) => Expr::EventCons { channel: channel.clone(), data: data.map(Box::new) },
                }
            }
            Expr::Filter(a, cs) => {
                let a = a.fold();
                let e = Expr::Filter(Box::new(a), cs.clone());
                try_const(&e).unwrap_or(e)
            }
            Expr::Proj(a, ch) => {
                let a = a.fold();
                let e = Expr::Proj(Box::new(a), ch.clone());
                try_const(&e).unwrap_or(e)
            }
        }
    }
}

fn eval_binary(op: BinOp, a: &Expr, b: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    match op {
        BinOp::And => {
            if !expect_bool("and", a.eval(env)?)? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(expect_bool("and", b.eval(env)?)?))
        }
        BinOp::Or => {
            if expect_bool("or", a.eval(env)?)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(expect_bool("or", b.eval(env)?)?))
        }
        BinOp::Implies => {
            if !expect_bool("=>", a.eval(env)?)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(expect_bool("=>", b.eval(env)?)?))
        }
        _ => {
            let x = a.eval(env)?;
            let y = b.eval(env)?;
            apply_binary(op, x, y)
        }
    }
}

fn apply_binary(op: BinOp, x: Value, y: Value) -> Result<Value, EvalError> {
    let arith = |f: fn(i64, i64) -> Option<i64>, name: &'static str| -> Result<Value, EvalError> {
        let i = expect_int(name, &x)?;
        let j = expect_int(name, &y)?;
        f(i, j).map(Value::Int).ok_or(EvalError::Overflow(name))
    };
    match op {
        BinOp::Add => arith(i64::checked_add, "+"),
        BinOp::Sub => arith(i64::checked_sub, "-"),
        BinOp::Mul => arith(i64::checked_mul, "*"),
        BinOp::Eq => Ok(Value::Bool(x == y)),
        BinOp::Ne => Ok(Value::Bool(x != y)),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (&x, &y) {
            (Value::Int(i), Value::Int(j)) => Ok(Value::Bool(match op {
                BinOp::Lt => i < j,
                BinOp::Le => i <= j,
                BinOp::Gt => i > j,
                _ => i >= j,
            })),
            (Value::Seq(s), Value::Seq(t)) => {
                let prefix = |p: &[Value], q: &[Value]| p.len() <= q.len() && &q[..p.len()] == p;
                Ok(Value::Bool(match op {
                    BinOp::Le => prefix(s, t),
                    BinOp::Lt => prefix(s, t) && s.len() < t.len(),
                    BinOp::Ge => prefix(t, s),
                    _ => prefix(t, s) && t.len() < s.len(),
                }))
            }
            _ => Err(type_err(op.symbol(), &x)),
        },
        BinOp::Concat => {
            let mut s = expect_seq("^", x)?;
            s.extend(expect_seq("^", y)?);
            Ok(Value::Seq(s))
        }
        BinOp::In => match y {
            Value::Set(s) => Ok(Value::Bool(s.contains(&x))),
            Value::Seq(s) => Ok(Value::Bool(s.contains(&x))),
            other => Err(type_err("in", &other)),
        },
        BinOp::And | BinOp::Or | BinOp::Implies => unreachable!("short-circuit ops handled by caller"),
    }
}

fn try_const(e: &Expr) -> Option<Expr> {
    let empty = Valuation::new();
    let mut vs = BTreeSet::new();
    e.vars(&mut vs);
    if !vs.is_empty() {
        return None;
    }
    e.eval(&empty).ok().map(Expr::Lit)
}

fn fold_unary(op: UnOp, a: Expr) -> Expr {
    if let Expr::Lit(_) = a {
        let e = un(op, a.clone());
        if let Some(c) = try_const(&e) {
            return c;
        }
        return e;
    }
    match (op, &a) {
        (UnOp::Not, Expr::Unary(UnOp::Not, inner)) => return (**inner).clone(),
        (UnOp::Head, _) => {
            if let Some(items) = a.seq_elems() {
                if let Some(first) = items.first() {
                    return first.clone();
                }
            }
        }
        (UnOp::Tail, _) => {
            if let Some(items) = a.seq_elems() {
                if !items.is_empty() {
                    return Expr::SeqLit(items[1..].to_vec()).fold();
                }
            }
        }
        (UnOp::Len, _) => {
            if let Some(items) = a.seq_elems() {
                return int(items.len() as i64);
            }
        }
        _ => {}
    }
    un(op, a)
}

fn fold_binary(op: BinOp, a: Expr, b: Expr) -> Expr {
    if a.is_lit() && b.is_lit() {
        let e = bin(op, a, b);
        return try_const(&e).unwrap_or(e);
    }
    match op {
        BinOp::And => match (a.as_bool_lit(), b.as_bool_lit()) {
            (Some(false), _) => ff(),
            (Some(true), _) => b,
            (_, Some(true)) => a,
            (_, Some(false)) if a.is_total() => ff(),
            _ if a == b => a,
            _ => bin(op, a, b),
        },
        BinOp::Or => match (a.as_bool_lit(), b.as_bool_lit()) {
            (Some(true), _) => tt(),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            (_, Some(true)) if a.is_total() => tt(),
            _ if a == b => a,
            _ => bin(op, a, b),
        },
        BinOp::Implies => match (a.as_bool_lit(), b.as_bool_lit()) {
            (Some(false), _) => tt(),
            (Some(true), _) => b,
            (_, Some(true)) if a.is_total() => tt(),
            (_, Some(false)) => fold_unary(UnOp::Not, a),
            _ => bin(op, a, b),
        },
        BinOp::Eq if a == b && a.is_total() => tt(),
        BinOp::Ne if a == b && a.is_total() => ff(),
        BinOp::Concat => {
            let ea = a.seq_elems();
            let eb = b.seq_elems();
            match (ea, eb) {
                (Some(x), _) if x.is_empty() => b,
                (_, Some(y)) if y.is_empty() => a,
                (Some(mut x), Some(y)) => {
                    x.extend(y);
                    Expr::SeqLit(x).fold()
                }
                _ => bin(op, a, b),
            }
        }
        BinOp::Add | BinOp::Sub if matches!(b, Expr::Lit(Value::Int(_))) => {
            let k = b.as_int_lit().unwrap_or(0);
            let k = if op == BinOp::Sub { k.checked_neg() } else { Some(k) };
            let (base, j) = split_offset(&a);
            match k.and_then(|k| k.checked_add(j)) {
                Some(0) => base,
                Some(t) if t > 0 => bin(BinOp::Add, base, int(t)),
                Some(t) if t != i64::MIN => bin(BinOp::Sub, base, int(-t)),
                _ => bin(op, a, b),
            }
        }
        BinOp::Add if a == int(0) => b,
        _ => bin(op, a, b),
    }
}

/// Splits `e + k` / `e - k` into base and signed offset.
fn split_offset(e: &Expr) -> (Expr, i64) {
    if let Expr::Binary(op @ (BinOp::Add | BinOp::Sub), base, k) = e {
        if let Some(k) = k.as_int_lit() {
            let k = if *op == BinOp::Sub { k.checked_neg() } else { Some(k) };
            if let Some(k) = k {
                return ((**base).clone(), k);
            }
        }
    }
    (e.clone(), 0)
}

const ATOM: u8 = 9;

fn prec_of(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, _, _) => op.prec(),
        Expr::Unary(UnOp::Not, _) => 4,
        Expr::Unary(UnOp::Neg | UnOp::Len, _) => 8,
        Expr::Cond { .. } => 0,
        Expr::Lit(Value::Int(i)) if *i < 0 => 8,
        _ => ATOM,
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec_of(e) < min {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(Value::Event(ev)) => match &ev.data {
                None => write!(f, "{}", ev.channel),
                Some(d) => {
                    write!(f, "{}.", ev.channel)?;
                    write_prec(f, &Expr::Lit((**d).clone()), ATOM)
                }
            },
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Unary(op, a) => match op {
                UnOp::Not => {
                    write!(f, "not ")?;
                    write_prec(f, a, 4)
                }
                UnOp::Neg => write!(f, "-({a})"),
                UnOp::Len => {
                    write!(f, "#")?;
                    write_prec(f, a, ATOM)
                }
                UnOp::Head => write!(f, "head({a})"),
                UnOp::Tail => write!(f, "tail({a})"),
            },
            Expr::Binary(op, a, b) => {
                let p = op.prec();
                let (lp, rp) = match op {
                    BinOp::Implies => (p + 1, p),
                    BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::In => {
                        (p + 1, p + 1)
                    }
                    _ => (p, p + 1),
                };
                write_prec(f, a, lp)?;
                write!(f, " {} ", op.symbol())?;
                write_prec(f, b, rp)
            }
            Expr::SeqLit(items) => {
                write!(f, "<")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write_prec(f, e, 6)?;
                }
                write!(f, ">")
            }
            Expr::Cond { cond, then, els } => write!(f, "if {cond} then {then} else {els}"),
            Expr::EventCons { channel, data } => match data {
                None => write!(f, "{channel}"),
                Some(d) => {
                    write!(f, "{channel}.")?;
                    write_prec(f, d, ATOM)
                }
            },
            Expr::Filter(a, cs) => {
                let names: Vec<&str> = cs.iter().map(String::as_str).collect();
                write!(f, "filter({a}, {{{}}})", names.join(", "))
            }
            Expr::Proj(a, ch) => write!(f, "proj({a}, {ch})"),
        }
    }
}
