use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::value::{Type, Value};

/// Source location. Ignored by equality so that printed and reparsed
/// models compare equal.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl std::hash::Hash for Pos {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comm {
    None,
    Output(Expr),
    Input(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AstKind {
    Skip,
    Stop,
    Chaos,
    Miracle,
    Assign(String, Expr),
    Prefix { channel: String, comm: Comm, cont: Box<Ast> },
    Guard(Expr, Box<Ast>),
    Seq(Box<Ast>, Box<Ast>),
    Ext(Box<Ast>, Box<Ast>),
    Int(Box<Ast>, Box<Ast>),
    If(Expr, Box<Ast>, Box<Ast>),
    While(Expr, Box<Ast>),
    Par { ns1: Vec<String>, cs: Vec<String>, ns2: Vec<String>, left: Box<Ast>, right: Box<Ast> },
    Interleave(Box<Ast>, Box<Ast>),
    Ref(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ast {
    pub kind: AstKind,
    pub pos: Pos,
}

impl Ast {
    pub fn new(kind: AstKind) -> Ast {
        Ast { kind, pos: Pos::default() }
    }

    pub fn at(kind: AstKind, pos: Pos) -> Ast {
        Ast { kind, pos }
    }

    pub fn depth(&self) -> usize {
        use AstKind::*;
        1 + match &self.kind {
            Skip | Stop | Chaos | Miracle | Assign(..) | Ref(_) => 0,
            Prefix { cont, .. } | Guard(_, cont) | While(_, cont) => cont.depth(),
            Seq(a, b) | Ext(a, b) | Int(a, b) | If(_, a, b) | Interleave(a, b) | Par { left: a, right: b, .. } => {
                a.depth().max(b.depth())
            }
        }
    }

    /// Replaces the input variable `x` by `v` in every expression. Inner
    /// inputs binding the same name shadow it.
    pub fn subst_input(&self, x: &str, v: &Value) -> Ast {
        let se = |e: &Expr| e.map_vars(&|n| (n == x).then(|| Expr::Lit(v.clone()))).fold();
        let sa = |a: &Ast| Box::new(a.subst_input(x, v));
        use AstKind::*;
        let kind = match &self.kind {
            Assign(y, e) => Assign(y.clone(), se(e)),
            Prefix { channel, comm, cont } => {
                let (comm, cont) = match comm {
                    Comm::None => (Comm::None, sa(cont)),
                    Comm::Output(e) => (Comm::Output(se(e)), sa(cont)),
                    Comm::Input(y) if y == x => (comm.clone(), cont.clone()),
                    Comm::Input(y) => (Comm::Input(y.clone()), sa(cont)),
                };
                Prefix { channel: channel.clone(), comm, cont }
            }
            Guard(g, p) => Guard(se(g), sa(p)),
            Seq(a, b) => Seq(sa(a), sa(b)),
            Ext(a, b) => Ext(sa(a), sa(b)),
            Int(a, b) => Int(sa(a), sa(b)),
            If(c, a, b) => If(se(c), sa(a), sa(b)),
            While(c, p) => While(se(c), sa(p)),
            Par { ns1, cs, ns2, left, right } => {
                Par { ns1: ns1.clone(), cs: cs.clone(), ns2: ns2.clone(), left: sa(left), right: sa(right) }
            }
            Interleave(a, b) => Interleave(sa(a), sa(b)),
            k => k.clone(),
        };
        Ast { kind, pos: self.pos }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessDef {
    pub name: String,
    pub body: Ast,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub channels: Vec<(String, Option<Type>)>,
    pub vars: Vec<(String, Type)>,
    pub processes: Vec<ProcessDef>,
}

impl Model {
    pub fn process(&self, name: &str) -> Option<&ProcessDef> {
        self.processes.iter().find(|p| p.name == name)
    }

    pub fn channel_type(&self, name: &str) -> Option<&Option<Type>> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn var_type(&self, name: &str) -> Option<&Type> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}
