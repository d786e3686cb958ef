use std::fmt;

use super::ast::{Ast, AstKind, Comm, Model};

const PAR: u8 = 1;
const INT: u8 = 2;
const EXT: u8 = 3;
const SEQ: u8 = 4;
const UNIT: u8 = 5;
const ATOM: u8 = 6;

fn level(a: &Ast) -> u8 {
    match &a.kind {
        AstKind::Par { .. } | AstKind::Interleave(..) => PAR,
        AstKind::Int(..) => INT,
        AstKind::Ext(..) => EXT,
        AstKind::Seq(..) => SEQ,
        AstKind::Guard(..) | AstKind::Prefix { .. } => UNIT,
        // The trailing branch of these extends to the right.
        AstKind::If(..) | AstKind::While(..) => UNIT,
        _ => ATOM,
    }
}

fn at(f: &mut fmt::Formatter<'_>, a: &Ast, min: u8) -> fmt::Result {
    if level(a) < min {
        write!(f, "({a})")
    } else {
        write!(f, "{a}")
    }
}

fn names(v: &[String]) -> String {
    format!("{{{}}}", v.join(", "))
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AstKind::*;
        match &self.kind {
            Skip => write!(f, "skip"),
            Stop => write!(f, "stop"),
            Chaos => write!(f, "chaos"),
            Miracle => write!(f, "miracle"),
            Assign(x, e) => write!(f, "{x} := {e}"),
            Ref(n) => write!(f, "{n}"),
            Prefix { channel, comm, cont } => {
                match comm {
                    Comm::None => write!(f, "{channel} -> ")?,
                    Comm::Output(e) => write!(f, "{channel}!{e} -> ")?,
                    Comm::Input(x) => write!(f, "{channel}?{x} -> ")?,
                }
                at(f, cont, UNIT)
            }
            Guard(g, p) => {
                write!(f, "{g} & ")?;
                at(f, p, UNIT)
            }
            Seq(a, b) => {
                at(f, a, UNIT)?;
                write!(f, "; ")?;
                at(f, b, SEQ)
            }
            Ext(a, b) => {
                at(f, a, EXT)?;
                write!(f, " [] ")?;
                at(f, b, SEQ)
            }
            Int(a, b) => {
                at(f, a, INT)?;
                write!(f, " |~| ")?;
                at(f, b, EXT)
            }
            If(c, a, b) => {
                write!(f, "if {c} then {a} else ")?;
                at(f, b, UNIT)
            }
            While(c, p) => {
                write!(f, "while {c} do ")?;
                at(f, p, UNIT)
            }
            Par { ns1, cs, ns2, left, right } => {
                at(f, left, PAR)?;
                if ns1.is_empty() && ns2.is_empty() {
                    write!(f, " [| {} |] ", names(cs))?;
                } else {
                    write!(f, " [| {} | {} | {} |] ", names(ns1), names(cs), names(ns2))?;
                }
                at(f, right, INT)
            }
            Interleave(a, b) => {
                at(f, a, PAR)?;
                write!(f, " ||| ")?;
                at(f, b, INT)
            }
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, t) in &self.channels {
            match t {
                Some(t) => writeln!(f, "channel {c} : {t}")?,
                None => writeln!(f, "channel {c}")?,
            }
        }
        for (x, t) in &self.vars {
            writeln!(f, "var {x} : {t}")?;
        }
        for p in &self.processes {
            writeln!(f, "process {} = {}", p.name, p.body)?;
        }
        Ok(())
    }
}
