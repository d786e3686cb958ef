use std::collections::BTreeSet;

use super::ast::{Ast, AstKind, Comm, Model, Pos, ProcessDef};
use super::lexer::{lex, Tok};
use super::DslError;
use crate::expr::{BinOp, Expr, UnOp};
use crate::value::{Type, Value};

const KEYWORDS: &[&str] = &[
    "channel", "var", "process", "skip", "stop", "chaos", "miracle", "if", "then", "else", "while", "do", "and", "or",
    "not", "true", "false", "head", "tail", "proj", "filter", "in", "bool", "int", "enum", "seq", "hide", "rename",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn parse_model(src: &str) -> Result<Model, DslError> {
    let mut p = Parser::new(src)?;
    let mut m = Model::default();
    while p.peek() != &Tok::Eof {
        let pos = p.pos();
        match p.ident()?.as_str() {
            "channel" => {
                let names = p.name_list()?;
                let ty = if p.eat(":") { Some(p.ty()?) } else { None };
                for n in names {
                    if m.channel_type(&n).is_some() {
                        return Err(DslError::Type { pos, msg: format!("channel `{n}` declared twice") });
                    }
                    m.channels.push((n, ty.clone()));
                }
            }
            "var" => {
                let names = p.name_list()?;
                p.expect(":")?;
                let ty = p.ty()?;
                for n in names {
                    if m.var_type(&n).is_some() {
                        return Err(DslError::Type { pos, msg: format!("variable `{n}` declared twice") });
                    }
                    m.vars.push((n, ty.clone()));
                }
            }
            "process" => {
                let name = p.name()?;
                p.expect("=")?;
                let body = p.process()?;
                if m.process(&name).is_some() {
                    return Err(DslError::Type { pos, msg: format!("process `{name}` defined twice") });
                }
                m.processes.push(ProcessDef { name, body, pos });
            }
            "hide" | "rename" => return Err(DslError::Unsupported { pos, what: p.prev_ident() }),
            other => {
                return Err(DslError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    expected: "`channel`, `var` or `process`".into(),
                    found: format!("`{other}`"),
                })
            }
        }
    }
    resolve_enum_literals(&mut m);
    Ok(m)
}

/// Parses a standalone expression, as used by invariant files.
pub fn parse_expr(src: &str) -> Result<Expr, DslError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

/// Parses a standalone process against no declarations.
pub fn parse_process(src: &str) -> Result<Ast, DslError> {
    let mut p = Parser::new(src)?;
    let a = p.process()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of process"));
    }
    Ok(a)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, DslError> {
        Ok(Parser { toks: lex(src)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn prev_ident(&self) -> String {
        match &self.toks[self.i.saturating_sub(1)].0 {
            Tok::Ident(s) => s.clone(),
            t => t.describe(),
        }
    }

    fn unexpected(&self, expected: &str) -> DslError {
        let pos = self.pos();
        DslError::Syntax { line: pos.line, col: pos.col, expected: expected.into(), found: self.peek().describe() }
    }

    fn is(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s) || matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), DslError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "hide" || s == "rename" => Err(DslError::Unsupported { pos: self.pos(), what: s }),
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn name_list(&mut self) -> Result<Vec<String>, DslError> {
        let mut out = vec![self.name()?];
        while self.eat(",") {
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn int_lit(&mut self) -> Result<i64, DslError> {
        let neg = self.eat("-");
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn ty(&mut self) -> Result<Type, DslError> {
        let pos = self.pos();
        match self.ident()?.as_str() {
            "bool" => Ok(Type::Bool),
            "int" => {
                self.expect("[")?;
                let lo = self.int_lit()?;
                self.expect("..")?;
                let hi = self.int_lit()?;
                self.expect("]")?;
                if lo > hi {
                    return Err(DslError::Type { pos, msg: format!("empty range {lo}..{hi}") });
                }
                Ok(Type::Int { lo, hi })
            }
            "enum" => {
                self.expect("{")?;
                let names = self.name_list()?;
                self.expect("}")?;
                Ok(Type::Enum(names))
            }
            "seq" => {
                self.expect("[")?;
                let n = self.int_lit()?;
                self.expect("]")?;
                if n < 0 {
                    return Err(DslError::Type { pos, msg: "negative sequence bound".into() });
                }
                Ok(Type::Seq { max_len: n as usize, elem: Box::new(self.ty()?) })
            }
            _ => {
                self.i -= 1;
                Err(self.unexpected("a type"))
            }
        }
    }

    fn name_set(&mut self) -> Result<Vec<String>, DslError> {
        self.expect("{")?;
        let mut out = Vec::new();
        if !self.is("}") {
            out = self.name_list()?;
        }
        self.expect("}")?;
        Ok(out)
    }

    // processes, loosest first

    fn process(&mut self) -> Result<Ast, DslError> {
        let mut left = self.int_choice()?;
        loop {
            let pos = self.pos();
            if self.eat("[|") {
                let first = self.name_set()?;
                let (ns1, cs, ns2) = if self.eat("|") {
                    let cs = self.name_set()?;
                    self.expect("|")?;
                    let ns2 = self.name_set()?;
                    (first, cs, ns2)
                } else {
                    (vec![], first, vec![])
                };
                self.expect("|]")?;
                let right = self.int_choice()?;
                left = Ast::at(AstKind::Par { ns1, cs, ns2, left: Box::new(left), right: Box::new(right) }, pos);
            } else if self.eat("|||") {
                let right = self.int_choice()?;
                left = Ast::at(AstKind::Interleave(Box::new(left), Box::new(right)), pos);
            } else {
                return Ok(left);
            }
        }
    }

    fn int_choice(&mut self) -> Result<Ast, DslError> {
        let mut left = self.ext_choice()?;
        loop {
            let pos = self.pos();
            if !self.eat("|~|") {
                return Ok(left);
            }
            let right = self.ext_choice()?;
            left = Ast::at(AstKind::Int(Box::new(left), Box::new(right)), pos);
        }
    }

    fn ext_choice(&mut self) -> Result<Ast, DslError> {
        let mut left = self.sequence()?;
        loop {
            let pos = self.pos();
            if !self.eat("[]") {
                return Ok(left);
            }
            let right = self.sequence()?;
            left = Ast::at(AstKind::Ext(Box::new(left), Box::new(right)), pos);
        }
    }

    fn sequence(&mut self) -> Result<Ast, DslError> {
        let left = self.guarded()?;
        let pos = self.pos();
        if self.eat(";") {
            let right = self.sequence()?;
            return Ok(Ast::at(AstKind::Seq(Box::new(left), Box::new(right)), pos));
        }
        Ok(left)
    }

    /// `expr & P` is recognised by trying an expression first.
    fn guarded(&mut self) -> Result<Ast, DslError> {
        let save = self.i;
        let pos = self.pos();
        if let Ok(g) = self.expr() {
            if self.eat("&") {
                let body = self.guarded()?;
                return Ok(Ast::at(AstKind::Guard(g, Box::new(body)), pos));
            }
        }
        self.i = save;
        self.prefix()
    }

    fn prefix(&mut self) -> Result<Ast, DslError> {
        let pos = self.pos();
        if let Tok::Ident(ch) = self.peek().clone() {
            if !is_keyword(&ch) {
                let comm = match self.peek_at(1) {
                    Tok::Sym("!") => {
                        self.bump();
                        self.bump();
                        Some(Comm::Output(self.expr()?))
                    }
                    Tok::Sym("?") => {
                        self.bump();
                        self.bump();
                        Some(Comm::Input(self.name()?))
                    }
                    Tok::Sym("->") => {
                        self.bump();
                        Some(Comm::None)
                    }
                    _ => None,
                };
                if let Some(comm) = comm {
                    self.expect("->")?;
                    let cont = self.guarded()?;
                    return Ok(Ast::at(AstKind::Prefix { channel: ch, comm, cont: Box::new(cont) }, pos));
                }
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Ast, DslError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let p = self.process()?;
                self.expect(")")?;
                return Ok(p);
            }
            Tok::Ident(s) => match s.as_str() {
                "skip" | "stop" | "chaos" | "miracle" => {
                    self.bump();
                    match s.as_str() {
                        "skip" => AstKind::Skip,
                        "stop" => AstKind::Stop,
                        "chaos" => AstKind::Chaos,
                        _ => AstKind::Miracle,
                    }
                }
                "if" => {
                    self.bump();
                    let c = self.expr()?;
                    self.expect("then")?;
                    let a = self.process()?;
                    self.expect("else")?;
                    let b = self.guarded()?;
                    AstKind::If(c, Box::new(a), Box::new(b))
                }
                "while" => {
                    self.bump();
                    let c = self.expr()?;
                    self.expect("do")?;
                    let body = self.guarded()?;
                    AstKind::While(c, Box::new(body))
                }
                "hide" | "rename" => return Err(DslError::Unsupported { pos, what: s }),
                _ if is_keyword(&s) => return Err(self.unexpected("a process")),
                _ => {
                    self.bump();
                    if self.eat(":=") {
                        AstKind::Assign(s, self.expr()?)
                    } else {
                        AstKind::Ref(s)
                    }
                }
            },
            _ => return Err(self.unexpected("a process")),
        };
        Ok(Ast::at(kind, pos))
    }

    // expressions, loosest first

    fn expr(&mut self) -> Result<Expr, DslError> {
        if self.eat("if") {
            let c = self.expr()?;
            self.expect("then")?;
            let a = self.expr()?;
            self.expect("else")?;
            let b = self.expr()?;
            return Ok(Expr::Cond { cond: Box::new(c), then: Box::new(a), els: Box::new(b) });
        }
        self.implies()
    }

    fn implies(&mut self) -> Result<Expr, DslError> {
        let a = self.or_expr()?;
        if self.eat("=>") {
            let b = self.implies()?;
            return Ok(Expr::Binary(BinOp::Implies, Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn or_expr(&mut self) -> Result<Expr, DslError> {
        let mut a = self.and_expr()?;
        while self.eat("or") {
            let b = self.and_expr()?;
            a = Expr::Binary(BinOp::Or, Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn and_expr(&mut self) -> Result<Expr, DslError> {
        let mut a = self.not_expr()?;
        while self.eat("and") {
            let b = self.not_expr()?;
            a = Expr::Binary(BinOp::And, Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn not_expr(&mut self) -> Result<Expr, DslError> {
        if self.eat("not") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.not_expr()?)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Expr, DslError> {
        let a = self.add()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Ident(s) if s == "in" => BinOp::In,
            _ => return Ok(a),
        };
        self.bump();
        let b = self.add()?;
        Ok(Expr::Binary(op, Box::new(a), Box::new(b)))
    }

    fn add(&mut self) -> Result<Expr, DslError> {
        let mut a = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                Tok::Sym("^") => BinOp::Concat,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.mul()?;
            a = Expr::Binary(op, Box::new(a), Box::new(b));
        }
    }

    fn mul(&mut self) -> Result<Expr, DslError> {
        let mut a = self.unary()?;
        while self.eat("*") {
            let b = self.unary()?;
            a = Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat("-") {
            if let Tok::Int(n) = self.peek().clone() {
                self.bump();
                return Ok(Expr::Lit(Value::Int(-n)));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.eat("#") {
            return Ok(Expr::Unary(UnOp::Len, Box::new(self.unary()?)));
        }
        self.eatom()
    }

    fn call_arg(&mut self) -> Result<Expr, DslError> {
        self.expect("(")?;
        let e = self.expr()?;
        Ok(e)
    }

    fn eatom(&mut self) -> Result<Expr, DslError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Lit(Value::Int(n)))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("<") => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(">") {
                    items.push(self.add()?);
                    while self.eat(",") {
                        items.push(self.add()?);
                    }
                    self.expect(">")?;
                }
                Ok(Expr::SeqLit(items))
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::Lit(Value::Bool(s == "true")))
                }
                "head" | "tail" => {
                    self.bump();
                    let e = self.call_arg()?;
                    self.expect(")")?;
                    Ok(Expr::Unary(if s == "head" { UnOp::Head } else { UnOp::Tail }, Box::new(e)))
                }
                "proj" => {
                    self.bump();
                    let e = self.call_arg()?;
                    self.expect(",")?;
                    let ch = self.name()?;
                    self.expect(")")?;
                    Ok(Expr::Proj(Box::new(e), ch))
                }
                "filter" => {
                    self.bump();
                    let e = self.call_arg()?;
                    self.expect(",")?;
                    let cs: BTreeSet<String> = self.name_set()?.into_iter().collect();
                    self.expect(")")?;
                    Ok(Expr::Filter(Box::new(e), cs))
                }
                _ if is_keyword(&s) => Err(self.unexpected("an expression")),
                _ => {
                    self.bump();
                    Ok(Expr::Var(s))
                }
            },
            _ => Err(self.unexpected("an expression")),
        }
    }
}

/// Identifiers naming an enumeration constant, and not bound as a
/// variable or input, become literals.
fn resolve_enum_literals(m: &mut Model) {
    let consts: BTreeSet<String> = m
        .channels
        .iter()
        .filter_map(|(_, t)| t.as_ref())
        .chain(m.vars.iter().map(|(_, t)| t))
        .flat_map(enum_names)
        .collect();
    if consts.is_empty() {
        return;
    }
    let vars: BTreeSet<String> = m.vars.iter().map(|(n, _)| n.clone()).collect();
    for p in &mut m.processes {
        p.body = resolve_ast(&p.body, &consts, &vars);
    }
}

fn enum_names(t: &Type) -> Vec<String> {
    match t {
        Type::Enum(ns) => ns.clone(),
        Type::Seq { elem, .. } => enum_names(elem),
        _ => vec![],
    }
}

pub(crate) fn resolve_expr(e: &Expr, consts: &BTreeSet<String>, bound: &BTreeSet<String>) -> Expr {
    e.map_vars(&|n| (consts.contains(n) && !bound.contains(n)).then(|| Expr::Lit(Value::Sym(n.to_string()))))
}

fn resolve_ast(a: &Ast, consts: &BTreeSet<String>, bound: &BTreeSet<String>) -> Ast {
    let re = |e: &Expr| resolve_expr(e, consts, bound);
    let ra = |x: &Ast| Box::new(resolve_ast(x, consts, bound));
    use AstKind::*;
    let kind = match &a.kind {
        Assign(x, e) => Assign(x.clone(), re(e)),
        Prefix { channel, comm, cont } => {
            let (comm, cont) = match comm {
                Comm::None => (Comm::None, ra(cont)),
                Comm::Output(e) => (Comm::Output(re(e)), ra(cont)),
                Comm::Input(x) => {
                    let mut b = bound.clone();
                    b.insert(x.clone());
                    (Comm::Input(x.clone()), Box::new(resolve_ast(cont, consts, &b)))
                }
            };
            Prefix { channel: channel.clone(), comm, cont }
        }
        Guard(g, p) => Guard(re(g), ra(p)),
        Seq(x, y) => Seq(ra(x), ra(y)),
        Ext(x, y) => Ext(ra(x), ra(y)),
        Int(x, y) => Int(ra(x), ra(y)),
        If(c, x, y) => If(re(c), ra(x), ra(y)),
        While(c, p) => While(re(c), ra(p)),
        Par { ns1, cs, ns2, left, right } => {
            Par { ns1: ns1.clone(), cs: cs.clone(), ns2: ns2.clone(), left: ra(left), right: ra(right) }
        }
        Interleave(x, y) => Interleave(ra(x), ra(y)),
        k => k.clone(),
    };
    Ast { kind, pos: a.pos }
}

/// Parses an observation predicate against `m`: enum constants become
/// literals, then the result is checked to be boolean.
pub fn parse_predicate(src: &str, m: &Model) -> Result<Expr, DslError> {
    let e = parse_expr(src)?;
    let consts: BTreeSet<String> = m
        .channels
        .iter()
        .filter_map(|(_, t)| t.as_ref())
        .chain(m.vars.iter().map(|(_, t)| t))
        .flat_map(enum_names)
        .collect();
    let mut bound: BTreeSet<String> = m.vars.iter().flat_map(|(n, _)| [n.clone(), format!("{n}'")]).collect();
    bound.extend(["tt".to_string(), "acc".to_string()]);
    let e = resolve_expr(&e, &consts, &bound);
    super::check_predicate(&e, m)?;
    Ok(e)
}
