//! Random programs over a small fixed model, for property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dsl::{Ast, AstKind, Comm, Model};
use crate::expr::{BinOp, Expr, UnOp};
use crate::value::{Type, Value};

/// Two channels (`a` carries 0 or 1, `b` is pure) and two variables.
pub fn small_model() -> Model {
    Model {
        channels: vec![("a".into(), Some(Type::Int { lo: 0, hi: 1 })), ("b".into(), None)],
        vars: vec![("x".into(), Type::Int { lo: 0, hi: 1 }), ("y".into(), Type::Bool)],
        processes: vec![],
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub depth: usize,
    pub miracle: bool,
    pub chaos: bool,
    pub loops: bool,
    pub parallel: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { depth: 3, miracle: false, chaos: true, loops: true, parallel: true }
    }
}

fn node(k: AstKind) -> Ast {
    Ast::new(k)
}

fn bx(a: Ast) -> Box<Ast> {
    Box::new(a)
}

fn int(i: i64) -> Expr {
    Expr::Lit(Value::Int(i))
}

fn bool_lit(b: bool) -> Expr {
    Expr::Lit(Value::Bool(b))
}

fn x() -> Expr {
    Expr::Var("x".into())
}

fn y() -> Expr {
    Expr::Var("y".into())
}

pub fn gen_cond<R: Rng>(rng: &mut R) -> Expr {
    match rng.gen_range(0..5) {
        0 => Expr::Binary(BinOp::Eq, Box::new(x()), Box::new(int(rng.gen_range(0..2)))),
        1 => y(),
        2 => Expr::Unary(UnOp::Not, Box::new(y())),
        3 => Expr::Binary(BinOp::And, Box::new(y()), Box::new(Expr::Binary(BinOp::Eq, Box::new(x()), Box::new(int(1))))),
        _ => bool_lit(rng.gen_bool(0.5)),
    }
}

/// An assignment that stays inside the variable's domain.
pub fn gen_assign<R: Rng>(rng: &mut R) -> Ast {
    match rng.gen_range(0..4) {
        0 => node(AstKind::Assign("x".into(), int(rng.gen_range(0..2)))),
        1 => node(AstKind::Assign("x".into(), Expr::Binary(BinOp::Sub, Box::new(int(1)), Box::new(x())))),
        2 => node(AstKind::Assign("y".into(), Expr::Unary(UnOp::Not, Box::new(y())))),
        _ => node(AstKind::Assign(
            "y".into(),
            Expr::Binary(BinOp::Eq, Box::new(x()), Box::new(int(rng.gen_range(0..2)))),
        )),
    }
}

fn gen_leaf<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Ast {
    loop {
        let a = match rng.gen_range(0..7) {
            0 | 1 => node(AstKind::Skip),
            2 => node(AstKind::Stop),
            3 if cfg.chaos => node(AstKind::Chaos),
            4 if cfg.miracle => node(AstKind::Miracle),
            5 | 6 => gen_assign(rng),
            _ => continue,
        };
        return a;
    }
}

fn gen_prefix<R: Rng>(rng: &mut R, cont: Ast) -> Ast {
    let comm = match rng.gen_range(0..3) {
        0 => return node(AstKind::Prefix { channel: "b".into(), comm: Comm::None, cont: bx(cont) }),
        1 => Comm::Output(if rng.gen_bool(0.5) { x() } else { int(rng.gen_range(0..2)) }),
        _ => Comm::Input("v".into()),
    };
    let cont = match (&comm, rng.gen_bool(0.5)) {
        (Comm::Input(_), true) => node(AstKind::Seq(
            bx(node(AstKind::Assign("x".into(), Expr::Var("v".into())))),
            bx(cont),
        )),
        _ => cont,
    };
    node(AstKind::Prefix { channel: "a".into(), comm, cont: bx(cont) })
}

/// A random process of at most `cfg.depth` levels.
pub fn gen_process<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Ast {
    gen_at(rng, cfg, cfg.depth)
}

fn gen_at<R: Rng>(rng: &mut R, cfg: &GenConfig, depth: usize) -> Ast {
    if depth <= 1 {
        return gen_leaf(rng, cfg);
    }
    let d = depth - 1;
    loop {
        let a = match rng.gen_range(0..12) {
            0 => gen_leaf(rng, cfg),
            1 | 2 => {
                let c = gen_at(rng, cfg, d);
                gen_prefix(rng, c)
            }
            3 => node(AstKind::Guard(gen_cond(rng), bx(gen_at(rng, cfg, d)))),
            4 => node(AstKind::Seq(bx(gen_at(rng, cfg, d)), bx(gen_at(rng, cfg, d)))),
            5 => node(AstKind::Ext(bx(gen_at(rng, cfg, d)), bx(gen_at(rng, cfg, d)))),
            6 => node(AstKind::Int(bx(gen_at(rng, cfg, d)), bx(gen_at(rng, cfg, d)))),
            7 => node(AstKind::If(gen_cond(rng), bx(gen_at(rng, cfg, d)), bx(gen_at(rng, cfg, d)))),
            8 if cfg.loops => {
                // The body starts with an event, so it is productive.
                let inner = if d >= 2 { gen_at(rng, cfg, d - 1) } else { gen_assign(rng) };
                let body = gen_prefix(rng, inner);
                node(AstKind::While(gen_cond(rng), bx(body)))
            }
            9 | 10 if cfg.parallel => {
                let ns: [&[&str]; 3] = [&[], &["x"], &["y"]];
                let ns1: Vec<String> = ns.choose(rng).unwrap().iter().map(|s| s.to_string()).collect();
                let ns2: Vec<String> = ns
                    .iter()
                    .filter(|n| n.iter().all(|v| !ns1.iter().any(|w| w == v)))
                    .collect::<Vec<_>>()
                    .choose(rng)
                    .unwrap()
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
                let cs_opts: [&[&str]; 4] = [&[], &["a"], &["b"], &["a", "b"]];
                let cs: Vec<String> = cs_opts.choose(rng).unwrap().iter().map(|s| s.to_string()).collect();
                let left = bx(gen_at(rng, cfg, d));
                let right = bx(gen_at(rng, cfg, d));
                node(AstKind::Par { ns1, cs, ns2, left, right })
            }
            11 if cfg.parallel => node(AstKind::Interleave(bx(gen_at(rng, cfg, d)), bx(gen_at(rng, cfg, d)))),
            _ => continue,
        };
        return a;
    }
}

/// Deterministic instantaneous programs: no events, one outcome per state.
pub fn gen_instantaneous<R: Rng>(rng: &mut R) -> Ast {
    match rng.gen_range(0..4) {
        0 => node(AstKind::Skip),
        1 => gen_assign(rng),
        2 => node(AstKind::Seq(bx(gen_assign(rng)), bx(gen_assign(rng)))),
        _ => node(AstKind::If(gen_cond(rng), bx(gen_assign(rng)), bx(gen_assign(rng)))),
    }
}

/// Programs whose every terminating behaviour performs an event.
pub fn gen_productive<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Ast {
    let inner = gen_at(rng, cfg, cfg.depth.saturating_sub(1).max(1));
    let p = gen_prefix(rng, inner);
    if rng.gen_bool(0.3) {
        let leaf = gen_leaf(rng, cfg);
        let q = gen_prefix(rng, leaf);
        node(AstKind::Ext(bx(p), bx(q)))
    } else {
        p
    }
}
