//! Acceptance criteria, one PASS/FAIL line each.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use reacalc::contract::{CalcConfig, Contract};
use reacalc::dsl::{check_model, elaborate, load_model, Ast, AstKind, Comm, Elaborator, Model, ProcessDef};
use reacalc::expr::{self, bin, int, un, var, BinOp, Expr, UnOp};
use reacalc::gen::{gen_assign, gen_instantaneous, gen_process, gen_productive, small_model, GenConfig};
use reacalc::oracle::{cross_check, Bounds};
use reacalc::parallel::{par_contract, ChannelSet};
use reacalc::refine::equal_contracts;
use reacalc::rel::{AcceptEntry, AcceptSpec, ETerm, EventExpr, ITerm, PeriRel, PhiTerm, PostRel, PreRel, TraceExpr};
use reacalc::state::{lens_override, valuation_override, LensSet, StateSpace, Valuation};
use reacalc::subst::Subst;
use reacalc::value::{Type, Value};

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const SEQ: &str = "
channel a : int[0..3]
var x : int[0..3]
process P = x := 1; a!x -> skip; x := x + 2
process Q = a!1 -> skip; x := 3
";

const EVENTS: &str = "
channel a
channel b
channel c
process D = b -> chaos
process E = (a -> b -> skip) [] (c -> skip)
process Par = (a -> b -> skip) [| {} | {b} | {} |] (b -> c -> skip)
process Seq3 = a -> b -> c -> skip
process Div = (a -> chaos) [| {a} |] (a -> skip)
process AC = a -> chaos
";

const BUFFER: &str = "
channel inp, out : int[0..1]
var bf : seq[2] int[0..1]
process Body = inp?v -> bf := bf ^ <v> [] 0 < #bf & out!head(bf) -> bf := tail(bf)
process Buffer = bf := <>; while true do Body
";

const ORDER: &str = "
peri: proj(tt, out) <= bf ^ proj(tt, inp)
post: false
spec-peri: proj(tt, out) <= proj(tt, inp)
spec-post: true
";

struct Files {
    _dir: TempDir,
    seq: PathBuf,
    events: PathBuf,
    buffer: PathBuf,
    order: PathBuf,
}

impl Files {
    fn new() -> Files {
        let dir = TempDir::new().unwrap();
        let put = |n: &str, s: &str| {
            let p = dir.path().join(n);
            std::fs::write(&p, s).unwrap();
            p
        };
        Files {
            seq: put("seq.rc", SEQ),
            events: put("events.rc", EVENTS),
            buffer: put("buffer.rc", BUFFER),
            order: put("order.inv", ORDER),
            _dir: dir,
        }
    }
}

fn cli(cmd: &str, file: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reacalc")).arg(cmd).arg(file).args(args).output().unwrap()
}

fn json(o: &Output) -> Result<serde_json::Value, String> {
    serde_json::from_slice(&o.stdout)
        .map_err(|e| format!("bad JSON ({e}): {}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr)))
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    let e = t.elapsed();
    if e < limit {
        Ok(())
    } else {
        Err(format!("took {e:.2?}, limit {limit:?}"))
    }
}

fn same(got: &Contract, want: &Contract) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("got\n{got}\nwant\n{want}"))
    }
}

fn tt() -> Expr {
    expr::tt()
}

fn ev(c: &str) -> EventExpr {
    EventExpr::pure(c)
}

fn tr(cs: &[&str]) -> TraceExpr {
    TraceExpr(cs.iter().map(|c| ev(c)).collect())
}

fn acc(cs: &[&str]) -> AcceptSpec {
    AcceptSpec::of(cs.iter().map(|c| ev(c)).collect())
}

fn c1_sequential(f: &Files) -> Outcome {
    let t = Instant::now();
    let m = load_model(SEQ).map_err(|e| e.to_string())?;
    let p = elaborate(&m, "P", CalcConfig::default()).map_err(|e| e.to_string())?;
    let q = elaborate(&m, "Q", CalcConfig::default()).map_err(|e| e.to_string())?;
    let a1 = EventExpr::with("a", int(1));
    let want = Contract::new(
        &p.ctx,
        PreRel::truer(),
        PeriRel::of(vec![ETerm::new(tt(), TraceExpr::empty(), AcceptSpec::of(vec![a1.clone()]))]),
        PostRel::of(vec![PhiTerm::new(tt(), Subst::single("x", int(3)), TraceExpr::single(a1))]),
    );
    same(&p, &want)?;
    same(&q, &want)?;
    let jp = json(&cli("calc", &f.seq, &["--process", "P", "--json"]))?;
    let jq = json(&cli("calc", &f.seq, &["--process", "Q", "--json"]))?;
    if jp["contract"] != jq["contract"] {
        return Err(format!("CLI contracts differ: {} / {}", jp["contract"], jq["contract"]));
    }
    within(t, Duration::from_secs(1))?;
    Ok(format!("{:.0?}", t.elapsed()))
}

fn c2_divergence() -> Outcome {
    let m = load_model(EVENTS).map_err(|e| e.to_string())?;
    let d = elaborate(&m, "D", CalcConfig::default()).map_err(|e| e.to_string())?;
    let want = Contract::new(
        &d.ctx,
        PreRel::of(vec![ITerm::new(tt(), tr(&["b"]))]),
        PeriRel::of(vec![ETerm::new(tt(), TraceExpr::empty(), acc(&["b"]))]),
        PostRel::of(vec![]),
    );
    same(&d, &want)?;
    Ok(String::new())
}

fn c3_external_choice() -> Outcome {
    let m = load_model(EVENTS).map_err(|e| e.to_string())?;
    let e = elaborate(&m, "E", CalcConfig::default()).map_err(|e| e.to_string())?;
    let want = PeriRel::of(vec![
        ETerm::new(tt(), TraceExpr::empty(), acc(&["a", "c"])),
        ETerm::new(tt(), tr(&["a"]), acc(&["b"])),
    ]);
    let want = Contract::new(&e.ctx, PreRel::truer(), want, e.post.clone());
    same(&e, &want)?;
    Ok(String::new())
}

fn c4_parallel(f: &Files) -> Outcome {
    let t = Instant::now();
    let m = load_model(EVENTS).map_err(|e| e.to_string())?;
    let p = elaborate(&m, "Par", CalcConfig::default()).map_err(|e| e.to_string())?;
    let want = Contract::new(
        &p.ctx,
        PreRel::truer(),
        PeriRel::of(vec![
            ETerm::new(tt(), TraceExpr::empty(), acc(&["a"])),
            ETerm::new(tt(), tr(&["a"]), acc(&["b"])),
            ETerm::new(tt(), tr(&["a", "b"]), acc(&["c"])),
        ]),
        PostRel::of(vec![PhiTerm::new(tt(), Subst::id(), tr(&["a", "b", "c"]))]),
    );
    same(&p, &want)?;
    for (s, i) in [("Par", "Seq3"), ("Seq3", "Par")] {
        let o = cli("refine", &f.events, &["--spec", s, "--impl", i, "--trace-bound", "4", "--json"]);
        let j = json(&o)?;
        if o.status.code() != Some(0) || j["verdict"]["holds"] != true {
            return Err(format!("{s} ⊑ {i} did not hold: {j}"));
        }
    }
    within(t, Duration::from_secs(5))?;
    Ok(format!("{:.0?}", t.elapsed()))
}

fn c5_divergence_propagation() -> Outcome {
    let m = load_model(EVENTS).map_err(|e| e.to_string())?;
    let d = elaborate(&m, "Div", CalcConfig::default()).map_err(|e| e.to_string())?;
    let a = elaborate(&m, "AC", CalcConfig::default()).map_err(|e| e.to_string())?;
    let v = equal_contracts(&d, &a, &Bounds::new(3, 3)).map_err(|e| e.to_string())?;
    if v.holds {
        Ok(String::new())
    } else {
        Err(format!("{:?}", v.witnesses))
    }
}

fn c6_buffer_body() -> Outcome {
    let m = load_model(BUFFER).map_err(|e| e.to_string())?;
    let c = elaborate(&m, "Body", CalcConfig::default()).map_err(|e| e.to_string())?;
    let nonempty = bin(BinOp::Lt, int(0), un(UnOp::Len, var("bf")));
    let out_head = EventExpr::with("out", un(UnOp::Head, var("bf")));
    let inp = |v: i64| EventExpr::with("inp", int(v));
    let app = |v: i64| Subst::single("bf", bin(BinOp::Concat, var("bf"), Expr::Lit(Value::Seq(vec![Value::Int(v)]))));
    let accepts = AcceptSpec(vec![
        AcceptEntry { guard: tt(), event: inp(0) },
        AcceptEntry { guard: tt(), event: inp(1) },
        AcceptEntry { guard: nonempty.clone(), event: out_head.clone() },
    ]);
    let want = Contract::new(
        &c.ctx,
        PreRel::truer(),
        PeriRel::of(vec![ETerm::new(tt(), TraceExpr::empty(), accepts)]),
        PostRel::of(vec![
            PhiTerm::new(tt(), app(0), TraceExpr::single(inp(0))),
            PhiTerm::new(tt(), app(1), TraceExpr::single(inp(1))),
            PhiTerm::new(nonempty, Subst::single("bf", un(UnOp::Tail, var("bf"))), TraceExpr::single(out_head)),
        ]),
    );
    same(&c, &want)?;
    Ok(String::new())
}

fn c7_deadlock(f: &Files) -> Outcome {
    let t = Instant::now();
    let o = cli("deadlock", &f.buffer, &["--process", "Buffer", "--trace-bound", "4", "--star-bound", "3", "--json"]);
    let j = json(&o)?;
    if o.status.code() != Some(0) || j["verdict"]["holds"] != true {
        return Err(format!("deadlock check failed: {j}"));
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("{:.0?}", t.elapsed()))
}

fn c8_order(f: &Files) -> Outcome {
    let o = cli(
        "verify-loop",
        &f.buffer,
        &["--process", "Buffer", "--invariant", f.order.to_str().unwrap(), "--trace-bound", "4", "--json"],
    );
    let j = json(&o)?;
    let items = j["items"].as_array().ok_or("no items")?;
    let names: Vec<&str> = items.iter().filter_map(|i| i["name"].as_str()).collect();
    if names != ["productive", "assumption", "quiescent", "final", "spec"] {
        return Err(format!("unexpected items {names:?}"));
    }
    if let Some(bad) = items.iter().find(|i| i["holds"] != true) {
        return Err(format!("item failed: {bad}"));
    }
    if o.status.code() != Some(0) {
        return Err("non-zero exit".into());
    }
    Ok(String::new())
}

// Law suite.

fn node(k: AstKind) -> Ast {
    Ast::new(k)
}

fn seq(a: &Ast, b: &Ast) -> Ast {
    node(AstKind::Seq(Box::new(a.clone()), Box::new(b.clone())))
}

fn ext(a: &Ast, b: &Ast) -> Ast {
    node(AstKind::Ext(Box::new(a.clone()), Box::new(b.clone())))
}

fn ichoice(a: &Ast, b: &Ast) -> Ast {
    node(AstKind::Int(Box::new(a.clone()), Box::new(b.clone())))
}

struct LawEnv {
    model: Model,
    rng: ChaCha8Rng,
}

impl LawEnv {
    fn c(&self, a: &Ast) -> Contract {
        Elaborator::new(&self.model, CalcConfig { star_bound: 2, trace_cap: None }).unwrap().ast(a).unwrap()
    }

    fn p(&mut self) -> Ast {
        gen_process(&mut self.rng, &GenConfig { miracle: true, ..GenConfig::default() })
    }

    fn par(&mut self) -> (LensSet, ChannelSet, LensSet) {
        let ns = [vec![], vec!["x"], vec!["y"]];
        let i = self.rng.gen_range(0..3);
        let j = if i == 0 { self.rng.gen_range(0..3) } else { [0, 3 - i][self.rng.gen_range(0..2)] };
        let cs = [vec![], vec!["a"], vec!["b"], vec!["a", "b"]][self.rng.gen_range(0..4)].clone();
        (LensSet::of(ns[i].clone()), cs.into_iter().map(String::from).collect(), LensSet::of(ns[j].clone()))
    }
}

type LawFn = fn(&mut LawEnv) -> Option<(Contract, Contract)>;

fn laws() -> Vec<(&'static str, LawFn)> {
    vec![
        ("stop;P = stop", |e| {
            let p = e.p();
            let s = node(AstKind::Stop);
            Some((e.c(&seq(&s, &p)), e.c(&s)))
        }),
        ("a -> (P |~| Q) = (a -> P) |~| (a -> Q)", |e| {
            let (p, q) = (e.p(), e.p());
            let pre = |k: &Ast| node(AstKind::Prefix { channel: "a".into(), comm: Comm::Input("v".into()), cont: Box::new(k.clone()) });
            Some((e.c(&pre(&ichoice(&p, &q))), e.c(&ichoice(&pre(&p), &pre(&q)))))
        }),
        ("x := e; y := f composes", |e| {
            let (a1, a2) = (gen_assign(&mut e.rng), gen_assign(&mut e.rng));
            let (AstKind::Assign(x1, e1), AstKind::Assign(x2, e2)) = (&a1.kind, &a2.kind) else { return None };
            let s1 = Subst::single(x1, e1.clone());
            let both = s1.clone().update(x2, s1.apply(e2));
            let lhs = e.c(&seq(&a1, &a2));
            let ctx = lhs.ctx.clone();
            Some((lhs, Contract::assign(&ctx, both)))
        }),
        ("skip;P = P", |e| {
            let p = e.p();
            Some((e.c(&seq(&node(AstKind::Skip), &p)), e.c(&p)))
        }),
        ("P;skip = P", |e| {
            let p = e.p();
            Some((e.c(&seq(&p, &node(AstKind::Skip))), e.c(&p)))
        }),
        ("P [] stop = P", |e| {
            let p = e.p();
            Some((e.c(&ext(&p, &node(AstKind::Stop))), e.c(&p)))
        }),
        ("P [] chaos = chaos", |e| {
            let p = e.p();
            let ch = node(AstKind::Chaos);
            Some((e.c(&ext(&p, &ch)), e.c(&ch)))
        }),
        ("miracle || P = miracle", |e| {
            let p = e.p();
            let (n1, cs, n2) = e.par();
            let m = e.c(&node(AstKind::Miracle));
            Some((par_contract(&m, &n1, &cs, &n2, &e.c(&p)).unwrap(), m))
        }),
        ("chaos || P = chaos, P CACC", |e| {
            let p = e.p();
            let p = e.c(&p);
            if !p.health_flags().unwrap().cacc {
                return None;
            }
            let (n1, cs, n2) = e.par();
            let ch = e.c(&node(AstKind::Chaos));
            Some((par_contract(&ch, &n1, &cs, &n2, &p).unwrap(), ch))
        }),
        ("P || Q = Q || P", |e| {
            let (p, q) = (e.p(), e.p());
            let (n1, cs, n2) = e.par();
            let (p, q) = (e.c(&p), e.c(&q));
            Some((par_contract(&p, &n1, &cs, &n2, &q).unwrap(), par_contract(&q, &n2, &cs, &n1, &p).unwrap()))
        }),
        ("skip* = skip", |e| {
            let s = e.c(&node(AstKind::Skip));
            let n = e.rng.gen_range(0..4);
            Some((s.iterate(CalcConfig { star_bound: n, trace_cap: None }), s))
        }),
        ("P;P* = P*;P", |e| {
            let p = e.p();
            let p = e.c(&p);
            let st = p.iterate(CalcConfig { star_bound: 2, trace_cap: None });
            Some((p.seq(&st).unwrap(), st.seq(&p).unwrap()))
        }),
        ("(P [] Q);R = (P;R) [] (Q;R), P Q productive", |e| {
            let g = GenConfig { depth: 2, miracle: true, ..GenConfig::default() };
            let (p, q, r) = (gen_productive(&mut e.rng, &g), gen_productive(&mut e.rng, &g), e.p());
            if !e.c(&p).health_flags().unwrap().productive || !e.c(&q).health_flags().unwrap().productive {
                return None;
            }
            Some((e.c(&seq(&ext(&p, &q), &r)), e.c(&ext(&seq(&p, &r), &seq(&q, &r)))))
        }),
        ("P;(Q [] R) = (P;Q) [] (P;R), P instantaneous", |e| {
            let (p, q, r) = (gen_instantaneous(&mut e.rng), e.p(), e.p());
            if !e.c(&p).health_flags().unwrap().instantaneous {
                return None;
            }
            Some((e.c(&seq(&p, &ext(&q, &r))), e.c(&ext(&seq(&p, &q), &seq(&p, &r)))))
        }),
        ("c;chaos = chaos, c assign or skip", |e| {
            let c = if e.rng.gen_bool(0.2) { node(AstKind::Skip) } else { gen_assign(&mut e.rng) };
            let ch = node(AstKind::Chaos);
            Some((e.c(&seq(&c, &ch)), e.c(&ch)))
        }),
    ]
}

fn c9_laws() -> Outcome {
    const N: usize = 100;
    let b = Bounds::new(4, 2);
    let mut failed = Vec::new();
    for (k, (name, f)) in laws().into_iter().enumerate() {
        let mut env = LawEnv { model: small_model(), rng: ChaCha8Rng::seed_from_u64(900 + k as u64) };
        let (mut done, mut bad, mut draws) = (0, 0, 0);
        while done < N && draws < N * 50 {
            draws += 1;
            let Some((l, r)) = f(&mut env) else { continue };
            done += 1;
            if !equal_contracts(&l, &r, &b).map_err(|e| e.to_string())?.holds {
                bad += 1;
            }
        }
        if done < N || bad > 0 {
            failed.push(format!("{name}: {bad}/{done} instances differ"));
        }
    }
    if failed.is_empty() {
        Ok(format!("{} laws x {N} instances", laws().len()))
    } else {
        Err(failed.join("; "))
    }
}

fn c10_conformance() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let b = Bounds::new(4, 4);
    let cfg = CalcConfig { star_bound: 4, trace_cap: Some(4) };
    let mut bad = Vec::new();
    for i in 0..200 {
        let ast = gen_process(&mut rng, &GenConfig::default());
        let mut m = small_model();
        m.processes.push(ProcessDef { name: "P".into(), body: ast.clone(), pos: Default::default() });
        check_model(&m).map_err(|e| e.to_string())?;
        let c = Elaborator::new(&m, cfg).and_then(|mut el| el.ast(&ast)).map_err(|e| format!("#{i} {ast}: {e}"))?;
        let rep = cross_check(&m, &ast, &c, &b).map_err(|e| e.to_string())?;
        if !rep.passed() {
            bad.push(format!("#{i} {ast}"));
        }
    }
    if !bad.is_empty() {
        return Err(format!("{} programs disagree: {}", bad.len(), bad.join(", ")));
    }
    within(t, Duration::from_secs(120))?;
    Ok(format!("200 programs, {:.1?}", t.elapsed()))
}

fn c11_lenses() -> Outcome {
    let t = Instant::now();
    let spaces = [
        StateSpace::new(vec![("x".into(), Type::Bool), ("y".into(), Type::Bool)]).unwrap(),
        StateSpace::new(vec![
            ("x".into(), Type::Int { lo: 0, hi: 2 }),
            ("y".into(), Type::Bool),
            ("z".into(), Type::Int { lo: 0, hi: 1 }),
        ])
        .unwrap(),
    ];
    let fail = |what: &str| Err::<String, String>(what.to_string());
    for sp in &spaces {
        let names: Vec<String> = sp.names().map(String::from).collect();
        let lenses: Vec<LensSet> = (0..1u32 << names.len())
            .map(|m| LensSet::of(names.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, n)| n.clone())))
            .collect();
        let states = sp.states().map_err(|e| e.to_string())?;
        for l in &lenses {
            for s in &states {
                if &sp.put(l, s, &l.get(s)).unwrap() != s {
                    return fail("put-get");
                }
                for s2 in &states {
                    let v = l.get(s2);
                    let p = sp.put(l, s, &v).unwrap();
                    if l.get(&p) != v {
                        return fail("get-put");
                    }
                    for s3 in &states {
                        if sp.put(l, &p, &l.get(s3)).unwrap() != sp.put(l, s, &l.get(s3)).unwrap() {
                            return fail("put-put");
                        }
                    }
                    if &lens_override(s, s2, &LensSet::zero()) != s || &lens_override(s, s2, &sp.full_lens()) != s2 {
                        return fail("override by 0 or 1 lens");
                    }
                    if &lens_override(s, s, l) != s {
                        return fail("override idempotence");
                    }
                    for y in lenses.iter().filter(|y| y.independent(l)) {
                        for s3 in &states {
                            if lens_override(&lens_override(s, s2, l), s3, y) != lens_override(&lens_override(s, s3, y), s2, l) {
                                return fail("override commutation");
                            }
                        }
                    }
                }
            }
        }
        // Substitutions: one candidate expression per variable, plus identity.
        let rhs = |x: &str| -> Vec<Expr> {
            match sp.var_type(x).unwrap() {
                Type::Bool => vec![expr::not(var(x)), expr::eq(var(&names[0]), var(&names[0]))],
                _ => vec![int(1), expr::ite(var("y"), int(0), var(x))],
            }
        };
        let mut substs = vec![Subst::id()];
        for x in &names {
            let mut next = Vec::new();
            for s in &substs {
                next.push(s.clone());
                for e in rhs(x) {
                    next.push(s.clone().update(x, e));
                }
            }
            substs = next;
        }
        let image = |s: &Subst, st: &Valuation| -> Valuation {
            names.iter().map(|x| (x.clone(), s.get(x).eval(st).unwrap())).collect()
        };
        let same = |a: &Subst, b: &Subst| states.iter().all(|st| image(a, st.bindings()) == image(b, st.bindings()));
        let imgs: Vec<Vec<Valuation>> =
            substs.iter().map(|s| states.iter().map(|st| image(s, st.bindings())).collect()).collect();
        for l in &lenses {
            if !Subst::par_merge(&Subst::id(), l, &Subst::id(), &LensSet::zero()).is_id() {
                return fail("merge of identities");
            }
        }
        for (i, s1) in substs.iter().enumerate() {
            if !same(&Subst::compose(&Subst::id(), s1), s1) {
                return fail("identity composition");
            }
            for x in &names {
                if !same(&s1.clone().update(x, s1.get(x)), s1) {
                    return fail("self update");
                }
                if s1.apply(&var(x)).fold() != s1.get(x).fold() {
                    return fail("application to a variable");
                }
                for e in rhs(x) {
                    for g in rhs(x) {
                        if !same(&s1.clone().update(x, e.clone()).update(x, g.clone()), &s1.clone().update(x, g.clone())) {
                            return fail("update override");
                        }
                    }
                    for y in names.iter().filter(|y| *y != x) {
                        for g in rhs(y) {
                            let xy = s1.clone().update(x, e.clone()).update(y, g.clone());
                            let yx = s1.clone().update(y, g.clone()).update(x, e.clone());
                            if !same(&xy, &yx) {
                                return fail("independent updates");
                            }
                        }
                    }
                }
            }
            for st in &states {
                let img = image(s1, st.bindings());
                for x in &names {
                    for e in rhs(x) {
                        let op = bin(BinOp::Eq, e.clone(), var(x));
                        let direct = s1.apply(&op).eval(st.bindings()).unwrap();
                        if direct != op.eval(&img).unwrap() {
                            return fail("application is evaluation after image");
                        }
                        let parts = bin(BinOp::Eq, s1.apply(&e), s1.apply(&var(x)));
                        if direct != parts.eval(st.bindings()).unwrap() {
                            return fail("application through operators");
                        }
                    }
                }
            }
            for (j, s2) in substs.iter().enumerate() {
                let c = Subst::compose(s2, s1);
                if !states.iter().enumerate().all(|(k, st)| image(&c, st.bindings()) == image(s2, &imgs[i][k])) {
                    return fail("composition");
                }
                if !same(&Subst::par_merge(s1, &LensSet::zero(), s2, &LensSet::zero()), &Subst::id()) {
                    return fail("merge over empty name sets");
                }
                if !same(&Subst::par_merge(s1, &sp.full_lens(), s2, &LensSet::zero()), s1) {
                    return fail("merge with the whole state on the left");
                }
                for n1 in &lenses {
                    for n2 in lenses.iter().filter(|n| n.independent(n1)) {
                        let m = Subst::par_merge(s1, n1, s2, n2);
                        let swapped = Subst::par_merge(s2, n2, s1, n1);
                        for (k, st) in states.iter().enumerate() {
                            let base = st.bindings();
                            let left = valuation_override(base, &imgs[i][k], n1);
                            let want = valuation_override(&left, &imgs[j][k], n2);
                            let got = image(&m, base);
                            if got != want {
                                return fail("merge is override of images");
                            }
                            if image(&swapped, base) != got {
                                return fail("merge symmetry");
                            }
                        }
                    }
                }
            }
        }
    }
    within(t, Duration::from_secs(5))?;
    Ok(format!("{:.1?}", t.elapsed()))
}

fn main() {
    let f = Files::new();
    let checks: Vec<Check> = vec![
        ("sequential example calculates to one contract", Box::new(|| c1_sequential(&f))),
        ("b -> chaos", Box::new(c2_divergence)),
        ("external choice pericondition", Box::new(c3_external_choice)),
        ("parallel example and two-way refinement", Box::new(|| c4_parallel(&f))),
        ("divergence through synchronisation", Box::new(c5_divergence_propagation)),
        ("buffer loop body", Box::new(c6_buffer_body)),
        ("buffer deadlock freedom", Box::new(|| c7_deadlock(&f))),
        ("buffer order invariant", Box::new(|| c8_order(&f))),
        ("law suite", Box::new(c9_laws)),
        ("operational conformance", Box::new(c10_conformance)),
        ("lens and substitution laws", Box::new(c11_lenses)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(info) if info.is_empty() => println!("PASS {:>2} {name}", i + 1),
            Ok(info) => println!("PASS {:>2} {name} ({info})", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", checks.len() - failures, checks.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
