//! Lens and substitution laws, checked exhaustively on small spaces.

use reacalc::expr::{self, BinOp, Expr};
use reacalc::state::{lens_override, valuation_override, LensSet, State, StateSpace, Valuation};
use reacalc::subst::Subst;
use reacalc::value::Type;

fn bool_space() -> StateSpace {
    StateSpace::new(vec![("x".into(), Type::Bool), ("y".into(), Type::Bool)]).unwrap()
}

fn mixed_space() -> StateSpace {
    StateSpace::new(vec![
        ("x".into(), Type::Int { lo: 0, hi: 2 }),
        ("y".into(), Type::Bool),
        ("z".into(), Type::Int { lo: 0, hi: 1 }),
    ])
    .unwrap()
}

fn spaces() -> Vec<StateSpace> {
    vec![bool_space(), mixed_space()]
}

fn lenses(sp: &StateSpace) -> Vec<LensSet> {
    let names: Vec<String> = sp.names().map(str::to_string).collect();
    (0..1u32 << names.len())
        .map(|m| LensSet::of(names.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, n)| n.clone())))
        .collect()
}

/// Hand-written projection, independent of `LensSet::get`.
fn project(l: &LensSet, s: &State) -> Valuation {
    s.bindings().iter().filter(|(k, _)| l.vars.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Candidate right-hand sides for each variable.
fn pool(sp: &StateSpace, x: &str) -> Vec<Expr> {
    let other_bool = sp.names().find(|n| *n != x && sp.var_type(n) == Some(&Type::Bool)).map(expr::var);
    let other_int = sp.names().find(|n| *n != x && matches!(sp.var_type(n), Some(Type::Int { .. }))).map(expr::var);
    match sp.var_type(x).unwrap() {
        Type::Bool => {
            let mut v = vec![expr::var(x), expr::not(expr::var(x)), expr::tt()];
            if let Some(o) = other_bool {
                v.push(expr::and(o, expr::var(x)));
            }
            if let Some(o) = other_int {
                v.push(expr::eq(o, expr::int(1)));
            }
            v
        }
        _ => {
            let mut v = vec![expr::var(x), expr::int(1), expr::bin(BinOp::Add, expr::var(x), expr::int(1))];
            if let Some(o) = other_bool {
                v.push(expr::ite(o, expr::int(0), expr::var(x)));
            }
            if let Some(o) = other_int {
                v.push(o);
            }
            v
        }
    }
}

/// Every substitution assigning a pool expression to a subset of the variables.
fn substs(sp: &StateSpace) -> Vec<Subst> {
    let mut out = vec![Subst::id()];
    for x in sp.names() {
        let mut next = Vec::new();
        for s in &out {
            next.push(s.clone());
            for e in pool(sp, x) {
                next.push(s.clone().update(x, e));
            }
        }
        out = next;
    }
    out
}

/// Direct evaluation of a substitution on a state: every variable at once.
fn image(sp: &StateSpace, s: &Subst, st: &Valuation) -> Valuation {
    sp.names().map(|x| (x.to_string(), s.get(x).eval(st).unwrap())).collect()
}

fn same(sp: &StateSpace, a: &Subst, b: &Subst) -> bool {
    same_on(&sp.states().unwrap(), sp, a, b)
}

fn same_on(states: &[State], sp: &StateSpace, a: &Subst, b: &Subst) -> bool {
    states.iter().all(|st| image(sp, a, st.bindings()) == image(sp, b, st.bindings()))
}

fn views(sp: &StateSpace, l: &LensSet) -> Vec<Valuation> {
    let mut v: Vec<Valuation> = sp.states().unwrap().iter().map(|s| project(l, s)).collect();
    v.sort();
    v.dedup();
    v
}

#[test]
fn lens_axioms() {
    for sp in spaces() {
        for l in lenses(&sp) {
            for s in sp.states().unwrap() {
                assert_eq!(l.get(&s), project(&l, &s));
                assert_eq!(sp.put(&l, &s, &l.get(&s)).unwrap(), s, "put-get on {l}");
                for v in views(&sp, &l) {
                    let p = sp.put(&l, &s, &v).unwrap();
                    assert_eq!(l.get(&p), v, "get-put on {l}");
                    for w in views(&sp, &l) {
                        assert_eq!(sp.put(&l, &p, &w).unwrap(), sp.put(&l, &s, &w).unwrap(), "put-put on {l}");
                    }
                }
            }
        }
    }
}

#[test]
fn independent_lenses_commute() {
    for sp in spaces() {
        let ls = lenses(&sp);
        for a in &ls {
            for b in &ls {
                assert_eq!(a.independent(b), a.vars.is_disjoint(&b.vars));
                if !a.independent(b) {
                    continue;
                }
                for s in sp.states().unwrap() {
                    for va in views(&sp, a) {
                        for vb in views(&sp, b) {
                            let ab = sp.put(b, &sp.put(a, &s, &va).unwrap(), &vb).unwrap();
                            let ba = sp.put(a, &sp.put(b, &s, &vb).unwrap(), &va).unwrap();
                            assert_eq!(ab, ba);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn sublens_is_a_preorder_with_bounds() {
    for sp in spaces() {
        let ls = lenses(&sp);
        let full = sp.full_lens();
        for a in &ls {
            assert!(a.sublens(a));
            assert!(LensSet::zero().sublens(a));
            assert!(a.sublens(&full));
            for b in &ls {
                for c in &ls {
                    if a.sublens(b) && b.sublens(c) {
                        assert!(a.sublens(c));
                    }
                }
            }
        }
    }
}

#[test]
fn override_laws() {
    for sp in spaces() {
        let ls = lenses(&sp);
        let states = sp.states().unwrap();
        for s1 in &states {
            for s2 in &states {
                assert_eq!(&lens_override(s1, s2, &LensSet::zero()), s1);
                assert_eq!(&lens_override(s1, s2, &sp.full_lens()), s2);
                for l in &ls {
                    let want = sp.put(l, s1, &project(l, s2)).unwrap();
                    assert_eq!(lens_override(s1, s2, l), want);
                    assert_eq!(&lens_override(s1, s1, l), s1);
                    assert_eq!(valuation_override(s1.bindings(), s2.bindings(), l), want.into_bindings());
                }
                for s3 in &states {
                    for x in &ls {
                        for y in ls.iter().filter(|y| y.independent(x)) {
                            let a = lens_override(&lens_override(s1, s2, x), s3, y);
                            let b = lens_override(&lens_override(s1, s3, y), s2, x);
                            assert_eq!(a, b, "{x} {y}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn substitution_laws() {
    for sp in spaces() {
        let all = substs(&sp);
        let names: Vec<String> = sp.names().map(str::to_string).collect();
        for s in all.iter().step_by(5) {
            // Identity is a unit of composition.
            assert!(same(&sp, &Subst::compose(&Subst::id(), s), s));
            assert!(same(&sp, &Subst::compose(s, &Subst::id()), s));
            for x in &names {
                // Application to a variable yields its assigned value.
                assert_eq!(s.apply(&expr::var(x)).fold(), s.get(x).fold());
                // Updating a variable with its own value changes nothing.
                assert!(same(&sp, &s.clone().update(x, s.get(x)), s), "{s} {x}");
                for e in pool(&sp, x) {
                    for f in pool(&sp, x) {
                        let twice = s.clone().update(x, e.clone()).update(x, f.clone());
                        assert!(same(&sp, &twice, &s.clone().update(x, f.clone())));
                    }
                    for y in names.iter().filter(|y| *y != x) {
                        for f in pool(&sp, y) {
                            let xy = s.clone().update(x, e.clone()).update(y, f.clone());
                            let yx = s.clone().update(y, f.clone()).update(x, e.clone());
                            assert!(same(&sp, &xy, &yx));
                        }
                    }
                }
            }
        }
        // Identity leaves every expression alone.
        for x in &names {
            for e in pool(&sp, x) {
                assert_eq!(Subst::id().apply(&e), e.fold());
            }
        }
    }
}

#[test]
fn application_is_evaluation_after_image() {
    for sp in spaces() {
        let names: Vec<String> = sp.names().map(str::to_string).collect();
        let mut exprs: Vec<Expr> = names.iter().flat_map(|x| pool(&sp, x)).collect();
        let n = exprs.len();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (exprs[i].clone(), exprs[j].clone());
                if (i + j) % 3 == 0 {
                    exprs.push(expr::bin(if i < j { BinOp::Eq } else { BinOp::Ne }, a, b));
                }
            }
        }
        for s in substs(&sp).iter().step_by(7) {
            for st in sp.states().unwrap() {
                let img = image(&sp, s, st.bindings());
                for e in &exprs {
                    assert_eq!(s.apply(e).eval(st.bindings()).unwrap(), e.eval(&img).unwrap(), "{s} on {e:?}");
                    if let Expr::Binary(op, l, r) = e {
                        let parts = Expr::Binary(*op, Box::new(s.apply(l)), Box::new(s.apply(r)));
                        assert_eq!(s.apply(e).eval(st.bindings()).unwrap(), parts.eval(st.bindings()).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn composition_is_sequential_image() {
    for sp in spaces() {
        let all = substs(&sp);
        let states = sp.states().unwrap();
        for s1 in all.iter().step_by(7) {
            for s2 in all.iter().step_by(3) {
                let c = Subst::compose(s2, s1);
                for st in &states {
                    let once = image(&sp, &c, st.bindings());
                    let twice = image(&sp, s2, &image(&sp, s1, st.bindings()));
                    assert_eq!(once, twice, "{s2} after {s1}");
                    assert_eq!(s1.image(st.bindings()).unwrap(), image(&sp, s1, st.bindings()));
                }
            }
        }
    }
}

#[test]
fn parallel_merge_laws() {
    for sp in spaces() {
        let all = substs(&sp);
        let ls = lenses(&sp);
        let states = sp.states().unwrap();
        let full = sp.full_lens();
        for a in &ls {
            assert!(Subst::par_merge(&Subst::id(), a, &Subst::id(), &LensSet::zero()).is_id());
        }
        for s1 in all.iter().step_by(11) {
            let img1: Vec<Valuation> = states.iter().map(|st| image(&sp, s1, st.bindings())).collect();
            for s2 in all.iter().step_by(13) {
                let img2: Vec<Valuation> = states.iter().map(|st| image(&sp, s2, st.bindings())).collect();
                assert!(same_on(&states, &sp, &Subst::par_merge(s1, &LensSet::zero(), s2, &LensSet::zero()), &Subst::id()));
                assert!(same_on(&states, &sp, &Subst::par_merge(s1, &full, s2, &LensSet::zero()), s1));
                for n1 in &ls {
                    for n2 in ls.iter().filter(|n| n.independent(n1)) {
                        let m = Subst::par_merge(s1, n1, s2, n2);
                        let swapped = Subst::par_merge(s2, n2, s1, n1);
                        for (k, st) in states.iter().enumerate() {
                            let base = st.bindings();
                            let left = valuation_override(base, &img1[k], n1);
                            let want = valuation_override(&left, &img2[k], n2);
                            let got = image(&sp, &m, base);
                            assert_eq!(got, want);
                            assert_eq!(image(&sp, &swapped, base), got);
                        }
                    }
                }
            }
        }
    }
}
