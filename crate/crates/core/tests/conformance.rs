use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reacalc::contract::CalcConfig;
use reacalc::dsl::{check_model, Elaborator, ProcessDef};
use reacalc::gen::{gen_process, small_model, GenConfig};
use reacalc::oracle::{cross_check, denote_bounded, Bounds};


fn run(seed: u64, programs: usize, gen: GenConfig) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = Bounds::new(4, 4);
    let cfg = CalcConfig { star_bound: b.star_bound, trace_cap: Some(b.trace_len) };
    let mut failures = Vec::new();
    let (mut states, mut skipped, mut obs) = (0, 0, 0);
    for i in 0..programs {
        let ast = gen_process(&mut rng, &gen);
        let mut m = small_model();
        m.processes.push(ProcessDef { name: "P".into(), body: ast.clone(), pos: Default::default() });
        check_model(&m).unwrap();
        let mut el = Elaborator::new(&m, cfg).unwrap();
        let c = el.ast(&ast).unwrap();
        let rep = cross_check(&m, &ast, &c, &b).unwrap();
        states += rep.states;
        skipped += rep.skipped;
        obs += denote_bounded(&c, &c.ctx.space.states().unwrap()[0], &b).map(|o| o.obs.len()).unwrap_or(0);
        if !rep.passed() {
            failures.push(format!("#{i}: {ast}\n{rep:?}"));
        }
    }
    eprintln!("{programs} programs, {states} states, {skipped} skipped, {obs} observations from first states");
    assert!(skipped * 10 < states, "too many skipped states");
    assert!(failures.is_empty(), "{} disagreements:\n{}", failures.len(), failures.join("\n\n"));
    assert!(start.elapsed().as_secs() < 120, "took {:?}", start.elapsed());
}

#[test]
fn random_programs_agree_with_operational_semantics() {
    run(2024, 200, GenConfig::default());
}

#[test]
fn deeper_programs_agree() {
    run(99, 100, GenConfig { depth: 4, ..GenConfig::default() });
}
