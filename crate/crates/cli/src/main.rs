use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reacalc::contract::{CalcConfig, Contract};
use reacalc::dsl::{load_model, loop_parts, parse_invariant_file, Elaborator, Model};
use reacalc::oracle::{cross_check, Bounds};
use reacalc::refine::{
    deadlock_check, loop_invariant_check, refines_contract, refines_via_invariant, SpecContract, Verdict, Witness,
};
use reacalc::report::{ContractTerms, Item, Report, ReportBounds, VerdictSummary};

#[derive(Parser)]
#[command(name = "reacalc", version, about = "Calculate and check reactive contracts of CSP-style processes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the contract of a process.
    Calc {
        file: PathBuf,
        #[arg(long)]
        process: String,
        #[command(flatten)]
        common: Common,
    },
    /// Check that --impl refines --spec.
    Refine {
        file: PathBuf,
        #[arg(long)]
        spec: String,
        #[arg(long = "impl")]
        imp: String,
        #[arg(long)]
        trace_bound: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check that a process never refuses every event.
    Deadlock {
        file: PathBuf,
        #[arg(long)]
        process: String,
        #[arg(long)]
        trace_bound: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check a loop against an invariant file.
    VerifyLoop {
        file: PathBuf,
        #[arg(long)]
        process: String,
        #[arg(long)]
        invariant: PathBuf,
        #[arg(long)]
        trace_bound: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the calculated contract with step-by-step execution.
    CrossCheck {
        file: PathBuf,
        #[arg(long)]
        process: String,
        #[arg(long)]
        trace_bound: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Loop unrolling depth.
    #[arg(long)]
    star_bound: Option<usize>,
    #[arg(long)]
    json: bool,
}

const DEFAULT_STAR: usize = 3;

/// Failures that end the command with exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn read_model(path: &Path) -> Result<Model, Fatal> {
    let src = std::fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
    load_model(&src).map_err(|e| Fatal(format!("{}:{e}", path.display())))
}

fn contract(m: &Model, el: &mut Elaborator, name: &str) -> Result<Contract, Fatal> {
    if m.process(name).is_none() {
        return Err(Fatal(format!("no process named `{name}`")));
    }
    Ok(el.process(name)?)
}

fn show_witness(w: &Witness) -> String {
    let state: Vec<String> = w.state.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let mut s = format!("  {} after <{}> from {{{}}}", w.kind, w.trace.join(", "), state.join(", "));
    if let Some(a) = &w.acceptances {
        s.push_str(&format!(" accepting {{{}}}", a.join(", ")));
    }
    if let Some(d) = &w.detail {
        s.push_str(&format!(": {d}"));
    }
    s
}

fn show_verdict(what: &str, v: &Verdict) -> String {
    let mut out = match (v.holds, v.bounded) {
        (true, true) => format!("{what}: holds (up to bounds)\n"),
        (true, false) => format!("{what}: holds\n"),
        (false, _) => format!("{what}: fails\n"),
    };
    for w in &v.witnesses {
        out.push_str(&show_witness(w));
        out.push('\n');
    }
    for n in &v.notes {
        out.push_str(&format!("  note: {n}\n"));
    }
    out
}

fn emit(r: &Report, text: String, json: bool) -> Result<ExitCode, Fatal> {
    if json {
        println!("{}", serde_json::to_string_pretty(r)?);
    } else {
        print!("{text}");
    }
    Ok(if r.holds() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode, Fatal> {
    match cli.cmd {
        Cmd::Calc { file, process, common } => {
            let m = read_model(&file)?;
            let star = common.star_bound.unwrap_or(DEFAULT_STAR);
            let mut el = Elaborator::new(&m, CalcConfig { star_bound: star, trace_cap: None })?;
            let c = contract(&m, &mut el, &process)?;
            let mut r = Report::new("calc", &process, ReportBounds { trace: None, star });
            r.contract = Some(ContractTerms::of(&c));
            let mut text = format!("{c}\n");
            if let Some(n) = c.star_bound {
                let note = format!("iteration unrolled up to {n} times");
                text.push_str(&format!("note: {note}\n"));
                r.notes.push(note);
            }
            emit(&r, text, common.json)
        }
        Cmd::Refine { file, spec, imp, trace_bound, common } => {
            let m = read_model(&file)?;
            let star = common.star_bound.unwrap_or(DEFAULT_STAR);
            let mut el = Elaborator::new(&m, CalcConfig { star_bound: star, trace_cap: Some(trace_bound) })?;
            let s = contract(&m, &mut el, &spec)?;
            let i = contract(&m, &mut el, &imp)?;
            let v = refines_contract(&SpecContract::from(&s), &i, &Bounds::new(trace_bound, star))?;
            let r = Report::new("refine", &imp, ReportBounds { trace: Some(trace_bound), star }).with_verdict(&v);
            emit(&r, show_verdict(&format!("{spec} ⊑ {imp}"), &v), common.json)
        }
        Cmd::Deadlock { file, process, trace_bound, common } => {
            let m = read_model(&file)?;
            let star = common.star_bound.unwrap_or(DEFAULT_STAR);
            let mut el = Elaborator::new(&m, CalcConfig { star_bound: star, trace_cap: Some(trace_bound) })?;
            let c = contract(&m, &mut el, &process)?;
            let v = deadlock_check(&c, &Bounds::new(trace_bound, star))?;
            let r = Report::new("deadlock", &process, ReportBounds { trace: Some(trace_bound), star }).with_verdict(&v);
            emit(&r, show_verdict(&format!("{process} deadlock free"), &v), common.json)
        }
        Cmd::VerifyLoop { file, process, invariant, trace_bound, common } => {
            let m = read_model(&file)?;
            let star = common.star_bound.unwrap_or(DEFAULT_STAR);
            let src = std::fs::read_to_string(&invariant).map_err(|e| Fatal(format!("{}: {e}", invariant.display())))?;
            let inv = parse_invariant_file(&src, &m).map_err(|e| Fatal(format!("{}:{e}", invariant.display())))?;
            let def = m.process(&process).ok_or_else(|| Fatal(format!("no process named `{process}`")))?;
            let (init, b, body) = loop_parts(&def.body, &m)
                .ok_or_else(|| Fatal(format!("`{process}` is not of the form `init ; while b do body`")))?;
            let mut el = Elaborator::new(&m, CalcConfig { star_bound: star, trace_cap: Some(trace_bound) })?;
            let body_c = el.ast(body)?;
            let bounds = Bounds::new(trace_bound, star);
            let mut r = Report::new("verify-loop", &process, ReportBounds { trace: Some(trace_bound), star });
            let mut text = String::new();
            let mut all = Verdict::holds(false);
            for (name, v) in loop_invariant_check(b, &body_c, &inv.inv, &bounds)? {
                text.push_str(&show_verdict(&name, &v));
                r.items.push(Item { name, holds: v.holds, bounded: v.bounded, witnesses: v.witnesses.clone() });
                all = all.and(v);
            }
            if inv.has_spec() {
                let init_c = match init {
                    Some(a) => el.ast(a)?,
                    None => Contract::skip(el.context()),
                };
                let spec = SpecContract::opaque(
                    el.context(),
                    inv.spec_pre.clone(),
                    inv.spec_peri.clone().unwrap_or_else(reacalc::expr::tt),
                    inv.spec_post.clone().unwrap_or_else(reacalc::expr::tt),
                );
                let v = refines_via_invariant(&spec, &init_c, &inv.inv, &bounds)?;
                text.push_str(&show_verdict("spec", &v));
                r.items.push(Item { name: "spec".into(), holds: v.holds, bounded: v.bounded, witnesses: v.witnesses.clone() });
                all = all.and(v);
            }
            r = r.with_verdict(&all);
            emit(&r, text, common.json)
        }
        Cmd::CrossCheck { file, process, trace_bound, common } => {
            let m = read_model(&file)?;
            // Loops must be unrolled at least as far as the traces reach.
            let star = common.star_bound.unwrap_or(DEFAULT_STAR).max(trace_bound);
            let mut el = Elaborator::new(&m, CalcConfig { star_bound: star, trace_cap: Some(trace_bound) })?;
            let c = contract(&m, &mut el, &process)?;
            let body = &m.process(&process).unwrap().body;
            let rep = cross_check(&m, body, &c, &Bounds::new(trace_bound, star))?;
            let mut r = Report::new("cross-check", &process, ReportBounds { trace: Some(trace_bound), star });
            r.verdict = Some(VerdictSummary { holds: rep.passed(), bounded: true });
            for mm in &rep.mismatches {
                for o in &mm.only_denotational {
                    r.witnesses.push(Witness::of(o, &mm.state, Some("calculated only".into())));
                }
                for o in &mm.only_operational {
                    r.witnesses.push(Witness::of(o, &mm.state, Some("executed only".into())));
                }
            }
            for (s, e) in &rep.errors {
                let state = s.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
                r.witnesses.push(Witness { kind: "error".into(), trace: vec![], state, acceptances: None, detail: Some(e.clone()) });
            }
            r.notes.push(format!("{} initial states, {} skipped (both sides out of domain)", rep.states, rep.skipped));
            let mut text = format!(
                "{process}: {} over {} initial states ({} skipped)\n",
                if rep.passed() { "agrees" } else { "disagrees" },
                rep.states,
                rep.skipped
            );
            for w in &r.witnesses {
                text.push_str(&show_witness(w));
                text.push('\n');
            }
            emit(&r, text, common.json)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
