use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EVENTS: &str = "
channel a
channel b
channel c
process D = b -> chaos
process Par = (a -> b -> skip) [| {} | {b} | {} |] (b -> c -> skip)
process Seq3 = a -> b -> c -> skip
process S = stop
process K = skip
";

const BUFFER: &str = "
channel inp, out : int[0..1]
var bf : seq[2] int[0..1]
process Body = inp?v -> bf := bf ^ <v> [] 0 < #bf & out!head(bf) -> bf := tail(bf)
process Buffer = bf := <>; while true do Body
";

fn write(dir: &TempDir, name: &str, src: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, src).unwrap();
    p
}

fn run(args: &[&str], file: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reacalc")).arg(args[0]).arg(file).args(&args[1..]).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn calc_prints_normal_form() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "m.rc", "channel a : int[0..3]\nvar x : int[0..3]\nprocess P = x := 1; a!x -> skip; x := x + 2\n");
    let o = run(&["calc", "--process", "P"], &f);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "pre: true_r\nperi: E(true, <>, {a.1})\npost: Phi(true, {x:=3}, <a.1>)\n");
}

#[test]
fn calc_json_carries_contract_terms() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "m.rc", EVENTS);
    let o = run(&["calc", "--process", "D", "--json"], &f);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "calc");
    assert_eq!(v["process"], "D");
    assert_eq!(v["bounds"]["star"], 3);
    assert_eq!(v["contract"]["pre"], serde_json::json!(["C(true | <b>)"]));
    assert_eq!(v["contract"]["peri"], serde_json::json!(["E(true, <>, {b})"]));
    assert_eq!(v["contract"]["post"], serde_json::json!([]));
}

#[test]
fn refine_exit_codes() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "m.rc", EVENTS);
    let ok = run(&["refine", "--spec", "Par", "--impl", "Seq3", "--trace-bound", "4"], &f);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = run(&["refine", "--spec", "K", "--impl", "S", "--trace-bound", "2", "--json"], &f);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&bad)).unwrap();
    assert_eq!(v["verdict"]["holds"], false);
    assert_eq!(v["witnesses"][0]["kind"], "quiescent");
    assert_eq!(v["witnesses"][0]["trace"], serde_json::json!([]));
}

#[test]
fn deadlock_reports_witness() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "m.rc", EVENTS);
    let o = run(&["deadlock", "--process", "S", "--trace-bound", "2"], &f);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("quiescent after <>"), "{}", stdout(&o));
    let b = write(&d, "b.rc", BUFFER);
    let o = run(&["deadlock", "--process", "Buffer", "--trace-bound", "4", "--star-bound", "3"], &b);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_loop_with_invariant_file() {
    let d = TempDir::new().unwrap();
    let b = write(&d, "b.rc", BUFFER);
    let good = write(
        &d,
        "good.inv",
        "// order\nperi: proj(tt, out) <= bf ^ proj(tt, inp)\npost: false\nspec-peri: proj(tt, out) <= proj(tt, inp)\n",
    );
    let o = run(&["verify-loop", "--process", "Buffer", "--invariant", good.to_str().unwrap(), "--trace-bound", "4", "--json"], &b);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v["items"].as_array().unwrap().iter().map(|i| i["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["productive", "assumption", "quiescent", "final", "spec"]);

    let bad = write(&d, "bad.inv", "peri: proj(tt, out) = proj(tt, inp)\npost: false\n");
    let o = run(&["verify-loop", "--process", "Buffer", "--invariant", bad.to_str().unwrap(), "--trace-bound", "3"], &b);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("quiescent: fails"), "{}", stdout(&o));
}

#[test]
fn invariant_file_errors_are_located() {
    let d = TempDir::new().unwrap();
    let b = write(&d, "b.rc", BUFFER);
    let inv = write(&d, "x.inv", "peri: true\npost: bf +\n");
    let o = run(&["verify-loop", "--process", "Buffer", "--invariant", inv.to_str().unwrap(), "--trace-bound", "2"], &b);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("x.inv:2:"), "{}", stderr(&o));
    let o = run(&["verify-loop", "--process", "Body", "--invariant", inv.to_str().unwrap(), "--trace-bound", "2"], &b);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cross_check_agrees_on_buffer_body() {
    let d = TempDir::new().unwrap();
    let b = write(&d, "b.rc", BUFFER);
    let o = run(&["cross-check", "--process", "Body", "--trace-bound", "3", "--json"], &b);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["holds"], true);
}

#[test]
fn parse_and_usage_errors_exit_two() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "bad.rc", "channel a\nprocess P = a ->\n");
    let o = run(&["calc", "--process", "P"], &f);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.rc:2:"), "{}", stderr(&o));

    let f = write(&d, "hide.rc", "channel a\nprocess P = hide a\n");
    let o = run(&["calc", "--process", "P"], &f);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not supported"), "{}", stderr(&o));

    let f = write(&d, "ok.rc", EVENTS);
    assert_eq!(run(&["calc", "--process", "Nope"], &f).status.code(), Some(2));
    assert_eq!(run(&["refine", "--spec", "K"], &f).status.code(), Some(2));
    assert_eq!(run(&["calc", "--process", "K"], &d.path().join("missing.rc")).status.code(), Some(2));
}
