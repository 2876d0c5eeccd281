//! Driver-level tests: flags, exit codes, batch output and the
//! interactive loop, exercised through the built binary.

use std::io::Write;
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hopu"))
}

fn corpus(name: &str) -> String {
    format!("{}/corpus/{}", env!("CARGO_MANIFEST_DIR"), name)
}

#[test]
fn batch_query_success_exit_zero() {
    let out = bin()
        .args([corpus("copy.lp"), "-q".into(), "copy (app a a) R.".into()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("R = app a a."), "got: {}", stdout);
    assert!(stdout.contains("no more answers"));
}

#[test]
fn batch_query_failure_exit_one() {
    let out = bin()
        .args([corpus("copy.lp"), "-q".into(), "copy a (app a a).".into()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("no"));
}

#[test]
fn missing_file_exit_two() {
    let out = bin().args(["missing.lp"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn type_error_exit_two() {
    let out = bin()
        .args([
            corpus("print.lp"),
            "-q".into(),
            "printlist (1 :: \"a\" :: nil).".into(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("type error"), "got: {}", stderr);
}

#[test]
fn unknown_flag_exit_two() {
    let out = bin().args(["--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_trace_area_exit_two() {
    let out = bin()
        .args([corpus("copy.lp"), "--trace".into(), "everything".into()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prenex_batch_prints_five_answers() {
    let out = bin()
        .args([
            corpus("prenex.lp"),
            "-q".into(),
            "prenex (and (all x\\(adj x x)) (all z\\(all y\\(adj z y)))) Pnf.".into(),
            "--answers".into(),
            "10".into(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let answers = stdout.lines().filter(|l| l.starts_with("Pnf = ")).count();
    assert_eq!(answers, 5, "got: {}", stdout);
    assert!(stdout.trim_end().ends_with("no more answers"));
}

#[test]
fn residual_constraints_are_displayed() {
    let out = bin()
        .args([
            corpus("mapfun.lp"),
            "-q".into(),
            "mapfun (a::nil) F ((g a)::nil).".into(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("| <F a, g a>"), "got: {}", stdout);
}

#[test]
fn batch_output_is_byte_identical_across_runs() {
    let run = || {
        bin()
            .args([
                corpus("prenex.lp"),
                "-q".into(),
                "prenex (and (all x\\(adj x x)) (all z\\(all y\\(adj z y)))) Pnf.".into(),
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn repl_interaction_semicolon_and_stop() {
    let mut child = bin()
        .arg(corpus("copy.lp"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"copy a R.\n\ncopy (app a a) X.\n;\n#quit.\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("R = a"), "got: {}", stdout);
    assert!(stdout.contains("yes"));
    // pressing ; after the single answer exhausts the stream
    assert!(stdout.contains("no more answers"), "got: {}", stdout);
}

#[test]
fn repl_reports_errors_and_continues() {
    let mut child = bin()
        .arg(corpus("copy.lp"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"copy a ).\ncopy a R.\n\n#quit.\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("parse error"));
    assert!(stdout.contains("R = a"));
}

#[test]
fn repl_load_command_extends_the_program() {
    let mut child = bin()
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let cmd = format!("#load \"{}\".\ncopy a R.\n\n#quit.\n", corpus("copy.lp"));
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(cmd.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("R = a"), "got: {}", stdout);
}

#[test]
fn repl_typeopt_command_switches_levels() {
    let mut child = bin()
        .arg(corpus("append.lp"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"#typeopt none.\nappend (1::nil) (2::nil) L.\n\n#quit.\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("L = 1 :: 2 :: nil"), "got: {}", stdout);
}

#[test]
fn repl_accepts_multiline_queries() {
    let mut child = bin()
        .arg(corpus("copy.lp"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"copy (app a a)\n  R.\n\n#quit.\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("R = app a a"), "got: {}", stdout);
}

#[test]
fn trace_flags_emit_diagnostics_on_stderr() {
    let out = bin()
        .args([
            corpus("copy.lp"),
            "-q".into(),
            "copy a R.".into(),
            "--trace".into(),
            "unify".into(),
            "--trace".into(),
            "clauses".into(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("[clauses]"));
    assert!(stderr.contains("[unify]"));
    // stdout stays clean
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("R = a."));
}
