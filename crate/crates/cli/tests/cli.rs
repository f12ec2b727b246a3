use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Arc;

use twistvm::{bytecode_listing, compile_file, run_file, ExitStatus, RunConfig, Session};
use twistvm_core::engine::CaptureSink;
use twistvm_core::inspect::DotStyle;
use twistvm_testkit::golden;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(name)
}

fn twistvm(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_twistvm")).args(args).output().unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

fn script(dir: &Path, src: &str) -> PathBuf {
    let path = dir.join("main.eg");
    std::fs::write(&path, src).unwrap();
    path
}

fn trace(style: &str) -> Vec<String> {
    let dir = tempfile::tempdir().unwrap();
    let path = script(dir.path(), "def main = mul (1 + 2) (inc 1)\n");
    let trace = dir.path().join("trace");
    let (out, _, code) = twistvm(&[
        "run",
        "--trace-dot",
        trace.to_str().unwrap(),
        "--dot-style",
        style,
        path.to_str().unwrap(),
    ]);
    assert_eq!((out.as_str(), code), ("6\n", 0));
    let mut steps = Vec::new();
    while let Ok(text) = std::fs::read_to_string(trace.join(format!("step-{}.dot", steps.len()))) {
        steps.push(text);
    }
    steps
}

#[test]
fn running_example_trace_matches_goldens() {
    let steps = trace("twisted");
    assert_eq!(steps.len(), 4);
    golden(fixtures().join("running/step-0.dot"), &steps[0]);
    golden(fixtures().join("running/step-2.dot"), &steps[2]);
    golden(fixtures().join("running/final.dot"), &steps[3]);
}

#[test]
fn running_example_traces_in_the_other_styles() {
    golden(fixtures().join("running/standard-0.dot"), &trace("standard")[0]);
    golden(fixtures().join("running/thunked-0.dot"), &trace("thunked")[0]);
}

#[test]
fn fib_bytecode_matches_golden() {
    let fib = corpus("fib.eg");
    let (out, _, code) = twistvm(&["run", "--bytecode", fib.to_str().unwrap()]);
    assert_eq!(code, 0);
    golden(fixtures().join("fib.bytecode"), &out);
    assert!(
        !out.lines().any(|l| l.starts_with("combinator System::")),
        "system combinators are not listed"
    );
    let program = compile_file(&fib, &[]).unwrap();
    assert_eq!(out.trim_end(), bytecode_listing(&program).trim_end());
}

#[test]
fn uncaught_exception_goes_to_stderr() {
    let (out, err, code) = twistvm(&["run", corpus("uncaught_throw.eg").to_str().unwrap()]);
    assert_eq!((out.as_str(), err.trim(), code), ("", "uncaught exception: 9", 1));
}

#[test]
fn missing_main_is_a_compile_error() {
    let (_, err, code) = twistvm(&["run", corpus("no_main.eg").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn missing_script_is_a_compile_error() {
    let (_, err, code) = twistvm(&["run", "/nonexistent/script.eg"]);
    assert_eq!(code, 2);
    assert!(err.contains("script.eg"), "{err}");
}

#[test]
fn step_limit_must_be_positive() {
    let fib = corpus("fib.eg");
    let (_, _, code) = twistvm(&["run", "--step-limit", "0", fib.to_str().unwrap()]);
    assert_eq!(code, 2);
    let (out, _, code) = twistvm(&["run", "--step-limit", "5", fib.to_str().unwrap()]);
    assert_eq!((out.as_str(), code), ("", 3));
}

#[test]
fn include_paths_are_searched() {
    let lib = tempfile::tempdir().unwrap();
    std::fs::write(lib.path().join("extra.eg"), "def seven = 7\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = script(dir.path(), "import \"extra.eg\"\ndef main = seven\n");
    let (_, _, code) = twistvm(&["run", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    let (out, _, code) = twistvm(&["run", "--include", lib.path().to_str().unwrap(), path.to_str().unwrap()]);
    assert_eq!((out.as_str(), code), ("7\n", 0));
}

#[test]
fn run_file_reports_through_its_sinks() {
    let out = Arc::new(CaptureSink::default());
    let mut err = Vec::new();
    let mut config = RunConfig::new(corpus("print_order.eg"));
    config.checked = true;
    config.trace_style = DotStyle::Thunked;
    assert_eq!(run_file(&config, out.clone(), &mut err), ExitStatus::Success);
    assert_eq!(out.contents(), "2\n1\n(f nop nop)\n");
    assert!(err.is_empty());
}

fn session() -> Session {
    Session::new(Vec::new(), Arc::new(CaptureSink::default())).unwrap()
}

#[test]
fn repl_arithmetic() {
    assert_eq!(session().repl_eval("1 + 2"), Ok("3".into()));
}

#[test]
fn repl_definitions_persist() {
    let mut s = session();
    assert_eq!(s.repl_eval("def d = [X -> X X]"), Ok(String::new()));
    assert_eq!(s.repl_eval("d 5"), Ok("(5 5)".into()));
}

#[test]
fn repl_using() {
    let mut s = session();
    assert_eq!(s.repl_eval("using List"), Ok(String::new()));
    assert_eq!(s.repl_eval("cons 1 nil"), Ok("(cons 1 nil)".into()));
}

#[test]
fn repl_survives_errors() {
    let mut s = session();
    assert!(s.repl_eval("bogus 1").is_err());
    assert!(s.repl_eval("def broken = (").is_err());
    assert!(s.repl_eval("def f = undefined_thing").is_err());
    assert_eq!(s.repl_eval("throw 3"), Err("uncaught exception: 3".into()));
    assert_eq!(s.repl_eval("def f = [ X -> X * 2 ]"), Ok(String::new()));
    assert_eq!(s.repl_eval("f 21"), Ok("42".into()));
    assert_eq!(s.repl_eval("try f \"x\" catch [ E -> 0 ]"), Ok("0".into()));
}

#[test]
fn repl_binary_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_twistvm"))
        .arg("repl")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"def d = [X -> X X]\nd 5\nbogus\nusing List\nsum (from_to 1 4)\nprint 7\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "(5 5)\n10\n7\n");
    assert!(String::from_utf8(out.stderr).unwrap().contains("bogus"));
}
