//! Golden corpus: every `tests/corpus/*.eg` has its expected stdout in the
//! matching `.out` file and its exit code in a `# exit: N` header line. An
//! optional `# args: ...` line adds flags to `twistvm run`.

use std::path::{Path, PathBuf};
use std::process::Command;

fn corpus() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "eg"))
        .collect();
    files.sort();
    files
}

fn header<'a>(src: &'a str, key: &str) -> Option<&'a str> {
    src.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(&format!("# {key}:")))
        .map(str::trim)
}

struct Expected {
    stdout: String,
    code: i32,
    args: Vec<String>,
}

fn expected(script: &Path) -> Expected {
    let src = std::fs::read_to_string(script).unwrap();
    Expected {
        stdout: std::fs::read_to_string(script.with_extension("out")).unwrap(),
        code: header(&src, "exit").expect("missing exit header").parse().unwrap(),
        args: header(&src, "args")
            .map(|a| a.split_whitespace().map(String::from).collect())
            .unwrap_or_default(),
    }
}

fn run(script: &Path, extra: &[&str], args: &[String]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_twistvm"))
        .arg("run")
        .args(extra)
        .args(args)
        .arg(script)
        .output()
        .unwrap();
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap())
}

#[test]
fn corpus_is_large_enough() {
    assert!(corpus().len() >= 50);
}

#[test]
fn corpus_matches_expected_output() {
    let mut failures = Vec::new();
    for script in corpus() {
        let want = expected(&script);
        let got = run(&script, &[], &want.args);
        if got != (want.stdout.clone(), want.code) {
            failures.push(format!(
                "{}: expected exit {} and {:?}, got exit {} and {:?}",
                script.display(),
                want.code,
                want.stdout,
                got.1,
                got.0
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn checked_mode_changes_no_output() {
    let mut failures = Vec::new();
    for script in corpus() {
        let want = expected(&script);
        let plain = run(&script, &[], &want.args);
        let checked = run(&script, &["--check"], &want.args);
        if plain != checked {
            failures.push(format!("{}: {plain:?} vs {checked:?}", script.display()));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
