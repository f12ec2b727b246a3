//! Oracles, program generators and run helpers shared by the test suites.

pub mod gen;
pub mod oracle;

use std::path::Path;
use std::sync::Arc;

use twistvm_core::compile::{self, CompileError, Program};
use twistvm_core::engine::{CaptureSink, Engine, EngineConfig, Outcome};
use twistvm_core::frontend::{self, FrontendError, Loader, SurfaceModule};
use twistvm_core::graph::{Heap, RewriteState};
use twistvm_core::render::render;

use oracle::{from_node, Oracle, OracleError, ROutcome, RValue};

/// Parses source text and its imports; the shipped prelude is available.
pub fn load(src: &str) -> Result<Vec<SurfaceModule>, FrontendError> {
    let mut loader = Loader::new(Vec::new());
    loader.load_source("<test>", src, None)?;
    Ok(loader.into_modules())
}

pub fn compile(src: &str) -> Result<Program, CompileError> {
    compile::build(&load(src)?)
}

/// What a run produced, with every graph value already released.
#[derive(Clone, Debug)]
pub struct Execution {
    /// The rendered value, or the error message.
    pub rendered: Result<String, String>,
    pub value: Option<RValue>,
    pub exception: Option<RValue>,
    pub output: String,
    pub steps: u64,
    /// Live graph objects once the result and the state are dropped.
    pub live_after: usize,
    /// Largest live count seen at a step boundary.
    pub peak_live: usize,
}

/// Runs `main`, calling `observer` at every step boundary.
pub fn execute_observed(
    program: &Program,
    config: EngineConfig,
    observer: &mut dyn FnMut(&RewriteState),
) -> Execution {
    let heap = Heap::new();
    let sink = Arc::new(CaptureSink::default());
    let engine = Engine::new(program, heap.clone(), sink.clone(), config).expect("system combinators");
    let mut peak_live = 0;
    let mut steps = 0;
    let (rendered, value, exception) = {
        let result = engine.start_main().and_then(|mut state| {
            let r = engine.run_observed(&mut state, &mut |s| {
                peak_live = peak_live.max(s.live_nodes());
                observer(s);
            });
            steps = state.steps();
            r
        });
        match result {
            Ok(Outcome::Value(v)) => (Ok(render(program, &v)), Some(from_node(program, &v)), None),
            Ok(Outcome::Exception(e)) => (
                Err(format!("uncaught exception: {}", render(program, &e))),
                None,
                Some(from_node(program, &e)),
            ),
            Err(e) => (Err(e.to_string()), None, None),
        }
    };
    Execution {
        rendered,
        value,
        exception,
        output: sink.contents(),
        steps,
        live_after: heap.live_nodes(),
        peak_live,
    }
}

pub fn execute(program: &Program, config: EngineConfig) -> Execution {
    execute_observed(program, config, &mut |_| {})
}

/// Compiles and runs; panics on compile errors.
pub fn run_source(src: &str, config: EngineConfig) -> Execution {
    let program = compile(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    execute(&program, config)
}

pub fn checked() -> EngineConfig {
    EngineConfig {
        checked: true,
        step_limit: Some(50_000_000),
    }
}

/// Evaluates `main` with the reference evaluator.
pub fn oracle_source(src: &str, fuel: u64) -> Result<ROutcome, OracleError> {
    let modules = load(src).map_err(|e| OracleError::Unknown(e.to_string()))?;
    let table = frontend::resolve(&modules).map_err(|e| OracleError::Unknown(e.to_string()))?;
    Oracle::new(&table, fuel).run("main")
}

/// The machine's outcome in the oracle's terms.
pub fn machine_outcome(run: &Execution) -> Option<ROutcome> {
    match (&run.value, &run.exception) {
        (Some(v), _) => Some(ROutcome::Value(v.clone())),
        (_, Some(e)) => Some(ROutcome::Exception(e.clone())),
        _ => None,
    }
}

/// Independent Fibonacci with `fib 0 = fib 1 = 1`.
pub fn fib(n: u64) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

/// Compares `actual` with a stored fixture. With `TWISTVM_BLESS` set in the
/// environment the fixture is (re)written instead.
pub fn golden(path: impl AsRef<Path>, actual: &str) {
    let path = path.as_ref();
    if std::env::var_os("TWISTVM_BLESS").is_some() {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).unwrap();
        }
        std::fs::write(path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("missing fixture {}: {e}", path.display()));
    assert!(
        expected == actual,
        "fixture {} differs\n--- expected\n{expected}\n--- actual\n{actual}",
        path.display()
    );
}
