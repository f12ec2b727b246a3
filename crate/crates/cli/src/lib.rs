//! Script runner and REPL session behind the `twistvm` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use twistvm_core::builtins::SYSTEM;
use twistvm_core::compile::{self, disassemble, CompileError, Program};
use twistvm_core::engine::{Engine, EngineConfig, EngineError, OutputSink, Outcome};
use twistvm_core::frontend::{
    lexer::KEYWORDS, parse_expression, parse_source, tokenize, Decl, Loader, ScopedDecl,
    SurfaceModule, TokenKind,
};
use twistvm_core::graph::{Heap, Node, NodeKind};
use twistvm_core::inspect::{emit_dot, DotStyle};
use twistvm_core::render::render;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub script: PathBuf,
    pub include_paths: Vec<PathBuf>,
    pub checked: bool,
    pub trace_dir: Option<PathBuf>,
    pub trace_style: DotStyle,
    pub dump_bytecode: bool,
    pub step_limit: Option<u64>,
}

impl RunConfig {
    pub fn new(script: impl Into<PathBuf>) -> Self {
        RunConfig {
            script: script.into(),
            include_paths: Vec::new(),
            checked: false,
            trace_dir: None,
            trace_style: DotStyle::Twisted,
            dump_bytecode: false,
            step_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    UncaughtException = 1,
    CompileError = 2,
    StepLimit = 3,
    /// A graph invariant or internal consistency check failed.
    Fault = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

fn is_nop(program: &Program, node: &Node) -> bool {
    matches!(node.kind(), NodeKind::Comb(c) if program.get(*c).name == format!("{SYSTEM}::nop"))
}

/// Loads a script and its imports and compiles them.
pub fn compile_file(script: &Path, include_paths: &[PathBuf]) -> Result<Program, CompileError> {
    let mut loader = Loader::new(include_paths.to_vec());
    loader.load_file(script)?;
    compile::build(loader.modules())
}

/// Listing of every combinator outside the `System` namespace.
pub fn bytecode_listing(program: &Program) -> String {
    let system = format!("{SYSTEM}::");
    program
        .combinators()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.name.starts_with(&system))
        .map(|(i, _)| disassemble(program, compile::CombId(i as u32)))
        .collect::<Vec<_>>()
        .join("\n")
}

fn engine_status(e: &EngineError) -> ExitStatus {
    match e {
        EngineError::StepLimit(_) => ExitStatus::StepLimit,
        EngineError::Wire(_) | EngineError::NoMain => ExitStatus::CompileError,
        EngineError::Invariant { .. } | EngineError::Internal(_) | EngineError::MissingSystem(_) => {
            ExitStatus::Fault
        }
    }
}

/// Compiles and runs a script. Program output and the final value go to
/// `out`; diagnostics go to `err`.
pub fn run_file(config: &RunConfig, out: Arc<dyn OutputSink>, err: &mut dyn Write) -> ExitStatus {
    let program = match compile_file(&config.script, &config.include_paths) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return ExitStatus::CompileError;
        }
    };
    if config.dump_bytecode {
        out.print_line(bytecode_listing(&program).trim_end());
        return ExitStatus::Success;
    }
    if program.lookup("main").is_none() {
        let _ = writeln!(err, "error: {}", CompileError::MissingMain);
        return ExitStatus::CompileError;
    }
    if let Some(dir) = &config.trace_dir {
        if let Err(e) = fs::create_dir_all(dir) {
            let _ = writeln!(err, "error: cannot create {}: {e}", dir.display());
            return ExitStatus::Fault;
        }
    }

    let heap = Heap::new();
    let engine_config = EngineConfig {
        checked: config.checked,
        step_limit: config.step_limit,
    };
    let engine = match Engine::new(&program, heap, out.clone(), engine_config) {
        Ok(e) => e,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return engine_status(&e);
        }
    };
    let result = engine.start_main().and_then(|mut state| {
        let mut trace_error = None;
        let outcome = engine.run_observed(&mut state, &mut |s| {
            let Some(dir) = &config.trace_dir else { return };
            let snapshot = emit_dot(s, &program, config.trace_style);
            let path = dir.join(format!("step-{}.dot", snapshot.step));
            if let Err(e) = fs::write(&path, snapshot.text) {
                trace_error.get_or_insert(format!("cannot write {}: {e}", path.display()));
            }
        });
        if let Some(e) = trace_error {
            let _ = writeln!(err, "warning: {e}");
        }
        outcome
    });

    match result {
        Ok(Outcome::Value(v)) => {
            if !is_nop(&program, &v) {
                out.print_line(&render(&program, &v));
            }
            ExitStatus::Success
        }
        Ok(Outcome::Exception(e)) => {
            let _ = writeln!(err, "uncaught exception: {}", render(&program, &e));
            ExitStatus::UncaughtException
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            engine_status(&e)
        }
    }
}

/// An interactive session: the prelude plus accumulated declarations.
pub struct Session {
    base: Vec<SurfaceModule>,
    declarations: Vec<ScopedDecl>,
    include_paths: Vec<PathBuf>,
    output: Arc<dyn OutputSink>,
    step_limit: Option<u64>,
}

/// The name REPL expressions are compiled under; not a legal identifier.
const REPL_MAIN: &str = "$repl";

impl Session {
    pub fn new(include_paths: Vec<PathBuf>, output: Arc<dyn OutputSink>) -> Result<Self, String> {
        let mut loader = Loader::new(include_paths.clone());
        loader
            .load_source("<repl>", "import \"prelude.eg\"", None)
            .map_err(|e| e.to_string())?;
        Ok(Session {
            base: loader.into_modules(),
            declarations: Vec::new(),
            include_paths,
            output,
            step_limit: None,
        })
    }

    pub fn set_step_limit(&mut self, limit: Option<u64>) {
        self.step_limit = limit;
    }

    fn modules(&self, extra: Vec<ScopedDecl>) -> Vec<SurfaceModule> {
        let mut modules = self.base.clone();
        let mut declarations = self.declarations.clone();
        declarations.extend(extra);
        modules.push(SurfaceModule {
            imports: Vec::new(),
            declarations,
        });
        modules
    }

    fn is_declaration(line: &str) -> bool {
        tokenize(line).ok().and_then(|ts| ts.into_iter().next()).is_some_and(|t| {
            t.kind == TokenKind::Keyword && KEYWORDS.contains(&t.lexeme.as_str()) && t.lexeme != "try"
        })
    }

    /// Evaluates one line. Declarations extend the session and render as an
    /// empty string; expressions render their value. Errors leave the
    /// session unchanged.
    pub fn repl_eval(&mut self, line: &str) -> Result<String, String> {
        let line = line.trim();
        if line.is_empty() {
            return Ok(String::new());
        }
        if Self::is_declaration(line) {
            let module = parse_source(line).map_err(|e| e.to_string())?;
            let mut loader = Loader::new(self.include_paths.clone());
            for import in &module.imports {
                loader
                    .load_source("<repl>", &format!("import \"{import}\""), Some(Path::new(".")))
                    .map_err(|e| e.to_string())?;
            }
            let imported = loader.into_modules();
            let mut base = self.base.clone();
            base.extend(imported);
            let candidate = Session {
                base,
                declarations: self.declarations.clone(),
                include_paths: Vec::new(),
                output: self.output.clone(),
                step_limit: None,
            };
            compile::build(&candidate.modules(module.declarations.clone())).map_err(|e| e.to_string())?;
            self.base = candidate.base;
            self.declarations.extend(module.declarations);
            return Ok(String::new());
        }

        let expr = parse_expression(&tokenize(line).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let entry = ScopedDecl {
            namespace: Vec::new(),
            decl: Decl::Def(REPL_MAIN.into(), expr),
        };
        let program = compile::build(&self.modules(vec![entry])).map_err(|e| e.to_string())?;
        let config = EngineConfig {
            checked: false,
            step_limit: self.step_limit,
        };
        let engine = Engine::new(&program, Heap::new(), self.output.clone(), config).map_err(|e| e.to_string())?;
        let mut state = engine.start(REPL_MAIN).map_err(|e| e.to_string())?;
        match engine.run(&mut state).map_err(|e| e.to_string())? {
            Outcome::Value(v) if is_nop(&program, &v) => Ok(String::new()),
            Outcome::Value(v) => Ok(render(&program, &v)),
            Outcome::Exception(e) => Err(format!("uncaught exception: {}", render(&program, &e))),
        }
    }
}
