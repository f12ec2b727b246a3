//! The trampoline.
//!
//! Each step takes the root redex, which always has every cell filled, and
//! rewrites it in one of three ways: a clause returns a value, which is
//! written to the thunk's target; a clause returns a new chain, which takes
//! over the thunk's links and becomes the root; or nothing applies, and the
//! cells themselves are the value. The loop never recurses.

mod primitives;

use std::io::Write;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::builtins::{qualified, Builtin};
use crate::compile::{ClauseProgram, CombKind, Literal, MatchInstr, Program};
use crate::frontend::Expr;
use crate::graph::{
    deliver, execute_build, wire_term, Cell, GraphFault, Heap, Inherit, Next, Node, NodeKind,
    RegValue, RewriteState, Target, Thunk, ThunkKind, ThunkRef, WireError,
};
use crate::inspect;
use crate::render;
use primitives::{Effect, SystemIds};

/// Where `print` writes. Shared by parallel branches.
pub trait OutputSink: Send + Sync {
    fn print_line(&self, text: &str);
}

pub struct StdoutSink;

impl OutputSink for StdoutSink {
    fn print_line(&self, text: &str) {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{text}");
        let _ = out.flush();
    }
}

/// Collects output in memory.
#[derive(Default)]
pub struct CaptureSink(Mutex<String>);

impl CaptureSink {
    pub fn contents(&self) -> String {
        self.0.lock().expect("capture lock").clone()
    }
}

impl OutputSink for CaptureSink {
    fn print_line(&self, text: &str) {
        let mut buf = self.0.lock().expect("capture lock");
        buf.push_str(text);
        buf.push('\n');
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Value(Node),
    /// An exception no handler caught.
    Exception(Node),
}

impl Outcome {
    pub fn node(&self) -> &Node {
        match self {
            Outcome::Value(n) | Outcome::Exception(n) => n,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("step limit of {0} reached")]
    StepLimit(u64),
    #[error("graph invariant violated after step {step}: {report}")]
    Invariant { step: u64, report: String },
    #[error("internal fault: {0}")]
    Internal(#[from] GraphFault),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("the program has no zero-argument `main`")]
    NoMain,
    #[error("the program lacks the system combinator `{0}`")]
    MissingSystem(String),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EngineConfig {
    /// Check the graph invariants at every step boundary.
    pub checked: bool,
    pub step_limit: Option<u64>,
}

pub enum MatchOutcome {
    Matched(usize, Vec<RegValue>),
    NoClause,
    TooFewArgs,
}

fn run_match(clause: &ClauseProgram, args: &[Node], regs: &mut [RegValue]) -> bool {
    let get = |regs: &[RegValue], r: crate::compile::Reg| match &regs[r.index()] {
        RegValue::Value(n) => n.clone(),
        _ => unreachable!("verified match code"),
    };
    for instr in &clause.match_code {
        match instr {
            MatchInstr::BindArg { arg, dst } => regs[dst.index()] = RegValue::Value(args[*arg].clone()),
            MatchInstr::TestLiteral { reg, value } => {
                let ok = match (get(regs, *reg).kind(), value) {
                    (NodeKind::Int(a), Literal::Int(b)) => a == b,
                    (NodeKind::Text(a), Literal::Text(b)) => a == b,
                    _ => false,
                };
                if !ok {
                    return false;
                }
            }
            MatchInstr::TestTag { reg, tag, arity } => {
                let node = get(regs, *reg);
                let (head, fields) = node.spine();
                if head.as_comb() != Some(*tag) || fields.len() != *arity {
                    return false;
                }
            }
            MatchInstr::Project { reg, field, dst } => {
                let node = get(regs, *reg);
                regs[dst.index()] = RegValue::Value(node.spine().1[*field].clone());
            }
        }
    }
    true
}

/// Tries clauses in order; a clause of arity k only when there are at
/// least k arguments.
pub fn match_clauses(clauses: &[ClauseProgram], args: &[Node]) -> MatchOutcome {
    let n = args.len();
    if clauses.iter().all(|c| c.arity > n) {
        return MatchOutcome::TooFewArgs;
    }
    for (i, clause) in clauses.iter().enumerate() {
        if clause.arity > n {
            continue;
        }
        let mut regs = vec![RegValue::Empty; clause.registers];
        if run_match(clause, args, &mut regs) {
            return MatchOutcome::Matched(i, regs);
        }
    }
    MatchOutcome::NoClause
}

pub struct Engine<'p> {
    program: &'p Program,
    heap: Heap,
    output: Arc<dyn OutputSink>,
    config: EngineConfig,
    ids: SystemIds,
}

impl<'p> Engine<'p> {
    pub fn new(
        program: &'p Program,
        heap: Heap,
        output: Arc<dyn OutputSink>,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let id = |name: &str| {
            let q = qualified(name);
            program.lookup(&q).ok_or(EngineError::MissingSystem(q))
        };
        let ids = SystemIds {
            nop: id("nop")?,
            tuple: id("tuple")?,
            truth: id("true")?,
            falsity: id("false")?,
        };
        Ok(Engine {
            program,
            heap,
            output,
            config,
            ids,
        })
    }

    pub fn program(&self) -> &Program {
        self.program
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    /// Wires `main`'s body with the runtime sink as continuation.
    pub fn start_main(&self) -> Result<RewriteState, EngineError> {
        self.start("main")
    }

    /// Wires the body of a zero-argument definition.
    pub fn start(&self, name: &str) -> Result<RewriteState, EngineError> {
        let id = self.program.lookup(name).ok_or(EngineError::NoMain)?;
        let clause = self
            .program
            .get(id)
            .clauses()
            .iter()
            .find(|c| c.arity == 0)
            .ok_or(EngineError::NoMain)?;
        let mut result = None;
        let mut regs = vec![RegValue::Empty; clause.registers];
        let inherit = Inherit {
            next: Next::Sink,
            target: Target::Root,
            handler: None,
        };
        let root = execute_build(&self.heap, clause, &mut regs, &inherit, &mut result)?;
        Ok(RewriteState::with_root(self.heap.clone(), root, result))
    }

    /// Wires a closed, lifted term with the runtime sink as continuation.
    pub fn start_term(&self, term: &Expr) -> Result<RewriteState, EngineError> {
        let mut result = None;
        let root = wire_term(
            self.program,
            &self.heap,
            term,
            Target::Root,
            Next::Sink,
            None,
            &mut result,
        )?;
        Ok(RewriteState::with_root(self.heap.clone(), root, result))
    }

    /// A state whose single thunk applies `f` to `args`.
    pub fn start_apply(&self, f: Node, args: Vec<Node>) -> RewriteState {
        let cells = std::iter::once(f).chain(args).map(Cell::Filled).collect();
        let t = Thunk::new(&self.heap, ThunkKind::Redex, cells, Next::Sink, Target::Root, None);
        RewriteState::with_root(self.heap.clone(), Next::Redex(t), None)
    }

    pub fn run(&self, state: &mut RewriteState) -> Result<Outcome, EngineError> {
        self.run_observed(state, &mut |_| {})
    }

    /// Runs to completion, calling `observer` at every step boundary,
    /// including the initial and the final one.
    pub fn run_observed(
        &self,
        state: &mut RewriteState,
        observer: &mut dyn FnMut(&RewriteState),
    ) -> Result<Outcome, EngineError> {
        loop {
            if self.config.checked {
                let report = inspect::check(state);
                if !report.is_ok() {
                    return Err(EngineError::Invariant {
                        step: state.steps,
                        report: report.summary(),
                    });
                }
            }
            observer(state);
            if state.is_done() {
                break;
            }
            if let Some(limit) = self.config.step_limit {
                if state.steps >= limit {
                    return Err(EngineError::StepLimit(limit));
                }
            }
            self.step(state)?;
        }
        if let Some(e) = state.exception.take() {
            return Ok(Outcome::Exception(e));
        }
        state
            .result
            .take()
            .map(Outcome::Value)
            .ok_or(EngineError::Internal(GraphFault::BadBuild(
                "the chain ended without a result",
            )))
    }

    /// Performs one rewrite of the root redex.
    pub fn step(&self, state: &mut RewriteState) -> Result<(), EngineError> {
        let Next::Redex(thunk) = state.root.clone() else {
            return Ok(());
        };
        state.steps += 1;

        let mut cells = thunk.filled_cells()?;
        if let NodeKind::Compound(items) = cells[0].kind() {
            let items = items.clone();
            cells.splice(0..1, items);
        }
        let head = cells[0].clone();
        let args = &cells[1..];

        if let Some(id) = head.as_comb() {
            match &self.program.get(id).kind {
                CombKind::Defined(clauses) => {
                    if let MatchOutcome::Matched(i, mut regs) = match_clauses(clauses, args) {
                        let clause = &clauses[i];
                        let inherit = self.inherit(&thunk, &args[clause.arity..]);
                        state.root = execute_build(
                            &self.heap,
                            clause,
                            &mut regs,
                            &inherit,
                            &mut state.result,
                        )?;
                        return Ok(());
                    }
                }
                CombKind::Builtin(b) if args.len() >= b.arity() => {
                    let (used, surplus) = args.split_at(b.arity());
                    return self.builtin(state, &thunk, *b, used, surplus);
                }
                _ => {}
            }
        }

        let value = self.heap.compound(head, args.to_vec());
        self.finish(state, &thunk, value)
    }

    /// Links for a clause body. Surplus arguments get a thunk of their own
    /// that applies the body's result to them.
    fn inherit(&self, thunk: &ThunkRef, surplus: &[Node]) -> Inherit {
        if surplus.is_empty() {
            return Inherit {
                next: thunk.next(),
                target: thunk.target().clone(),
                handler: thunk.handler().cloned(),
            };
        }
        let cells = std::iter::once(Cell::Hole)
            .chain(surplus.iter().cloned().map(Cell::Filled))
            .collect();
        let wrapper = Thunk::new(
            &self.heap,
            ThunkKind::Redex,
            cells,
            thunk.next(),
            thunk.target().clone(),
            thunk.handler().cloned(),
        );
        Inherit {
            next: Next::Redex(wrapper.clone()),
            target: Target::Slot(wrapper, 0),
            handler: thunk.handler().cloned(),
        }
    }

    fn finish(&self, state: &mut RewriteState, thunk: &ThunkRef, value: Node) -> Result<(), EngineError> {
        deliver(thunk.target(), value, &mut state.result)?;
        state.root = thunk.next();
        Ok(())
    }

    fn builtin(
        &self,
        state: &mut RewriteState,
        thunk: &ThunkRef,
        b: Builtin,
        args: &[Node],
        surplus: &[Node],
    ) -> Result<(), EngineError> {
        let value = match primitives::apply(&self.heap, self.ids, b, args) {
            Effect::Value(v) => v,
            Effect::Print(v) => {
                self.output.print_line(&render::display(self.program, &v));
                self.heap.comb(self.ids.nop)
            }
            Effect::Raise(e) => {
                self.raise(state, thunk, e);
                return Ok(());
            }
            Effect::Par(f, g) => match self.par(f, g)? {
                (Outcome::Exception(e), _) | (Outcome::Value(_), Outcome::Exception(e)) => {
                    self.raise(state, thunk, e);
                    return Ok(());
                }
                (Outcome::Value(l), Outcome::Value(r)) => {
                    self.heap.compound(self.heap.comb(self.ids.tuple), vec![l, r])
                }
            },
        };
        // Builtin results have inert heads, so surplus arguments just stick.
        let value = self.heap.compound(value, surplus.to_vec());
        self.finish(state, thunk, value)
    }

    /// Abandons the chain up to the handler's continuation and applies the
    /// handler's catch function to `value` there.
    pub fn raise(&self, state: &mut RewriteState, thunk: &ThunkRef, value: Node) {
        let Some(handler) = thunk.handler() else {
            state.exception = Some(value);
            state.root = Next::Sink;
            return;
        };
        let catcher = handler.cells()[0].clone();
        let applied = Thunk::new(
            &self.heap,
            ThunkKind::Redex,
            vec![catcher, Cell::Filled(value)],
            handler.next(),
            handler.target().clone(),
            handler.handler().cloned(),
        );
        state.root = Next::Redex(applied);
    }

    /// Evaluates `f nop` and `g nop` on two threads and joins.
    fn par(&self, f: Node, g: Node) -> Result<(Outcome, Outcome), EngineError> {
        let branch = |h: Node| {
            let mut state = self.start_apply(h, vec![self.heap.comb(self.ids.nop)]);
            self.run(&mut state)
        };
        let (left, right) = std::thread::scope(|s| {
            let left = s.spawn(|| branch(f));
            let right = s.spawn(|| branch(g));
            (left.join(), right.join())
        });
        let join = |r: std::thread::Result<Result<Outcome, EngineError>>| {
            r.unwrap_or_else(|_| {
                Err(EngineError::Internal(GraphFault::BadBuild(
                    "a parallel branch panicked",
                )))
            })
        };
        Ok((join(left)?, join(right)?))
    }
}
