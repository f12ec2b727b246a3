//! From a resolved table to a [`Program`] of combinators.

mod bytecode;
mod codegen;
mod disasm;
mod lift;
mod verify;

use std::collections::HashMap;

use thiserror::Error;

pub use bytecode::*;
pub use codegen::{compile_clauses, ConstInfo, ConstTable};
pub use disasm::{assemble, disassemble, disassemble_program, AssembleError, Listing};
pub use lift::{contains_abstraction, lift_lambdas};
pub use verify::{verify_clause, VerifyError};

use crate::frontend::{self, EntryKind, Expr, FrontendError, ResolvedTable, SurfaceModule};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),

    #[error("duplicate pattern variable `{variable}` in a clause of `{combinator}`")]
    DuplicateVariable { variable: String, combinator: String },

    #[error("unknown constant `{name}` in `{combinator}`")]
    UnknownConstant { name: String, combinator: String },

    #[error("`{combinator}` still contains an abstraction or operator; lift and resolve first")]
    NotLowered { combinator: String },

    #[error("bytecode of `{combinator}` failed verification: {error}")]
    Verify {
        combinator: String,
        error: VerifyError,
    },

    #[error("no `main` definition")]
    MissingMain,
}

/// A compiled program: the combinator table.
#[derive(Clone, Debug)]
pub struct Program {
    combinators: Vec<Combinator>,
    by_name: HashMap<String, CombId>,
    consts: ConstTable,
    short_names: HashMap<CombId, String>,
}

fn short_name(name: &str) -> &str {
    // Lifted names keep their parent so they stay readable.
    name.rsplit_once("::").map_or(name, |(_, s)| s)
}

impl Program {
    pub fn combinators(&self) -> &[Combinator] {
        &self.combinators
    }

    pub fn get(&self, id: CombId) -> &Combinator {
        &self.combinators[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<CombId> {
        self.by_name.get(name).copied()
    }

    pub fn consts(&self) -> &ConstTable {
        &self.consts
    }

    /// The unqualified name when no other combinator shares it, otherwise the
    /// qualified one.
    pub fn display_name(&self, id: CombId) -> &str {
        self.short_names
            .get(&id)
            .map(String::as_str)
            .unwrap_or_else(|| &self.get(id).name)
    }

    /// Compiles a closed, lifted expression as a zero-argument clause, e.g.
    /// to wire a term directly into the graph.
    pub fn compile_term(&self, term: &Expr) -> Result<ClauseProgram, CompileError> {
        let clause = frontend::Clause {
            patterns: Vec::new(),
            body: term.clone(),
        };
        let mut programs = compile_clauses(std::slice::from_ref(&clause), &self.consts, "<term>")?;
        let program = programs.pop().expect("one clause");
        verify_clause(&program).map_err(|error| CompileError::Verify {
            combinator: "<term>".into(),
            error,
        })?;
        Ok(program)
    }
}

/// Compiles a lifted table into combinators. Every clause program is checked
/// by the static verifier.
pub fn compile_program(table: &ResolvedTable) -> Result<Program, CompileError> {
    let mut consts = ConstTable::new();
    for (i, entry) in table.entries().iter().enumerate() {
        let id = CombId(i as u32);
        let (data, arities) = match &entry.kind {
            EntryKind::Data => (true, Vec::new()),
            EntryKind::Builtin(b) => (false, vec![b.arity()]),
            EntryKind::Def(Expr::Abstraction(cs)) => (false, cs.iter().map(|c| c.arity()).collect()),
            EntryKind::Def(_) => (false, vec![0]),
        };
        consts.insert(entry.name.clone(), ConstInfo { id, data, arities });
    }

    let mut combinators = Vec::with_capacity(table.entries().len());
    let mut by_name = HashMap::new();
    for (i, entry) in table.entries().iter().enumerate() {
        let kind = match &entry.kind {
            EntryKind::Data => CombKind::DataTag,
            EntryKind::Builtin(b) => CombKind::Builtin(*b),
            EntryKind::Def(body) => {
                let single;
                let clauses = match body {
                    Expr::Abstraction(cs) => cs.as_slice(),
                    other => {
                        single = [frontend::Clause {
                            patterns: Vec::new(),
                            body: other.clone(),
                        }];
                        &single
                    }
                };
                let programs = compile_clauses(clauses, &consts, &entry.name)?;
                for p in &programs {
                    verify_clause(p).map_err(|error| CompileError::Verify {
                        combinator: entry.name.clone(),
                        error,
                    })?;
                }
                CombKind::Defined(programs)
            }
        };
        by_name.insert(entry.name.clone(), CombId(i as u32));
        combinators.push(Combinator {
            name: entry.name.clone(),
            kind,
        });
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for c in &combinators {
        *counts.entry(short_name(&c.name)).or_default() += 1;
    }
    let short_names = combinators
        .iter()
        .enumerate()
        .filter(|(_, c)| counts[short_name(&c.name)] == 1)
        .map(|(i, c)| (CombId(i as u32), short_name(&c.name).to_string()))
        .collect();

    Ok(Program {
        combinators,
        by_name,
        consts,
        short_names,
    })
}

/// Resolves, lifts and compiles modules given in dependency order.
pub fn build(modules: &[SurfaceModule]) -> Result<Program, CompileError> {
    let table = frontend::resolve(modules)?;
    compile_program(&lift_lambdas(&table))
}
