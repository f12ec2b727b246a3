//! The clause instruction set.
//!
//! A clause program first takes its arguments apart with match instructions
//! (tests and projections that never touch the graph) and then reassembles a
//! result with build instructions. A build either returns a reduced value or
//! wires a fresh chain of thunks whose final thunk inherits the rewritten
//! thunk's control links.

use std::fmt;

use crate::builtins::Builtin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CombId(pub u32);

impl CombId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reg(pub u32);

impl Reg {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Int(i64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constant {
    Int(i64),
    Text(String),
    Comb(CombId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchInstr {
    /// Copy argument `arg` (0-based, head excluded) into `dst`.
    BindArg { arg: usize, dst: Reg },
    TestLiteral { reg: Reg, value: Literal },
    /// With `arity == 0` the value must be the bare tag; otherwise a compound
    /// with that head and exactly `arity` arguments.
    TestTag { reg: Reg, tag: CombId, arity: usize },
    Project { reg: Reg, field: usize, dst: Reg },
}

/// A thunk cell at build time: a register holding a reduced value, or a hole
/// some thunk of the same chain will fill.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Reg(Reg),
    Hole,
}

/// Where control goes after a thunk: another thunk of this build, or the
/// rewritten thunk's own next-redex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkSpec {
    Reg(Reg),
    Inherit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetSpec {
    Slot(Reg, usize),
    Inherit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HandlerSpec {
    Reg(Reg),
    Inherit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildInstr {
    LoadConst {
        value: Constant,
        dst: Reg,
    },
    MakeCompound {
        head: Reg,
        args: Vec<Reg>,
        dst: Reg,
    },
    MakeThunk {
        cells: Vec<Operand>,
        next: LinkSpec,
        target: TargetSpec,
        handler: HandlerSpec,
        dst: Reg,
    },
    /// A handler thunk for `try`: one cell for the catch function, the
    /// continuation captured at `try` entry, and the enclosing handler.
    MakeHandler {
        catcher: Operand,
        next: LinkSpec,
        target: TargetSpec,
        enclosing: HandlerSpec,
        dst: Reg,
    },
    ReturnValue(Reg),
    ReturnChain {
        first: Reg,
        last: Reg,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseProgram {
    pub arity: usize,
    pub match_code: Vec<MatchInstr>,
    pub build_code: Vec<BuildInstr>,
    pub registers: usize,
}

impl ClauseProgram {
    pub fn thunk_count(&self) -> usize {
        self.build_code
            .iter()
            .filter(|i| matches!(i, BuildInstr::MakeThunk { .. }))
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CombKind {
    Defined(Vec<ClauseProgram>),
    DataTag,
    Builtin(Builtin),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combinator {
    pub name: String,
    pub kind: CombKind,
}

impl Combinator {
    pub fn clauses(&self) -> &[ClauseProgram] {
        match &self.kind {
            CombKind::Defined(c) => c,
            _ => &[],
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self.kind, CombKind::DataTag)
    }

    /// Smallest argument count any clause accepts, if the combinator rewrites
    /// at all.
    pub fn min_arity(&self) -> Option<usize> {
        match &self.kind {
            CombKind::Defined(cs) => cs.iter().map(|c| c.arity).min(),
            CombKind::Builtin(b) => Some(b.arity()),
            CombKind::DataTag => None,
        }
    }
}
