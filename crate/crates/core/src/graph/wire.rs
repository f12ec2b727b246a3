//! Executing build code: turning a clause result into graph.

use thiserror::Error;

use super::{deliver, Cell, GraphFault, Heap, Next, Node, Target, Thunk, ThunkKind, ThunkRef};
use crate::compile::{
    BuildInstr, ClauseProgram, CompileError, Constant, HandlerSpec, LinkSpec, Operand, Program,
    TargetSpec,
};
use crate::frontend::Expr;

/// The control links of the thunk being rewritten, handed to the final
/// thunk of a new chain (or used directly when a value is returned).
#[derive(Clone)]
pub struct Inherit {
    pub next: Next,
    pub target: Target,
    pub handler: Option<ThunkRef>,
}

#[derive(Clone, Default)]
pub enum RegValue {
    #[default]
    Empty,
    Value(Node),
    Thunk(ThunkRef),
}

fn value(regs: &[RegValue], r: crate::compile::Reg) -> Result<Node, GraphFault> {
    match regs.get(r.index()) {
        Some(RegValue::Value(n)) => Ok(n.clone()),
        _ => Err(GraphFault::BadBuild("expected a value register")),
    }
}

fn thunk(regs: &[RegValue], r: crate::compile::Reg) -> Result<ThunkRef, GraphFault> {
    match regs.get(r.index()) {
        Some(RegValue::Thunk(t)) => Ok(t.clone()),
        _ => Err(GraphFault::BadBuild("expected a thunk register")),
    }
}

fn set(regs: &mut [RegValue], r: crate::compile::Reg, v: RegValue) -> Result<(), GraphFault> {
    *regs
        .get_mut(r.index())
        .ok_or(GraphFault::BadBuild("register out of range"))? = v;
    Ok(())
}

/// Runs build code over a register file already holding the match results.
/// Returns the new root link: the first redex of the new chain, or the
/// inherited next link once a returned value has been delivered.
pub fn execute_build(
    heap: &Heap,
    program: &ClauseProgram,
    regs: &mut [RegValue],
    inherit: &Inherit,
    root: &mut Option<Node>,
) -> Result<Next, GraphFault> {
    let link = |regs: &[RegValue], l: LinkSpec| -> Result<Next, GraphFault> {
        Ok(match l {
            LinkSpec::Reg(r) => Next::Redex(thunk(regs, r)?),
            LinkSpec::Inherit => inherit.next.clone(),
        })
    };
    let target = |regs: &[RegValue], t: TargetSpec| -> Result<Target, GraphFault> {
        Ok(match t {
            TargetSpec::Slot(r, slot) => Target::Slot(thunk(regs, r)?, slot),
            TargetSpec::Inherit => inherit.target.clone(),
        })
    };
    let handler = |regs: &[RegValue], h: HandlerSpec| -> Result<Option<ThunkRef>, GraphFault> {
        Ok(match h {
            HandlerSpec::Reg(r) => Some(thunk(regs, r)?),
            HandlerSpec::Inherit => inherit.handler.clone(),
        })
    };
    let cell = |regs: &[RegValue], op: Operand| -> Result<Cell, GraphFault> {
        Ok(match op {
            Operand::Reg(r) => Cell::Filled(value(regs, r)?),
            Operand::Hole => Cell::Hole,
        })
    };

    for instr in &program.build_code {
        match instr {
            BuildInstr::LoadConst { value, dst } => {
                let node = match value {
                    Constant::Int(v) => heap.int(*v),
                    Constant::Text(t) => heap.text(t.as_str()),
                    Constant::Comb(c) => heap.comb(*c),
                };
                set(regs, *dst, RegValue::Value(node))?;
            }
            BuildInstr::MakeCompound { head, args, dst } => {
                let args = args
                    .iter()
                    .map(|a| value(regs, *a))
                    .collect::<Result<Vec<_>, _>>()?;
                let node = heap.compound(value(regs, *head)?, args);
                set(regs, *dst, RegValue::Value(node))?;
            }
            BuildInstr::MakeThunk {
                cells,
                next,
                target: t,
                handler: h,
                dst,
            } => {
                let cells = cells
                    .iter()
                    .map(|op| cell(regs, *op))
                    .collect::<Result<Vec<_>, _>>()?;
                let made = Thunk::new(
                    heap,
                    ThunkKind::Redex,
                    cells,
                    link(regs, *next)?,
                    target(regs, *t)?,
                    handler(regs, *h)?,
                );
                set(regs, *dst, RegValue::Thunk(made))?;
            }
            BuildInstr::MakeHandler {
                catcher,
                next,
                target: t,
                enclosing,
                dst,
            } => {
                let made = Thunk::new(
                    heap,
                    ThunkKind::Handler,
                    vec![cell(regs, *catcher)?],
                    link(regs, *next)?,
                    target(regs, *t)?,
                    handler(regs, *enclosing)?,
                );
                set(regs, *dst, RegValue::Thunk(made))?;
            }
            BuildInstr::ReturnValue(r) => {
                deliver(&inherit.target, value(regs, *r)?, root)?;
                return Ok(inherit.next.clone());
            }
            BuildInstr::ReturnChain { first, .. } => {
                return Ok(Next::Redex(thunk(regs, *first)?));
            }
        }
    }
    Err(GraphFault::BadBuild("build code has no return"))
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Graph(#[from] GraphFault),
}

/// Wires a closed, lifted expression as a chain whose final thunk has the
/// given continuation, target and handler. A value is delivered straight to
/// the target and the continuation is returned.
pub fn wire_term(
    program: &Program,
    heap: &Heap,
    term: &Expr,
    target: Target,
    continuation: Next,
    handler: Option<ThunkRef>,
    root: &mut Option<Node>,
) -> Result<Next, WireError> {
    let code = program.compile_term(term)?;
    let mut regs = vec![RegValue::Empty; code.registers];
    let inherit = Inherit {
        next: continuation,
        target,
        handler,
    };
    Ok(execute_build(heap, &code, &mut regs, &inherit, root)?)
}
