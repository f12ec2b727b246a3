//! Static checks on a clause program.

use std::collections::HashMap;

use thiserror::Error;

use super::bytecode::*;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{0} used before it is written")]
    Uninitialized(Reg),
    #[error("{0} written twice")]
    Reassigned(Reg),
    #[error("{0} is out of range")]
    OutOfRange(Reg),
    #[error("{reg} holds a {found}, expected a {expected}")]
    WrongKind {
        reg: Reg,
        expected: &'static str,
        found: &'static str,
    },
    #[error("argument {0} is beyond the clause arity")]
    BadArgument(usize),
    #[error("project of field {field} from {reg} without a test-tag covering it")]
    UncheckedProject { reg: Reg, field: usize },
    #[error("target {reg}.{slot} does not address a hole")]
    BadTarget { reg: Reg, slot: usize },
    #[error("hole {reg}.{slot} is filled {count} times")]
    HoleFill { reg: Reg, slot: usize, count: usize },
    #[error("build code must end in exactly one return")]
    Return,
    #[error("thunks do not form a single chain ending in the inherited link")]
    Chain,
}

#[derive(Clone, Debug)]
enum Slot {
    Value,
    /// A thunk (or handler) with one flag per cell: `true` for a hole.
    Thunk { holes: Vec<bool>, handler: bool },
}

impl Slot {
    fn describe(&self) -> &'static str {
        match self {
            Slot::Value => "value",
            Slot::Thunk { handler: true, .. } => "handler",
            Slot::Thunk { .. } => "thunk",
        }
    }
}

struct Checker {
    regs: Vec<Option<Slot>>,
    tested: HashMap<Reg, usize>,
    fills: HashMap<(Reg, usize), usize>,
}

impl Checker {
    fn slot(&self, r: Reg) -> Result<&Slot, VerifyError> {
        self.regs
            .get(r.index())
            .ok_or(VerifyError::OutOfRange(r))?
            .as_ref()
            .ok_or(VerifyError::Uninitialized(r))
    }

    fn write(&mut self, r: Reg, slot: Slot) -> Result<(), VerifyError> {
        let cell = self.regs.get_mut(r.index()).ok_or(VerifyError::OutOfRange(r))?;
        if cell.is_some() {
            return Err(VerifyError::Reassigned(r));
        }
        *cell = Some(slot);
        Ok(())
    }

    fn expect(&self, r: Reg, expected: &'static str) -> Result<(), VerifyError> {
        let found = self.slot(r)?.describe();
        if found != expected {
            return Err(VerifyError::WrongKind {
                reg: r,
                expected,
                found,
            });
        }
        Ok(())
    }

    fn operand(&self, op: Operand) -> Result<bool, VerifyError> {
        match op {
            Operand::Reg(r) => self.expect(r, "value").map(|_| false),
            Operand::Hole => Ok(true),
        }
    }

    /// A handler only captures its target; the thunk ending the guarded
    /// chain is the one that fills it.
    fn links(&mut self, next: LinkSpec, target: TargetSpec, fills: bool) -> Result<(), VerifyError> {
        if let LinkSpec::Reg(r) = next {
            self.expect(r, "thunk")?;
        }
        if let TargetSpec::Slot(r, slot) = target {
            match self.slot(r)? {
                Slot::Thunk { holes, .. } if holes.get(slot) == Some(&true) => {}
                _ => return Err(VerifyError::BadTarget { reg: r, slot }),
            }
            if fills {
                *self.fills.entry((r, slot)).or_default() += 1;
            }
        }
        Ok(())
    }

    fn handler(&self, h: HandlerSpec) -> Result<(), VerifyError> {
        if let HandlerSpec::Reg(r) = h {
            self.expect(r, "handler")?;
        }
        Ok(())
    }
}

/// Checks register initialization, test/project consistency, hole wiring,
/// the single terminating return and chain connectivity.
pub fn verify_clause(program: &ClauseProgram) -> Result<(), VerifyError> {
    let mut c = Checker {
        regs: vec![None; program.registers],
        tested: HashMap::new(),
        fills: HashMap::new(),
    };
    for instr in &program.match_code {
        match instr {
            MatchInstr::BindArg { arg, dst } => {
                if *arg >= program.arity {
                    return Err(VerifyError::BadArgument(*arg));
                }
                c.write(*dst, Slot::Value)?;
            }
            MatchInstr::TestLiteral { reg, .. } => c.expect(*reg, "value")?,
            MatchInstr::TestTag { reg, arity, .. } => {
                c.expect(*reg, "value")?;
                c.tested.insert(*reg, *arity);
            }
            MatchInstr::Project { reg, field, dst } => {
                c.expect(*reg, "value")?;
                if c.tested.get(reg).is_none_or(|&k| *field >= k) {
                    return Err(VerifyError::UncheckedProject {
                        reg: *reg,
                        field: *field,
                    });
                }
                c.write(*dst, Slot::Value)?;
            }
        }
    }

    let (last, body) = program.build_code.split_last().ok_or(VerifyError::Return)?;
    let mut nexts: HashMap<Reg, Option<Reg>> = HashMap::new();
    for instr in body {
        match instr {
            BuildInstr::LoadConst { dst, .. } => c.write(*dst, Slot::Value)?,
            BuildInstr::MakeCompound { head, args, dst } => {
                c.expect(*head, "value")?;
                for a in args {
                    c.expect(*a, "value")?;
                }
                c.write(*dst, Slot::Value)?;
            }
            BuildInstr::MakeThunk {
                cells,
                next,
                target,
                handler,
                dst,
            } => {
                let holes = cells
                    .iter()
                    .map(|op| c.operand(*op))
                    .collect::<Result<Vec<_>, _>>()?;
                c.links(*next, *target, true)?;
                c.handler(*handler)?;
                c.write(*dst, Slot::Thunk { holes, handler: false })?;
                nexts.insert(
                    *dst,
                    match next {
                        LinkSpec::Reg(r) => Some(*r),
                        LinkSpec::Inherit => None,
                    },
                );
            }
            BuildInstr::MakeHandler {
                catcher,
                next,
                target,
                enclosing,
                dst,
            } => {
                let hole = c.operand(*catcher)?;
                c.links(*next, *target, false)?;
                c.handler(*enclosing)?;
                c.write(*dst, Slot::Thunk { holes: vec![hole], handler: true })?;
            }
            BuildInstr::ReturnValue(_) | BuildInstr::ReturnChain { .. } => {
                return Err(VerifyError::Return)
            }
        }
    }

    for (r, slot) in c.regs.iter().enumerate() {
        if let Some(Slot::Thunk { holes, .. }) = slot {
            for (i, hole) in holes.iter().enumerate() {
                let count = c.fills.get(&(Reg(r as u32), i)).copied().unwrap_or(0);
                if *hole && count != 1 {
                    return Err(VerifyError::HoleFill {
                        reg: Reg(r as u32),
                        slot: i,
                        count,
                    });
                }
            }
        }
    }

    match last {
        BuildInstr::ReturnValue(r) => {
            c.expect(*r, "value")?;
            if !nexts.is_empty() {
                return Err(VerifyError::Chain);
            }
        }
        BuildInstr::ReturnChain { first, last } => {
            c.expect(*first, "thunk")?;
            c.expect(*last, "thunk")?;
            let mut seen = 0;
            let mut cur = *first;
            loop {
                seen += 1;
                if seen > nexts.len() {
                    return Err(VerifyError::Chain);
                }
                match nexts[&cur] {
                    Some(n) => cur = n,
                    None => break,
                }
            }
            if cur != *last || seen != nexts.len() {
                return Err(VerifyError::Chain);
            }
        }
        _ => return Err(VerifyError::Return),
    }
    Ok(())
}
