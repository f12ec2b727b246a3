//! Clause compilation.
//!
//! Patterns become a straight sequence of tests and projections; clauses are
//! tried top to bottom with no decision tree. A body that is already a value
//! is built directly. Otherwise its reducible applications become thunks,
//! created outermost first: each thunk is made before the sub-chains that
//! fill its holes, so every thunk knows its next-redex and result target when
//! it is created. Holes are visited left to right and each sub-chain runs
//! before the previous one, which gives right-to-left argument order with
//! the head last.

use std::collections::HashMap;

use super::bytecode::*;
use super::CompileError;
use crate::frontend::{Clause, Expr, Pattern};

/// What the code generator needs to know about each constant.
#[derive(Clone, Debug)]
pub struct ConstInfo {
    pub id: CombId,
    pub data: bool,
    /// Arities of the clauses (a builtin has exactly one).
    pub arities: Vec<usize>,
}

impl ConstInfo {
    /// Whether a bare reference must be rewritten to yield its value.
    pub fn reduces_alone(&self) -> bool {
        !self.data && self.arities.contains(&0)
    }

    /// Whether an application to `n` values is already a reduced value.
    pub fn inert_with(&self, n: usize) -> bool {
        self.data || self.arities.iter().all(|&a| a > n)
    }
}

pub type ConstTable = HashMap<String, ConstInfo>;

struct Emitter<'a> {
    consts: &'a ConstTable,
    context: &'a str,
    registers: u32,
    vars: HashMap<String, Reg>,
    code: Vec<BuildInstr>,
    last: Option<Reg>,
}

impl Emitter<'_> {
    fn fresh(&mut self) -> Reg {
        let r = Reg(self.registers);
        self.registers += 1;
        r
    }

    fn info(&self, name: &str) -> Result<&ConstInfo, CompileError> {
        self.consts.get(name).ok_or_else(|| CompileError::UnknownConstant {
            name: name.to_string(),
            combinator: self.context.to_string(),
        })
    }

    fn is_value(&self, e: &Expr) -> Result<bool, CompileError> {
        Ok(match e {
            Expr::Int(_) | Expr::Text(_) | Expr::Variable(_) => true,
            Expr::Constant(c) => !self.info(c)?.reduces_alone(),
            Expr::Apply(..) => {
                let (head, args) = e.spine();
                let head_inert = match head {
                    Expr::Constant(c) => self.info(c)?.inert_with(args.len()),
                    Expr::Int(_) | Expr::Text(_) => true,
                    _ => false,
                };
                if !head_inert {
                    return Ok(false);
                }
                for a in args {
                    if !self.is_value(a)? {
                        return Ok(false);
                    }
                }
                true
            }
            Expr::Try(..) => false,
            Expr::Abstraction(_) | Expr::BinaryOp(..) => {
                return Err(CompileError::NotLowered {
                    combinator: self.context.to_string(),
                })
            }
        })
    }

    fn load(&mut self, value: Constant) -> Reg {
        let dst = self.fresh();
        self.code.push(BuildInstr::LoadConst { value, dst });
        dst
    }

    fn constant(&mut self, name: &str) -> Result<Reg, CompileError> {
        let id = self.info(name)?.id;
        Ok(self.load(Constant::Comb(id)))
    }

    /// Emits code for an expression known to be a value.
    fn value(&mut self, e: &Expr) -> Result<Reg, CompileError> {
        match e {
            Expr::Int(v) => Ok(self.load(Constant::Int(*v))),
            Expr::Text(t) => Ok(self.load(Constant::Text(t.clone()))),
            Expr::Variable(v) => Ok(self.vars[v]),
            Expr::Constant(c) => self.constant(c),
            Expr::Apply(..) => {
                let (head, args) = e.spine();
                let head = self.value(head)?;
                let args = args
                    .into_iter()
                    .map(|a| self.value(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let dst = self.fresh();
                self.code.push(BuildInstr::MakeCompound { head, args, dst });
                Ok(dst)
            }
            _ => unreachable!("checked by is_value"),
        }
    }

    /// Emits the thunk chain for `e` and returns the register of its first
    /// redex.
    fn chain(
        &mut self,
        e: &Expr,
        next: LinkSpec,
        target: TargetSpec,
        handler: HandlerSpec,
    ) -> Result<Reg, CompileError> {
        if let Expr::Try(body, catch) = e {
            let catcher = if self.is_value(catch)? {
                Operand::Reg(self.value(catch)?)
            } else {
                Operand::Hole
            };
            let dst = self.fresh();
            self.code.push(BuildInstr::MakeHandler {
                catcher,
                next,
                target,
                enclosing: handler,
                dst,
            });
            let first = self.chain(body, next, target, HandlerSpec::Reg(dst))?;
            return match catcher {
                Operand::Hole => self.chain(catch, LinkSpec::Reg(first), TargetSpec::Slot(dst, 0), handler),
                Operand::Reg(_) => Ok(first),
            };
        }

        let (head, args) = e.spine();
        let exprs: Vec<&Expr> = std::iter::once(head).chain(args).collect();
        let mut cells = Vec::with_capacity(exprs.len());
        for (i, cell) in exprs.iter().enumerate() {
            let operand = match cell {
                // A constant in head position is applied, never reduced alone.
                Expr::Constant(c) if i == 0 => Operand::Reg(self.constant(c)?),
                _ if self.is_value(cell)? => Operand::Reg(self.value(cell)?),
                _ => Operand::Hole,
            };
            cells.push(operand);
        }
        let dst = self.fresh();
        self.code.push(BuildInstr::MakeThunk {
            cells: cells.clone(),
            next,
            target,
            handler,
            dst,
        });
        if next == LinkSpec::Inherit {
            self.last = Some(dst);
        }
        let mut first = dst;
        for (i, cell) in exprs.iter().enumerate() {
            if cells[i] == Operand::Hole {
                first = self.chain(cell, LinkSpec::Reg(first), TargetSpec::Slot(dst, i), handler)?;
            }
        }
        Ok(first)
    }
}

fn compile_pattern(
    p: &Pattern,
    reg: Reg,
    consts: &ConstTable,
    code: &mut Vec<MatchInstr>,
    registers: &mut u32,
    vars: &mut HashMap<String, Reg>,
    context: &str,
) -> Result<(), CompileError> {
    let tag = |name: &str| {
        consts.get(name).map(|i| i.id).ok_or_else(|| CompileError::UnknownConstant {
            name: name.to_string(),
            combinator: context.to_string(),
        })
    };
    match p {
        Pattern::Var(_) | Pattern::Wildcard => {}
        Pattern::Int(v) => code.push(MatchInstr::TestLiteral {
            reg,
            value: Literal::Int(*v),
        }),
        Pattern::Text(t) => code.push(MatchInstr::TestLiteral {
            reg,
            value: Literal::Text(t.clone()),
        }),
        Pattern::Tag(t) => code.push(MatchInstr::TestTag {
            reg,
            tag: tag(t)?,
            arity: 0,
        }),
        Pattern::Compound(t, subs) => {
            code.push(MatchInstr::TestTag {
                reg,
                tag: tag(t)?,
                arity: subs.len(),
            });
            for (field, sub) in subs.iter().enumerate() {
                if *sub == Pattern::Wildcard {
                    continue;
                }
                let dst = Reg(*registers);
                *registers += 1;
                code.push(MatchInstr::Project { reg, field, dst });
                if let Pattern::Var(v) = sub {
                    vars.insert(v.clone(), dst);
                }
                compile_pattern(sub, dst, consts, code, registers, vars, context)?;
            }
        }
    }
    Ok(())
}

fn compile_clause(
    clause: &Clause,
    consts: &ConstTable,
    context: &str,
) -> Result<ClauseProgram, CompileError> {
    let mut seen: Vec<&str> = Vec::new();
    let mut names = Vec::new();
    clause.patterns.iter().for_each(|p| p.variables(&mut names));
    for v in names {
        if seen.contains(&v) {
            return Err(CompileError::DuplicateVariable {
                variable: v.to_string(),
                combinator: context.to_string(),
            });
        }
        seen.push(v);
    }

    let mut registers = 0u32;
    let mut vars = HashMap::new();
    let mut match_code = Vec::new();
    for (arg, p) in clause.patterns.iter().enumerate() {
        if *p == Pattern::Wildcard {
            continue;
        }
        let dst = Reg(registers);
        registers += 1;
        match_code.push(MatchInstr::BindArg { arg, dst });
        if let Pattern::Var(v) = p {
            vars.insert(v.clone(), dst);
        }
        compile_pattern(p, dst, consts, &mut match_code, &mut registers, &mut vars, context)?;
    }

    let mut emitter = Emitter {
        consts,
        context,
        registers,
        vars,
        code: Vec::new(),
        last: None,
    };
    if emitter.is_value(&clause.body)? {
        let r = emitter.value(&clause.body)?;
        emitter.code.push(BuildInstr::ReturnValue(r));
    } else {
        let first = emitter.chain(
            &clause.body,
            LinkSpec::Inherit,
            TargetSpec::Inherit,
            HandlerSpec::Inherit,
        )?;
        let last = emitter.last.expect("a chain has a final thunk");
        emitter.code.push(BuildInstr::ReturnChain { first, last });
    }
    Ok(ClauseProgram {
        arity: clause.arity(),
        match_code,
        build_code: emitter.code,
        registers: emitter.registers as usize,
    })
}

/// Compiles the clauses of one abstraction, preserving their order.
pub fn compile_clauses(
    clauses: &[Clause],
    consts: &ConstTable,
    context: &str,
) -> Result<Vec<ClauseProgram>, CompileError> {
    clauses
        .iter()
        .map(|c| compile_clause(c, consts, context))
        .collect()
}
