//! Text listings of compiled combinators, and the reverse.
//!
//! ```text
//! combinator Fibonacci::fib (defined, 3 clauses)
//!   clause 0 (arity 1, registers 2)
//!     match
//!       bind-arg 0 r0
//!       test-literal r0 0
//!     build
//!       load-const 1 r1
//!       return-value r1
//! ```

use std::fmt::Write;

use thiserror::Error;

use super::bytecode::*;
use super::Program;
use crate::builtins::{Builtin, BUILTINS};
use crate::frontend::lexer::{escape_text, unescape_text};

fn name_of(program: &Program, id: CombId) -> &str {
    &program.get(id).name
}

fn operand(op: &Operand) -> String {
    match op {
        Operand::Reg(r) => r.to_string(),
        Operand::Hole => "_".into(),
    }
}

fn link(l: &LinkSpec) -> String {
    match l {
        LinkSpec::Reg(r) => r.to_string(),
        LinkSpec::Inherit => "inherit".into(),
    }
}

fn target(t: &TargetSpec) -> String {
    match t {
        TargetSpec::Slot(r, i) => format!("{r}.{i}"),
        TargetSpec::Inherit => "inherit".into(),
    }
}

fn handler(h: &HandlerSpec) -> String {
    match h {
        HandlerSpec::Reg(r) => r.to_string(),
        HandlerSpec::Inherit => "inherit".into(),
    }
}

fn regs(rs: &[Reg]) -> String {
    let inner: Vec<String> = rs.iter().map(Reg::to_string).collect();
    format!("[{}]", inner.join(" "))
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(v) => v.to_string(),
        Literal::Text(t) => escape_text(t),
    }
}

fn write_clause(out: &mut String, program: &Program, index: usize, clause: &ClauseProgram) {
    let _ = writeln!(
        out,
        "  clause {index} (arity {}, registers {})",
        clause.arity, clause.registers
    );
    out.push_str("    match\n");
    for instr in &clause.match_code {
        let line = match instr {
            MatchInstr::BindArg { arg, dst } => format!("bind-arg {arg} {dst}"),
            MatchInstr::TestLiteral { reg, value } => format!("test-literal {reg} {}", literal(value)),
            MatchInstr::TestTag { reg, tag, arity } => {
                format!("test-tag {reg} {} {arity}", name_of(program, *tag))
            }
            MatchInstr::Project { reg, field, dst } => format!("project {reg} {field} {dst}"),
        };
        let _ = writeln!(out, "      {line}");
    }
    out.push_str("    build\n");
    for instr in &clause.build_code {
        let line = match instr {
            BuildInstr::LoadConst { value, dst } => {
                let v = match value {
                    Constant::Int(v) => v.to_string(),
                    Constant::Text(t) => escape_text(t),
                    Constant::Comb(id) => name_of(program, *id).to_string(),
                };
                format!("load-const {v} {dst}")
            }
            BuildInstr::MakeCompound { head, args, dst } => {
                format!("make-compound {head} {} {dst}", regs(args))
            }
            BuildInstr::MakeThunk {
                cells,
                next,
                target: t,
                handler: h,
                dst,
            } => {
                let cells: Vec<String> = cells.iter().map(operand).collect();
                format!(
                    "make-thunk [{}] next={} target={} handler={} {dst}",
                    cells.join(" "),
                    link(next),
                    target(t),
                    handler(h)
                )
            }
            BuildInstr::MakeHandler {
                catcher,
                next,
                target: t,
                enclosing,
                dst,
            } => format!(
                "make-handler catcher={} next={} target={} enclosing={} {dst}",
                operand(catcher),
                link(next),
                target(t),
                handler(enclosing)
            ),
            BuildInstr::ReturnValue(r) => format!("return-value {r}"),
            BuildInstr::ReturnChain { first, last } => format!("return-chain {first} {last}"),
        };
        let _ = writeln!(out, "      {line}");
    }
}

/// Listing of one combinator.
pub fn disassemble(program: &Program, id: CombId) -> String {
    let comb = program.get(id);
    let mut out = String::new();
    match &comb.kind {
        CombKind::DataTag => {
            let _ = writeln!(out, "combinator {} (data-tag, 0 clauses)", comb.name);
        }
        CombKind::Builtin(_) => {
            let _ = writeln!(out, "combinator {} (builtin)", comb.name);
        }
        CombKind::Defined(clauses) => {
            let plural = if clauses.len() == 1 { "" } else { "s" };
            let _ = writeln!(
                out,
                "combinator {} (defined, {} clause{plural})",
                comb.name,
                clauses.len()
            );
            for (i, c) in clauses.iter().enumerate() {
                write_clause(&mut out, program, i, c);
            }
        }
    }
    out
}

/// Listing of every combinator, in table order.
pub fn disassemble_program(program: &Program) -> String {
    (0..program.combinators().len())
        .map(|i| disassemble(program, CombId(i as u32)))
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct AssembleError {
    pub line: usize,
    pub message: String,
}

/// One combinator read back from a listing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Listing {
    pub name: String,
    pub kind: CombKind,
}

/// Splits a listing line into words, keeping quoted text together.
fn words(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = line.trim().chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut word = String::new();
        if c == '"' {
            word.push(chars.next().unwrap());
            while let Some(c) = chars.next() {
                word.push(c);
                if c == '\\' {
                    word.extend(chars.next());
                } else if c == '"' {
                    break;
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                word.push(c);
                chars.next();
            }
        }
        out.push(word);
    }
    out
}

struct Asm<'a> {
    line: usize,
    lookup: &'a dyn Fn(&str) -> Option<CombId>,
}

impl Asm<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, AssembleError> {
        Err(AssembleError {
            line: self.line,
            message: message.into(),
        })
    }

    fn reg(&self, w: &str) -> Result<Reg, AssembleError> {
        match w.strip_prefix('r').and_then(|n| n.parse().ok()) {
            Some(n) => Ok(Reg(n)),
            None => self.err(format!("expected a register, found {w:?}")),
        }
    }

    fn num(&self, w: &str) -> Result<usize, AssembleError> {
        w.parse()
            .or_else(|_| self.err(format!("expected a number, found {w:?}")))
    }

    fn literal(&self, w: &str) -> Result<Literal, AssembleError> {
        if w.starts_with('"') {
            Ok(Literal::Text(unescape_text(w)))
        } else {
            w.parse()
                .map(Literal::Int)
                .or_else(|_| self.err(format!("expected a literal, found {w:?}")))
        }
    }

    fn comb(&self, w: &str) -> Result<CombId, AssembleError> {
        match (self.lookup)(w) {
            Some(id) => Ok(id),
            None => self.err(format!("unknown combinator {w}")),
        }
    }

    fn keyed<'w>(&self, w: &'w str, key: &str) -> Result<&'w str, AssembleError> {
        match w.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
            Some(v) => Ok(v),
            None => self.err(format!("expected {key}=..., found {w:?}")),
        }
    }

    fn operand(&self, w: &str) -> Result<Operand, AssembleError> {
        if w == "_" {
            Ok(Operand::Hole)
        } else {
            self.reg(w).map(Operand::Reg)
        }
    }

    fn link(&self, w: &str) -> Result<LinkSpec, AssembleError> {
        if w == "inherit" {
            Ok(LinkSpec::Inherit)
        } else {
            self.reg(w).map(LinkSpec::Reg)
        }
    }

    fn target(&self, w: &str) -> Result<TargetSpec, AssembleError> {
        if w == "inherit" {
            return Ok(TargetSpec::Inherit);
        }
        match w.split_once('.') {
            Some((r, i)) => Ok(TargetSpec::Slot(self.reg(r)?, self.num(i)?)),
            None => self.err(format!("expected a target, found {w:?}")),
        }
    }

    fn handler(&self, w: &str) -> Result<HandlerSpec, AssembleError> {
        if w == "inherit" {
            Ok(HandlerSpec::Inherit)
        } else {
            self.reg(w).map(HandlerSpec::Reg)
        }
    }

    /// Reads a bracketed register/operand list starting at `words[at]`;
    /// returns the items and the index after the closing bracket.
    fn bracketed(&self, ws: &[String], at: usize) -> Result<(Vec<String>, usize), AssembleError> {
        let joined: Vec<&str> = ws[at..].iter().map(String::as_str).collect();
        let Some(end) = joined.iter().position(|w| w.ends_with(']')) else {
            return self.err("unterminated bracket list");
        };
        let text = joined[..=end].join(" ");
        let inner = text
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .map(str::to_string);
        match inner {
            Some(inner) => Ok((
                inner.split_whitespace().map(str::to_string).collect(),
                at + end + 1,
            )),
            None => self.err("malformed bracket list"),
        }
    }

    fn match_instr(&self, ws: &[String]) -> Result<MatchInstr, AssembleError> {
        let arg = |i: usize| ws.get(i).map(String::as_str).unwrap_or("");
        Ok(match arg(0) {
            "bind-arg" => MatchInstr::BindArg {
                arg: self.num(arg(1))?,
                dst: self.reg(arg(2))?,
            },
            "test-literal" => MatchInstr::TestLiteral {
                reg: self.reg(arg(1))?,
                value: self.literal(arg(2))?,
            },
            "test-tag" => MatchInstr::TestTag {
                reg: self.reg(arg(1))?,
                tag: self.comb(arg(2))?,
                arity: self.num(arg(3))?,
            },
            "project" => MatchInstr::Project {
                reg: self.reg(arg(1))?,
                field: self.num(arg(2))?,
                dst: self.reg(arg(3))?,
            },
            other => return self.err(format!("unknown match instruction {other:?}")),
        })
    }

    fn build_instr(&self, ws: &[String]) -> Result<BuildInstr, AssembleError> {
        let arg = |i: usize| ws.get(i).map(String::as_str).unwrap_or("");
        Ok(match arg(0) {
            "load-const" => {
                let v = arg(1);
                let value = if v.starts_with('"') {
                    Constant::Text(unescape_text(v))
                } else if let Ok(n) = v.parse() {
                    Constant::Int(n)
                } else {
                    Constant::Comb(self.comb(v)?)
                };
                BuildInstr::LoadConst {
                    value,
                    dst: self.reg(arg(2))?,
                }
            }
            "make-compound" => {
                let head = self.reg(arg(1))?;
                let (items, at) = self.bracketed(ws, 2)?;
                BuildInstr::MakeCompound {
                    head,
                    args: items.iter().map(|w| self.reg(w)).collect::<Result<_, _>>()?,
                    dst: self.reg(arg(at))?,
                }
            }
            "make-thunk" => {
                let (items, at) = self.bracketed(ws, 1)?;
                BuildInstr::MakeThunk {
                    cells: items.iter().map(|w| self.operand(w)).collect::<Result<_, _>>()?,
                    next: self.link(self.keyed(arg(at), "next")?)?,
                    target: self.target(self.keyed(arg(at + 1), "target")?)?,
                    handler: self.handler(self.keyed(arg(at + 2), "handler")?)?,
                    dst: self.reg(arg(at + 3))?,
                }
            }
            "make-handler" => BuildInstr::MakeHandler {
                catcher: self.operand(self.keyed(arg(1), "catcher")?)?,
                next: self.link(self.keyed(arg(2), "next")?)?,
                target: self.target(self.keyed(arg(3), "target")?)?,
                enclosing: self.handler(self.keyed(arg(4), "enclosing")?)?,
                dst: self.reg(arg(5))?,
            },
            "return-value" => BuildInstr::ReturnValue(self.reg(arg(1))?),
            "return-chain" => BuildInstr::ReturnChain {
                first: self.reg(arg(1))?,
                last: self.reg(arg(2))?,
            },
            other => return self.err(format!("unknown build instruction {other:?}")),
        })
    }
}

fn builtin_named(name: &str) -> Option<Builtin> {
    let short = name.strip_prefix("System::")?;
    BUILTINS.iter().find(|(n, _)| *n == short).map(|&(_, b)| b)
}

/// Reads a listing produced by [`disassemble`] back into combinators.
/// Constant names are mapped to ids through `lookup`.
pub fn assemble(
    text: &str,
    lookup: &dyn Fn(&str) -> Option<CombId>,
) -> Result<Vec<Listing>, AssembleError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Match,
        Build,
    }
    let mut asm = Asm { line: 0, lookup };
    let mut out: Vec<Listing> = Vec::new();
    let mut section = Section::None;
    for (n, raw) in text.lines().enumerate() {
        asm.line = n + 1;
        let ws = words(raw);
        let Some(first) = ws.first() else { continue };
        match first.as_str() {
            "combinator" => {
                let name = ws.get(1).cloned().unwrap_or_default();
                let kind = match ws.get(2).map(String::as_str) {
                    Some("(data-tag,") => CombKind::DataTag,
                    Some("(builtin)") => match builtin_named(&name) {
                        Some(b) => CombKind::Builtin(b),
                        None => return asm.err(format!("unknown builtin {name}")),
                    },
                    Some("(defined,") => CombKind::Defined(Vec::new()),
                    _ => return asm.err("malformed combinator header"),
                };
                out.push(Listing { name, kind });
                section = Section::None;
            }
            "clause" => {
                let arity = ws.get(3).map(|w| w.trim_end_matches(','));
                let registers = ws.get(5).map(|w| w.trim_end_matches(')'));
                let (Some(arity), Some(registers)) = (arity, registers) else {
                    return asm.err("malformed clause header");
                };
                let clause = ClauseProgram {
                    arity: asm.num(arity)?,
                    registers: asm.num(registers)?,
                    match_code: Vec::new(),
                    build_code: Vec::new(),
                };
                match out.last_mut().map(|l| &mut l.kind) {
                    Some(CombKind::Defined(cs)) => cs.push(clause),
                    _ => return asm.err("clause outside a defined combinator"),
                }
                section = Section::None;
            }
            "match" => section = Section::Match,
            "build" => section = Section::Build,
            _ => {
                let Some(CombKind::Defined(cs)) = out.last_mut().map(|l| &mut l.kind) else {
                    return asm.err("instruction outside a clause");
                };
                let Some(clause) = cs.last_mut() else {
                    return asm.err("instruction outside a clause");
                };
                match section {
                    Section::Match => clause.match_code.push(asm.match_instr(&ws)?),
                    Section::Build => clause.build_code.push(asm.build_instr(&ws)?),
                    Section::None => return asm.err("instruction before match/build"),
                }
            }
        }
    }
    Ok(out)
}
