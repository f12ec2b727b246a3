//! A naive substitution-based reference evaluator.
//!
//! It works directly on the resolved declaration table, so it shares the
//! parser and name resolution with the real pipeline but nothing after:
//! no lifting, no bytecode, no graph. Pattern variables are substituted
//! into clause bodies, and evaluation recurses on the host stack.
//!
//! Evaluation order matches the machine: arguments right to left, the
//! head last, and in `try E catch H` the handler before the body.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use twistvm_core::builtins::Builtin;
use twistvm_core::compile::Program;
use twistvm_core::frontend::{EntryKind, Expr, Pattern, ResolvedTable};
use twistvm_core::graph::{Node, NodeKind};

#[derive(Clone, Debug)]
pub struct RClause {
    pub patterns: Vec<Pattern>,
    pub body: RExpr,
}

#[derive(Clone, Debug)]
pub enum RExpr {
    Var(String),
    Val(RValue),
    Const(String),
    /// Head followed by arguments.
    App(Vec<RExpr>),
    Abs(Rc<Vec<RClause>>),
    Try(Box<RExpr>, Box<RExpr>),
}

#[derive(Clone, Debug)]
pub enum RValue {
    Int(i64),
    Text(String),
    Const(String),
    Abs(Rc<Vec<RClause>>),
    /// A stuck application; the head is never itself an `App`.
    App(Vec<RValue>),
}

impl PartialEq for RValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RValue::Int(a), RValue::Int(b)) => a == b,
            (RValue::Text(a), RValue::Text(b)) => a == b,
            (RValue::Const(a), RValue::Const(b)) => a == b,
            (RValue::Abs(a), RValue::Abs(b)) => Rc::ptr_eq(a, b),
            (RValue::App(a), RValue::App(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for RValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RValue::Int(v) => write!(f, "{v}"),
            RValue::Text(t) => write!(f, "{t:?}"),
            RValue::Const(c) => f.write_str(c),
            RValue::Abs(_) => f.write_str("<abstraction>"),
            RValue::App(items) => {
                f.write_str("(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ROutcome {
    Value(RValue),
    Exception(RValue),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    OutOfFuel,
    Unknown(String),
}

enum Flow {
    Throw(RValue),
    Stop(OracleError),
}

type Eval<T> = Result<T, Flow>;

fn convert(e: &Expr) -> RExpr {
    match e {
        Expr::Variable(v) => RExpr::Var(v.clone()),
        Expr::Constant(c) => RExpr::Const(c.clone()),
        Expr::Int(v) => RExpr::Val(RValue::Int(*v)),
        Expr::Text(t) => RExpr::Val(RValue::Text(t.clone())),
        Expr::Apply(..) => {
            let (head, args) = e.spine();
            RExpr::App(std::iter::once(head).chain(args).map(convert).collect())
        }
        Expr::Abstraction(cs) => RExpr::Abs(Rc::new(
            cs.iter()
                .map(|c| RClause {
                    patterns: c.patterns.clone(),
                    body: convert(&c.body),
                })
                .collect(),
        )),
        Expr::BinaryOp(op, l, r) => RExpr::App(vec![RExpr::Const(op.clone()), convert(l), convert(r)]),
        Expr::Try(b, h) => RExpr::Try(Box::new(convert(b)), Box::new(convert(h))),
    }
}

fn pattern_vars<'a>(ps: &'a [Pattern]) -> Vec<&'a str> {
    let mut out = Vec::new();
    ps.iter().for_each(|p| p.variables(&mut out));
    out
}

fn subst(e: &RExpr, binds: &HashMap<String, RValue>) -> RExpr {
    match e {
        RExpr::Var(v) => binds.get(v).cloned().map_or_else(|| e.clone(), RExpr::Val),
        RExpr::Val(_) | RExpr::Const(_) => e.clone(),
        RExpr::App(items) => RExpr::App(items.iter().map(|i| subst(i, binds)).collect()),
        RExpr::Try(b, h) => RExpr::Try(Box::new(subst(b, binds)), Box::new(subst(h, binds))),
        RExpr::Abs(cs) => RExpr::Abs(Rc::new(
            cs.iter()
                .map(|c| {
                    let shadowed = pattern_vars(&c.patterns);
                    let inner: HashMap<String, RValue> = binds
                        .iter()
                        .filter(|(k, _)| !shadowed.contains(&k.as_str()))
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                    RClause {
                        patterns: c.patterns.clone(),
                        body: subst(&c.body, &inner),
                    }
                })
                .collect(),
        )),
    }
}

enum Kind {
    Data,
    Builtin(Builtin),
    Clauses(Rc<Vec<RClause>>),
}

pub struct Oracle {
    kinds: HashMap<String, Kind>,
    fuel: u64,
    output: Vec<RValue>,
}

fn inert(head: RValue, args: Vec<RValue>) -> RValue {
    if args.is_empty() {
        return head;
    }
    let mut items = match head {
        RValue::App(items) => items,
        h => vec![h],
    };
    items.extend(args);
    RValue::App(items)
}

fn matches(p: &Pattern, v: &RValue, binds: &mut HashMap<String, RValue>) -> bool {
    match (p, v) {
        (Pattern::Var(x), _) => {
            binds.insert(x.clone(), v.clone());
            true
        }
        (Pattern::Wildcard, _) => true,
        (Pattern::Int(a), RValue::Int(b)) => a == b,
        (Pattern::Text(a), RValue::Text(b)) => a == b,
        (Pattern::Tag(t), RValue::Const(c)) => t == c,
        (Pattern::Compound(t, subs), RValue::App(items)) => {
            matches!(&items[0], RValue::Const(c) if c == t)
                && items.len() == subs.len() + 1
                && subs.iter().zip(&items[1..]).all(|(s, v)| matches(s, v, binds))
        }
        _ => false,
    }
}

impl Oracle {
    pub fn new(table: &ResolvedTable, fuel: u64) -> Oracle {
        let kinds = table
            .entries()
            .iter()
            .map(|e| {
                let kind = match &e.kind {
                    EntryKind::Data => Kind::Data,
                    EntryKind::Builtin(b) => Kind::Builtin(*b),
                    EntryKind::Def(Expr::Abstraction(cs)) => Kind::Clauses(Rc::new(
                        cs.iter()
                            .map(|c| RClause {
                                patterns: c.patterns.clone(),
                                body: convert(&c.body),
                            })
                            .collect(),
                    )),
                    EntryKind::Def(body) => Kind::Clauses(Rc::new(vec![RClause {
                        patterns: Vec::new(),
                        body: convert(body),
                    }])),
                };
                (e.name.clone(), kind)
            })
            .collect();
        Oracle {
            kinds,
            fuel,
            output: Vec::new(),
        }
    }

    /// Values passed to `print`, in order.
    pub fn output(&self) -> &[RValue] {
        &self.output
    }

    /// Evaluates the zero-argument definition `name`.
    pub fn run(&mut self, name: &str) -> Result<ROutcome, OracleError> {
        match self.apply(RValue::Const(name.to_string()), Vec::new()) {
            Ok(v) => Ok(ROutcome::Value(v)),
            Err(Flow::Throw(e)) => Ok(ROutcome::Exception(e)),
            Err(Flow::Stop(e)) => Err(e),
        }
    }

    fn burn(&mut self) -> Eval<()> {
        if self.fuel == 0 {
            return Err(Flow::Stop(OracleError::OutOfFuel));
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, e: &RExpr) -> Eval<RValue> {
        match e {
            RExpr::Val(v) => Ok(v.clone()),
            RExpr::Var(v) => Err(Flow::Stop(OracleError::Unknown(format!("free variable {v}")))),
            RExpr::Const(c) => self.apply(RValue::Const(c.clone()), Vec::new()),
            RExpr::Abs(cs) => self.apply(RValue::Abs(cs.clone()), Vec::new()),
            RExpr::App(items) => {
                let mut args = Vec::with_capacity(items.len() - 1);
                for a in items[1..].iter().rev() {
                    args.push(self.eval(a)?);
                }
                args.reverse();
                let head = match &items[0] {
                    RExpr::Const(c) => RValue::Const(c.clone()),
                    RExpr::Abs(cs) => RValue::Abs(cs.clone()),
                    other => self.eval(other)?,
                };
                self.apply(head, args)
            }
            RExpr::Try(body, handler) => {
                let h = self.eval(handler)?;
                match self.eval(body) {
                    Err(Flow::Throw(v)) => self.apply(h, vec![v]),
                    other => other,
                }
            }
        }
    }

    fn apply(&mut self, head: RValue, args: Vec<RValue>) -> Eval<RValue> {
        self.burn()?;
        let (head, args) = match head {
            RValue::App(mut items) => {
                let h = items.remove(0);
                items.extend(args);
                (h, items)
            }
            h => (h, args),
        };
        match &head {
            RValue::Const(c) => match self.kinds.get(c) {
                Some(Kind::Data) => Ok(inert(head, args)),
                Some(Kind::Builtin(b)) => {
                    let b = *b;
                    let k = b.arity();
                    if args.len() < k {
                        return Ok(inert(head, args));
                    }
                    let mut args = args;
                    let surplus = args.split_off(k);
                    let r = self.builtin(b, args)?;
                    self.apply(r, surplus)
                }
                Some(Kind::Clauses(cs)) => {
                    let cs = cs.clone();
                    self.clauses(&cs, head, args)
                }
                None => Err(Flow::Stop(OracleError::Unknown(c.clone()))),
            },
            RValue::Abs(cs) => {
                let cs = cs.clone();
                self.clauses(&cs, head, args)
            }
            _ => Ok(inert(head, args)),
        }
    }

    fn clauses(&mut self, cs: &[RClause], head: RValue, mut args: Vec<RValue>) -> Eval<RValue> {
        for c in cs {
            let k = c.patterns.len();
            if k > args.len() {
                continue;
            }
            let mut binds = HashMap::new();
            if c.patterns.iter().zip(&args).all(|(p, v)| matches(p, v, &mut binds)) {
                let body = subst(&c.body, &binds);
                let surplus = args.split_off(k);
                let r = self.eval(&body)?;
                return self.apply(r, surplus);
            }
        }
        Ok(inert(head, args))
    }

    fn builtin(&mut self, b: Builtin, args: Vec<RValue>) -> Eval<RValue> {
        let name = twistvm_core::builtins::BUILTINS
            .iter()
            .find(|(_, x)| *x == b)
            .map(|(n, _)| *n)
            .unwrap_or("?");
        let fail = |m: &str| Err(Flow::Throw(RValue::Text(format!("System::{name}: {m}"))));
        let boolean = |v: bool| Ok(RValue::Const(format!("System::{}", if v { "true" } else { "false" })));
        match b {
            Builtin::Throw => return Err(Flow::Throw(args[0].clone())),
            Builtin::Print => {
                self.output.push(args[0].clone());
                return Ok(RValue::Const("System::nop".into()));
            }
            Builtin::Equal => return boolean(args[0] == args[1]),
            Builtin::Par => {
                let nop = RValue::Const("System::nop".into());
                let left = self.apply(args[0].clone(), vec![nop.clone()]);
                let right = self.apply(args[1].clone(), vec![nop]);
                let (l, r) = (left?, right?);
                return Ok(RValue::App(vec![RValue::Const("System::tuple".into()), l, r]));
            }
            _ => {}
        }
        let mut ints = Vec::new();
        for a in &args {
            match a {
                RValue::Int(v) => ints.push(*v),
                _ => return fail("expected integer arguments"),
            }
        }
        let int = |v: Option<i64>| v.map(RValue::Int).map_or_else(|| fail("integer overflow"), Ok);
        match b {
            Builtin::Inc => int(ints[0].checked_add(1)),
            Builtin::Add => int(ints[0].checked_add(ints[1])),
            Builtin::Sub => int(ints[0].checked_sub(ints[1])),
            Builtin::Mul => int(ints[0].checked_mul(ints[1])),
            Builtin::Div | Builtin::Mod if ints[1] == 0 => fail("division by zero"),
            Builtin::Div => int(ints[0].checked_div(ints[1])),
            Builtin::Mod => int(ints[0].checked_rem(ints[1])),
            Builtin::Less => boolean(ints[0] < ints[1]),
            Builtin::LessEq => boolean(ints[0] <= ints[1]),
            _ => unreachable!(),
        }
    }
}

/// Converts a machine value into the oracle's form, naming combinators by
/// their qualified names.
pub fn from_node(program: &Program, node: &Node) -> RValue {
    match node.kind() {
        NodeKind::Int(v) => RValue::Int(*v),
        NodeKind::Text(t) => RValue::Text(t.clone()),
        NodeKind::Comb(c) => RValue::Const(program.get(*c).name.clone()),
        NodeKind::Compound(items) => RValue::App(items.iter().map(|n| from_node(program, n)).collect()),
    }
}
