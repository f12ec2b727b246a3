//! Surface syntax tree.

use std::fmt;

use super::lexer::escape_text;

/// A namespace path such as `["Fibonacci"]`; the empty path is the top level.
pub type NamespacePath = Vec<String>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceModule {
    /// Imported file references, as written.
    pub imports: Vec<String>,
    pub declarations: Vec<ScopedDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopedDecl {
    pub namespace: NamespacePath,
    pub decl: Decl,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Data(Vec<String>),
    Def(String, Expr),
    Using(NamespacePath),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Variable(String),
    /// A constant reference. Before resolution this is the name as written
    /// (possibly partially qualified); afterwards it is fully qualified.
    Constant(String),
    Int(i64),
    Text(String),
    Apply(Box<Expr>, Box<Expr>),
    Abstraction(Vec<Clause>),
    BinaryOp(String, Box<Expr>, Box<Expr>),
    /// `try body catch handler`.
    Try(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub patterns: Vec<Pattern>,
    pub body: Expr,
}

impl Clause {
    pub fn arity(&self) -> usize {
        self.patterns.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    Wildcard,
    Int(i64),
    Text(String),
    Tag(String),
    Compound(String, Vec<Pattern>),
}

impl Expr {
    pub fn apply(f: Expr, arg: Expr) -> Expr {
        Expr::Apply(Box::new(f), Box::new(arg))
    }

    pub fn apply_all(f: Expr, args: impl IntoIterator<Item = Expr>) -> Expr {
        args.into_iter().fold(f, Expr::apply)
    }

    /// Splits a left-nested application into its head and arguments.
    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Expr::Apply(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }
}

impl Pattern {
    /// Pattern variables bound by this pattern, in left-to-right order.
    pub fn variables<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Pattern::Var(v) => out.push(v),
            Pattern::Compound(_, subs) => subs.iter().for_each(|p| p.variables(out)),
            _ => {}
        }
    }
}

fn is_operator_name(name: &str) -> bool {
    let last = name.rsplit("::").next().unwrap_or(name);
    last.chars().next().is_some_and(super::lexer::is_operator_char)
}

fn write_int(f: &mut fmt::Formatter<'_>, v: i64, in_operand: bool) -> fmt::Result {
    if v < 0 && in_operand {
        write!(f, "({v})")
    } else {
        write!(f, "{v}")
    }
}

fn write_constant(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_operator_name(name) {
        write!(f, "({name})")
    } else {
        f.write_str(name)
    }
}

impl Expr {
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Variable(v) => f.write_str(v),
            Expr::Constant(c) => write_constant(f, c),
            Expr::Int(v) => write_int(f, *v, true),
            Expr::Text(t) => f.write_str(&escape_text(t)),
            Expr::Abstraction(_) => write!(f, "{self}"),
            _ => write!(f, "({self})"),
        }
    }
}

/// Prints fully parenthesized source text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write_int(f, *v, false),
            Expr::Apply(..) => {
                let (head, args) = self.spine();
                head.fmt_atom(f)?;
                for a in args {
                    f.write_str(" ")?;
                    a.fmt_atom(f)?;
                }
                Ok(())
            }
            Expr::BinaryOp(op, l, r) => {
                l.fmt_atom(f)?;
                write!(f, " {op} ")?;
                r.fmt_atom(f)
            }
            Expr::Abstraction(clauses) => {
                f.write_str("[")?;
                for (i, c) in clauses.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" |")?;
                    }
                    for p in &c.patterns {
                        write!(f, " {p}")?;
                    }
                    write!(f, " -> {} ", c.body)?;
                }
                f.write_str("]")
            }
            Expr::Try(body, handler) => write!(f, "try {body} catch {handler}"),
            other => other.fmt_atom(f),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => f.write_str(v),
            Pattern::Wildcard => f.write_str("_"),
            Pattern::Int(v) => write_int(f, *v, true),
            Pattern::Text(t) => f.write_str(&escape_text(t)),
            Pattern::Tag(t) => write_constant(f, t),
            Pattern::Compound(t, subs) => {
                f.write_str("(")?;
                write_constant(f, t)?;
                for s in subs {
                    write!(f, " {s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Pretty-prints a module as nested namespace blocks.
impl fmt::Display for SurfaceModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for import in &self.imports {
            writeln!(f, "import {}", escape_text(import))?;
        }
        for scoped in &self.declarations {
            let indent = if scoped.namespace.is_empty() { "" } else { "    " };
            if !scoped.namespace.is_empty() {
                writeln!(f, "namespace {} (", scoped.namespace.join("::"))?;
            }
            match &scoped.decl {
                Decl::Data(tags) => writeln!(f, "{indent}data {}", tags.join(", "))?,
                Decl::Def(name, body) => writeln!(f, "{indent}def {name} = {body}")?,
                Decl::Using(path) => writeln!(f, "{indent}using {}", path.join("::"))?,
            }
            if !scoped.namespace.is_empty() {
                writeln!(f, ")")?;
            }
        }
        Ok(())
    }
}
