//! Host-implemented combinators and data tags of the `System` namespace.

pub const SYSTEM: &str = "System";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Add,
    Sub,
    Mul,
    Inc,
    Div,
    Mod,
    Less,
    LessEq,
    Equal,
    Print,
    Throw,
    Par,
}

impl Builtin {
    pub fn arity(self) -> usize {
        match self {
            Builtin::Inc | Builtin::Print | Builtin::Throw => 1,
            _ => 2,
        }
    }
}

/// Builtin combinators by unqualified name. `mul` and `*` are aliases.
pub const BUILTINS: &[(&str, Builtin)] = &[
    ("+", Builtin::Add),
    ("-", Builtin::Sub),
    ("*", Builtin::Mul),
    ("mul", Builtin::Mul),
    ("inc", Builtin::Inc),
    ("div", Builtin::Div),
    ("mod", Builtin::Mod),
    ("<", Builtin::Less),
    ("<=", Builtin::LessEq),
    ("==", Builtin::Equal),
    ("print", Builtin::Print),
    ("throw", Builtin::Throw),
    ("par", Builtin::Par),
];

/// Data tags the runtime itself produces.
pub const SYSTEM_TAGS: &[&str] = &["nop", "tuple", "true", "false"];

pub fn qualified(name: &str) -> String {
    format!("{SYSTEM}::{name}")
}
