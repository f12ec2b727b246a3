//! Builtin combinator bodies.

use crate::builtins::Builtin;
use crate::graph::{Heap, Node};

pub(crate) enum Effect {
    Value(Node),
    Raise(Node),
    /// Run `f nop` and `g nop` as independent reductions.
    Par(Node, Node),
    Print(Node),
}

/// Combinators the runtime produces values with.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SystemIds {
    pub nop: crate::compile::CombId,
    pub tuple: crate::compile::CombId,
    pub truth: crate::compile::CombId,
    pub falsity: crate::compile::CombId,
}

fn name(b: Builtin) -> &'static str {
    crate::builtins::BUILTINS
        .iter()
        .find(|(_, x)| *x == b)
        .map_or("?", |(n, _)| n)
}

fn fault(heap: &Heap, b: Builtin, message: &str) -> Effect {
    Effect::Raise(heap.text(format!("System::{}: {message}", name(b))))
}

/// Applies a builtin to exactly `b.arity()` reduced arguments.
pub(crate) fn apply(heap: &Heap, ids: SystemIds, b: Builtin, args: &[Node]) -> Effect {
    match b {
        Builtin::Throw => return Effect::Raise(args[0].clone()),
        Builtin::Print => return Effect::Print(args[0].clone()),
        Builtin::Par => return Effect::Par(args[0].clone(), args[1].clone()),
        Builtin::Equal => {
            let id = if Node::structurally_equal(&args[0], &args[1]) {
                ids.truth
            } else {
                ids.falsity
            };
            return Effect::Value(heap.comb(id));
        }
        _ => {}
    }

    let Some(ints) = args.iter().map(Node::as_int).collect::<Option<Vec<_>>>() else {
        return fault(heap, b, "expected integer arguments");
    };
    let boolean = |v: bool| Effect::Value(heap.comb(if v { ids.truth } else { ids.falsity }));
    let checked = |v: Option<i64>| match v {
        Some(v) => Effect::Value(heap.int(v)),
        None => fault(heap, b, "integer overflow"),
    };
    match b {
        Builtin::Inc => checked(ints[0].checked_add(1)),
        Builtin::Add => checked(ints[0].checked_add(ints[1])),
        Builtin::Sub => checked(ints[0].checked_sub(ints[1])),
        Builtin::Mul => checked(ints[0].checked_mul(ints[1])),
        Builtin::Div | Builtin::Mod if ints[1] == 0 => fault(heap, b, "division by zero"),
        Builtin::Div => checked(ints[0].checked_div(ints[1])),
        Builtin::Mod => checked(ints[0].checked_rem(ints[1])),
        Builtin::Less => boolean(ints[0] < ints[1]),
        Builtin::LessEq => boolean(ints[0] <= ints[1]),
        Builtin::Throw | Builtin::Print | Builtin::Par | Builtin::Equal => unreachable!(),
    }
}
