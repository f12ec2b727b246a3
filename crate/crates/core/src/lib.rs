//! An interpreter for an untyped eager combinator language.
//!
//! Scripts are compiled to combinators whose clauses are small bytecode
//! programs. At run time every pending application is a [`graph::Thunk`]
//! that carries, in front of its cells, a link to the redex to rewrite next
//! and a link to the cell that receives its result. Reduction is a flat loop
//! over the root redex; there is no evaluation stack and no tracing
//! collector, because the graph stays acyclic and reference counts suffice.

pub mod builtins;
pub mod compile;
pub mod engine;
pub mod frontend;
pub mod graph;
pub mod inspect;
pub mod render;
