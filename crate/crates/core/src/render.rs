//! Textual rendering of reduced values.
//!
//! Compounds print as parenthesized juxtaposition, combinators by their
//! shortest unambiguous name, text quoted: `(cons 1 (cons "a" nil))`.

use crate::compile::Program;
use crate::frontend::lexer::escape_text;
use crate::graph::{Node, NodeKind};

enum Item<'a> {
    Node(&'a Node),
    Str(&'static str),
}

pub fn render(program: &Program, node: &Node) -> String {
    let mut out = String::new();
    let mut work = vec![Item::Node(node)];
    while let Some(item) = work.pop() {
        let node = match item {
            Item::Str(s) => {
                out.push_str(s);
                continue;
            }
            Item::Node(n) => n,
        };
        match node.kind() {
            NodeKind::Int(v) => out.push_str(&v.to_string()),
            NodeKind::Text(t) => out.push_str(&escape_text(t)),
            NodeKind::Comb(c) => out.push_str(program.display_name(*c)),
            NodeKind::Compound(items) => {
                out.push('(');
                work.push(Item::Str(")"));
                for (i, child) in items.iter().enumerate().rev() {
                    work.push(Item::Node(child));
                    if i > 0 {
                        work.push(Item::Str(" "));
                    }
                }
            }
        }
    }
    out
}

/// What `print` writes: text as is, anything else rendered.
pub fn display(program: &Program, node: &Node) -> String {
    match node.kind() {
        NodeKind::Text(t) => t.clone(),
        _ => render(program, node),
    }
}
