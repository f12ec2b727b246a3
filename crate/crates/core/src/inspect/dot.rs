//! DOT snapshots in three styles.
//!
//! `standard` draws the pending term as a binary tree of `@` application
//! nodes. `thunked` draws each thunk as one record of cells, with holes
//! pointing at the thunk that will fill them. `twisted` adds the control
//! links in front of the cells: next-redex edges solid, result-target edges
//! dashed, handler edges dotted, and `*` marking the root.
//!
//! Vertices are emitted in creation order, so identical states give
//! identical text.

use std::collections::HashMap;
use std::fmt::Write;

use super::{GraphView, Vertex};
use crate::compile::Program;
use crate::frontend::lexer::escape_text;
use crate::graph::{RewriteState, ThunkKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DotStyle {
    Standard,
    Thunked,
    Twisted,
}

impl DotStyle {
    pub fn name(self) -> &'static str {
        match self {
            DotStyle::Standard => "standard",
            DotStyle::Thunked => "thunked",
            DotStyle::Twisted => "twisted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DotSnapshot {
    pub style: DotStyle,
    pub step: u64,
    pub text: String,
}

const HOLE: &str = "◦";
const LINK: &str = "•";

fn escape_record(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, '{' | '}' | '|' | '<' | '>' | '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn escape_quoted(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Label of an atom vertex, or `None` for thunks and compounds.
fn atom(program: &Program, v: &Vertex) -> Option<String> {
    match v {
        Vertex::Int(i) => Some(i.to_string()),
        Vertex::Text(t) => Some(escape_text(t)),
        Vertex::Comb(c) => Some(program.display_name(*c).to_string()),
        _ => None,
    }
}

pub fn emit_dot(state: &RewriteState, program: &Program, style: DotStyle) -> DotSnapshot {
    let view = GraphView::snapshot(state);
    let text = match style {
        DotStyle::Standard => standard(&view, program),
        DotStyle::Thunked => records(&view, program, false),
        DotStyle::Twisted => records(&view, program, true),
    };
    DotSnapshot {
        style,
        step: state.steps(),
        text,
    }
}

fn name(view: &GraphView, id: u64) -> String {
    match view.vertices.get(&id) {
        Some(Vertex::Thunk { .. }) => format!("t{id}"),
        _ => format!("n{id}"),
    }
}

/// For each hole, the thunk whose result fills it.
fn writers(view: &GraphView) -> HashMap<(u64, usize), u64> {
    let mut map = HashMap::new();
    for (&id, v) in &view.vertices {
        if let Vertex::Thunk {
            target: Some(slot), ..
        } = v
        {
            map.entry(*slot).or_insert(id);
        }
    }
    map
}

/// The thunk delivering to the root slot, if any.
fn top_thunk(view: &GraphView) -> Option<u64> {
    view.vertices.iter().find_map(|(&id, v)| match v {
        Vertex::Thunk {
            kind: ThunkKind::Redex,
            target: None,
            ..
        } => Some(id),
        _ => None,
    })
}

fn records(view: &GraphView, program: &Program, twisted: bool) -> String {
    let style = if twisted { "twisted" } else { "thunked" };
    let mut out = format!("digraph {style} {{\n  node [shape=record];\n  root [shape=plaintext, label=\"*\"];\n");
    let mut edges = String::new();
    let writers = writers(view);
    let mut uses_sink = false;

    let root_edge = if twisted { view.root.or(view.result) } else { top_thunk(view).or(view.result) };
    if let Some(r) = root_edge {
        writeln!(edges, "  root -> {};", name(view, r)).unwrap();
    }

    for (&id, v) in &view.vertices {
        match v {
            Vertex::Thunk {
                kind,
                next,
                target,
                handler,
                cells,
            } => {
                let mut fields = Vec::new();
                if twisted {
                    fields.push(format!("<next> {LINK}"));
                    fields.push(format!("<target> {LINK}"));
                    fields.push(format!("<handler> {}", if handler.is_some() { LINK } else { "" }));
                }
                if *kind == ThunkKind::Handler {
                    fields.push("try".into());
                }
                for (i, c) in cells.iter().enumerate() {
                    let label = match c.and_then(|c| view.vertices.get(&c)) {
                        None => HOLE.to_string(),
                        Some(v) => atom(program, v).map_or(String::new(), |a| escape_record(&a)),
                    };
                    fields.push(format!("<c{i}> {label}"));
                    match c {
                        Some(c) if atom(program, &view.vertices[c]).is_none() => {
                            writeln!(edges, "  t{id}:c{i} -> {};", name(view, *c)).unwrap();
                        }
                        None if !twisted => {
                            if let Some(w) = writers.get(&(id, i)) {
                                writeln!(edges, "  t{id}:c{i} -> t{w};").unwrap();
                            }
                        }
                        _ => {}
                    }
                }
                writeln!(out, "  t{id} [label=\"{}\"];", fields.join("|")).unwrap();
                if twisted {
                    match next {
                        Some(n) => writeln!(edges, "  t{id}:next -> t{n};").unwrap(),
                        None => {
                            uses_sink = true;
                            writeln!(edges, "  t{id}:next -> sink;").unwrap();
                        }
                    }
                    match target {
                        Some((t, slot)) => writeln!(edges, "  t{id}:target -> t{t}:c{slot} [style=dashed];").unwrap(),
                        None => writeln!(edges, "  t{id}:target -> root [style=dashed];").unwrap(),
                    }
                    if let Some(h) = handler {
                        writeln!(edges, "  t{id}:handler -> t{h} [style=dotted];").unwrap();
                    }
                }
            }
            Vertex::Compound(items) => {
                let mut fields = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    match atom(program, &view.vertices[item]) {
                        Some(a) => fields.push(format!("<f{i}> {}", escape_record(&a))),
                        None => {
                            fields.push(format!("<f{i}> "));
                            writeln!(edges, "  n{id}:f{i} -> n{item};").unwrap();
                        }
                    }
                }
                writeln!(out, "  n{id} [label=\"{}\"];", fields.join("|")).unwrap();
            }
            atomic if view.result == Some(id) => {
                let a = atom(program, atomic).unwrap_or_default();
                writeln!(out, "  n{id} [label=\"{}\"];", escape_record(&a)).unwrap();
            }
            _ => {}
        }
    }
    if uses_sink {
        out.push_str("  sink [shape=plaintext, label=\"sink\"];\n");
    }
    out.push_str(&edges);
    out.push_str("}\n");
    out
}

enum Term {
    Vertex(u64),
    Hole,
}

fn standard(view: &GraphView, program: &Program) -> String {
    let mut out = String::from("digraph standard {\n  node [shape=plaintext];\n  root [label=\"*\"];\n");
    let mut edges = String::new();
    let writers = writers(view);
    let mut counter = 0usize;
    let mut fresh = |out: &mut String, label: &str| {
        let v = format!("a{counter}");
        counter += 1;
        writeln!(out, "  {v} [label=\"{}\"];", escape_quoted(label)).unwrap();
        v
    };

    let Some(top) = top_thunk(view).or(view.result) else {
        out.push_str("}\n");
        return out;
    };
    let mut work = vec![(Term::Vertex(top), "root".to_string())];
    while let Some((term, parent)) = work.pop() {
        let items: Vec<Term> = match term {
            Term::Hole => {
                let v = fresh(&mut out, HOLE);
                writeln!(edges, "  {parent} -> {v};").unwrap();
                continue;
            }
            Term::Vertex(id) => match &view.vertices[&id] {
                Vertex::Thunk { cells, .. } => cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| match c {
                        Some(c) => Term::Vertex(*c),
                        None => writers.get(&(id, i)).map_or(Term::Hole, |w| Term::Vertex(*w)),
                    })
                    .collect(),
                Vertex::Compound(items) => items.iter().map(|i| Term::Vertex(*i)).collect(),
                leaf => {
                    let v = fresh(&mut out, &atom(program, leaf).unwrap_or_default());
                    writeln!(edges, "  {parent} -> {v};").unwrap();
                    continue;
                }
            },
        };
        // items x0 .. xn become n left-nested applications.
        let mut parent = parent;
        let mut items = items;
        while items.len() > 1 {
            let app = fresh(&mut out, "@");
            writeln!(edges, "  {parent} -> {app};").unwrap();
            let last = items.pop().expect("two or more items");
            work.push((last, app.clone()));
            parent = app;
        }
        if let Some(head) = items.pop() {
            work.push((head, parent));
        }
    }
    out.push_str(&edges);
    out.push_str("}\n");
    out
}
