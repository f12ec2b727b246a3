//! Invariant checking and DOT snapshots of a paused reduction.

mod dot;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::compile::CombId;
use crate::graph::{Next, Node, NodeKind, RewriteState, Target, ThunkKind, ThunkRef};

pub use dot::{emit_dot, DotSnapshot, DotStyle};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Vertex {
    Thunk {
        kind: ThunkKind,
        next: Option<u64>,
        /// `None` for the root slot.
        target: Option<(u64, usize)>,
        handler: Option<u64>,
        /// `None` for a hole.
        cells: Vec<Option<u64>>,
    },
    Int(i64),
    Text(String),
    Comb(CombId),
    Compound(Vec<u64>),
}

impl Vertex {
    pub fn is_thunk(&self) -> bool {
        matches!(self, Vertex::Thunk { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    Next,
    Target(usize),
    Handler,
    Cell(usize),
    Field(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: u64,
    pub to: u64,
    pub kind: EdgeKind,
}

/// A read-only copy of everything reachable from the root and the root
/// slot, keyed by creation index.
#[derive(Clone, Debug, Default)]
pub struct GraphView {
    pub root: Option<u64>,
    pub result: Option<u64>,
    pub vertices: BTreeMap<u64, Vertex>,
}

enum Pending {
    Thunk(ThunkRef),
    Node(Node),
}

impl GraphView {
    pub fn snapshot(state: &RewriteState) -> GraphView {
        let mut view = GraphView::default();
        let mut work = Vec::new();
        if let Next::Redex(t) = state.root() {
            view.root = Some(t.id());
            work.push(Pending::Thunk(t.clone()));
        }
        if let Some(n) = state.result() {
            view.result = Some(n.id());
            work.push(Pending::Node(n.clone()));
        }
        let mut seen = HashSet::new();
        while let Some(item) = work.pop() {
            match item {
                Pending::Thunk(t) => {
                    if !seen.insert(t.id()) {
                        continue;
                    }
                    let next = t.next().thunk().cloned();
                    let target = match t.target() {
                        Target::Slot(s, i) => Some((s.clone(), *i)),
                        Target::Root => None,
                    };
                    let handler = t.handler().cloned();
                    let cells: Vec<Option<Node>> = t.cells().iter().map(|c| c.node().cloned()).collect();
                    view.vertices.insert(
                        t.id(),
                        Vertex::Thunk {
                            kind: t.kind(),
                            next: next.as_ref().map(|n| n.id()),
                            target: target.as_ref().map(|(s, i)| (s.id(), *i)),
                            handler: handler.as_ref().map(|h| h.id()),
                            cells: cells.iter().map(|c| c.as_ref().map(Node::id)).collect(),
                        },
                    );
                    work.extend(next.map(Pending::Thunk));
                    work.extend(target.map(|(s, _)| Pending::Thunk(s)));
                    work.extend(handler.map(Pending::Thunk));
                    work.extend(cells.into_iter().flatten().map(Pending::Node));
                }
                Pending::Node(n) => {
                    if !seen.insert(n.id()) {
                        continue;
                    }
                    let vertex = match n.kind() {
                        NodeKind::Int(v) => Vertex::Int(*v),
                        NodeKind::Text(t) => Vertex::Text(t.clone()),
                        NodeKind::Comb(c) => Vertex::Comb(*c),
                        NodeKind::Compound(items) => {
                            work.extend(items.iter().cloned().map(Pending::Node));
                            Vertex::Compound(items.iter().map(Node::id).collect())
                        }
                    };
                    view.vertices.insert(n.id(), vertex);
                }
            }
        }
        view
    }

    /// All edges in a deterministic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut edges = Vec::new();
        for (&from, v) in &self.vertices {
            let mut push = |to, kind| edges.push(Edge { from, to, kind });
            match v {
                Vertex::Thunk {
                    next,
                    target,
                    handler,
                    cells,
                    ..
                } => {
                    if let Some(n) = next {
                        push(*n, EdgeKind::Next);
                    }
                    if let Some((t, i)) = target {
                        push(*t, EdgeKind::Target(*i));
                    }
                    if let Some(h) = handler {
                        push(*h, EdgeKind::Handler);
                    }
                    for (i, c) in cells.iter().enumerate() {
                        if let Some(c) = c {
                            push(*c, EdgeKind::Cell(i));
                        }
                    }
                }
                Vertex::Compound(items) => {
                    for (i, c) in items.iter().enumerate() {
                        push(*c, EdgeKind::Field(i));
                    }
                }
                _ => {}
            }
        }
        edges
    }

    pub fn thunk_count(&self) -> usize {
        self.vertices.values().filter(|v| v.is_thunk()).count()
    }

    /// Thunks on the next-redex path from the root, in order. Stops at the
    /// first repeated thunk.
    pub fn chain(&self) -> Vec<u64> {
        let mut chain = Vec::new();
        let mut seen = HashSet::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            if !seen.insert(id) {
                break;
            }
            chain.push(id);
            cur = match self.vertices.get(&id) {
                Some(Vertex::Thunk { next, .. }) => *next,
                _ => None,
            };
        }
        chain
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Acyclic,
    ChainLinear,
    ReducedPure,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Acyclic => "acyclic",
            Rule::ChainLinear => "chain-linear",
            Rule::ReducedPure => "reduced-pure",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: u64,
    pub rule: Rule,
    pub description: String,
}

#[derive(Clone, Debug)]
pub struct GraphReport {
    pub acyclic: bool,
    pub chain_linear: bool,
    pub reduced_pure: bool,
    pub violations: Vec<Violation>,
    pub node_count: usize,
    pub edge_count: usize,
    pub thunk_count: usize,
    /// Values linked from more than one cell or field. Zero means the
    /// reduced parts form trees; sharing is allowed, so this is
    /// informational only.
    pub shared: usize,
}

impl GraphReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_tree(&self) -> bool {
        self.shared == 0
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| format!("[{}] {}: {}", v.rule, v.node, v.description))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn find_cycles(view: &GraphView, edges: &[Edge], violations: &mut Vec<Violation>) {
    let mut out: HashMap<u64, Vec<u64>> = HashMap::new();
    for e in edges {
        out.entry(e.from).or_default().push(e.to);
    }
    // 0 unvisited, 1 on the current path, 2 finished.
    let mut color: HashMap<u64, u8> = HashMap::new();
    for &start in view.vertices.keys() {
        if color.get(&start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut path: Vec<(u64, usize)> = vec![(start, 0)];
        color.insert(start, 1);
        while let Some((v, i)) = path.last_mut() {
            let succ = out.get(v).map_or(&[][..], Vec::as_slice);
            if *i == succ.len() {
                color.insert(*v, 2);
                path.pop();
                continue;
            }
            let w = succ[*i];
            *i += 1;
            match color.get(&w).copied().unwrap_or(0) {
                0 => {
                    color.insert(w, 1);
                    path.push((w, 0));
                }
                1 => {
                    let from = path.iter().position(|(p, _)| *p == w).unwrap_or(0);
                    let ids: Vec<String> = path[from..].iter().map(|(p, _)| p.to_string()).collect();
                    violations.push(Violation {
                        node: w,
                        rule: Rule::Acyclic,
                        description: format!("cycle through {}", ids.join(" -> ")),
                    });
                }
                _ => {}
            }
        }
    }
}

fn check_chain(view: &GraphView, violations: &mut Vec<Violation>) {
    let mut push = |node, description: String| {
        violations.push(Violation {
            node,
            rule: Rule::ChainLinear,
            description,
        })
    };
    let chain = view.chain();
    if let Some(&last) = chain.last() {
        if let Some(Vertex::Thunk { next: Some(n), .. }) = view.vertices.get(&last) {
            push(*n, "the next-redex path returns to a thunk already on it".into());
        }
    }
    if let Some(root) = view.root {
        if let Some(Vertex::Thunk { cells, .. }) = view.vertices.get(&root) {
            if let Some(slot) = cells.iter().position(Option::is_none) {
                push(root, format!("the root redex has hole {slot} unfilled"));
            }
        }
    }

    let mut writers: HashMap<(u64, usize), usize> = HashMap::new();
    for id in &chain {
        let Some(Vertex::Thunk { kind, target, .. }) = view.vertices.get(id) else {
            continue;
        };
        if *kind != ThunkKind::Redex {
            push(*id, "a handler thunk is on the redex chain".into());
        }
        if let Some((t, slot)) = target {
            match view.vertices.get(t) {
                Some(Vertex::Thunk { cells, .. }) if cells.get(*slot) == Some(&None) => {}
                _ => push(*id, format!("result target {t}.{slot} is not a hole")),
            }
            *writers.entry((*t, *slot)).or_default() += 1;
        }
    }
    for (&id, v) in &view.vertices {
        let Vertex::Thunk { cells, .. } = v else {
            continue;
        };
        for (slot, c) in cells.iter().enumerate() {
            let count = writers.get(&(id, slot)).copied().unwrap_or(0);
            if c.is_none() && count != 1 {
                push(id, format!("hole {slot} has {count} pending writers"));
            }
        }
    }
}

fn check_reduced(view: &GraphView, violations: &mut Vec<Violation>) {
    for (&id, v) in &view.vertices {
        let Vertex::Compound(items) = v else {
            continue;
        };
        let mut push = |description: &str| {
            violations.push(Violation {
                node: id,
                rule: Rule::ReducedPure,
                description: description.into(),
            })
        };
        if items.len() < 2 {
            push("a compound without arguments");
        }
        for item in items {
            match view.vertices.get(item) {
                Some(Vertex::Thunk { .. }) => push("a reduced value links to a thunk"),
                Some(Vertex::Compound(_)) if item == &items[0] => push("a compound head is a compound"),
                None => push("a field links outside the graph"),
                _ => {}
            }
        }
    }
}

/// Checks acyclicity over every link kind, that the redex chain is a simple
/// path whose targets are pending holes, and that reduced values are
/// well-formed compounds free of thunks.
pub fn check(state: &RewriteState) -> GraphReport {
    check_view(&GraphView::snapshot(state))
}

pub fn check_view(view: &GraphView) -> GraphReport {
    let edges = view.edges();
    let mut violations = Vec::new();
    find_cycles(view, &edges, &mut violations);
    check_chain(view, &mut violations);
    check_reduced(view, &mut violations);

    let mut incoming: HashMap<u64, usize> = HashMap::new();
    for e in &edges {
        if matches!(e.kind, EdgeKind::Cell(_) | EdgeKind::Field(_)) {
            *incoming.entry(e.to).or_default() += 1;
        }
    }
    let has = |rule| violations.iter().any(|v: &Violation| v.rule == rule);
    GraphReport {
        acyclic: !has(Rule::Acyclic),
        chain_linear: !has(Rule::ChainLinear),
        reduced_pure: !has(Rule::ReducedPure),
        node_count: view.vertices.len(),
        edge_count: edges.len(),
        thunk_count: view.thunk_count(),
        shared: incoming.values().filter(|&&c| c > 1).count(),
        violations,
    }
}
