//! Runtime graph.
//!
//! Reduced values are immutable [`Node`]s shared through atomic reference
//! counts, so parallel branches can read them freely. Pending work is a
//! [`Thunk`]: an array of cells (head, then arguments) extended at the front
//! with three control links, the redex to rewrite next, the cell that
//! receives this thunk's result, and the exception handler in force.
//!
//! Nothing here ever forms a cycle, so dropping the last link to a node
//! reclaims it and everything only it reached. Reclamation is iterative;
//! long chains and deep values do not recurse on the host stack.

mod wire;

use std::cell::{Ref, RefCell};
use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::compile::CombId;

pub use wire::{execute_build, wire_term, Inherit, RegValue, WireError};

#[derive(Debug)]
struct HeapCounters {
    live: AtomicUsize,
    next_id: AtomicU64,
}

/// Allocation accounting for one program run. Every node and thunk carries
/// a handle back to its heap; ids are creation indices, unique per heap.
#[derive(Clone, Debug)]
pub struct Heap(Arc<HeapCounters>);

impl Default for Heap {
    fn default() -> Self {
        Self::new()
    }
}

impl Heap {
    pub fn new() -> Self {
        Heap(Arc::new(HeapCounters {
            live: AtomicUsize::new(0),
            next_id: AtomicU64::new(0),
        }))
    }

    /// Number of nodes and thunks currently allocated.
    pub fn live_nodes(&self) -> usize {
        self.0.live.load(Ordering::SeqCst)
    }

    fn allocate(&self) -> u64 {
        self.0.live.fetch_add(1, Ordering::Relaxed);
        self.0.next_id.fetch_add(1, Ordering::Relaxed)
    }

    fn release(&self) {
        self.0.live.fetch_sub(1, Ordering::Relaxed);
    }

    pub fn int(&self, v: i64) -> Node {
        self.node(NodeKind::Int(v))
    }

    pub fn text(&self, t: impl Into<String>) -> Node {
        self.node(NodeKind::Text(t.into()))
    }

    pub fn comb(&self, id: CombId) -> Node {
        self.node(NodeKind::Comb(id))
    }

    /// Applies a reduced head to reduced arguments without rewriting. A
    /// compound head is flattened, so a compound's head is never a compound;
    /// with no arguments the head itself is returned.
    pub fn compound(&self, head: Node, args: Vec<Node>) -> Node {
        if args.is_empty() {
            return head;
        }
        let items = match head.kind() {
            NodeKind::Compound(existing) => {
                let mut items = existing.clone();
                items.extend(args);
                items
            }
            _ => {
                let mut items = Vec::with_capacity(args.len() + 1);
                items.push(head);
                items.extend(args);
                items
            }
        };
        self.node(NodeKind::Compound(items))
    }

    fn node(&self, kind: NodeKind) -> Node {
        Node(Arc::new(NodeBox {
            id: self.allocate(),
            heap: self.clone(),
            kind,
        }))
    }
}

#[derive(Debug)]
pub enum NodeKind {
    Int(i64),
    Text(String),
    Comb(CombId),
    /// Head followed by at least one argument.
    Compound(Vec<Node>),
}

struct NodeBox {
    id: u64,
    heap: Heap,
    kind: NodeKind,
}

/// A fully reduced value.
#[derive(Clone)]
pub struct Node(Arc<NodeBox>);

impl Node {
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn kind(&self) -> &NodeKind {
        &self.0.kind
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.kind() {
            NodeKind::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_comb(&self) -> Option<CombId> {
        match self.kind() {
            NodeKind::Comb(c) => Some(*c),
            _ => None,
        }
    }

    /// Head and arguments of a compound; an atom is its own head.
    pub fn spine(&self) -> (&Node, &[Node]) {
        match self.kind() {
            NodeKind::Compound(items) => (&items[0], &items[1..]),
            _ => (self, &[]),
        }
    }

    pub fn ptr_eq(a: &Node, b: &Node) -> bool {
        Arc::ptr_eq(&a.0, &b.0)
    }

    /// Structural equality, without recursion on the host stack.
    pub fn structurally_equal(a: &Node, b: &Node) -> bool {
        let mut work = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = work.pop() {
            if Node::ptr_eq(&x, &y) {
                continue;
            }
            match (x.kind(), y.kind()) {
                (NodeKind::Int(p), NodeKind::Int(q)) if p == q => {}
                (NodeKind::Text(p), NodeKind::Text(q)) if p == q => {}
                (NodeKind::Comb(p), NodeKind::Comb(q)) if p == q => {}
                (NodeKind::Compound(p), NodeKind::Compound(q)) if p.len() == q.len() => {
                    work.extend(p.iter().cloned().zip(q.iter().cloned()));
                }
                _ => return false,
            }
        }
        true
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            NodeKind::Int(v) => write!(f, "{v}"),
            NodeKind::Text(t) => write!(f, "{t:?}"),
            NodeKind::Comb(c) => write!(f, "#{}", c.0),
            NodeKind::Compound(items) => f.debug_tuple("").field(items).finish(),
        }
    }
}

impl Drop for NodeBox {
    fn drop(&mut self) {
        self.heap.release();
        let NodeKind::Compound(items) = &mut self.kind else {
            return;
        };
        let mut stack = std::mem::take(items);
        while let Some(node) = stack.pop() {
            if let Some(mut inner) = Arc::into_inner(node.0) {
                if let NodeKind::Compound(items) = &mut inner.kind {
                    stack.append(items);
                }
            }
        }
    }
}

pub type ThunkRef = Rc<Thunk>;

/// The redex to rewrite after a thunk, or the runtime sink ending the chain.
#[derive(Clone)]
pub enum Next {
    Redex(ThunkRef),
    Sink,
}

impl Next {
    pub fn thunk(&self) -> Option<&ThunkRef> {
        match self {
            Next::Redex(t) => Some(t),
            Next::Sink => None,
        }
    }
}

/// Where a thunk's result goes: a hole in another thunk, or the root slot
/// read by the runtime.
#[derive(Clone)]
pub enum Target {
    Slot(ThunkRef, usize),
    Root,
}

#[derive(Clone)]
pub enum Cell {
    Hole,
    Filled(Node),
}

impl Cell {
    pub fn node(&self) -> Option<&Node> {
        match self {
            Cell::Filled(n) => Some(n),
            Cell::Hole => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThunkKind {
    /// An application awaiting reduction.
    Redex,
    /// A `try` handler: cell 0 holds the catch function; next and target
    /// are the continuation captured when the `try` was entered.
    Handler,
}

pub struct Thunk {
    id: u64,
    heap: Heap,
    kind: ThunkKind,
    next: RefCell<Next>,
    target: Target,
    handler: Option<ThunkRef>,
    cells: RefCell<Vec<Cell>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphFault {
    #[error("cell {slot} of thunk {thunk} is already filled")]
    SlotFilled { thunk: u64, slot: usize },
    #[error("thunk {thunk} has no cell {slot}")]
    NoSuchSlot { thunk: u64, slot: usize },
    #[error("the root slot is already filled")]
    RootFilled,
    #[error("thunk {thunk} became the root with hole {slot} unfilled")]
    UnfilledRoot { thunk: u64, slot: usize },
    #[error("malformed build code: {0}")]
    BadBuild(&'static str),
}

impl Thunk {
    pub fn new(
        heap: &Heap,
        kind: ThunkKind,
        cells: Vec<Cell>,
        next: Next,
        target: Target,
        handler: Option<ThunkRef>,
    ) -> ThunkRef {
        Rc::new(Thunk {
            id: heap.allocate(),
            heap: heap.clone(),
            kind,
            next: RefCell::new(next),
            target,
            handler,
            cells: RefCell::new(cells),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn kind(&self) -> ThunkKind {
        self.kind
    }

    pub fn next(&self) -> Next {
        self.next.borrow().clone()
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn handler(&self) -> Option<&ThunkRef> {
        self.handler.as_ref()
    }

    pub fn cells(&self) -> Ref<'_, Vec<Cell>> {
        self.cells.borrow()
    }

    /// All cells, provided none is a hole.
    pub fn filled_cells(&self) -> Result<Vec<Node>, GraphFault> {
        self.cells
            .borrow()
            .iter()
            .enumerate()
            .map(|(slot, c)| {
                c.node().cloned().ok_or(GraphFault::UnfilledRoot {
                    thunk: self.id,
                    slot,
                })
            })
            .collect()
    }

    /// Replaces the next-redex link, bypassing the wiring discipline. Only
    /// meant for building malformed graphs in checker tests.
    #[doc(hidden)]
    pub fn force_next(&self, next: Next) {
        *self.next.borrow_mut() = next;
    }

    fn take_links(&mut self, stack: &mut Vec<ThunkRef>) {
        let mut push = |t: ThunkRef| {
            // Only a last reference can cascade.
            if Rc::strong_count(&t) == 1 {
                stack.push(t);
            }
        };
        if let Next::Redex(t) = std::mem::replace(self.next.get_mut(), Next::Sink) {
            push(t);
        }
        if let Target::Slot(t, _) = std::mem::replace(&mut self.target, Target::Root) {
            push(t);
        }
        if let Some(h) = self.handler.take() {
            push(h);
        }
    }
}

impl Drop for Thunk {
    fn drop(&mut self) {
        self.heap.release();
        let mut stack = Vec::new();
        self.take_links(&mut stack);
        while let Some(t) = stack.pop() {
            if let Ok(mut inner) = Rc::try_unwrap(t) {
                inner.take_links(&mut stack);
            }
        }
    }
}

/// Fills a hole. Writing a cell twice is an invariant violation.
pub fn write_result(thunk: &Thunk, slot: usize, value: Node) -> Result<(), GraphFault> {
    let mut cells = thunk.cells.borrow_mut();
    match cells.get_mut(slot) {
        None => Err(GraphFault::NoSuchSlot {
            thunk: thunk.id,
            slot,
        }),
        Some(Cell::Filled(_)) => Err(GraphFault::SlotFilled {
            thunk: thunk.id,
            slot,
        }),
        Some(cell) => {
            *cell = Cell::Filled(value);
            Ok(())
        }
    }
}

/// Delivers a reduced value to a result target.
pub fn deliver(target: &Target, value: Node, root: &mut Option<Node>) -> Result<(), GraphFault> {
    match target {
        Target::Slot(t, slot) => write_result(t, *slot, value),
        Target::Root if root.is_some() => Err(GraphFault::RootFilled),
        Target::Root => {
            *root = Some(value);
            Ok(())
        }
    }
}

/// The state of one reduction: the root redex link (the `*` pointer) and
/// the root slot receiving the final value.
pub struct RewriteState {
    pub(crate) root: Next,
    pub(crate) result: Option<Node>,
    pub(crate) exception: Option<Node>,
    pub(crate) steps: u64,
    pub(crate) heap: Heap,
}

impl RewriteState {
    pub fn new(heap: Heap) -> Self {
        RewriteState {
            root: Next::Sink,
            result: None,
            exception: None,
            steps: 0,
            heap,
        }
    }

    /// Starts from an already wired chain.
    pub fn with_root(heap: Heap, root: Next, result: Option<Node>) -> Self {
        RewriteState {
            root,
            result,
            ..RewriteState::new(heap)
        }
    }

    pub fn root(&self) -> &Next {
        &self.root
    }

    pub fn result(&self) -> Option<&Node> {
        self.result.as_ref()
    }

    pub fn exception(&self) -> Option<&Node> {
        self.exception.as_ref()
    }

    pub fn is_done(&self) -> bool {
        matches!(self.root, Next::Sink)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    pub fn live_nodes(&self) -> usize {
        self.heap.live_nodes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn live_count_returns_to_baseline() {
        let heap = Heap::new();
        assert_eq!(heap.live_nodes(), 0);
        let a = heap.int(1);
        let b = heap.compound(heap.comb(CombId(0)), vec![a.clone(), heap.int(2)]);
        assert_eq!(heap.live_nodes(), 4);
        drop(a);
        assert_eq!(heap.live_nodes(), 4);
        drop(b);
        assert_eq!(heap.live_nodes(), 0);
    }

    #[test]
    fn compound_heads_are_flattened() {
        let heap = Heap::new();
        let partial = heap.compound(heap.comb(CombId(3)), vec![heap.int(1)]);
        let full = heap.compound(partial, vec![heap.int(2)]);
        let (head, args) = full.spine();
        assert_eq!(head.as_comb(), Some(CombId(3)));
        assert_eq!(args.len(), 2);
        let alone = heap.compound(heap.int(7), vec![]);
        assert_eq!(alone.as_int(), Some(7));
    }

    #[test]
    fn write_into_filled_slot_is_a_fault() {
        let heap = Heap::new();
        let t = Thunk::new(
            &heap,
            ThunkKind::Redex,
            vec![Cell::Filled(heap.comb(CombId(0))), Cell::Hole],
            Next::Sink,
            Target::Root,
            None,
        );
        write_result(&t, 1, heap.int(2)).unwrap();
        assert_eq!(
            write_result(&t, 1, heap.int(3)),
            Err(GraphFault::SlotFilled { thunk: t.id(), slot: 1 })
        );
        assert_eq!(
            write_result(&t, 2, heap.int(3)),
            Err(GraphFault::NoSuchSlot { thunk: t.id(), slot: 2 })
        );
        assert!(matches!(t.cells()[1], Cell::Filled(ref n) if n.as_int() == Some(2)));
    }

    #[test]
    fn root_slot_is_written_once() {
        let heap = Heap::new();
        let mut root = None;
        deliver(&Target::Root, heap.int(6), &mut root).unwrap();
        assert_eq!(root.as_ref().and_then(Node::as_int), Some(6));
        assert_eq!(deliver(&Target::Root, heap.int(6), &mut root), Err(GraphFault::RootFilled));
    }

    #[test]
    fn long_chains_and_deep_values_drop_without_recursion() {
        // Run on a small stack: a recursive drop would overflow it.
        std::thread::Builder::new()
            .stack_size(64 * 1024)
            .spawn(|| {
                let heap = Heap::new();
                let mut next = Next::Sink;
                let mut value = heap.int(0);
                for i in 0..200_000 {
                    value = heap.compound(heap.comb(CombId(1)), vec![heap.int(i), value]);
                    let t = Thunk::new(
                        &heap,
                        ThunkKind::Redex,
                        vec![Cell::Filled(heap.comb(CombId(0))), Cell::Hole],
                        next,
                        Target::Root,
                        None,
                    );
                    next = Next::Redex(t);
                }
                drop(next);
                drop(value);
                assert_eq!(heap.live_nodes(), 0);
            })
            .unwrap()
            .join()
            .unwrap();
    }

    #[test]
    fn structural_equality() {
        let heap = Heap::new();
        let mk = |n| heap.compound(heap.comb(CombId(1)), vec![heap.int(n), heap.comb(CombId(2))]);
        assert!(Node::structurally_equal(&mk(1), &mk(1)));
        assert!(!Node::structurally_equal(&mk(1), &mk(2)));
        assert!(!Node::structurally_equal(&heap.text("a"), &heap.int(1)));
    }
}
