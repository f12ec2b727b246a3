use std::sync::Arc;

use twistvm_core::compile::Program;
use twistvm_core::engine::{CaptureSink, Engine, EngineConfig};
use twistvm_core::graph::{Cell, Heap, Next, RewriteState, Target, Thunk, ThunkKind};
use twistvm_core::inspect::{check, emit_dot, DotStyle, GraphView, Rule, Vertex};
use twistvm_testkit::gen::seeded_program;
use twistvm_testkit::{compile, execute_observed};

const RUNNING: &str = "def main = mul (1 + 2) (inc 1)";

/// DOT text of every step boundary of a run, in all three styles. Each
/// boundary must also pass the checker.
fn trace(program: &Program) -> Vec<Vec<String>> {
    let engine = Engine::new(program, Heap::new(), Arc::new(CaptureSink::default()), EngineConfig::default()).unwrap();
    let mut state = engine.start_main().unwrap();
    let mut out = Vec::new();
    loop {
        let report = check(&state);
        assert!(report.is_ok(), "step {}: {}", state.steps(), report.summary());
        out.push(
            [DotStyle::Standard, DotStyle::Thunked, DotStyle::Twisted]
                .iter()
                .map(|s| emit_dot(&state, program, *s).text)
                .collect(),
        );
        if state.is_done() {
            return out;
        }
        engine.step(&mut state).unwrap();
    }
}

#[test]
fn running_example_at_step_zero() {
    let program = compile(RUNNING).unwrap();
    let engine = Engine::new(&program, Heap::new(), Arc::new(CaptureSink::default()), EngineConfig::default()).unwrap();
    let state = engine.start_main().unwrap();
    let report = check(&state);
    assert!(report.acyclic && report.chain_linear && report.reduced_pure);
    assert!(report.violations.is_empty());
    assert_eq!(report.thunk_count, 3);
    assert!(report.is_tree());

    let view = GraphView::snapshot(&state);
    let heads: Vec<String> = view
        .chain()
        .iter()
        .map(|id| match &view.vertices[id] {
            Vertex::Thunk { cells, .. } => match cells[0].and_then(|c| view.vertices.get(&c)) {
                Some(Vertex::Comb(c)) => program.display_name(*c).to_string(),
                other => panic!("unexpected head {other:?}"),
            },
            other => panic!("chain holds {other:?}"),
        })
        .collect();
    assert_eq!(heads, ["inc", "+", "mul"]);
    let Vertex::Thunk { cells, .. } = &view.vertices[view.chain().last().unwrap()] else { panic!() };
    assert_eq!(cells.iter().filter(|c| c.is_none()).count(), 2);
}

#[test]
fn running_example_after_two_arguments() {
    let program = compile(RUNNING).unwrap();
    let engine = Engine::new(&program, Heap::new(), Arc::new(CaptureSink::default()), EngineConfig::default()).unwrap();
    let mut state = engine.start_main().unwrap();
    engine.step(&mut state).unwrap();
    engine.step(&mut state).unwrap();
    let view = GraphView::snapshot(&state);
    assert_eq!(view.thunk_count(), 1);
    let Vertex::Thunk { cells, .. } = &view.vertices[&view.root.unwrap()] else { panic!() };
    let values: Vec<&Vertex> = cells.iter().map(|c| &view.vertices[&c.unwrap()]).collect();
    assert_eq!(values[1..], [&Vertex::Int(3), &Vertex::Int(2)]);
}

#[test]
fn final_state_is_a_single_value() {
    let program = compile(RUNNING).unwrap();
    let engine = Engine::new(&program, Heap::new(), Arc::new(CaptureSink::default()), EngineConfig::default()).unwrap();
    let mut state = engine.start_main().unwrap();
    let mut last = None;
    engine
        .run_observed(&mut state, &mut |s| last = Some((check(s), emit_dot(s, &program, DotStyle::Twisted).text)))
        .unwrap();
    let (report, dot) = last.unwrap();
    assert!(report.is_ok());
    assert_eq!(report.thunk_count, 0);
    assert_eq!(report.node_count, 1);
    assert!(dot.contains("[label=\"6\"]"), "{dot}");
}

#[test]
fn hand_built_cycle_is_reported() {
    let heap = Heap::new();
    let a = Thunk::new(&heap, ThunkKind::Redex, vec![Cell::Filled(heap.int(1))], Next::Sink, Target::Root, None);
    let b = Thunk::new(
        &heap,
        ThunkKind::Redex,
        vec![Cell::Filled(heap.int(2))],
        Next::Redex(a.clone()),
        Target::Root,
        None,
    );
    a.force_next(Next::Redex(b.clone()));
    let state = RewriteState::with_root(heap.clone(), Next::Redex(a.clone()), None);
    let report = check(&state);
    assert!(!report.acyclic);
    assert!(!report.chain_linear);
    let cycle = report.violations.iter().find(|v| v.rule == Rule::Acyclic).unwrap();
    assert!(cycle.description.contains(&a.id().to_string()));
    assert!(cycle.description.contains(&b.id().to_string()));

    // Break the cycle so everything is released.
    a.force_next(Next::Sink);
    drop((state, a, b));
    assert_eq!(heap.live_nodes(), 0);
}

#[test]
fn hole_without_a_writer_is_reported() {
    let heap = Heap::new();
    let t = Thunk::new(
        &heap,
        ThunkKind::Redex,
        vec![Cell::Filled(heap.int(1)), Cell::Hole],
        Next::Sink,
        Target::Root,
        None,
    );
    let waiting = Thunk::new(
        &heap,
        ThunkKind::Redex,
        vec![Cell::Filled(heap.int(0))],
        Next::Redex(t.clone()),
        Target::Root,
        None,
    );
    let state = RewriteState::with_root(heap, Next::Redex(waiting), None);
    let report = check(&state);
    assert!(report.acyclic && report.reduced_pure);
    assert!(!report.chain_linear, "{}", report.summary());
}

#[test]
fn check_is_read_only() {
    let program = compile("def fib = [ 0 -> 1 | 1 -> 1 | N -> fib (N - 2) + fib (N - 1) ]\ndef main = fib 6").unwrap();
    let heap = Heap::new();
    let engine = Engine::new(&program, heap.clone(), Arc::new(CaptureSink::default()), EngineConfig::default()).unwrap();
    let mut state = engine.start_main().unwrap();
    for _ in 0..10 {
        engine.step(&mut state).unwrap();
    }
    let live = heap.live_nodes();
    let before = GraphView::snapshot(&state);
    let report = check(&state);
    assert!(report.is_ok());
    assert_eq!(heap.live_nodes(), live);
    let after = GraphView::snapshot(&state);
    assert_eq!(before.vertices, after.vertices);
    assert_eq!(before.root, after.root);
}

#[test]
fn snapshots_are_deterministic_and_parse() {
    let src = "import \"prelude.eg\"\nusing List\ndef main = try (cons 1 nil) ++ (cons (throw 2) nil) catch [ E -> E ]";
    let program = compile(src).unwrap();
    let first = trace(&program);
    let second = trace(&program);
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a, b);
        for text in a {
            graphviz_rust::parse(text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        }
    }
}

#[test]
fn twisted_style_uses_the_two_arrow_scheme() {
    let program = compile("def main = try mul (1 + 2) (inc 1) catch [ E -> 0 ]").unwrap();
    let engine = Engine::new(&program, Heap::new(), Arc::new(CaptureSink::default()), EngineConfig::default()).unwrap();
    let state = engine.start_main().unwrap();
    let dot = emit_dot(&state, &program, DotStyle::Twisted).text;
    assert!(dot.contains("root [shape=plaintext, label=\"*\"]"));
    assert!(dot.lines().any(|l| l.contains(":next -> ") && !l.contains("style=")));
    assert!(dot.lines().any(|l| l.contains(":target -> ") && l.contains("style=dashed")));
    assert!(dot.lines().any(|l| l.contains(":handler -> ") && l.contains("style=dotted")));
}

#[test]
fn random_programs_hold_the_invariants_at_every_step() {
    for i in 0..50 {
        let src = seeded_program(11, i);
        let program = compile(&src).unwrap();
        let mut checked_steps = 0u64;
        let mut bad = None;
        let run = execute_observed(&program, EngineConfig::default(), &mut |s| {
            checked_steps += 1;
            let report = check(s);
            if !report.is_ok() && bad.is_none() {
                bad = Some(report.summary());
            }
        });
        assert_eq!(bad, None, "{src}");
        assert_eq!(checked_steps, run.steps + 1);
    }
}
