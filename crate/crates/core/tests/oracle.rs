//! The machine against the substitution-based reference evaluator.

use twistvm_testkit::gen::seeded_program;
use twistvm_testkit::{checked, compile, execute, machine_outcome, oracle_source};

const SEED: u64 = 0x5eed;

#[test]
fn random_programs_agree_with_the_reference_evaluator() {
    let mut failures = Vec::new();
    for i in 0..200 {
        let src = seeded_program(SEED, i);
        let expected = oracle_source(&src, 2_000_000).unwrap_or_else(|e| panic!("{e:?}\n{src}"));
        let program = compile(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
        let run = execute(&program, checked());
        if machine_outcome(&run) != Some(expected.clone()) {
            failures.push(format!("program {i}:\n{src}machine: {:?}\noracle: {expected:?}", run.rendered));
        }
        assert_eq!(run.live_after, 0, "leak in program {i}:\n{src}");
    }
    assert!(failures.is_empty(), "{}", failures.join("\n\n"));
}
