mod common;

use common::emit::{corpus_units, mutations, strip_transfers};
use graphdsl::codegen::structural_check;

#[test]
fn corpus_units_are_clean_and_mutations_are_caught() {
    common::criteria::structural_contracts().unwrap();
}

#[test]
fn other_mutation_seeds_are_caught() {
    let cases = corpus_units();
    for seed in 0..60 {
        for m in mutations(&cases, seed) {
            let c = &cases[m.case];
            let r = structural_check(&m.unit, &c.program, &c.analyses);
            assert!(!r.is_clean(), "seed {seed}: undetected {}", m.label);
        }
    }
}

#[test]
fn stripping_all_transfers_is_caught() {
    for c in corpus_units() {
        let r = structural_check(&strip_transfers(&c.unit), &c.program, &c.analyses);
        assert!(!r.is_clean(), "{} {}", c.entry.name, c.unit.backend);
    }
}

#[test]
fn recorded_transfer_lines_point_at_the_symbol() {
    for c in corpus_units() {
        for t in &c.unit.structure.transfers {
            let line = c.unit.file(&t.file).unwrap().lines().nth(t.line - 1).unwrap();
            assert!(line.contains(&t.symbol), "{} {}: {line}", c.entry.name, c.unit.backend);
        }
        for l in &c.unit.structure.launches {
            let line = c.unit.file(&l.file).unwrap().lines().nth(l.line - 1).unwrap();
            assert!(line.contains(&l.kernel), "{} {}: {line}", c.entry.name, c.unit.backend);
        }
    }
}
