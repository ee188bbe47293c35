mod common;

use std::collections::BTreeSet;

use ordcsp::encoder::EncodeOptions;
use ordcsp::frontend::{emit_facts, parse_facts};
use ordcsp::oracle::check;
use ordcsp::solver::{decode, parse_dimacs, solve, write_dimacs, SolveResult, SolverConfig};
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{compile, oracle_solutions, random_instance, solver_solutions};

#[test]
fn facts_round_trip_preserves_solutions() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let back = parse_facts(&emit_facts(&inst).unwrap()).unwrap();
        assert_eq!(oracle_solutions(&inst), oracle_solutions(&back));
        let sols: BTreeSet<_> = solver_solutions(&back, EncodeOptions::default()).into_iter().collect();
        assert_eq!(sols, oracle_solutions(&inst));
    }
}

#[test]
fn dimacs_round_trip_then_decode_and_check() {
    let mut rng = StdRng::seed_from_u64(0xd1ac);
    for seed in 0..100 {
        let inst = random_instance(&mut rng);
        let (normalized, cnf, map) = compile(&inst, EncodeOptions::default());
        let text = write_dimacs(&cnf);
        let back = parse_dimacs(&text).unwrap();
        assert_eq!(back.num_vars, cnf.num_vars);
        assert_eq!(back.clauses, cnf.clauses);
        let cfg = SolverConfig { seed, ..Default::default() };
        match solve(&back, &cfg) {
            SolveResult::Sat(model) => {
                let a = decode(&model, &map, &normalized).unwrap();
                assert!(check(&inst, &a).unwrap().overall);
            }
            SolveResult::Unsat => assert!(oracle_solutions(&inst).is_empty()),
            SolveResult::Unknown => panic!("no conflict limit set"),
        }
    }
}

#[test]
fn ph_setting_does_not_change_solutions() {
    let mut rng = StdRng::seed_from_u64(0xf00);
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let on: BTreeSet<_> = solver_solutions(&inst, EncodeOptions { ph: true }).into_iter().collect();
        let off: BTreeSet<_> = solver_solutions(&inst, EncodeOptions { ph: false }).into_iter().collect();
        assert_eq!(on, off);
    }
}
