//! Property tests over randomly generated formulas.

use proptest::prelude::*;

use mpsat::equivalence::run_coupled;
use mpsat::formula::generate::generate_random_ksat;
use mpsat::lcg::fingerprint_formula;
use mpsat::mp::{MpRunConfig, mp_run};
use mpsat::rng::RngStream;
use mpsat::solvers::{dpll, walksat_classic, walksat_uniform_literal};
use mpsat::{
    Assignment, Clause, CnfFormula, Literal, brute_force_sat, emit_dimacs, parse_dimacs,
};

fn arb_formula(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = CnfFormula> {
    (1..=max_vars).prop_flat_map(move |n| {
        let literal = (1..=n, any::<bool>()).prop_map(|(var, neg)| Literal::new(var, neg));
        let clause = prop::collection::vec(literal, 0..=4).prop_map(Clause::new);
        prop::collection::vec(clause, 0..=max_clauses)
            .prop_map(move |clauses| CnfFormula::new(n, clauses).unwrap())
    })
}

fn arb_assignment_for(n: u32) -> impl Strategy<Value = Assignment> {
    prop::collection::vec(any::<bool>(), n as usize).prop_map(Assignment::new)
}

proptest! {
    // Round-trip through the serializer; covers tautologies, empty clauses,
    // and variables that never occur.
    #[test]
    fn dimacs_round_trip_is_identity(f in arb_formula(8, 10)) {
        let text = emit_dimacs(&f);
        let back = parse_dimacs(&text).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn evaluate_iff_no_unsat_clauses(f in arb_formula(6, 8), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let mut a = Assignment::all_false(f.num_vars());
        for var in 1..=f.num_vars() {
            a.set(var, rng.next_bool());
        }
        prop_assert_eq!(f.evaluate(&a), f.unsat_clauses(&a).is_empty());
    }

    // Independent oracle for the exhaustive solver: scan all assignments in
    // the same lexicographic order by hand.
    #[test]
    fn brute_force_matches_direct_enumeration(f in arb_formula(4, 8)) {
        let n = f.num_vars();
        let mut first_witness = None;
        for code in 0u64..(1 << n) {
            let values = (0..n).map(|i| (code >> i) & 1 == 1).collect::<Vec<_>>();
            let a = Assignment::new(values);
            if f.evaluate(&a) {
                first_witness = Some(a);
                break;
            }
        }
        let result = brute_force_sat(&f).unwrap();
        match first_witness {
            Some(expected) => prop_assert_eq!(result.assignment().unwrap(), &expected),
            None => prop_assert!(result.is_unsat()),
        }
    }

    #[test]
    fn tautological_clauses_satisfy_everything(n in 1u32..=5, var in 1u32..=5, a_seed in any::<u64>()) {
        let var = var.min(n);
        let clause = Clause::new(vec![Literal::positive(var), Literal::negative(var)]);
        let f = CnfFormula::new(n, vec![clause]).unwrap();
        let mut rng = RngStream::new(a_seed);
        let mut a = Assignment::all_false(n);
        for v in 1..=n {
            a.set(v, rng.next_bool());
        }
        prop_assert!(f.evaluate(&a));
    }

    #[test]
    fn generator_is_pure(n in 3u32..=12, m in 0usize..=40, seed in any::<u64>()) {
        let a = generate_random_ksat(n, m, 3, seed).unwrap();
        let b = generate_random_ksat(n, m, 3, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fingerprint_survives_seeded_shuffles(f in arb_formula(7, 9), shuffle_seed in any::<u64>()) {
        let base = fingerprint_formula(&f);
        let mut rng = RngStream::new(shuffle_seed);
        let mut clauses: Vec<Clause> = f.clauses().to_vec();
        for i in (1..clauses.len()).rev() {
            let j = rng.next_below(i + 1);
            clauses.swap(i, j);
        }
        let shuffled: Vec<Clause> = clauses
            .iter()
            .map(|c| {
                let mut lits = c.literals().to_vec();
                for i in (1..lits.len()).rev() {
                    let j = rng.next_below(i + 1);
                    lits.swap(i, j);
                }
                Clause::new(lits)
            })
            .collect();
        let g = CnfFormula::new(f.num_vars(), shuffled).unwrap();
        prop_assert_eq!(fingerprint_formula(&g), base);
    }

    #[test]
    fn local_search_flips_are_always_legal(n in 3u32..=9, seed in any::<u64>()) {
        let m = 4 * n as usize;
        let f = generate_random_ksat(n, m, 3, seed).unwrap();
        let (_, uniform_trace) = walksat_uniform_literal(&f, seed, 120);
        prop_assert!(uniform_trace.well_formed().is_ok());
        prop_assert!(uniform_trace.flips_target_unsat_clauses(&f));
        let (_, classic_trace) = walksat_classic(&f, seed, 0.5, 120);
        prop_assert!(classic_trace.well_formed().is_ok());
        prop_assert!(classic_trace.flips_target_unsat_clauses(&f));
    }

    #[test]
    fn sat_witnesses_always_evaluate_true(f in arb_formula(6, 10), seed in any::<u64>()) {
        let (dpll_result, _) = dpll(&f);
        if let Some(a) = dpll_result.assignment() {
            prop_assert!(f.evaluate(a));
        }
        let (mp_result, _) = mp_run(&f, &MpRunConfig::new(seed).with_max_iterations(300));
        if let Some(a) = mp_result.assignment() {
            prop_assert!(f.evaluate(a));
        }
        prop_assert!(!mp_result.is_unsat());
    }

    #[test]
    fn coupled_runs_match_on_arbitrary_formulas(f in arb_formula(7, 12), seed in any::<u64>()) {
        let report = run_coupled(&f, seed, 400);
        prop_assert!(report.matched, "divergence: {:?}", report.first_divergence);
    }

    #[test]
    fn assignment_under_negation_flips(var in 1u32..=6, n in 6u32..=8, a in arb_assignment_for(8)) {
        let _ = n;
        let lit = Literal::positive(var);
        prop_assert_eq!(lit.value_under(&a), !lit.negate().value_under(&a));
    }
}

#[test]
fn dpll_and_brute_force_agree_on_every_three_clause_formula_over_three_vars() {
    // All duplicate-free clauses over variables {1,2,3}: every subset of the
    // six literals, including the empty clause and tautologies.
    let all_literals: Vec<Literal> = (1..=3)
        .flat_map(|v| [Literal::positive(v), Literal::negative(v)])
        .collect();
    let all_clauses: Vec<Clause> = (0u32..64)
        .map(|mask| {
            Clause::new(
                all_literals
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &l)| l)
                    .collect(),
            )
        })
        .collect();
    let mut checked = 0usize;
    for i in 0..64 {
        for j in i..64 {
            for k in j..64 {
                let f = CnfFormula::new(
                    3,
                    vec![
                        all_clauses[i].clone(),
                        all_clauses[j].clone(),
                        all_clauses[k].clone(),
                    ],
                )
                .unwrap();
                let truth = brute_force_sat(&f).unwrap();
                let (result, _) = dpll(&f);
                assert_eq!(result.is_sat(), truth.is_sat(), "clauses {i},{j},{k}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 45760);
}
