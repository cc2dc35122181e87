//! GSAT: greedy local search with random restarts.

use std::time::Instant;

use crate::formula::{Assignment, CnfFormula, SolveResult, SolveStats};
use crate::rng::{RngStream, tag};

/// Per step, flips the variable maximizing the net gain in satisfied clauses
/// (ties toward the lowest variable index); restarts with a fresh random
/// assignment after `max_flips` flips, up to `max_tries` flip runs. With
/// `max_tries == 0` only the initial assignment is checked.
pub fn gsat(formula: &CnfFormula, seed: u64, max_flips: u64, max_tries: u64) -> SolveResult {
    let start = Instant::now();
    let n = formula.num_vars();
    let mut rng = RngStream::derived(seed, tag::LOCAL_SEARCH, 1);
    let mut stats = SolveStats::default();

    let draw = |rng: &mut RngStream| {
        let mut a = Assignment::all_false(n);
        for var in 1..=n {
            a.set(var, rng.next_bool());
        }
        a
    };

    let mut assignment = draw(&mut rng);
    if formula.evaluate(&assignment) {
        stats.wall_time = start.elapsed();
        return SolveResult::sat(formula, assignment, stats).expect("checked");
    }
    if n == 0 {
        // No variables to flip; the check above already decided.
        stats.wall_time = start.elapsed();
        return SolveResult::unknown(stats);
    }

    for try_index in 0..max_tries {
        for _ in 0..max_flips {
            let var = best_gain_variable(formula, &assignment);
            assignment.flip(var);
            stats.flips += 1;
            if formula.evaluate(&assignment) {
                stats.wall_time = start.elapsed();
                return SolveResult::sat(formula, assignment, stats).expect("checked");
            }
        }
        if try_index + 1 < max_tries {
            assignment = draw(&mut rng);
            if formula.evaluate(&assignment) {
                stats.wall_time = start.elapsed();
                return SolveResult::sat(formula, assignment, stats).expect("checked");
            }
        }
    }
    stats.wall_time = start.elapsed();
    SolveResult::unknown(stats)
}

fn satisfied_count(formula: &CnfFormula, assignment: &Assignment) -> usize {
    formula
        .clauses()
        .iter()
        .filter(|c| c.is_satisfied_by(assignment))
        .count()
}

fn best_gain_variable(formula: &CnfFormula, assignment: &Assignment) -> u32 {
    let before = satisfied_count(formula, assignment) as i64;
    let mut probe = assignment.clone();
    let mut best_var = 1;
    let mut best_gain = i64::MIN;
    for var in 1..=formula.num_vars() {
        probe.flip(var);
        let gain = satisfied_count(formula, &probe) as i64 - before;
        probe.flip(var);
        if gain > best_gain {
            best_gain = gain;
            best_var = var;
        }
    }
    best_var
}
