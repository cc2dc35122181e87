//! Stochastic local search by variable flipping.
//!
//! Two selection rules live here. [`walksat_classic`] is the standard
//! clause-first procedure: pick an unsatisfied clause uniformly, then either
//! a random variable of that clause (with probability `noise_p`) or the one
//! minimizing the break count. [`walksat_uniform_literal`] instead picks
//! uniformly among all literals occurring in at least one unsatisfied
//! clause; that is the rule the embedding machine in [`crate::mp`]
//! reproduces step for step, so this variant doubles as the reference side
//! of the equivalence checker. Neither variant can certify unsatisfiability.

use std::time::Instant;

use crate::equivalence::CoupledStream;
use crate::formula::{Assignment, CnfFormula, Literal, SolveResult, SolveStats};
use crate::rng::{RngStream, tag};
use crate::solvers::{FlipStep, FlipTrace, candidate_literals};

/// Fault injection for mutation-testing the equivalence checker: a faulted
/// reference picks the argmin draw instead of the argmax, which must be
/// detected as a divergence on any step with more than one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SelectionRule {
    ArgmaxDraw,
    ArgminDraw,
}

/// Outcome of one uniform-literal iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum UniformStep {
    /// The current assignment satisfies the formula; nothing was drawn.
    Satisfied,
    /// The formula is unsatisfied but no literal is eligible. Only reachable
    /// when every unsatisfied clause is empty; the search is stuck.
    Stuck,
    Flipped { var: u32, candidates: Vec<Literal> },
}

/// Steppable uniform-literal search. One iteration consumes (at most) the
/// per-iteration draw vector of the coupled stream, indexed by literal node
/// id, and flips the candidate with the maximum draw. Since the draws are
/// i.i.d. uniform, that is a uniform pick over the candidate set.
pub(crate) struct UniformWalk<'a> {
    formula: &'a CnfFormula,
    pub(crate) assignment: Assignment,
    iteration: u64,
    draws: CoupledStream,
    draw_buf: Vec<f64>,
}

impl<'a> UniformWalk<'a> {
    pub(crate) fn new(formula: &'a CnfFormula, seed: u64) -> Self {
        let draws = CoupledStream::new(seed, formula.num_vars());
        let assignment = draws.initial_assignment();
        UniformWalk {
            formula,
            assignment,
            iteration: 0,
            draws,
            draw_buf: Vec::new(),
        }
    }

    /// Restart from an explicit assignment; draws stay tied to the seed.
    pub(crate) fn with_initial(formula: &'a CnfFormula, seed: u64, initial: Assignment) -> Self {
        let mut walk = UniformWalk::new(formula, seed);
        walk.assignment = initial;
        walk
    }

    pub(crate) fn iteration(&self) -> u64 {
        self.iteration
    }

    pub(crate) fn step(&mut self) -> UniformStep {
        self.step_with_rule(SelectionRule::ArgmaxDraw)
    }

    pub(crate) fn step_with_rule(&mut self, rule: SelectionRule) -> UniformStep {
        self.iteration += 1;
        if self.formula.evaluate(&self.assignment) {
            return UniformStep::Satisfied;
        }
        let candidates = candidate_literals(self.formula, &self.assignment);
        if candidates.is_empty() {
            return UniformStep::Stuck;
        }
        self.draws
            .draws_for_iteration(self.iteration, &mut self.draw_buf);
        // Strict comparison over ascending node ids: ties (which have
        // probability zero under continuous draws) resolve to the lowest id.
        let mut best = candidates[0];
        let mut best_draw = self.draw_buf[best.node_id()];
        for &lit in &candidates[1..] {
            let d = self.draw_buf[lit.node_id()];
            let better = match rule {
                SelectionRule::ArgmaxDraw => d > best_draw,
                SelectionRule::ArgminDraw => d < best_draw,
            };
            if better {
                best = lit;
                best_draw = d;
            }
        }
        let var = best.var();
        self.assignment.flip(var);
        UniformStep::Flipped { var, candidates }
    }
}

/// Uniform-literal local search: per step, flip a variable chosen uniformly
/// among the literals of currently unsatisfied clauses. Returns `Sat` the
/// first time the assignment satisfies the formula (including before any
/// flip), otherwise `Unknown` with the full trace.
pub fn walksat_uniform_literal(
    formula: &CnfFormula,
    seed: u64,
    max_flips: u64,
) -> (SolveResult, FlipTrace) {
    let walk = UniformWalk::new(formula, seed);
    run_uniform(formula, walk, max_flips)
}

/// Test entry point with a forced starting assignment.
#[doc(hidden)]
pub fn walksat_uniform_literal_from(
    formula: &CnfFormula,
    seed: u64,
    initial: Assignment,
    max_flips: u64,
) -> (SolveResult, FlipTrace) {
    let walk = UniformWalk::with_initial(formula, seed, initial);
    run_uniform(formula, walk, max_flips)
}

fn run_uniform(
    formula: &CnfFormula,
    mut walk: UniformWalk<'_>,
    max_flips: u64,
) -> (SolveResult, FlipTrace) {
    let start = Instant::now();
    let initial_assignment = walk.assignment.clone();
    let mut steps = Vec::new();
    let mut outcome = None;
    for _ in 0..max_flips {
        match walk.step() {
            UniformStep::Satisfied => {
                outcome = Some(true);
                break;
            }
            UniformStep::Stuck => {
                outcome = Some(false);
                break;
            }
            UniformStep::Flipped { var, candidates } => {
                steps.push(FlipStep {
                    iteration: walk.iteration(),
                    flipped_var: var,
                    candidates,
                    assignment_after: walk.assignment.clone(),
                });
            }
        }
    }
    // The final flip is still eligible to win; check once more without
    // flipping (no draw is consumed either way).
    let satisfied = outcome.unwrap_or_else(|| formula.evaluate(&walk.assignment));
    let stats = SolveStats {
        flips: steps.len() as u64,
        iterations: walk.iteration(),
        wall_time: start.elapsed(),
        ..SolveStats::default()
    };
    let trace = FlipTrace {
        initial_assignment,
        steps,
    };
    let result = if satisfied {
        SolveResult::sat(formula, walk.assignment, stats).expect("satisfaction was just checked")
    } else {
        SolveResult::unknown(stats)
    };
    (result, trace)
}

/// Classic WalkSAT. Per step: pick an unsatisfied clause uniformly; with
/// probability `noise_p` flip a uniform variable of that clause, otherwise
/// flip the clause variable minimizing the break count (ties toward the
/// lowest variable index).
pub fn walksat_classic(
    formula: &CnfFormula,
    seed: u64,
    noise_p: f64,
    max_flips: u64,
) -> (SolveResult, FlipTrace) {
    assert!(
        (0.0..=1.0).contains(&noise_p),
        "noise probability must be within [0, 1]"
    );
    let start = Instant::now();
    let n = formula.num_vars();
    let mut rng = RngStream::derived(seed, tag::LOCAL_SEARCH, 0);
    let mut assignment = Assignment::all_false(n);
    for var in 1..=n {
        assignment.set(var, rng.next_bool());
    }
    let initial_assignment = assignment.clone();
    let mut steps = Vec::new();
    let mut satisfied = formula.evaluate(&assignment);
    let mut iteration = 0;

    while !satisfied && (steps.len() as u64) < max_flips {
        iteration += 1;
        let unsat = formula.unsat_clauses(&assignment);
        // Empty clauses carry no variable to flip; if nothing else is
        // unsatisfied the search is stuck.
        let pickable: Vec<usize> = unsat
            .into_iter()
            .filter(|&j| !formula.clause(j).is_empty())
            .collect();
        if pickable.is_empty() {
            break;
        }
        let j = pickable[rng.next_below(pickable.len())];
        let clause = formula.clause(j);
        let var = if rng.next_unit() < noise_p {
            clause.literals()[rng.next_below(clause.len())].var()
        } else {
            min_break_variable(formula, &assignment, j)
        };
        assignment.flip(var);
        steps.push(FlipStep {
            iteration,
            flipped_var: var,
            candidates: clause.literals().to_vec(),
            assignment_after: assignment.clone(),
        });
        satisfied = formula.evaluate(&assignment);
    }

    let stats = SolveStats {
        flips: steps.len() as u64,
        iterations: iteration,
        wall_time: start.elapsed(),
        ..SolveStats::default()
    };
    let trace = FlipTrace {
        initial_assignment,
        steps,
    };
    let result = if satisfied {
        SolveResult::sat(formula, assignment, stats).expect("loop exits satisfied")
    } else {
        SolveResult::unknown(stats)
    };
    (result, trace)
}

/// Variable of clause `j` whose flip falsifies the fewest currently
/// satisfied clauses; ties break toward the lowest variable index.
fn min_break_variable(formula: &CnfFormula, assignment: &Assignment, j: usize) -> u32 {
    let mut best_var = 0;
    let mut best_break = usize::MAX;
    for lit in formula.clause(j).literals() {
        let var = lit.var();
        let breaks = break_count(formula, assignment, var);
        if breaks < best_break || (breaks == best_break && var < best_var) {
            best_var = var;
            best_break = breaks;
        }
    }
    best_var
}

fn break_count(formula: &CnfFormula, assignment: &Assignment, var: u32) -> usize {
    let mut count = 0;
    for clause in formula.clauses() {
        if !clause.literals().iter().any(|l| l.var() == var) {
            continue;
        }
        // Broken iff the clause's only true literal is the one on `var`.
        let mut true_lits = 0;
        let mut true_on_var = false;
        for lit in clause.literals() {
            if lit.value_under(assignment) {
                true_lits += 1;
                if lit.var() == var {
                    true_on_var = true;
                }
            }
        }
        if true_lits == 1 && true_on_var {
            count += 1;
        }
    }
    count
}
