//! Reference solvers: stochastic local search (classic WalkSAT, the
//! uniform-literal variant, GSAT) and complete DPLL with a residual-graph
//! trace.

pub mod dpll;
pub mod gsat;
pub mod walksat;

pub use dpll::{
    DpllEvent, DpllEventKind, DpllOptions, DpllTrace, count_graph_reconfigurations, dpll, dpll_with,
};
pub use gsat::gsat;
pub use walksat::{walksat_classic, walksat_uniform_literal};

use thiserror::Error;

use crate::formula::{Assignment, CnfFormula, Literal};

/// One recorded flip of a local-search run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipStep {
    pub iteration: u64,
    pub flipped_var: u32,
    /// Literals that were eligible immediately before the flip, sorted by
    /// node id.
    pub candidates: Vec<Literal>,
    pub assignment_after: Assignment,
}

/// Full flip history of a local-search run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipTrace {
    pub initial_assignment: Assignment,
    pub steps: Vec<FlipStep>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("step {step}: candidate set is empty")]
    EmptyCandidates { step: usize },
    #[error("step {step}: flipped variable {var} is not a candidate")]
    FlipOutsideCandidates { step: usize, var: u32 },
    #[error("step {step}: assignment does not differ in exactly the flipped variable")]
    AssignmentDrift { step: usize },
}

impl FlipTrace {
    /// Checks the structural invariants: candidates nonempty, the flipped
    /// variable is one of them, and consecutive assignments differ in
    /// exactly that variable.
    pub fn well_formed(&self) -> Result<(), TraceError> {
        let mut prev = &self.initial_assignment;
        for (i, step) in self.steps.iter().enumerate() {
            if step.candidates.is_empty() {
                return Err(TraceError::EmptyCandidates { step: i });
            }
            if !step.candidates.iter().any(|l| l.var() == step.flipped_var) {
                return Err(TraceError::FlipOutsideCandidates {
                    step: i,
                    var: step.flipped_var,
                });
            }
            let mut expected = prev.clone();
            expected.flip(step.flipped_var);
            if expected != step.assignment_after {
                return Err(TraceError::AssignmentDrift { step: i });
            }
            prev = &step.assignment_after;
        }
        Ok(())
    }

    /// Semantic legality against the formula: every flipped variable occurs
    /// in some clause that was unsatisfied immediately before the flip.
    pub fn flips_target_unsat_clauses(&self, formula: &CnfFormula) -> bool {
        let mut current = self.initial_assignment.clone();
        for step in &self.steps {
            let legal = formula.unsat_clauses(&current).iter().any(|&j| {
                formula
                    .clause(j)
                    .literals()
                    .iter()
                    .any(|l| l.var() == step.flipped_var)
            });
            if !legal {
                return false;
            }
            current.flip(step.flipped_var);
        }
        true
    }
}

/// Literals occurring in at least one clause unsatisfied under `assignment`,
/// deduplicated and sorted by node id. This is the flip-eligibility set of
/// the uniform-literal search and, equally, the candidate set the embedding
/// machine derives from its messages.
pub fn candidate_literals(formula: &CnfFormula, assignment: &Assignment) -> Vec<Literal> {
    let mut seen = vec![false; 2 * formula.num_vars() as usize];
    for j in formula.unsat_clauses(assignment) {
        for &lit in formula.clause(j).literals() {
            seen[lit.node_id()] = true;
        }
    }
    seen.iter()
        .enumerate()
        .filter(|&(_, &s)| s)
        .map(|(id, _)| Literal::from_node_id(id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::tests::iff2;

    #[test]
    fn candidate_literals_of_the_fixture() {
        let f = iff2();
        // Under 10 only the second clause (!x1 | x2) is unsatisfied.
        let a = Assignment::new(vec![true, false]);
        assert_eq!(
            candidate_literals(&f, &a),
            vec![Literal::negative(1), Literal::positive(2)]
        );
        let sat = Assignment::new(vec![true, true]);
        assert!(candidate_literals(&f, &sat).is_empty());
    }

    #[test]
    fn trace_validator_catches_drift() {
        let f = iff2();
        let initial = Assignment::new(vec![true, false]);
        let mut after = initial.clone();
        after.flip(1);
        let good = FlipTrace {
            initial_assignment: initial.clone(),
            steps: vec![FlipStep {
                iteration: 1,
                flipped_var: 1,
                candidates: candidate_literals(&f, &initial),
                assignment_after: after.clone(),
            }],
        };
        assert!(good.well_formed().is_ok());

        let drifted = FlipTrace {
            initial_assignment: initial.clone(),
            steps: vec![FlipStep {
                iteration: 1,
                flipped_var: 2,
                candidates: candidate_literals(&f, &initial),
                assignment_after: after,
            }],
        };
        assert_eq!(
            drifted.well_formed(),
            Err(TraceError::AssignmentDrift { step: 0 })
        );
    }
}
