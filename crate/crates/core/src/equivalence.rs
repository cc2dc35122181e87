//! Coupled-randomness differential checking.
//!
//! The embedding machine and the uniform-literal search are driven from the
//! same [`CoupledStream`]: one starting assignment plus, per iteration, one
//! draw vector indexed by literal node id. The machine uses a node's draw as
//! its message norm; the reference search picks the argmax of the same draws
//! over its candidate set. Coupling by shared vectors rather than by a
//! shared stream cursor means consumption order inside either side can never
//! cause drift, so a reported divergence is always a semantic one.
//!
//! [`run_coupled`] executes both sides in lock step and compares, per
//! iteration, the candidate literal set, the flipped variable, and the full
//! assignment, then the final outcome. Matching is exact: set equality,
//! identical variables, bit-identical assignments. No tolerance anywhere.

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Assignment, CnfFormula};
use crate::mp::{MpMachine, MpRunConfig, MpTrace};
use crate::rng::{RngStream, tag};
use crate::solvers::walksat::{SelectionRule, UniformStep, UniformWalk};
use crate::solvers::{FlipStep, FlipTrace};

/// Shared randomness for one coupled run: a seeded starting assignment and,
/// for each iteration `k`, a vector of `2n` uniform draws in (0, 1], one per
/// literal node. Draw vectors are pure functions of `(seed, k)`, so both
/// consumers can fetch them independently and still read identical values.
#[derive(Debug, Clone)]
pub struct CoupledStream {
    seed: u64,
    num_vars: u32,
}

impl CoupledStream {
    pub fn new(seed: u64, num_vars: u32) -> Self {
        CoupledStream { seed, num_vars }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The starting assignment both sides share.
    pub fn initial_assignment(&self) -> Assignment {
        let mut rng = RngStream::derived(self.seed, tag::INITIAL_ASSIGNMENT, 0);
        let mut assignment = Assignment::all_false(self.num_vars);
        for var in 1..=self.num_vars {
            assignment.set(var, rng.next_bool());
        }
        assignment
    }

    /// Fills `out` with iteration `k`'s draw vector, indexed by literal node
    /// id.
    pub fn draws_for_iteration(&self, k: u64, out: &mut Vec<f64>) {
        let mut rng = RngStream::derived(self.seed, tag::ITERATION_DRAWS, k);
        out.clear();
        out.extend((0..2 * self.num_vars as usize).map(|_| rng.next_unit()));
    }
}

/// Which compared field diverged first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceField {
    CandidateSet,
    Flip,
    Assignment,
    Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Divergence {
    /// Iteration at which the fields differed; 0 means the starting
    /// assignments already differed.
    pub step: u64,
    pub field: DivergenceField,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    /// Iterations compared, including a terminal fixed-point iteration.
    pub steps_compared: u64,
    pub matched: bool,
    pub first_divergence: Option<Divergence>,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("traces have different flip counts: machine {machine}, reference {reference}")]
    LengthMismatch { machine: usize, reference: usize },
}

/// Fault injection for mutation-testing the checker itself.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceFault {
    #[default]
    None,
    /// The reference picks the argmin draw instead of the argmax.
    SelectArgmin,
}

/// Runs the machine and the uniform-literal reference from the same seed and
/// compares them in lock step until a divergence, a shared termination, or
/// `max_steps` flips.
pub fn run_coupled(formula: &CnfFormula, seed: u64, max_steps: u64) -> EquivalenceReport {
    run_lockstep(formula, seed, seed, max_steps, ReferenceFault::None).0
}

/// Like [`run_coupled`] but also returns both traces for inspection.
pub fn run_coupled_traced(
    formula: &CnfFormula,
    seed: u64,
    max_steps: u64,
) -> (EquivalenceReport, MpTrace, FlipTrace) {
    run_lockstep(formula, seed, seed, max_steps, ReferenceFault::None)
}

#[doc(hidden)]
pub fn run_coupled_with_fault(
    formula: &CnfFormula,
    seed: u64,
    max_steps: u64,
    fault: ReferenceFault,
) -> EquivalenceReport {
    run_lockstep(formula, seed, seed, max_steps, fault).0
}

/// Decoupled seeds; the negative control for checker sensitivity.
#[doc(hidden)]
pub fn run_decoupled(
    formula: &CnfFormula,
    machine_seed: u64,
    reference_seed: u64,
    max_steps: u64,
) -> EquivalenceReport {
    run_lockstep(
        formula,
        machine_seed,
        reference_seed,
        max_steps,
        ReferenceFault::None,
    )
    .0
}

fn run_lockstep(
    formula: &CnfFormula,
    machine_seed: u64,
    reference_seed: u64,
    max_steps: u64,
    fault: ReferenceFault,
) -> (EquivalenceReport, MpTrace, FlipTrace) {
    let config = MpRunConfig::new(machine_seed);
    let mut machine = MpMachine::new(formula, &config);
    let mut walk = UniformWalk::new(formula, reference_seed);
    let rule = match fault {
        ReferenceFault::None => SelectionRule::ArgmaxDraw,
        ReferenceFault::SelectArgmin => SelectionRule::ArgminDraw,
    };

    let machine_initial = machine.decoded().expect("fresh state decodes");
    let graph_fingerprint = machine.graph_fingerprint();
    let mut mp_trace = MpTrace {
        initial_assignment: machine_initial.clone(),
        graph_fingerprint,
        steps: Vec::new(),
    };
    let mut flip_trace = FlipTrace {
        initial_assignment: walk.assignment.clone(),
        steps: Vec::new(),
    };

    let mut steps_compared = 0;
    let mut divergence = None;

    if machine_initial != flip_trace.initial_assignment {
        divergence = Some(Divergence {
            step: 0,
            field: DivergenceField::Assignment,
        });
    }

    let mut flips = 0;
    while divergence.is_none() && flips < max_steps {
        let report = machine.step().expect("machine preserves its invariants");
        let reference = walk.step_with_rule(rule);
        let step = report.iteration;
        steps_compared += 1;

        let reference_candidates: &[_] = match &reference {
            UniformStep::Satisfied | UniformStep::Stuck => &[],
            UniformStep::Flipped { candidates, .. } => candidates,
        };
        if report.candidates != reference_candidates {
            divergence = Some(Divergence {
                step,
                field: DivergenceField::CandidateSet,
            });
            break;
        }

        match (&report.flipped_var, &reference) {
            (None, UniformStep::Satisfied | UniformStep::Stuck) => {
                // Shared terminal iteration. Outcomes: the machine certifies
                // only what evaluation confirms; the reference is satisfied
                // or stuck.
                let machine_sat = formula.evaluate(&report.assignment);
                let reference_sat = matches!(reference, UniformStep::Satisfied);
                if machine_sat != reference_sat {
                    divergence = Some(Divergence {
                        step,
                        field: DivergenceField::Outcome,
                    });
                } else if machine_sat && report.assignment != walk.assignment {
                    divergence = Some(Divergence {
                        step,
                        field: DivergenceField::Assignment,
                    });
                }
                mp_trace.steps.push(report);
                break;
            }
            (Some(machine_var), UniformStep::Flipped { var, .. }) => {
                if machine_var != var {
                    divergence = Some(Divergence {
                        step,
                        field: DivergenceField::Flip,
                    });
                    break;
                }
                if report.assignment != walk.assignment {
                    divergence = Some(Divergence {
                        step,
                        field: DivergenceField::Assignment,
                    });
                    break;
                }
                flips += 1;
                flip_trace.steps.push(FlipStep {
                    iteration: step,
                    flipped_var: *var,
                    candidates: report.candidates.clone(),
                    assignment_after: walk.assignment.clone(),
                });
                mp_trace.steps.push(report);
            }
            _ => {
                divergence = Some(Divergence {
                    step,
                    field: DivergenceField::Flip,
                });
                break;
            }
        }
    }

    let report = EquivalenceReport {
        steps_compared,
        matched: divergence.is_none(),
        first_divergence: divergence,
    };
    (report, mp_trace, flip_trace)
}

/// True iff the machine's decoded assignment equals the reference assignment
/// at every common step, starting from the initial assignments. Expects
/// traces from the same coupled run; differing flip counts are an error.
pub fn check_decode_consistency(
    machine: &MpTrace,
    reference: &FlipTrace,
) -> Result<bool, EquivalenceError> {
    let machine_flips: Vec<_> = machine.flip_steps().collect();
    if machine_flips.len() != reference.steps.len() {
        return Err(EquivalenceError::LengthMismatch {
            machine: machine_flips.len(),
            reference: reference.steps.len(),
        });
    }
    if machine.initial_assignment != reference.initial_assignment {
        return Ok(false);
    }
    Ok(machine_flips
        .iter()
        .zip(reference.steps.iter())
        .all(|(m, r)| m.assignment == r.assignment_after))
}
