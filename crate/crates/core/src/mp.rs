//! The embedding message-passing machine.
//!
//! The machine evolves real-valued vectors attached to the nodes of the
//! static literal-clause graph. Per variable there is a fixed pair of
//! distinct unit codewords (a "true" code and a "false" code); the two
//! literal nodes of a variable always hold that pair, one each, so the
//! vector state decodes exactly to a Boolean assignment. Per clause there is
//! a fixed unit codeword; a clause node holds either its codeword or the
//! zero vector.
//!
//! One iteration runs two phases over the unchanged graph:
//!
//! 1. Clause phase. For every clause, an aggregation consumes the literal
//!    embeddings of the clause and emits the clause codeword when the
//!    decoded clause is satisfied, the zero vector otherwise
//!    ([`clause_aggregate`]); the combine rule folds that message into the
//!    clause embedding ([`clause_combine`]).
//! 2. Literal phase. For every literal node, an aggregation over the updated
//!    embeddings of its clauses emits the zero message when all of them are
//!    nonzero, and a random nonzero vector otherwise
//!    ([`literal_aggregate`]); the norm of that vector is the node's
//!    per-iteration draw. A single global combine flips the variable whose
//!    message norm is maximal by swapping the codeword pair of its two
//!    literal nodes ([`literal_combine`]).
//!
//! The nonzero messages mark exactly the literals occurring in unsatisfied
//! clauses, and the argmax over i.i.d. uniform draws is a uniform pick among
//! them, so the decoded trajectory replays uniform-literal WalkSAT flip for
//! flip; [`crate::equivalence`] checks that claim run by run. When every
//! message is zero the state is a fixed point and the decoded assignment
//! satisfies the formula. The machine can therefore report `Sat` or run out
//! of iterations; it has no way to certify unsatisfiability.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::equivalence::CoupledStream;
use crate::formula::{Assignment, CnfFormula, Literal, SolveResult, SolveStats};
use crate::lcg::{GraphFingerprint, LcgGraph, build_lcg};
use crate::rng::{RngStream, tag};
use crate::solvers::dpll::count_fingerprint_changes;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MpError {
    #[error("literal embeddings of variable {var} match neither codeword")]
    CorruptState { var: u32 },
    #[error("clause {clause} embedding is outside {{codeword, zero}}")]
    DomainViolation { clause: usize },
}

pub(crate) fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

fn draw_unit_vector(rng: &mut RngStream, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| 2.0 * rng.next_unit() - 1.0).collect();
        let norm = l2_norm(&v);
        if norm > 1e-6 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Per-variable codeword pairs. Distinct nonzero unit vectors, deterministic
/// for a given `(seed, num_vars, dim)`.
#[derive(Debug, Clone)]
pub struct LiteralCodebook {
    dim: usize,
    true_codes: Vec<Vec<f64>>,
    false_codes: Vec<Vec<f64>>,
}

impl LiteralCodebook {
    fn draw(rng: &mut RngStream, num_vars: u32, dim: usize) -> Self {
        let mut true_codes = Vec::with_capacity(num_vars as usize);
        let mut false_codes = Vec::with_capacity(num_vars as usize);
        for _ in 0..num_vars {
            let t = draw_unit_vector(rng, dim);
            let f = loop {
                let f = draw_unit_vector(rng, dim);
                if f != t {
                    break f;
                }
            };
            true_codes.push(t);
            false_codes.push(f);
        }
        LiteralCodebook {
            dim,
            true_codes,
            false_codes,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vars(&self) -> u32 {
        self.true_codes.len() as u32
    }

    pub fn code_true(&self, var: u32) -> &[f64] {
        &self.true_codes[var as usize - 1]
    }

    pub fn code_false(&self, var: u32) -> &[f64] {
        &self.false_codes[var as usize - 1]
    }
}

/// Per-clause initial codewords, unit norm so a zeroed clause embedding is
/// distinguishable by norm alone.
#[derive(Debug, Clone)]
pub struct ClauseCodebook {
    codes: Vec<Vec<f64>>,
}

impl ClauseCodebook {
    fn draw(rng: &mut RngStream, num_clauses: usize, dim: usize) -> Self {
        ClauseCodebook {
            codes: (0..num_clauses)
                .map(|_| draw_unit_vector(rng, dim))
                .collect(),
        }
    }

    pub fn num_clauses(&self) -> usize {
        self.codes.len()
    }

    pub fn code(&self, clause: usize) -> &[f64] {
        &self.codes[clause]
    }
}

/// The evolving vector state: one embedding per literal node and per clause
/// node, plus the iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub(crate) literal: Vec<Vec<f64>>,
    pub(crate) clause: Vec<Vec<f64>>,
    pub(crate) iteration: u64,
}

impl EmbeddingState {
    pub fn literal_embedding(&self, node_id: usize) -> &[f64] {
        &self.literal[node_id]
    }

    pub fn clause_embedding(&self, clause: usize) -> &[f64] {
        &self.clause[clause]
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }
}

/// Scratch space for one iteration's messages.
#[derive(Debug, Clone)]
pub struct MessageBuffer {
    pub(crate) literal: Vec<Vec<f64>>,
    pub(crate) clause: Vec<Vec<f64>>,
}

impl MessageBuffer {
    pub fn new(num_vars: u32, num_clauses: usize, dim: usize) -> Self {
        MessageBuffer {
            literal: vec![vec![0.0; dim]; 2 * num_vars as usize],
            clause: vec![vec![0.0; dim]; num_clauses],
        }
    }

    pub fn literal_message(&self, node_id: usize) -> &[f64] {
        &self.literal[node_id]
    }

    pub fn clause_message(&self, clause: usize) -> &[f64] {
        &self.clause[clause]
    }
}

/// Clause-satisfaction oracle over the literal embeddings.
///
/// A literal node holds its variable's "true" codeword exactly when the
/// literal itself evaluates true under the decoded assignment, so the
/// verdict is a disjunction of codeword comparisons over the clause's
/// members. The verdict always equals direct clause evaluation under
/// [`decode_assignment`]; tests pin that equality.
pub struct ClauseOracle<'a> {
    formula: &'a CnfFormula,
    codes: &'a LiteralCodebook,
}

impl<'a> ClauseOracle<'a> {
    pub fn new(formula: &'a CnfFormula, codes: &'a LiteralCodebook) -> Self {
        ClauseOracle { formula, codes }
    }

    pub fn clause_satisfied(
        &self,
        state: &EmbeddingState,
        clause: usize,
    ) -> Result<bool, MpError> {
        for lit in self.formula.clause(clause).literals() {
            let h = state.literal_embedding(lit.node_id());
            if h == self.codes.code_true(lit.var()) {
                return Ok(true);
            }
            if h != self.codes.code_false(lit.var()) {
                return Err(MpError::CorruptState { var: lit.var() });
            }
        }
        Ok(false)
    }
}

/// Draws the codebooks and the seeded starting assignment, then encodes that
/// assignment into literal embeddings; clause embeddings start at their
/// codewords. The initial assignment comes from the same coupled stream the
/// uniform-literal reference search starts from.
pub fn init_state(
    formula: &CnfFormula,
    seed: u64,
    dim: usize,
) -> (EmbeddingState, LiteralCodebook, ClauseCodebook) {
    assert!(dim >= 1, "embedding dimension must be at least 1");
    let n = formula.num_vars();
    let mut rng = RngStream::derived(seed, tag::CODEBOOK, 0);
    let lit_codes = LiteralCodebook::draw(&mut rng, n, dim);
    let clause_codes = ClauseCodebook::draw(&mut rng, formula.num_clauses(), dim);

    let initial = CoupledStream::new(seed, n).initial_assignment();
    let mut literal = Vec::with_capacity(2 * n as usize);
    for var in 1..=n {
        let (pos, neg) = if initial.get(var) {
            (lit_codes.code_true(var), lit_codes.code_false(var))
        } else {
            (lit_codes.code_false(var), lit_codes.code_true(var))
        };
        literal.push(pos.to_vec());
        literal.push(neg.to_vec());
    }
    let clause = (0..formula.num_clauses())
        .map(|j| clause_codes.code(j).to_vec())
        .collect();
    (
        EmbeddingState {
            literal,
            clause,
            iteration: 0,
        },
        lit_codes,
        clause_codes,
    )
}

/// Reads the Boolean assignment back out of the literal embeddings:
/// variable `i` is true exactly when its positive node holds the "true"
/// codeword. Exact vector equality; embeddings only ever hold codewords.
pub fn decode_assignment(
    state: &EmbeddingState,
    codes: &LiteralCodebook,
) -> Result<Assignment, MpError> {
    let n = codes.num_vars();
    let mut values = Vec::with_capacity(n as usize);
    for var in 1..=n {
        let h = state.literal_embedding(Literal::positive(var).node_id());
        if h == codes.code_true(var) {
            values.push(true);
        } else if h == codes.code_false(var) {
            values.push(false);
        } else {
            return Err(MpError::CorruptState { var });
        }
    }
    Ok(Assignment::new(values))
}

/// Clause-phase aggregation: the clause codeword when the oracle reports the
/// clause satisfied (reading the literal embeddings of the previous
/// iteration), the zero vector otherwise. The empty clause is never
/// satisfied and always yields zero.
pub fn clause_aggregate(
    state: &EmbeddingState,
    clause: usize,
    oracle: &ClauseOracle<'_>,
    codes: &ClauseCodebook,
) -> Result<Vec<f64>, MpError> {
    Ok(if oracle.clause_satisfied(state, clause)? {
        codes.code(clause).to_vec()
    } else {
        vec![0.0; codes.code(clause).len()]
    })
}

pub(crate) enum ClauseUpdate {
    Keep,
    Reset,
    Clear,
}

/// The three-branch clause combine rule over the `{codeword, zero}` domain:
/// message equal to the previous embedding keeps it; a message of larger
/// norm resets to the codeword; otherwise the embedding is cleared to zero.
pub(crate) fn clause_combine_update(
    prev: &[f64],
    msg: &[f64],
    init: &[f64],
    clause: usize,
) -> Result<ClauseUpdate, MpError> {
    let in_domain = |v: &[f64]| v == init || is_zero(v);
    if !in_domain(prev) || !in_domain(msg) {
        return Err(MpError::DomainViolation { clause });
    }
    Ok(if prev == msg {
        ClauseUpdate::Keep
    } else if l2_norm(prev) < l2_norm(msg) {
        ClauseUpdate::Reset
    } else {
        ClauseUpdate::Clear
    })
}

/// Applies the clause combine rule, returning the clause embedding for this
/// iteration. `prev` and `msg` must both lie in `{init, zero}`.
pub fn clause_combine(prev: &[f64], msg: &[f64], init: &[f64]) -> Result<Vec<f64>, MpError> {
    Ok(match clause_combine_update(prev, msg, init, usize::MAX)? {
        ClauseUpdate::Keep => prev.to_vec(),
        ClauseUpdate::Reset => init.to_vec(),
        ClauseUpdate::Clear => vec![0.0; init.len()],
    })
}

/// Literal-phase aggregation: a nonzero vector of norm `draw` if any
/// neighboring clause embedding is zero, the zero vector when all are
/// nonzero. A literal with no occurrences has an empty product of norms,
/// which counts as nonzero, so isolated literals are never flip candidates.
pub fn literal_aggregate<'a>(
    neighbor_embeddings: impl IntoIterator<Item = &'a [f64]>,
    draw: f64,
    dim: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if neighbor_embeddings.into_iter().any(is_zero) {
        out[0] = draw;
    }
    out
}

/// Global literal combine: if every message is zero the state is a fixed
/// point and nothing changes; otherwise the literal node with the maximal
/// message norm wins (ties toward the lowest node id) and the codeword pair
/// of its variable is swapped, flipping exactly that decoded variable.
pub fn literal_combine(messages: &MessageBuffer, state: &mut EmbeddingState) -> Option<u32> {
    let mut best: Option<(usize, f64)> = None;
    for (node, msg) in messages.literal.iter().enumerate() {
        let norm = l2_norm(msg);
        if norm > 0.0 && best.is_none_or(|(_, b)| norm > b) {
            best = Some((node, norm));
        }
    }
    let (node, _) = best?;
    let var = Literal::from_node_id(node).var();
    let pos = Literal::positive(var).node_id();
    state.literal.swap(pos, pos + 1);
    Some(var)
}

/// Everything observable about one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MpStepReport {
    pub iteration: u64,
    /// Oracle verdict per clause, indexed by clause id.
    pub clause_verdicts: Vec<bool>,
    /// Literals with nonzero messages, sorted by node id.
    pub candidates: Vec<Literal>,
    pub flipped_var: Option<u32>,
    /// True exactly when the candidate set is empty.
    pub fixed_point: bool,
    /// Decoded assignment after the step.
    pub assignment: Assignment,
    /// Fingerprint of the graph consulted this iteration. The graph is
    /// immutable, so this never varies within a run; recording it per step
    /// is what lets the reconfiguration count be measured rather than
    /// asserted.
    pub graph_fingerprint: GraphFingerprint,
}

#[derive(Serialize)]
struct MpStepRecord<'a> {
    k: u64,
    unsat_clause_indices: Vec<usize>,
    candidate_literals: Vec<i64>,
    flipped_var: Option<u32>,
    fixed_point: bool,
    assignment: &'a str,
}

impl MpStepReport {
    pub fn unsat_clause_indices(&self) -> Vec<usize> {
        self.clause_verdicts
            .iter()
            .enumerate()
            .filter(|&(_, &sat)| !sat)
            .map(|(j, _)| j)
            .collect()
    }

    /// One JSON object, stable field order, suitable for line-oriented trace
    /// files.
    pub fn to_json_line(&self) -> String {
        let bits = self.assignment.bit_string();
        let record = MpStepRecord {
            k: self.iteration,
            unsat_clause_indices: self.unsat_clause_indices(),
            candidate_literals: self.candidates.iter().map(|l| l.to_dimacs()).collect(),
            flipped_var: self.flipped_var,
            fixed_point: self.fixed_point,
            assignment: &bits,
        };
        serde_json::to_string(&record).expect("step record serializes")
    }
}

/// Full run history.
#[derive(Debug, Clone, PartialEq)]
pub struct MpTrace {
    pub initial_assignment: Assignment,
    pub graph_fingerprint: GraphFingerprint,
    pub steps: Vec<MpStepReport>,
}

impl MpTrace {
    /// Steps that flipped a variable.
    pub fn flip_steps(&self) -> impl Iterator<Item = &MpStepReport> {
        self.steps.iter().filter(|s| s.flipped_var.is_some())
    }

    /// Changes between the graph fingerprints consulted across the run;
    /// zero by construction, measured rather than assumed.
    pub fn graph_reconfigurations(&self) -> usize {
        count_fingerprint_changes(
            std::iter::once(self.graph_fingerprint)
                .chain(self.steps.iter().map(|s| s.graph_fingerprint)),
        )
    }

    /// Line-oriented JSON export of every step.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&step.to_json_line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct MpRunConfig {
    pub seed: u64,
    /// Embedding dimension; the decoded trajectory does not depend on it.
    pub dim: usize,
    pub max_iterations: u64,
    /// Scale applied to the per-literal draw used as a message norm. Must be
    /// in (0, 1]. The coupled equivalence checker requires 1.0, where the
    /// message norm equals the raw draw exactly.
    pub epsilon_scale: f64,
}

impl MpRunConfig {
    pub fn new(seed: u64) -> Self {
        MpRunConfig {
            seed,
            dim: 8,
            max_iterations: 100_000,
            epsilon_scale: 1.0,
        }
    }

    pub fn with_max_iterations(mut self, max_iterations: u64) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }
}

/// A machine instance bound to one formula and one seed. Step it manually or
/// let [`mp_run`] drive it to a fixed point.
pub struct MpMachine<'a> {
    formula: &'a CnfFormula,
    graph: LcgGraph,
    graph_fingerprint: GraphFingerprint,
    lit_codes: LiteralCodebook,
    clause_codes: ClauseCodebook,
    state: EmbeddingState,
    messages: MessageBuffer,
    draws: CoupledStream,
    draw_buf: Vec<f64>,
    epsilon_scale: f64,
}

impl<'a> MpMachine<'a> {
    pub fn new(formula: &'a CnfFormula, config: &MpRunConfig) -> Self {
        assert!(
            config.epsilon_scale > 0.0 && config.epsilon_scale <= 1.0,
            "epsilon scale must be in (0, 1]"
        );
        let (state, lit_codes, clause_codes) = init_state(formula, config.seed, config.dim);
        let graph = build_lcg(formula);
        let graph_fingerprint = graph.fingerprint();
        let messages = MessageBuffer::new(formula.num_vars(), formula.num_clauses(), config.dim);
        MpMachine {
            formula,
            graph,
            graph_fingerprint,
            lit_codes,
            clause_codes,
            state,
            messages,
            draws: CoupledStream::new(config.seed, formula.num_vars()),
            draw_buf: Vec::new(),
            epsilon_scale: config.epsilon_scale,
        }
    }

    pub fn state(&self) -> &EmbeddingState {
        &self.state
    }

    pub fn messages(&self) -> &MessageBuffer {
        &self.messages
    }

    pub fn literal_codebook(&self) -> &LiteralCodebook {
        &self.lit_codes
    }

    pub fn clause_codebook(&self) -> &ClauseCodebook {
        &self.clause_codes
    }

    pub fn graph(&self) -> &LcgGraph {
        &self.graph
    }

    pub fn graph_fingerprint(&self) -> GraphFingerprint {
        self.graph_fingerprint
    }

    pub fn iteration(&self) -> u64 {
        self.state.iteration
    }

    pub fn decoded(&self) -> Result<Assignment, MpError> {
        decode_assignment(&self.state, &self.lit_codes)
    }

    /// One full iteration: clause phase, then literal phase on the updated
    /// clause embeddings, then the single global flip.
    pub fn step(&mut self) -> Result<MpStepReport, MpError> {
        let k = self.state.iteration + 1;
        let oracle = ClauseOracle::new(self.formula, &self.lit_codes);

        // Clause phase. Verdicts read the literal embeddings of iteration
        // k-1; each clause embedding is folded with its message in place.
        let mut verdicts = Vec::with_capacity(self.formula.num_clauses());
        for j in 0..self.formula.num_clauses() {
            let sat = oracle.clause_satisfied(&self.state, j)?;
            verdicts.push(sat);
            let init = self.clause_codes.code(j);
            let msg = &mut self.messages.clause[j];
            if sat {
                msg.copy_from_slice(init);
            } else {
                msg.fill(0.0);
            }
            match clause_combine_update(&self.state.clause[j], msg, init, j)? {
                ClauseUpdate::Keep => {}
                ClauseUpdate::Reset => self.state.clause[j].copy_from_slice(init),
                ClauseUpdate::Clear => self.state.clause[j].fill(0.0),
            }
        }

        // Literal phase over the updated clause embeddings. The draw vector
        // is a pure function of (seed, k), indexed by literal node id.
        self.draws.draws_for_iteration(k, &mut self.draw_buf);
        let mut candidates = Vec::new();
        for node in 0..self.graph.num_literal_nodes() {
            let any_zero = self
                .graph
                .neighborhood_of_node(node)
                .iter()
                .any(|&j| is_zero(&self.state.clause[j]));
            let msg = &mut self.messages.literal[node];
            msg.fill(0.0);
            if any_zero {
                msg[0] = self.draw_buf[node] * self.epsilon_scale;
                candidates.push(Literal::from_node_id(node));
            }
        }

        let flipped_var = literal_combine(&self.messages, &mut self.state);
        self.state.iteration = k;

        let fixed_point = candidates.is_empty();
        debug_assert_eq!(fixed_point, flipped_var.is_none());
        let assignment = decode_assignment(&self.state, &self.lit_codes)?;
        Ok(MpStepReport {
            iteration: k,
            clause_verdicts: verdicts,
            candidates,
            flipped_var,
            fixed_point,
            assignment,
            graph_fingerprint: self.graph_fingerprint,
        })
    }
}

/// Runs the machine for at most `config.max_iterations` iterations. Returns
/// `Sat` at the first fixed point, with the decoded assignment double-checked
/// by direct evaluation; otherwise `Unknown`. Never returns `Unsat`.
pub fn mp_run(formula: &CnfFormula, config: &MpRunConfig) -> (SolveResult, MpTrace) {
    let start = Instant::now();
    let mut machine = MpMachine::new(formula, config);
    let initial_assignment = machine
        .decoded()
        .expect("freshly initialized state decodes");
    let graph_fingerprint = machine.graph_fingerprint();
    let mut steps = Vec::new();
    let mut flips = 0;
    let mut satisfied = None;
    for _ in 0..config.max_iterations {
        let report = machine.step().expect("machine preserves its invariants");
        if report.flipped_var.is_some() {
            flips += 1;
        }
        let fixed_point = report.fixed_point;
        steps.push(report);
        if fixed_point {
            let assignment = steps.last().expect("just pushed").assignment.clone();
            satisfied = Some(assignment);
            break;
        }
    }
    let stats = SolveStats {
        flips,
        iterations: machine.iteration(),
        wall_time: start.elapsed(),
        ..SolveStats::default()
    };
    let trace = MpTrace {
        initial_assignment,
        graph_fingerprint,
        steps,
    };
    let result = match satisfied {
        // A fixed point means no literal sits in an unsatisfied clause. For
        // formulas without empty clauses that is satisfaction; an empty
        // clause can never be satisfied yet contributes no candidates, so
        // the evaluation check below refuses to certify it.
        Some(assignment) if formula.evaluate(&assignment) => {
            SolveResult::sat(formula, assignment, stats).expect("evaluation just confirmed")
        }
        _ => SolveResult::unknown(stats),
    };
    (result, trace)
}
