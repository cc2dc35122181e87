//! CNF data model and semantic evaluation.
//!
//! Variables are 1-based to mirror DIMACS exactly. A [`CnfFormula`] is
//! immutable after construction and safe to share across threads; all
//! evaluation operations are pure.

pub mod dimacs;
pub mod generate;

use std::fmt;
use std::time::Duration;

use thiserror::Error;

/// Hard cap for [`brute_force_sat`]; enumeration is exponential in the
/// variable count.
pub const BRUTE_FORCE_MAX_VARS: u32 = 25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("literal references variable {var} but the formula has only {num_vars} variables")]
    VariableOutOfRange { var: u32, num_vars: u32 },
}

/// A signed occurrence of a variable.
///
/// Ordering follows node-id order: positive before negative within a
/// variable, variables ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    /// `var` must be at least 1.
    pub fn new(var: u32, negated: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, negated }
    }

    pub fn positive(var: u32) -> Self {
        Literal::new(var, false)
    }

    pub fn negative(var: u32) -> Self {
        Literal::new(var, true)
    }

    /// Parses the DIMACS integer convention; returns `None` for 0.
    pub fn from_dimacs(code: i64) -> Option<Self> {
        if code == 0 || code.unsigned_abs() > u64::from(u32::MAX) {
            return None;
        }
        Some(Literal::new(code.unsigned_abs() as u32, code < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var);
        if self.negated { -v } else { v }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Node id in the literal-clause graph: `2*(var-1)` for the positive
    /// literal, `2*(var-1)+1` for the negative one.
    pub fn node_id(self) -> usize {
        2 * (self.var as usize - 1) + usize::from(self.negated)
    }

    /// Inverse of [`Literal::node_id`].
    pub fn from_node_id(id: usize) -> Self {
        Literal::new((id / 2) as u32 + 1, id % 2 == 1)
    }

    /// Truth value under a total assignment.
    pub fn value_under(self, assignment: &Assignment) -> bool {
        assignment.get(self.var) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals. May be empty (always false) or tautological
/// (contains both polarities of a variable, always true).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, silently dropping duplicate literals (same variable,
    /// same polarity) while preserving first-occurrence order.
    pub fn new(literals: Vec<Literal>) -> Self {
        let mut seen: Vec<Literal> = Vec::with_capacity(literals.len());
        for lit in literals {
            if !seen.contains(&lit) {
                seen.push(lit);
            }
        }
        Clause { literals: seen }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.contains(&lit)
    }

    pub fn is_tautology(&self) -> bool {
        self.literals
            .iter()
            .any(|lit| self.literals.contains(&lit.negate()))
    }

    /// True iff some literal evaluates true; the empty clause is false.
    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.literals.iter().any(|lit| lit.value_under(assignment))
    }
}

/// An immutable CNF formula over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        for clause in &clauses {
            for lit in clause.literals() {
                if lit.var() > num_vars {
                    return Err(FormulaError::VariableOutOfRange {
                        var: lit.var(),
                        num_vars,
                    });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    /// Conjunction over all clauses; the empty formula is true.
    pub fn evaluate(&self, assignment: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied_by(assignment))
    }

    /// Indices of the clauses falsified by `assignment`, ascending.
    pub fn unsat_clauses(&self, assignment: &Assignment) -> Vec<usize> {
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied_by(assignment))
            .map(|(j, _)| j)
            .collect()
    }
}

/// A total assignment over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all_false(num_vars: u32) -> Self {
        Assignment {
            values: vec![false; num_vars as usize],
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn get(&self, var: u32) -> bool {
        self.values[var as usize - 1]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values[var as usize - 1] = value;
    }

    pub fn flip(&mut self, var: u32) {
        self.values[var as usize - 1] ^= true;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// One character per variable, `'1'` for true, variable 1 first.
    pub fn bit_string(&self) -> String {
        self.values
            .iter()
            .map(|&v| if v { '1' } else { '0' })
            .collect()
    }

    /// DIMACS-style witness line, e.g. `1 -2 3`.
    pub fn dimacs_line(&self) -> String {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let var = (i + 1) as i64;
                (if v { var } else { -var }).to_string()
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Number of variables on which two assignments differ.
    pub fn hamming_distance(&self, other: &Assignment) -> usize {
        self.values
            .iter()
            .zip(other.values.iter())
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Counters reported alongside every solve outcome. Each solver fills the
/// counters that apply to it and leaves the rest at zero.
#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub flips: u64,
    pub decisions: u64,
    pub iterations: u64,
    pub wall_time: Duration,
}

/// Three-valued outcome shared by all solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Assignment),
    Unsat,
    Unknown,
}

impl SolveOutcome {
    /// SAT-competition exit-code convention.
    pub fn exit_code(&self) -> i32 {
        match self {
            SolveOutcome::Sat(_) => 10,
            SolveOutcome::Unsat => 20,
            SolveOutcome::Unknown => 0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Sat(_) => "sat",
            SolveOutcome::Unsat => "unsat",
            SolveOutcome::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("claimed satisfying assignment does not satisfy the formula")]
pub struct CertificateError;

/// Outcome plus counters. A `Sat` result can only be built through
/// [`SolveResult::sat`], which verifies the witness.
#[derive(Debug, Clone)]
pub struct SolveResult {
    outcome: SolveOutcome,
    stats: SolveStats,
}

impl SolveResult {
    pub fn sat(
        formula: &CnfFormula,
        assignment: Assignment,
        stats: SolveStats,
    ) -> Result<Self, CertificateError> {
        if !formula.evaluate(&assignment) {
            return Err(CertificateError);
        }
        Ok(SolveResult {
            outcome: SolveOutcome::Sat(assignment),
            stats,
        })
    }

    pub fn unsat(stats: SolveStats) -> Self {
        SolveResult {
            outcome: SolveOutcome::Unsat,
            stats,
        }
    }

    pub fn unknown(stats: SolveStats) -> Self {
        SolveResult {
            outcome: SolveOutcome::Unknown,
            stats,
        }
    }

    pub fn outcome(&self) -> &SolveOutcome {
        &self.outcome
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn is_sat(&self) -> bool {
        matches!(self.outcome, SolveOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self.outcome, SolveOutcome::Unsat)
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match &self.outcome {
            SolveOutcome::Sat(a) => Some(a),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BruteForceError {
    #[error("formula has {num_vars} variables, brute force is capped at {BRUTE_FORCE_MAX_VARS}")]
    TooLarge { num_vars: u32 },
}

/// Exhaustive ground-truth oracle. Enumerates assignments in lexicographic
/// order (variable 1 is the low bit, false before true) and returns the
/// first satisfying one, so its output is deterministic and citable.
pub fn brute_force_sat(formula: &CnfFormula) -> Result<SolveResult, BruteForceError> {
    let n = formula.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(BruteForceError::TooLarge { num_vars: n });
    }
    let start = std::time::Instant::now();
    let mut assignment = Assignment::all_false(n);
    let total: u64 = 1u64 << n;
    let mut stats = SolveStats::default();
    for code in 0..total {
        for i in 0..n {
            assignment.set(i + 1, (code >> i) & 1 == 1);
        }
        stats.iterations += 1;
        if formula.evaluate(&assignment) {
            stats.wall_time = start.elapsed();
            return Ok(SolveResult::sat(formula, assignment, stats)
                .expect("evaluate just confirmed the witness"));
        }
    }
    stats.wall_time = start.elapsed();
    Ok(SolveResult::unsat(stats))
}
