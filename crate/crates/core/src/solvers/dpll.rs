//! Complete DPLL search with a residual-formula trace.
//!
//! The solver applies unit propagation to fixpoint before every decision and
//! branches on the lowest-index unassigned variable, true first. Determinism
//! is chosen over cleverness so traces are reproducible.
//!
//! After every event (decision, unit propagation, backtrack) the trace
//! records a fingerprint of the residual formula: satisfied clauses deleted,
//! falsified literals removed. Complete search keeps rewriting that residual
//! structure, which is exactly what [`count_graph_reconfigurations`] counts;
//! the embedding machine in [`crate::mp`] consults an unchanged graph every
//! iteration and its count is always zero.
//!
//! Intended for desk-scale inputs (tens of variables); there are no watched
//! literals and every event pays for a residual fingerprint.

use std::time::Instant;

use crate::formula::{Assignment, Clause, CnfFormula, Literal, SolveResult, SolveStats};
use crate::lcg::{GraphFingerprint, fingerprint_formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpllEventKind {
    Decision,
    UnitPropagation,
    Backtrack,
}

impl DpllEventKind {
    pub fn label(&self) -> &'static str {
        match self {
            DpllEventKind::Decision => "decision",
            DpllEventKind::UnitPropagation => "unit-propagation",
            DpllEventKind::Backtrack => "backtrack",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpllEvent {
    pub kind: DpllEventKind,
    /// Fingerprint of the residual formula after the event.
    pub fingerprint: GraphFingerprint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpllTrace {
    /// Fingerprint of the input formula, before any event.
    pub initial_fingerprint: GraphFingerprint,
    pub events: Vec<DpllEvent>,
}

impl DpllTrace {
    pub fn fingerprint_sequence(&self) -> impl Iterator<Item = GraphFingerprint> + '_ {
        std::iter::once(self.initial_fingerprint).chain(self.events.iter().map(|e| e.fingerprint))
    }
}

/// Number of consecutive fingerprint changes in the trace: how many times
/// the search rewrote the formula graph it was working on.
pub fn count_graph_reconfigurations(trace: &DpllTrace) -> usize {
    count_fingerprint_changes(trace.fingerprint_sequence())
}

pub(crate) fn count_fingerprint_changes(
    sequence: impl IntoIterator<Item = GraphFingerprint>,
) -> usize {
    let mut changes = 0;
    let mut prev: Option<GraphFingerprint> = None;
    for fp in sequence {
        if let Some(p) = prev
            && p != fp
        {
            changes += 1;
        }
        prev = Some(fp);
    }
    changes
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DpllOptions {
    /// Also assign pure literals during the propagation fixpoint. Off by
    /// default to keep traces minimal; recorded as unit-propagation events.
    pub pure_literal_elimination: bool,
}

/// DPLL with default options.
pub fn dpll(formula: &CnfFormula) -> (SolveResult, DpllTrace) {
    dpll_with(formula, DpllOptions::default())
}

/// Complete search: returns `Sat` with a verified witness or `Unsat`, never
/// `Unknown`.
pub fn dpll_with(formula: &CnfFormula, options: DpllOptions) -> (SolveResult, DpllTrace) {
    let start = Instant::now();
    let mut search = Search {
        formula,
        options,
        values: vec![None; formula.num_vars() as usize],
        trail: Vec::new(),
        events: Vec::new(),
        decisions: 0,
    };
    let satisfiable = search.run();
    let trace = DpllTrace {
        initial_fingerprint: fingerprint_formula(formula),
        events: search.events,
    };
    let stats = SolveStats {
        decisions: search.decisions,
        wall_time: start.elapsed(),
        ..SolveStats::default()
    };
    let result = if satisfiable {
        let values = search
            .values
            .iter()
            .map(|v| v.unwrap_or(false))
            .collect::<Vec<_>>();
        SolveResult::sat(formula, Assignment::new(values), stats)
            .expect("dpll reached a state with every clause satisfied")
    } else {
        SolveResult::unsat(stats)
    };
    (result, trace)
}

enum Scan {
    Conflict,
    Unit(Literal),
    Settled,
}

struct Search<'a> {
    formula: &'a CnfFormula,
    options: DpllOptions,
    values: Vec<Option<bool>>,
    trail: Vec<u32>,
    events: Vec<DpllEvent>,
    decisions: u64,
}

impl Search<'_> {
    fn run(&mut self) -> bool {
        self.search()
    }

    fn search(&mut self) -> bool {
        let entry = self.trail.len();
        loop {
            match self.scan() {
                Scan::Conflict => {
                    self.undo_to(entry);
                    return false;
                }
                Scan::Unit(lit) => {
                    self.assign_literal(lit);
                    self.record(DpllEventKind::UnitPropagation);
                }
                Scan::Settled => {
                    if self.options.pure_literal_elimination
                        && let Some(lit) = self.find_pure_literal()
                    {
                        self.assign_literal(lit);
                        self.record(DpllEventKind::UnitPropagation);
                        continue;
                    }
                    break;
                }
            }
        }
        if self.all_satisfied() {
            return true;
        }
        let var = self
            .lowest_unassigned()
            .expect("an unsatisfied, conflict-free state has unassigned variables");
        for value in [true, false] {
            let before_decision = self.trail.len();
            self.set(var, value);
            self.decisions += 1;
            self.record(DpllEventKind::Decision);
            if self.search() {
                return true;
            }
            self.undo_to(before_decision);
        }
        self.undo_to(entry);
        false
    }

    fn value_of(&self, lit: Literal) -> Option<bool> {
        self.values[lit.var() as usize - 1].map(|v| v != lit.is_negated())
    }

    fn set(&mut self, var: u32, value: bool) {
        self.values[var as usize - 1] = Some(value);
        self.trail.push(var);
    }

    fn assign_literal(&mut self, lit: Literal) {
        self.set(lit.var(), !lit.is_negated());
    }

    /// Unassigns down to `mark` and records a backtrack event when the
    /// residual actually moved.
    fn undo_to(&mut self, mark: usize) {
        if self.trail.len() == mark {
            return;
        }
        while self.trail.len() > mark {
            let var = self.trail.pop().expect("trail shorter than mark");
            self.values[var as usize - 1] = None;
        }
        self.record(DpllEventKind::Backtrack);
    }

    fn record(&mut self, kind: DpllEventKind) {
        let fingerprint = fingerprint_formula(&self.residual());
        self.events.push(DpllEvent { kind, fingerprint });
    }

    /// Residual under the current partial assignment: satisfied clauses
    /// deleted, falsified literals removed. The variable count is kept so
    /// fingerprints differ only by clause structure.
    fn residual(&self) -> CnfFormula {
        let mut clauses = Vec::new();
        'clauses: for clause in self.formula.clauses() {
            let mut rest = Vec::new();
            for &lit in clause.literals() {
                match self.value_of(lit) {
                    Some(true) => continue 'clauses,
                    Some(false) => {}
                    None => rest.push(lit),
                }
            }
            clauses.push(Clause::new(rest));
        }
        CnfFormula::new(self.formula.num_vars(), clauses).expect("residual reuses valid literals")
    }

    fn scan(&self) -> Scan {
        let mut unit = None;
        for clause in self.formula.clauses() {
            let mut satisfied = false;
            let mut unassigned = None;
            let mut unassigned_count = 0;
            for &lit in clause.literals() {
                match self.value_of(lit) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        unassigned_count += 1;
                        if unassigned.is_none() {
                            unassigned = Some(lit);
                        }
                    }
                }
            }
            if satisfied {
                continue;
            }
            match unassigned_count {
                0 => return Scan::Conflict,
                1 if unit.is_none() => unit = unassigned,
                _ => {}
            }
        }
        match unit {
            Some(lit) => Scan::Unit(lit),
            None => Scan::Settled,
        }
    }

    fn find_pure_literal(&self) -> Option<Literal> {
        let n = self.formula.num_vars() as usize;
        let mut positive = vec![false; n];
        let mut negative = vec![false; n];
        for clause in self.formula.clauses() {
            if clause
                .literals()
                .iter()
                .any(|&l| self.value_of(l) == Some(true))
            {
                continue;
            }
            for &lit in clause.literals() {
                if self.value_of(lit).is_none() {
                    let slot = lit.var() as usize - 1;
                    if lit.is_negated() {
                        negative[slot] = true;
                    } else {
                        positive[slot] = true;
                    }
                }
            }
        }
        for var in 1..=self.formula.num_vars() {
            let slot = var as usize - 1;
            match (positive[slot], negative[slot]) {
                (true, false) => return Some(Literal::positive(var)),
                (false, true) => return Some(Literal::negative(var)),
                _ => {}
            }
        }
        None
    }

    fn all_satisfied(&self) -> bool {
        self.formula.clauses().iter().all(|clause| {
            clause
                .literals()
                .iter()
                .any(|&l| self.value_of(l) == Some(true))
        })
    }

    fn lowest_unassigned(&self) -> Option<u32> {
        self.values
            .iter()
            .position(Option::is_none)
            .map(|i| i as u32 + 1)
    }
}
