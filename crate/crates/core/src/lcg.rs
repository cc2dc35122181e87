//! The bipartite literal-clause graph.
//!
//! Every variable contributes two literal nodes (positive at `2*(var-1)`,
//! negative right after it), every clause one clause node, and there is an
//! edge exactly where a literal occurs in a clause. The graph never changes
//! after construction; the message-passing machine in [`crate::mp`] runs on
//! it as-is, which is precisely what the reconfiguration demonstrator
//! measures against complete solvers.

use std::fmt;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formula::{CnfFormula, Literal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LcgError {
    #[error("clause index {index} out of range ({num_clauses} clauses)")]
    IndexOutOfRange { index: usize, num_clauses: usize },
}

/// 128-bit digest of a canonical form that is invariant under clause
/// reordering and literal reordering within clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraphFingerprint(u128);

impl GraphFingerprint {
    pub fn to_hex(self) -> String {
        format!("{:032x}", self.0)
    }
}

impl fmt::Display for GraphFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl Serialize for GraphFingerprint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

/// Immutable bipartite incidence structure of a formula.
#[derive(Debug, Clone)]
pub struct LcgGraph {
    num_vars: u32,
    literal_to_clauses: Vec<Vec<usize>>,
    clause_to_literals: Vec<Vec<Literal>>,
    num_edges: usize,
}

/// Builds the graph for a formula. Both polarities of every variable get a
/// node even when one never occurs; an absent literal simply has an empty
/// clause neighborhood. Node numbering is deterministic: literal node id is
/// [`Literal::node_id`], clause node id is the clause index.
pub fn build_lcg(formula: &CnfFormula) -> LcgGraph {
    let num_vars = formula.num_vars();
    let mut literal_to_clauses = vec![Vec::new(); 2 * num_vars as usize];
    let mut clause_to_literals = Vec::with_capacity(formula.num_clauses());
    let mut num_edges = 0;
    for (j, clause) in formula.clauses().iter().enumerate() {
        for &lit in clause.literals() {
            literal_to_clauses[lit.node_id()].push(j);
            num_edges += 1;
        }
        clause_to_literals.push(clause.literals().to_vec());
    }
    LcgGraph {
        num_vars,
        literal_to_clauses,
        clause_to_literals,
        num_edges,
    }
}

impl LcgGraph {
    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_literal_nodes(&self) -> usize {
        self.literal_to_clauses.len()
    }

    pub fn num_clause_nodes(&self) -> usize {
        self.clause_to_literals.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Indices of the clauses containing `lit`, ascending.
    pub fn literal_neighborhood(&self, lit: Literal) -> &[usize] {
        &self.literal_to_clauses[lit.node_id()]
    }

    pub(crate) fn neighborhood_of_node(&self, node_id: usize) -> &[usize] {
        &self.literal_to_clauses[node_id]
    }

    /// The literals of clause `index`, in clause order.
    pub fn clause_neighborhood(&self, index: usize) -> Result<&[Literal], LcgError> {
        self.clause_to_literals
            .get(index)
            .map(Vec::as_slice)
            .ok_or(LcgError::IndexOutOfRange {
                index,
                num_clauses: self.clause_to_literals.len(),
            })
    }

    /// The `(positive, negative)` literal node id pairs, one per variable.
    pub fn negation_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vars as usize).map(|i| (2 * i, 2 * i + 1))
    }

    /// Canonical digest: sort each clause's literal node ids, sort the clause
    /// multiset lexicographically, hash together with the variable count.
    pub fn fingerprint(&self) -> GraphFingerprint {
        let mut canon: Vec<Vec<u32>> = self
            .clause_to_literals
            .iter()
            .map(|lits| {
                let mut ids: Vec<u32> = lits.iter().map(|l| l.node_id() as u32).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        canon.sort_unstable();

        let mut hasher = Sha256::new();
        hasher.update(self.num_vars.to_le_bytes());
        for clause in &canon {
            hasher.update((clause.len() as u32).to_le_bytes());
            for id in clause {
                hasher.update(id.to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        let mut bytes = [0u8; 16];
        bytes.copy_from_slice(&digest[..16]);
        GraphFingerprint(u128::from_be_bytes(bytes))
    }

    /// Debug export, one `L<id> C<id>` line per edge.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for (node, clauses) in self.literal_to_clauses.iter().enumerate() {
            for j in clauses {
                out.push_str(&format!("L{node} C{j}\n"));
            }
        }
        out
    }
}

/// Fingerprint of the graph a formula induces.
pub fn fingerprint_formula(formula: &CnfFormula) -> GraphFingerprint {
    build_lcg(formula).fingerprint()
}
