//! A SAT toolkit built around one experiment: an embedding message-passing
//! machine on the static literal-clause graph of a CNF formula whose decoded
//! trajectory replays uniform-literal WalkSAT flip for flip.
//!
//! The pieces:
//!
//! - [`formula`]: CNF data model, DIMACS I/O, random k-SAT generation, and a
//!   brute-force oracle used as ground truth everywhere else.
//! - [`lcg`]: the bipartite literal-clause graph with a canonical,
//!   permutation-invariant fingerprint.
//! - [`solvers`]: classic WalkSAT, the uniform-literal variant, GSAT, and
//!   complete DPLL with a residual-formula trace. DPLL keeps rewriting the
//!   formula graph as it searches; the trace fingerprints make that
//!   countable.
//! - [`mp`]: the message-passing machine. Its graph never changes; its
//!   embeddings decode exactly to Boolean assignments; it can confirm
//!   satisfaction but has no way to certify unsatisfiability.
//! - [`equivalence`]: coupled-randomness differential checking that the
//!   machine and the uniform-literal search produce identical candidate
//!   sets, flips, and assignments at every step.
//!
//! Everything is deterministic given explicit seeds; there is no fallback to
//! an entropy source.

pub mod equivalence;
pub mod formula;
pub mod lcg;
pub mod mp;
pub mod rng;
pub mod solvers;

pub use formula::{
    Assignment, Clause, CnfFormula, Literal, SolveOutcome, SolveResult, SolveStats,
    brute_force_sat,
    dimacs::{emit_dimacs, parse_dimacs},
    generate::generate_random_ksat,
};
