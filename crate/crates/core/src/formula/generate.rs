//! Random k-SAT instance generation.

use thiserror::Error;

use super::{Clause, CnfFormula, Literal};
use crate::rng::{RngStream, tag};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("invalid generator parameters: clause width {clause_width} with {num_vars} variables")]
    InvalidParams { num_vars: u32, clause_width: u32 },
}

/// Generates `num_clauses` clauses of exactly `clause_width` distinct
/// variables, drawn uniformly without replacement, each polarity uniform.
/// Pure function of its arguments.
pub fn generate_random_ksat(
    num_vars: u32,
    num_clauses: usize,
    clause_width: u32,
    seed: u64,
) -> Result<CnfFormula, GenerateError> {
    if clause_width == 0 || clause_width > num_vars {
        return Err(GenerateError::InvalidParams {
            num_vars,
            clause_width,
        });
    }
    let mut rng = RngStream::derived(seed, tag::GENERATOR, 0);
    let mut pool: Vec<u32> = (1..=num_vars).collect();
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        // Partial Fisher-Yates: the first `clause_width` slots end up holding
        // a uniform sample without replacement.
        for i in 0..clause_width as usize {
            let j = i + rng.next_below(num_vars as usize - i);
            pool.swap(i, j);
        }
        let literals = pool[..clause_width as usize]
            .iter()
            .map(|&var| Literal::new(var, rng.next_bool()))
            .collect();
        clauses.push(Clause::new(literals));
    }
    Ok(CnfFormula::new(num_vars, clauses).expect("generated variables are in range"))
}
