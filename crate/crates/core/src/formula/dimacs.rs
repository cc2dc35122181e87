//! DIMACS CNF reading and writing.
//!
//! Accepted input: optional `c` comment lines, one `p cnf <vars> <clauses>`
//! header, then clauses as whitespace-separated nonzero integers terminated
//! by `0`. Clauses may span lines and comment lines may appear anywhere.
//! The clause count must match the header; a mismatch usually means a
//! truncated file and is treated as a hard error.

use thiserror::Error;

use super::{Clause, CnfFormula, Literal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("no valid 'p cnf <vars> <clauses>' header")]
    MissingHeader,
    #[error("header declares {declared} clauses but the file contains {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("literal references variable {var} but the header declares {num_vars}")]
    VariableOutOfRange { var: u64, num_vars: u32 },
    #[error("end of input inside a clause (missing terminating 0)")]
    UnterminatedClause,
    #[error("token {token:?} is not an integer")]
    NonIntegerToken { token: String },
}

/// Parses DIMACS CNF text. Duplicate literals within a clause are dropped;
/// clause order and literal order are preserved otherwise.
pub fn parse_dimacs(input: &str) -> Result<CnfFormula, DimacsError> {
    let mut lines = input.lines();

    let (num_vars, declared_clauses) = loop {
        let Some(line) = lines.next() else {
            return Err(DimacsError::MissingHeader);
        };
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(DimacsError::MissingHeader);
            }
            let num_vars: u32 = parts[2].parse().map_err(|_| DimacsError::NonIntegerToken {
                token: parts[2].to_string(),
            })?;
            let declared: usize = parts[3].parse().map_err(|_| DimacsError::NonIntegerToken {
                token: parts[3].to_string(),
            })?;
            break (num_vars, declared);
        }
        return Err(DimacsError::MissingHeader);
    };

    let mut clauses: Vec<Clause> = Vec::with_capacity(declared_clauses);
    let mut current: Vec<Literal> = Vec::new();
    let mut in_clause = false;

    for line in lines {
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        for token in trimmed.split_whitespace() {
            let code: i64 = token.parse().map_err(|_| DimacsError::NonIntegerToken {
                token: token.to_string(),
            })?;
            if code == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                in_clause = false;
            } else {
                let var = code.unsigned_abs();
                if var > u64::from(num_vars) {
                    return Err(DimacsError::VariableOutOfRange { var, num_vars });
                }
                current.push(Literal::new(var as u32, code < 0));
                in_clause = true;
            }
        }
    }

    if in_clause {
        return Err(DimacsError::UnterminatedClause);
    }
    if clauses.len() != declared_clauses {
        return Err(DimacsError::ClauseCountMismatch {
            declared: declared_clauses,
            found: clauses.len(),
        });
    }

    Ok(CnfFormula::new(num_vars, clauses).expect("variable range was checked during parsing"))
}

/// Serializes a formula to DIMACS text (LF newlines, ASCII). The output
/// re-parses to a formula structurally equal to the input.
pub fn emit_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "p cnf {} {}\n",
        formula.num_vars(),
        formula.num_clauses()
    ));
    for clause in formula.clauses() {
        for lit in clause.literals() {
            out.push_str(&lit.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::tests::iff2;

    #[test]
    fn parses_the_two_clause_fixture() {
        let f = parse_dimacs("p cnf 2 2\n1 -2 0\n-1 2 0").unwrap();
        assert_eq!(f, iff2());
    }

    #[test]
    fn parses_a_headerful_empty_formula() {
        let f = parse_dimacs("p cnf 1 0").unwrap();
        assert_eq!(f.num_vars(), 1);
        assert_eq!(f.num_clauses(), 0);
    }

    #[test]
    fn comments_are_ignored_anywhere() {
        let text = "c leading\np cnf 2 2\nc between header and body\n1 -2 0\nc mid-file\n-1 2 0\nc trailing";
        assert_eq!(parse_dimacs(text).unwrap(), iff2());
    }

    #[test]
    fn clauses_may_span_lines() {
        let f = parse_dimacs("p cnf 3 1\n1 2\nc interleaved comment\n3 0\n").unwrap();
        assert_eq!(f.num_clauses(), 1);
        assert_eq!(f.clause(0).len(), 3);
    }

    #[test]
    fn bare_zero_is_an_empty_clause() {
        let f = parse_dimacs("p cnf 2 2\n1 0\n0\n").unwrap();
        assert!(f.clause(1).is_empty());
    }

    #[test]
    fn duplicate_literals_are_dropped() {
        let f = parse_dimacs("p cnf 2 1\n1 1 -2 0\n").unwrap();
        assert_eq!(
            f.clause(0).literals(),
            &[Literal::positive(1), Literal::negative(2)]
        );
    }

    #[test]
    fn missing_header_is_an_error() {
        assert_eq!(parse_dimacs("1 -2 0"), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs(""), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs("c only comments\n"), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs("p dnf 2 2\n"), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs("p cnf 2\n"), Err(DimacsError::MissingHeader));
    }

    #[test]
    fn unterminated_clause_is_an_error() {
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 -2"),
            Err(DimacsError::UnterminatedClause)
        );
    }

    #[test]
    fn clause_count_mismatch_is_an_error() {
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 -2 0\n"),
            Err(DimacsError::ClauseCountMismatch {
                declared: 2,
                found: 1
            })
        );
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 0\n2 0\n"),
            Err(DimacsError::ClauseCountMismatch {
                declared: 1,
                found: 2
            })
        );
    }

    #[test]
    fn out_of_range_variable_is_an_error() {
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 -3 0\n"),
            Err(DimacsError::VariableOutOfRange { var: 3, num_vars: 2 })
        );
    }

    #[test]
    fn garbage_tokens_are_an_error() {
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 x 0\n"),
            Err(DimacsError::NonIntegerToken { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf x 1\n"),
            Err(DimacsError::NonIntegerToken { .. })
        ));
    }

    #[test]
    fn emit_matches_the_expected_bytes() {
        assert_eq!(emit_dimacs(&iff2()), "p cnf 2 2\n1 -2 0\n-1 2 0\n");
        let empty = CnfFormula::new(0, vec![]).unwrap();
        assert_eq!(emit_dimacs(&empty), "p cnf 0 0\n");
    }

    #[test]
    fn emit_then_parse_is_identity_on_the_fixture() {
        let f = iff2();
        assert_eq!(parse_dimacs(&emit_dimacs(&f)).unwrap(), f);
    }
}
