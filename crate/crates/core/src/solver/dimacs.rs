use std::fmt::Write as _;

use thiserror::Error;

use crate::encoder::CnfDocument;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {0}: malformed header")]
    BadHeader(usize),
    #[error("line {line}: malformed literal `{token}`")]
    BadLiteral { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds the declared {max} variables")]
    OutOfRange { line: usize, lit: i64, max: u32 },
    #[error("header declares {expected} clauses, found {found}")]
    ClauseCount { expected: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
    #[error("line {0}: malformed map comment")]
    BadMap(usize),
    #[error("line {line}: malformed model token `{token}`")]
    BadModel { line: usize, token: String },
}

/// DIMACS text: `c map` comments, the `p cnf` header, one clause per line.
pub fn write_dimacs(cnf: &CnfDocument) -> String {
    let mut out = String::new();
    for (id, key) in &cnf.annotations {
        let _ = writeln!(out, "c map {id} {key}");
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfDocument, DimacsError> {
    let mut doc = CnfDocument::default();
    let mut header: Option<usize> = None;
    let mut current: Vec<i32> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if let Some(map) = rest.trim_start().strip_prefix("map ") {
                let (id, key) = map.trim().split_once(' ').ok_or(DimacsError::BadMap(n))?;
                let id = id.parse().map_err(|_| DimacsError::BadMap(n))?;
                doc.annotations.push((id, key.trim().to_string()));
            }
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(DimacsError::BadHeader(n));
            }
            doc.num_vars = parts[2].parse().map_err(|_| DimacsError::BadHeader(n))?;
            header = Some(parts[3].parse().map_err(|_| DimacsError::BadHeader(n))?);
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::MissingHeader);
        }
        for token in line.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| DimacsError::BadLiteral {
                line: n,
                token: token.to_string(),
            })?;
            if lit == 0 {
                doc.clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() > u64::from(doc.num_vars) {
                return Err(DimacsError::OutOfRange {
                    line: n,
                    lit,
                    max: doc.num_vars,
                });
            } else {
                current.push(lit as i32);
            }
        }
    }
    let expected = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if expected != doc.clauses.len() {
        return Err(DimacsError::ClauseCount {
            expected,
            found: doc.clauses.len(),
        });
    }
    Ok(doc)
}

/// Reads a model in SAT competition output style (`v` lines, optional `s`
/// line) or as bare signed literals. Unmentioned variables are false.
pub fn parse_model(text: &str, num_vars: u32) -> Result<Vec<bool>, DimacsError> {
    let mut model = vec![false; num_vars as usize + 1];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('s') || line.starts_with('c') || line.is_empty() {
            continue;
        }
        let body = line.strip_prefix('v').unwrap_or(line);
        for token in body.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| DimacsError::BadModel {
                line: i + 1,
                token: token.to_string(),
            })?;
            if lit.unsigned_abs() > u64::from(num_vars) {
                return Err(DimacsError::OutOfRange {
                    line: i + 1,
                    lit,
                    max: num_vars,
                });
            }
            if lit > 0 {
                model[lit as usize] = true;
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_clause_text() {
        let doc = CnfDocument {
            num_vars: 2,
            clauses: vec![vec![1, -2]],
            annotations: vec![],
        };
        assert_eq!(write_dimacs(&doc), "p cnf 2 1\n1 -2 0\n");
        assert_eq!(parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap(), doc);
    }

    #[test]
    fn annotations_round_trip() {
        let doc = CnfDocument {
            num_vars: 3,
            clauses: vec![vec![1], vec![-2, 3], vec![]],
            annotations: vec![(1, "less(x,2)".into()), (3, "leq(op(mul,4,x),0,8)".into())],
        };
        assert_eq!(parse_dimacs(&write_dimacs(&doc)).unwrap(), doc);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_dimacs("1 2 0\n"), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs(""), Err(DimacsError::MissingHeader));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 3 0\n"),
            Err(DimacsError::OutOfRange { lit: 3, .. })
        ));
        assert!(matches!(parse_dimacs("p cnf x 1\n"), Err(DimacsError::BadHeader(1))));
        assert_eq!(parse_dimacs("p cnf 2 1\n1 2\n"), Err(DimacsError::Unterminated));
        assert!(matches!(parse_dimacs("p cnf 2 2\n1 0\n"), Err(DimacsError::ClauseCount { .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 a 0\n"), Err(DimacsError::BadLiteral { .. })));
    }

    #[test]
    fn model_formats() {
        assert_eq!(
            parse_model("s SATISFIABLE\nv 1 -2\nv 3 0\n", 3).unwrap(),
            vec![false, true, false, true]
        );
        assert_eq!(parse_model("-1 2 0", 2).unwrap(), vec![false, false, true]);
        assert!(parse_model("v 4 0", 3).is_err());
    }
}
