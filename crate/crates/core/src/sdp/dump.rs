//! Plain-text dump of an SDP instance as coordinate triplets.
//!
//! Format, one record per line:
//! ```text
//! order <n>
//! C <i> <j> <v>
//! eq <k> <rhs>
//! ineq <k> <rhs>
//! A <i> <j> <v>        # belongs to the most recent eq/ineq line
//! ```
//! Only upper-triangular entries (`i <= j`) are written.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::problem::{SdpProblem, SparseSym};
use crate::error::{Error, Result};

pub fn dump_problem(problem: &SdpProblem) -> String {
    let n = problem.order();
    let mut out = String::new();
    let _ = writeln!(out, "order {n}");
    for j in 0..n {
        for i in 0..=j {
            let v = problem.cost[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "C {i} {j} {v:e}");
            }
        }
    }
    for (tag, list) in [("eq", &problem.equalities), ("ineq", &problem.inequalities)] {
        for (k, c) in list.iter().enumerate() {
            let _ = writeln!(out, "{tag} {k} {:e}", c.rhs);
            for &(i, j, v) in &c.matrix.entries {
                let _ = writeln!(out, "A {i} {j} {v:e}");
            }
        }
    }
    out
}

fn bad(line: usize, what: &str) -> Error {
    Error::Parameter(format!("dump line {line}: {what}"))
}

pub fn parse_problem(text: &str) -> Result<SdpProblem> {
    let mut problem: Option<SdpProblem> = None;
    // (is_inequality, index into the matching list)
    let mut current: Option<(bool, usize)> = None;
    for (ln, raw) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let num = |k: usize| -> Result<f64> {
            fields.get(k).ok_or_else(|| bad(ln, "missing field"))?.parse().map_err(|_| bad(ln, "bad number"))
        };
        let idx = |k: usize| -> Result<usize> {
            fields.get(k).ok_or_else(|| bad(ln, "missing field"))?.parse().map_err(|_| bad(ln, "bad index"))
        };
        match fields[0] {
            "order" => {
                if problem.is_some() {
                    return Err(bad(ln, "duplicate order"));
                }
                let n = idx(1)?;
                problem = Some(SdpProblem::new(DMatrix::zeros(n, n)));
            }
            tag => {
                let p = problem.as_mut().ok_or_else(|| bad(ln, "order must come first"))?;
                let n = p.order();
                match tag {
                    "C" => {
                        let (i, j, v) = (idx(1)?, idx(2)?, num(3)?);
                        if i >= n || j >= n {
                            return Err(bad(ln, "index out of range"));
                        }
                        p.cost[(i, j)] = v;
                        p.cost[(j, i)] = v;
                    }
                    "eq" | "ineq" => {
                        let ineq = tag == "ineq";
                        let rhs = num(2)?;
                        let list = if ineq { &mut p.inequalities } else { &mut p.equalities };
                        if idx(1)? != list.len() {
                            return Err(bad(ln, "constraints must be numbered consecutively"));
                        }
                        if ineq {
                            p.add_inequality(SparseSym::new(n), rhs);
                        } else {
                            p.add_equality(SparseSym::new(n), rhs);
                        }
                        let len = if ineq { p.inequalities.len() } else { p.equalities.len() };
                        current = Some((ineq, len - 1));
                    }
                    "A" => {
                        let (ineq, k) = current.ok_or_else(|| bad(ln, "entry before any constraint"))?;
                        let (i, j, v) = (idx(1)?, idx(2)?, num(3)?);
                        if i > j || j >= n {
                            return Err(bad(ln, "entry must satisfy i <= j < order"));
                        }
                        let list = if ineq { &mut p.inequalities } else { &mut p.equalities };
                        list[k].matrix.entries.push((i, j, v));
                    }
                    _ => return Err(bad(ln, "unknown record")),
                }
            }
        }
    }
    let p = problem.ok_or_else(|| Error::Parameter("dump has no order line".into()))?;
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut p = SdpProblem::new(DMatrix::from_row_slice(3, 3, &[1.0, 0.25, 0.0, 0.25, -2.0, 1e-17, 0.0, 1e-17, 3.5]));
        p.add_equality(SparseSym::diagonal_unit(3, 2), 1.0);
        let mut a = SparseSym::new(3);
        a.push(0, 0, 1.0).push(0, 2, -4.0);
        p.add_inequality(a, -3.0);
        let q = parse_problem(&dump_problem(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_problem("C 0 0 1").is_err());
        assert!(parse_problem("order 2\nA 0 0 1").is_err());
        assert!(parse_problem("order 2\neq 0 1\nA 1 0 1").is_err());
        assert!(parse_problem("order 2\nfoo").is_err());
    }
}
