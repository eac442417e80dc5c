//! Exact maximum-likelihood sequence estimation over a finite alphabet.
//!
//! The search is a depth-first branch-and-bound over symbol positions in
//! natural order. Row `k` of the residual enters the partial metric once the
//! last column with a nonzero entry in that row is fixed, so the partial
//! metric is a lower bound on every completion. Children are visited in order
//! of increasing metric increment.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::constellation::{Constellation, SymbolVector};

/// Default bound on `|alphabet|^N`.
pub const SEARCH_SPACE_LIMIT: f64 = 1e7;

/// `||y - H a||^2` summed over rows in ascending order.
pub fn sequence_metric(y: &DVector<Complex64>, h: &DMatrix<f64>, a: &[Complex64]) -> f64 {
    let mut total = 0.0;
    for k in 0..y.len() {
        let mut r = y[k];
        for (j, aj) in a.iter().enumerate() {
            r -= aj * h[(k, j)];
        }
        total += r.norm_sqr();
    }
    total
}

/// Global minimizer of `||y - H a||^2` over `constellation^N`, guarded by
/// [`SEARCH_SPACE_LIMIT`]. Ties go to the lexicographically smallest index vector.
pub fn mlse_exhaustive(
    y: &DVector<Complex64>,
    h: &DMatrix<f64>,
    constellation: Constellation,
) -> Result<(SymbolVector, f64)> {
    mlse_with_limit(y, h, constellation, SEARCH_SPACE_LIMIT)
}

/// [`mlse_exhaustive`] with an explicit search-space bound.
pub fn mlse_with_limit(
    y: &DVector<Complex64>,
    h: &DMatrix<f64>,
    constellation: Constellation,
    limit: f64,
) -> Result<(SymbolVector, f64)> {
    let n = h.ncols();
    if h.nrows() != y.len() || n == 0 {
        return Err(Error::Parameter(format!(
            "channel is {}x{} but the block has {} samples",
            h.nrows(),
            n,
            y.len()
        )));
    }
    let size = (constellation.size() as f64).powi(n as i32);
    if size > limit {
        return Err(Error::SearchSpace { size, limit });
    }

    // rows_at[j]: rows whose last nonzero column is j
    let mut rows_at = vec![Vec::new(); n];
    let mut always = 0.0;
    for k in 0..h.nrows() {
        match (0..n).rev().find(|&j| h[(k, j)] != 0.0) {
            Some(j) => rows_at[j].push(k),
            None => always += y[k].norm_sqr(),
        }
    }

    let mut search = Search {
        y,
        h,
        points: constellation.points(),
        rows_at,
        indices: vec![0; n],
        symbols: vec![Complex64::new(0.0, 0.0); n],
        best: f64::INFINITY,
        best_indices: Vec::new(),
    };
    search.descend(0, always);

    let indices = search.best_indices;
    let objective = search.best;
    Ok((SymbolVector::from_indices(constellation, indices)?, objective))
}

struct Search<'a> {
    y: &'a DVector<Complex64>,
    h: &'a DMatrix<f64>,
    points: Vec<Complex64>,
    rows_at: Vec<Vec<usize>>,
    indices: Vec<usize>,
    symbols: Vec<Complex64>,
    best: f64,
    best_indices: Vec<usize>,
}

impl Search<'_> {
    fn increment(&self, depth: usize) -> f64 {
        self.rows_at[depth]
            .iter()
            .map(|&k| {
                let mut r = self.y[k];
                for j in 0..=depth {
                    r -= self.symbols[j] * self.h[(k, j)];
                }
                r.norm_sqr()
            })
            .sum()
    }

    fn pruned(&self, partial: f64) -> bool {
        partial > self.best + 1e-12 * (1.0 + self.best)
    }

    fn descend(&mut self, depth: usize, partial: f64) {
        let n = self.indices.len();
        if depth == n {
            let metric = sequence_metric(self.y, self.h, &self.symbols);
            if metric < self.best || (metric == self.best && self.indices < self.best_indices) {
                self.best = metric;
                self.best_indices = self.indices.clone();
            }
            return;
        }
        let mut children: Vec<(f64, usize)> = (0..self.points.len())
            .map(|i| {
                self.symbols[depth] = self.points[i];
                (self.increment(depth), i)
            })
            .collect();
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (inc, i) in children {
            let next = partial + inc;
            if self.pruned(next) {
                break;
            }
            self.indices[depth] = i;
            self.symbols[depth] = self.points[i];
            self.descend(depth + 1, next);
        }
    }
}
