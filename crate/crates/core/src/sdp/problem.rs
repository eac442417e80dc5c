use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric matrix given by its upper-triangular nonzeros.
///
/// An entry `(i, j, v)` with `i <= j` sets both `A[i][j]` and `A[j][i]` to `v`.
/// Repeated positions accumulate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSym {
    pub order: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new(order: usize) -> Self {
        SparseSym { order, entries: Vec::new() }
    }

    /// Adds `v` at `(i, j)` and its mirror.
    pub fn push(&mut self, i: usize, j: usize, v: f64) -> &mut Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, v));
        self
    }

    /// Single-entry matrix `E_ii`.
    pub fn diagonal_unit(order: usize, i: usize) -> Self {
        let mut a = SparseSym::new(order);
        a.push(i, i, 1.0);
        a
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut a = SparseSym::new(m.nrows());
        for j in 0..m.ncols() {
            for i in 0..=j {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if v != 0.0 {
                    a.entries.push((i, j, v));
                }
            }
        }
        a
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.order, self.order);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }

    /// `tr(A X)` for symmetric `X`.
    pub fn inner(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x[(i, j)] } else { v * (x[(i, j)] + x[(j, i)]) })
            .sum()
    }

    pub fn is_well_formed(&self) -> bool {
        self.entries
            .iter()
            .all(|&(i, j, v)| i <= j && j < self.order && v.is_finite())
    }
}

/// A linear constraint `tr(A X) (= | >=) b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub matrix: SparseSym,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(matrix: SparseSym, rhs: f64) -> Self {
        Constraint { matrix, rhs }
    }
}

/// `min tr(C X)` subject to equalities `tr(A_i X) = b_i`, inequalities
/// `tr(A_j X) >= b_j` and `X ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub cost: DMatrix<f64>,
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(cost: DMatrix<f64>) -> Self {
        SdpProblem { cost, equalities: Vec::new(), inequalities: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.cost.nrows()
    }

    pub fn add_equality(&mut self, matrix: SparseSym, rhs: f64) -> &mut Self {
        self.equalities.push(Constraint::new(matrix, rhs));
        self
    }

    pub fn add_inequality(&mut self, matrix: SparseSym, rhs: f64) -> &mut Self {
        self.inequalities.push(Constraint::new(matrix, rhs));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        if n == 0 || self.cost.ncols() != n {
            return Err(Error::Parameter("cost matrix must be square and non-empty".into()));
        }
        if self.cost.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("cost matrix has non-finite entries".into()));
        }
        let asym = (&self.cost - self.cost.transpose()).amax();
        if asym > 1e-12 * (1.0 + self.cost.amax()) {
            return Err(Error::Parameter(format!("cost matrix is not symmetric ({asym:.3e})")));
        }
        for (kind, list) in [("equality", &self.equalities), ("inequality", &self.inequalities)] {
            for (k, c) in list.iter().enumerate() {
                if c.matrix.order != n || !c.matrix.is_well_formed() || !c.rhs.is_finite() {
                    return Err(Error::Parameter(format!("{kind} constraint {k} is malformed")));
                }
            }
        }
        Ok(())
    }
}

/// Termination status of the interior-point method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal matrix.
    pub x: DMatrix<f64>,
    /// Slack of each inequality, `tr(A_j X) - b_j`.
    pub slacks: DVector<f64>,
    /// Dual multipliers, equalities first then inequalities.
    pub dual: DVector<f64>,
    /// `tr(C X)`.
    pub objective: f64,
    pub dual_objective: f64,
    /// `max(|primal - dual objective|, <X, Z>)`.
    pub duality_gap: f64,
    /// `max_i |tr(A_i X) - b_i| / (1 + |b_i|)` over the internal equality form.
    pub primal_residual: f64,
    /// `||C - A*(y) - Z||_F / (1 + ||C||_F)`.
    pub dual_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-7, max_iter: 200 }
    }
}
