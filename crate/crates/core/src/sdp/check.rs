//! Independent feasibility report for a candidate primal point.

use nalgebra::{DMatrix, SymmetricEigen};

use super::problem::SdpProblem;

/// Tolerance on the smallest eigenvalue before a point counts as non-PSD.
pub const PSD_VIOLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `tr(C X)`.
    pub objective: f64,
    /// Largest `|tr(A_i X) - b_i|` over equalities.
    pub max_equality_violation: f64,
    /// Largest `max(0, b_j - tr(A_j X))` over inequalities.
    pub max_inequality_violation: f64,
    pub min_eigenvalue: f64,
    pub psd_violation: bool,
}

impl ResidualReport {
    pub fn is_feasible(&self, tol: f64) -> bool {
        !self.psd_violation && self.max_equality_violation <= tol && self.max_inequality_violation <= tol
    }
}

/// Evaluates constraints and the PSD cone on `x` without using solver state.
pub fn check_solution(problem: &SdpProblem, x: &DMatrix<f64>) -> ResidualReport {
    let sym = (x + x.transpose()) * 0.5;
    let max_equality_violation = problem
        .equalities
        .iter()
        .map(|c| (c.matrix.inner(&sym) - c.rhs).abs())
        .fold(0.0, f64::max);
    let max_inequality_violation = problem
        .inequalities
        .iter()
        .map(|c| (c.rhs - c.matrix.inner(&sym)).max(0.0))
        .fold(0.0, f64::max);
    let min_eigenvalue = SymmetricEigen::new(sym.clone()).eigenvalues.min();
    ResidualReport {
        objective: problem.cost.dot(&sym),
        max_equality_violation,
        max_inequality_violation,
        min_eigenvalue,
        psd_violation: min_eigenvalue < -PSD_VIOLATION_TOL,
    }
}
