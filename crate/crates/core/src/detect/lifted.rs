//! Lifted quadratic costs `Theta` for the relaxed detectors.
//!
//! A decision vector `a` is extended to `psi = [a; 1]` so that the
//! least-squares metric becomes the linear function `tr(Theta psi psi^T)` of
//! the lifted matrix. The symbol amplitude `sqrt(tau Es / E_avg)` is folded
//! into the channel part of `Theta`, so decisions live on the unit-scale
//! alphabet.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::isi::IsiModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostOrigin {
    /// Complex PSK metric on the whitened path, stored in real embedded form.
    PskWhitened,
    /// Real-stacked 16-QAM metric on the whitened path.
    QamWhitened,
    /// Real-stacked 16-QAM metric on the colored (matched-filter) path.
    QamColored,
}

/// Symmetric lifted cost.
///
/// For [`CostOrigin::PskWhitened`], `theta` is `R(Theta) / 2` of order
/// `2(n + 1)`, where `R` is the real embedding, so that real traces equal
/// complex traces. Otherwise `theta` has order `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedCost {
    pub theta: DMatrix<f64>,
    /// Length of the decision vector (complex entries for PSK, real for QAM).
    pub n: usize,
    pub origin: CostOrigin,
    /// Bottom-right entry of the unembedded `Theta`; a shift shared by every candidate.
    pub offset: f64,
}

impl LiftedCost {
    /// `psi^T Theta psi` for `psi = [a; 1]` with real `a` of length `n`.
    pub fn objective_real(&self, a: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.n);
        let n = self.n;
        let t = &self.theta;
        let mut total = t[(n, n)];
        for i in 0..n {
            let mut row = 2.0 * t[(i, n)];
            for j in 0..n {
                row += t[(i, j)] * a[j];
            }
            total += a[i] * row;
        }
        total
    }

    /// `b^H Theta b` for `b = [a; 1]` with complex `a`, evaluated on the embedded cost.
    pub fn objective_complex(&self, a: &[Complex64]) -> f64 {
        debug_assert_eq!(a.len(), self.n);
        let m = self.n + 1;
        let x = DVector::from_fn(2 * m, |i, _| {
            let k = i % m;
            let z = if k < self.n { a[k] } else { Complex64::new(1.0, 0.0) };
            if i < m {
                z.re
            } else {
                z.im
            }
        });
        2.0 * x.dot(&(&self.theta * &x))
    }
}

/// Real embedding `[[Re H, -Im H], [Im H, Re H]]` of a complex matrix.
pub fn real_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = h.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = h[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`real_embedding`] after projecting onto its range.
pub fn complex_from_embedding(x: &DMatrix<f64>) -> DMatrix<Complex64> {
    let m = x.nrows() / 2;
    DMatrix::from_fn(m, m, |i, j| {
        Complex64::new(
            0.5 * (x[(i, j)] + x[(i + m, j + m)]),
            0.5 * (x[(i + m, j)] - x[(i, j + m)]),
        )
    })
}

/// `[Re x; Im x]`.
pub fn real_stack(x: &DVector<Complex64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| if i < n { x[i].re } else { x[i - n].im })
}

/// `blkdiag(M, M)`.
pub fn block_diag2(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    out.view_mut((0, 0), (r, c)).copy_from(m);
    out.view_mut((r, c), (r, c)).copy_from(m);
    out
}

fn check_len(model: &IsiModel, len: usize) -> Result<usize> {
    let n = model.block_len();
    if len != n {
        return Err(Error::Parameter(format!("received block has {len} samples, model expects {n}")));
    }
    Ok(n)
}

/// Complex PSK cost `[[s^2 V^T V, -s V^T y], [-s y^H V, ||y||^2]]` in embedded form.
pub fn build_theta_psk(model: &IsiModel, y_w: &DVector<Complex64>, amplitude: f64) -> Result<LiftedCost> {
    let n = check_len(model, y_w.len())?;
    let v = &model.whitened;
    let vtv = v.transpose() * v * (amplitude * amplitude);
    let cross = v.transpose().map(|x| Complex64::new(-amplitude * x, 0.0)) * y_w;
    let offset = y_w.norm_squared();
    let mut theta = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            theta[(i, j)] = Complex64::new(vtv[(i, j)], 0.0);
        }
        theta[(i, n)] = cross[i];
        theta[(n, i)] = cross[i].conj();
    }
    theta[(n, n)] = Complex64::new(offset, 0.0);
    Ok(LiftedCost { theta: real_embedding(&theta) * 0.5, n, origin: CostOrigin::PskWhitened, offset })
}

fn real_lift(quad: DMatrix<f64>, linear: DVector<f64>, offset: f64, origin: CostOrigin) -> LiftedCost {
    let n = linear.len();
    let mut theta = DMatrix::zeros(n + 1, n + 1);
    theta.view_mut((0, 0), (n, n)).copy_from(&quad);
    for i in 0..n {
        theta[(i, n)] = linear[i];
        theta[(n, i)] = linear[i];
    }
    theta[(n, n)] = offset;
    LiftedCost { theta, n, origin, offset }
}

/// Real-stacked whitened cost `[[s^2 V^T V, -s V^T y], [-s y^T V, y^T y]]`.
pub fn build_theta_w(model: &IsiModel, y_w: &DVector<Complex64>, amplitude: f64) -> Result<LiftedCost> {
    check_len(model, y_w.len())?;
    let v = block_diag2(&model.whitened);
    let y = real_stack(y_w);
    let quad = v.transpose() * &v * (amplitude * amplitude);
    let linear = -(v.transpose() * &y) * amplitude;
    Ok(real_lift(quad, linear, y.norm_squared(), CostOrigin::QamWhitened))
}

/// Real-stacked colored cost `[[s^2 G, -s y_c], [-s y_c^T, 0]]`.
pub fn build_theta_c(model: &IsiModel, y_c: &DVector<Complex64>, amplitude: f64) -> Result<LiftedCost> {
    check_len(model, y_c.len())?;
    let g = block_diag2(&model.gram);
    let y = real_stack(y_c);
    Ok(real_lift(g * (amplitude * amplitude), -y * amplitude, 0.0, CostOrigin::QamColored))
}
