//! Monte-Carlo check of `E{eta eta^T} = sigma2 G^{-1} / 2` for `eta = G^{-1} q_c`
//! in the real-stacked domain.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{trial_rng, StreamPurpose};
use crate::detect::lifted::{block_diag2, real_stack};
use crate::error::{Error, Result};
use crate::signal::channel::complex_noise;
use crate::signal::isi::IsiModel;

const MAX_CONDITION: f64 = 1e8;
const CHUNK: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub n: usize,
    pub sigma2: f64,
    pub trials: usize,
    /// Empirical `E{eta eta^T}` of order `2N`.
    pub empirical: DMatrix<f64>,
    /// `sigma2 G^{-1} / 2`.
    pub target: DMatrix<f64>,
    /// `||empirical - target||_F / ||target||_F`.
    pub relative_error: f64,
    /// Norm of the empirical Re/Im cross block relative to the Re/Re block.
    pub cross_block_ratio: f64,
}

impl CovarianceReport {
    pub fn summary(&self) -> String {
        format!(
            "N={} sigma2={} trials={} frobenius_relative_error={:.6e} cross_block_ratio={:.6e}",
            self.n, self.sigma2, self.trials, self.relative_error, self.cross_block_ratio
        )
    }

    /// Whitespace-separated dump of the empirical and target matrices.
    pub fn matrix_dump(&self) -> String {
        let mut out = String::new();
        for (name, m) in [("empirical", &self.empirical), ("target", &self.target)] {
            let _ = writeln!(out, "# {name}");
            for row in m.row_iter() {
                let line: Vec<String> = row.iter().map(|v| format!("{v:.6e}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }
}

/// Condition number of a symmetric matrix, rejected above `MAX_CONDITION`.
fn check_conditioning(g: &DMatrix<f64>) -> Result<f64> {
    let eig = g.clone().symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 0.0) {
        return Err(Error::Conditioning(f64::INFINITY));
    }
    let cond = hi / lo;
    if cond > MAX_CONDITION {
        return Err(Error::Conditioning(cond));
    }
    Ok(cond)
}

/// Draws `trials` colored noise blocks from the model and compares the
/// covariance of `G^{-1} q_c` with its closed form.
pub fn verify_noise_covariance(
    n: usize,
    sigma2: f64,
    trials: usize,
    model: &IsiModel,
    seed: u64,
) -> Result<CovarianceReport> {
    if model.block_len() != n || trials == 0 || !(sigma2 > 0.0) {
        return Err(Error::Parameter(format!(
            "need a model of length {n}, at least one trial and sigma2 > 0"
        )));
    }
    let g = block_diag2(&model.gram);
    check_conditioning(&g)?;
    let g_inv = g.clone().try_inverse().ok_or(Error::Conditioning(f64::INFINITY))?;
    let sqrt = model.gram_sqrt()?;

    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<DMatrix<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, 0, c as u64, StreamPurpose::Data);
            let mut acc = DMatrix::zeros(2 * n, 2 * n);
            let count = CHUNK.min(trials - c * CHUNK);
            for _ in 0..count {
                let white = complex_noise(n, sigma2, &mut rng);
                let q = real_stack(&(sqrt.map(|v| num_complex::Complex64::new(v, 0.0)) * white));
                let eta = &g_inv * q;
                acc.ger(1.0, &eta, &eta, 1.0);
            }
            acc
        })
        .collect();
    let mut empirical = DMatrix::zeros(2 * n, 2 * n);
    for p in &partial {
        empirical += p;
    }
    empirical /= trials as f64;
    let target = &g_inv * (0.5 * sigma2);

    let relative_error = (&empirical - &target).norm() / target.norm();
    let cross = empirical.view((n, 0), (n, n)).norm();
    let diag = empirical.view((0, 0), (n, n)).norm();
    Ok(CovarianceReport {
        n,
        sigma2,
        trials,
        empirical,
        target,
        relative_error,
        cross_block_ratio: cross / diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FtnConfig;
    use crate::signal::isi::build_isi_model;
    use crate::signal::pulse::rrc_pulse;

    #[test]
    fn identity_gram() {
        let model = IsiModel::from_taps(vec![1.0], 4, 0.0).unwrap();
        let r = verify_noise_covariance(4, 2.0, 100_000, &model, 3).unwrap();
        assert!((&r.target - DMatrix::<f64>::identity(8, 8)).amax() < 1e-15);
        assert!(r.relative_error < 0.05, "{}", r.relative_error);
        assert!(r.cross_block_ratio < 0.05);
        assert_eq!(r.empirical, r.empirical.transpose());
    }

    #[test]
    fn ftn_gram_identity() {
        let cfg = FtnConfig { tau: 0.8, beta: 0.3, block_len: 8, ..FtnConfig::default() };
        let model = build_isi_model(&rrc_pulse(0.3, 1.0).unwrap(), &cfg).unwrap();
        let r = verify_noise_covariance(8, 1.0, 50_000, &model, 11).unwrap();
        assert!(r.relative_error < 0.05, "{}", r.relative_error);
        assert!(r.summary().contains("frobenius_relative_error="));
        let again = verify_noise_covariance(8, 1.0, 50_000, &model, 11).unwrap();
        assert_eq!(r.empirical, again.empirical);
    }

    #[test]
    fn ill_conditioned_gram_is_rejected() {
        let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-9]));
        assert!(matches!(check_conditioning(&g), Err(Error::Conditioning(c)) if c > 1e8));
        assert!(matches!(check_conditioning(&DMatrix::zeros(2, 2)), Err(Error::Conditioning(_))));
        assert!((check_conditioning(&DMatrix::identity(3, 3)).unwrap() - 1.0).abs() < 1e-15);
        let model = IsiModel::from_taps(vec![1.0, 0.3], 4, 0.0).unwrap();
        assert!(verify_noise_covariance(5, 1.0, 10, &model, 0).is_err());
    }
}
