//! Discrete-time ISI model of FTN signaling: taps, Gram matrix and whitened factor.

use nalgebra::{DMatrix, SymmetricEigen};

use super::factor::{autocorrelate, spectral_factorize, DEFAULT_FACTOR_TOL};
use super::pulse::RrcPulse;
use crate::config::FtnConfig;
use crate::error::{Error, Result};

/// Relative tail energy below which the tap sequence is truncated.
pub const TAIL_ENERGY_FRACTION: f64 = 1e-8;

/// A truncated tap must be smaller than this in magnitude.
pub const MAX_EDGE_TAP: f64 = 1e-4;

/// Minimum eigenvalue of `G` tolerated as round-off.
pub const PSD_TOL: f64 = 1e-8;

/// ISI description for a given `(beta, tau, N)`.
///
/// Immutable after construction; cheap to share between threads.
#[derive(Debug, Clone)]
pub struct IsiModel {
    /// `g[k]` for `k = 0..=K`; `g[-k] = g[k]`.
    pub taps: Vec<f64>,
    /// Causal minimum-phase factor `v[0..=K]`.
    pub factor: Vec<f64>,
    /// `N x N` symmetric Toeplitz Gram matrix.
    pub gram: DMatrix<f64>,
    /// `N x N` lower-triangular Toeplitz convolution matrix of `v`.
    pub whitened: DMatrix<f64>,
    pub factorization_residual: f64,
    pub min_gram_eigenvalue: f64,
    /// Symmetric square root of `G`, absent when `G` is indefinite beyond tolerance.
    gram_sqrt: Option<DMatrix<f64>>,
}

impl IsiModel {
    /// One-sided truncation length `K`.
    pub fn isi_taps(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn block_len(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram_sqrt(&self) -> Result<&DMatrix<f64>> {
        self.gram_sqrt.as_ref().ok_or_else(|| {
            Error::Model(format!(
                "Gram matrix is not positive semidefinite (min eigenvalue {:.3e})",
                self.min_gram_eigenvalue
            ))
        })
    }

    /// Builds the model from explicit taps (length `K + 1`) for block length `n`.
    pub fn from_taps(taps: Vec<f64>, n: usize, whitening_floor: f64) -> Result<Self> {
        if taps.is_empty() || n == 0 {
            return Err(Error::Parameter("need at least one tap and N >= 1".into()));
        }
        let mut target = taps.clone();
        target[0] += whitening_floor;
        let factor = spectral_factorize(&target, DEFAULT_FACTOR_TOL)?;

        let gram = toeplitz_symmetric(&taps, n);
        let whitened = toeplitz_lower(&factor.taps, n);

        let eig = SymmetricEigen::new(gram.clone());
        let min_eig = eig.eigenvalues.min();
        let gram_sqrt = (min_eig >= -PSD_TOL).then(|| {
            let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose()
        });

        let residual = autocorrelate(&factor.taps)
            .iter()
            .zip(&taps)
            .map(|(r, g)| (r - g).abs())
            .fold(0.0, f64::max);

        Ok(IsiModel {
            taps,
            factor: factor.taps,
            gram,
            whitened,
            factorization_residual: residual,
            min_gram_eigenvalue: min_eig,
            gram_sqrt,
        })
    }
}

/// Default one-sided truncation cap, `40 ceil(1/tau)`.
pub fn max_isi_taps(tau: f64) -> usize {
    40 * (1.0 / tau).ceil() as usize
}

/// Samples the pulse autocorrelation every `tau T` and assembles `G`, `v` and `V`.
pub fn build_isi_model(pulse: &RrcPulse, cfg: &FtnConfig) -> Result<IsiModel> {
    cfg.validate()?;
    let spacing = cfg.tau * cfg.symbol_period;
    let sample = |k: usize| pulse.autocorrelation(k as f64 * spacing);

    let taps = match cfg.isi_taps {
        Some(k) => {
            let mut taps: Vec<f64> = (0..=k).map(sample).collect();
            // extend until the edge tap is negligible
            let limit = k.max(max_isi_taps(cfg.tau));
            while taps.len() <= limit && taps.last().is_some_and(|g| g.abs() >= MAX_EDGE_TAP) {
                taps.push(sample(taps.len()));
            }
            taps
        }
        None => {
            let cap = max_isi_taps(cfg.tau);
            let all: Vec<f64> = (0..=cap).map(sample).collect();
            let k = tail_truncation(&all);
            all[..=k].to_vec()
        }
    };
    IsiModel::from_taps(taps, cfg.block_len, cfg.whitening_floor)
}

/// Smallest `K` with `sum_{|k| > K} g[k]^2 < TAIL_ENERGY_FRACTION * sum_k g[k]^2`.
fn tail_truncation(g: &[f64]) -> usize {
    let total: f64 = g[0] * g[0] + 2.0 * g[1..].iter().map(|x| x * x).sum::<f64>();
    let mut tail = total - g[0] * g[0];
    let mut k = 0;
    while k + 1 < g.len() && tail >= TAIL_ENERGY_FRACTION * total {
        k += 1;
        tail -= 2.0 * g[k] * g[k];
    }
    k
}

pub fn toeplitz_symmetric(taps: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| taps.get(i.abs_diff(j)).copied().unwrap_or(0.0))
}

pub fn toeplitz_lower(taps: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i >= j { taps.get(i - j).copied().unwrap_or(0.0) } else { 0.0 })
}
