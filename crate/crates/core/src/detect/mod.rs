//! Sequence detectors: exhaustive MLSE reference, PSK semidefinite relaxation
//! and the 16-QAM relaxation with box and interval constraints.

use std::time::Duration;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sdp::SolveStatus;
use crate::signal::constellation::SymbolVector;

pub mod lifted;
pub mod mlse;
pub mod psk;
pub mod qam;

pub use lifted::{build_theta_c, build_theta_psk, build_theta_w, CostOrigin, LiftedCost};
pub use mlse::{mlse_exhaustive, mlse_with_limit, sequence_metric};
pub use psk::{build_psk_sdr, detect_psk, quantize_psk, randomize_psk};
pub use qam::{build_stsdrse, detect_16qam, quantize_16qam, randomize_qam, ReceivePath};

/// Output of a relaxed detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub a_hat: SymbolVector,
    /// `tr(Theta X*)` at the relaxed optimum.
    pub relaxed_objective: f64,
    /// Lifted objective of `a_hat`.
    pub rounded_objective: f64,
    /// Zero-based index of the winning randomization draw.
    pub l_op: usize,
    pub num_candidates: usize,
    pub solver_status: SolveStatus,
    pub solver_iterations: usize,
    /// Magnitude of the most negative covariance eigenvalue clipped before sampling.
    pub psd_clip: f64,
    pub solve_time: Duration,
    pub total_time: Duration,
}

/// Quantized candidates of a Gaussian randomization, in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizationDraws {
    pub candidates: Vec<Vec<usize>>,
    pub objectives: Vec<f64>,
    pub psd_clip: f64,
}

impl RandomizationDraws {
    /// First draw attaining the smallest objective.
    pub fn best(&self) -> (usize, &[usize], f64) {
        let mut l_op = 0;
        for (l, obj) in self.objectives.iter().enumerate() {
            if *obj < self.objectives[l_op] {
                l_op = l;
            }
        }
        (l_op, &self.candidates[l_op], self.objectives[l_op])
    }
}

/// Zero-mean Gaussian sampler for a covariance whose negative eigenvalues
/// are clipped to zero.
pub(crate) struct GaussianSampler {
    factor: DMatrix<f64>,
    pub clip: f64,
}

impl GaussianSampler {
    pub fn new(cov: DMatrix<f64>) -> Self {
        let sym = (&cov + cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let clip = eig.eigenvalues.iter().fold(0.0f64, |c, l| c.max(-l));
        let mut factor = eig.eigenvectors;
        for (j, l) in eig.eigenvalues.iter().enumerate() {
            factor.column_mut(j).scale_mut(l.max(0.0).sqrt());
        }
        GaussianSampler { factor, clip }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let w = DVector::from_fn(self.factor.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.factor * w
    }
}

pub(crate) fn check_candidates(l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::Parameter("number of randomizations L must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn check_status(status: SolveStatus) -> Result<()> {
    match status {
        SolveStatus::Optimal | SolveStatus::MaxIterations => Ok(()),
        other => Err(Error::Solver(format!("relaxation terminated with status {other:?}"))),
    }
}
