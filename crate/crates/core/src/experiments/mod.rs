//! Monte-Carlo experiments: error-rate sweeps, the noise-covariance identity
//! of the colored path and detection-time scaling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod complexity;
pub mod covariance;
pub mod sweep;
pub mod theory;

pub use complexity::{complexity_probe, ComplexityReport, COMPLEXITY_EXPONENT_BOUND};
pub use covariance::{verify_noise_covariance, CovarianceReport};
pub use sweep::{run_ber_sweep, BerPoint, BerReport, DetectorKind, SweepSpec};
pub use theory::{psk_ber_awgn, psk_ser_awgn, snr_at_ber, wilson_interval};

/// `log2(M) / (tau (1 + beta))` in bits/s/Hz.
pub fn spectral_efficiency(order: usize, tau: f64, beta: f64) -> f64 {
    (order as f64).log2() / (tau * (1.0 + beta))
}

/// Role of a random stream within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Data,
    Detection(u8),
}

/// Independent ChaCha stream for `(grid point, trial, purpose)` under `seed`.
pub fn trial_rng(seed: u64, point: usize, trial: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let tag = match purpose {
        StreamPurpose::Data => 0,
        StreamPurpose::Detection(k) => 1 + u64::from(k),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 44) ^ (trial << 4) ^ tag);
    rng
}
