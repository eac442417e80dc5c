//! Detection time against block length, with a log-log power-law fit.
//!
//! Trials run sequentially so that timings are not disturbed by other work
//! in the same process.

use std::time::Duration;

use rand::Rng;

use super::{trial_rng, StreamPurpose};
use crate::config::{FtnConfig, Modulation};
use crate::detect::qam::ReceivePath;
use crate::detect::{detect_16qam, detect_psk};
use crate::error::{Error, Result};
use crate::signal::channel::simulate_block;
use crate::signal::constellation::{Constellation, SymbolVector};
use crate::signal::isi::build_isi_model;
use crate::signal::pulse::rrc_pulse;

/// Largest fitted exponent consistent with polynomial-time detection.
pub const COMPLEXITY_EXPONENT_BOUND: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    /// `(N, median detection time)` in input order.
    pub rows: Vec<(usize, Duration)>,
    /// Least-squares slope of `ln t` against `ln N`; absent with fewer than three sizes.
    pub exponent: Option<f64>,
}

impl ComplexityReport {
    pub fn within_bound(&self) -> Option<bool> {
        self.exponent.map(|e| e <= COMPLEXITY_EXPONENT_BOUND)
    }
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2
    }
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Median relaxed-detection time over `reps` random blocks for each block length.
pub fn complexity_probe(n_list: &[usize], cfg: &FtnConfig, reps: usize) -> Result<ComplexityReport> {
    if n_list.is_empty() || reps == 0 {
        return Err(Error::Parameter("need at least one block length and one repetition".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("block lengths must be strictly ascending".into()));
    }
    let pulse = rrc_pulse(cfg.beta, cfg.symbol_period)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (pi, &n) in n_list.iter().enumerate() {
        let cfg = FtnConfig { block_len: n, ..cfg.clone() };
        let model = build_isi_model(&pulse, &cfg)?;
        let c = Constellation::from_config(&cfg)?;
        let mut times = Vec::with_capacity(reps);
        for t in 0..reps as u64 {
            let mut data = trial_rng(cfg.seed, pi, t, StreamPurpose::Data);
            let idx = (0..n).map(|_| data.random_range(0..c.size())).collect();
            let truth = SymbolVector::from_indices(c, idx)?;
            let rx = simulate_block(&truth, &model, &cfg, &mut data)?;
            let mut rng = trial_rng(cfg.seed, pi, t, StreamPurpose::Detection(0));
            let det = match cfg.modulation {
                Modulation::Psk => {
                    let y = rx.whitened.as_ref().ok_or_else(|| Error::Model("whitened samples missing".into()))?;
                    detect_psk(y, &model, &cfg, &mut rng)?
                }
                Modulation::Qam16 => detect_16qam(&rx, &model, &cfg, ReceivePath::Whitened, &mut rng)?,
            };
            times.push(det.total_time);
        }
        rows.push((n, median(times)));
    }
    let exponent = (rows.len() >= 3).then(|| {
        let x: Vec<f64> = rows.iter().map(|(n, _)| (*n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|(_, t)| t.as_secs_f64().max(1e-9).ln()).collect();
        fit_slope(&x, &y)
    });
    Ok(ComplexityReport { rows, exponent })
}
