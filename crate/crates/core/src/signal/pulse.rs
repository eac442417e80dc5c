//! Root-raised-cosine pulse and its autocorrelation.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Distance (in units of `T`) inside which a removable singularity is
/// replaced by its limit.
const SINGULARITY_GUARD: f64 = 1e-8;

/// Unit-energy root-raised-cosine pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct RrcPulse {
    beta: f64,
    period: f64,
}

/// Builds the root-raised-cosine pulse with roll-off `beta` and symbol period `period`.
pub fn rrc_pulse(beta: f64, period: f64) -> Result<RrcPulse> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Parameter(format!("roll-off must lie in [0, 1], got {beta}")));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Parameter(format!("symbol period must be positive, got {period}")));
    }
    Ok(RrcPulse { beta, period })
}

impl RrcPulse {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Pulse amplitude `p(t)` in units of `1/sqrt(seconds)`.
    pub fn eval(&self, t: f64) -> f64 {
        let beta = self.beta;
        let x = t.abs() / self.period;
        let scale = 1.0 / self.period.sqrt();

        if x < SINGULARITY_GUARD {
            return scale * (1.0 - beta + 4.0 * beta / PI);
        }
        if beta > 0.0 && (x - 1.0 / (4.0 * beta)).abs() < SINGULARITY_GUARD {
            let arg = PI / (4.0 * beta);
            return scale * beta / SQRT_2
                * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
        }
        let num = (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos();
        let den = PI * x * (1.0 - (4.0 * beta * x).powi(2));
        scale * num / den
    }

    /// Squared magnitude of the pulse spectrum (the raised-cosine spectrum).
    pub fn energy_spectrum(&self, f: f64) -> f64 {
        let t = self.period;
        let beta = self.beta;
        let f = f.abs();
        let f1 = (1.0 - beta) / (2.0 * t);
        let f2 = (1.0 + beta) / (2.0 * t);
        if f <= f1 {
            t
        } else if f <= f2 {
            0.5 * t * (1.0 + (PI * t / beta * (f - f1)).cos())
        } else {
            0.0
        }
    }

    /// Band edge `(1 + beta) / (2T)` beyond which the spectrum vanishes.
    pub fn bandwidth(&self) -> f64 {
        (1.0 + self.beta) / (2.0 * self.period)
    }

    /// Autocorrelation `g(t) = ∫ p(x) p(x - t) dx`.
    ///
    /// Evaluated as the inverse Fourier transform of the energy spectrum,
    /// integrated piecewise over its flat and cosine-rolloff regions.
    pub fn autocorrelation(&self, t: f64) -> f64 {
        let rule = GaussLegendre::new(16);
        let f1 = (1.0 - self.beta) / (2.0 * self.period);
        let f2 = self.bandwidth();
        let kernel = |f: f64| self.energy_spectrum(f) * (2.0 * PI * f * t).cos();
        let panels = |width: f64| 2 + (4.0 * width * t.abs()).ceil() as usize;
        let mut total = 0.0;
        if f1 > 0.0 {
            total += rule.integrate(kernel, 0.0, f1, panels(f1));
        }
        if f2 > f1 {
            total += rule.integrate(kernel, f1, f2, panels(f2 - f1));
        }
        2.0 * total
    }
}
