//! Simulation configuration shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signal constellation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    /// M-ary PSK on the rotated alphabet `exp(j(2m-1)pi/M)`.
    Psk,
    /// Square 16-QAM on the `{±1, ±3}²` grid.
    Qam16,
}

/// Parameters of an FTN link and of its detector.
///
/// Serialized field names follow the customary notation (`M`, `tau`, `beta`,
/// `T`, `Es`, `sigma2`, `N`, `K`, `L`, `seed`) so that configuration files read
/// naturally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FtnConfig {
    pub modulation: Modulation,
    /// Constellation order.
    #[serde(rename = "M")]
    pub order: usize,
    /// Time-packing factor in `(0, 1]`.
    pub tau: f64,
    /// Roll-off factor of the root-raised-cosine pulse.
    pub beta: f64,
    /// Nyquist symbol period.
    #[serde(rename = "T")]
    pub symbol_period: f64,
    /// Energy per transmitted symbol.
    #[serde(rename = "Es")]
    pub symbol_energy: f64,
    /// Total complex noise variance.
    pub sigma2: f64,
    /// Block length in symbols.
    #[serde(rename = "N")]
    pub block_len: usize,
    /// One-sided ISI truncation; `None` selects it from the tail energy.
    #[serde(rename = "K")]
    pub isi_taps: Option<usize>,
    /// Number of Gaussian-randomization candidates.
    #[serde(rename = "L")]
    pub randomizations: usize,
    pub seed: u64,
    /// Derive the whitened-path noise from the colored draw instead of an
    /// independent draw.
    pub linked_noise: bool,
    /// Constant added to `g[0]` before spectral factorization. Only needed
    /// when `tau (1 + beta) < 1`, where the folded spectrum has a null band.
    pub whitening_floor: f64,
}

impl Default for FtnConfig {
    fn default() -> Self {
        FtnConfig {
            modulation: Modulation::Psk,
            order: 8,
            tau: 0.85,
            beta: 0.3,
            symbol_period: 1.0,
            symbol_energy: 1.0,
            sigma2: 0.1,
            block_len: 20,
            isi_taps: None,
            randomizations: 1000,
            seed: 1,
            linked_noise: false,
            whitening_floor: 0.0,
        }
    }
}

impl FtnConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return fail(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(self.symbol_period > 0.0 && self.symbol_period.is_finite()) {
            return fail(format!("T must be positive, got {}", self.symbol_period));
        }
        if !(self.symbol_energy > 0.0 && self.symbol_energy.is_finite()) {
            return fail(format!("Es must be positive, got {}", self.symbol_energy));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return fail(format!("sigma2 must be non-negative, got {}", self.sigma2));
        }
        if self.block_len == 0 {
            return fail("N must be at least 1".into());
        }
        if self.randomizations == 0 {
            return fail("L must be at least 1".into());
        }
        if !(self.whitening_floor >= 0.0 && self.whitening_floor.is_finite()) {
            return fail(format!(
                "whitening_floor must be non-negative, got {}",
                self.whitening_floor
            ));
        }
        match self.modulation {
            Modulation::Psk => {
                if self.order < 2 || !self.order.is_power_of_two() {
                    return fail(format!("PSK order must be a power of two >= 2, got {}", self.order));
                }
            }
            Modulation::Qam16 => {
                if self.order != 16 {
                    return fail(format!("16-QAM requires M = 16, got {}", self.order));
                }
            }
        }
        Ok(())
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    /// `Es / sigma2` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.symbol_energy / self.sigma2).log10()
    }

    /// Returns a copy whose noise variance realizes `snr_db = 10 log10(Es / sigma2)`.
    pub fn with_snr_db(&self, snr_db: f64) -> FtnConfig {
        FtnConfig {
            sigma2: sigma2_from_snr_db(self.symbol_energy, snr_db),
            ..self.clone()
        }
    }
}

pub fn sigma2_from_snr_db(symbol_energy: f64, snr_db: f64) -> f64 {
    symbol_energy / 10f64.powf(snr_db / 10.0)
}
