//! Monte-Carlo BER/SER sweeps over an SNR grid.
//!
//! Trials run in fixed-size batches. Within a batch trials are processed in
//! parallel, each on its own random streams, and counters are reduced in
//! trial order, so results do not depend on the thread count. A detector
//! stops at the end of the first batch in which it has accumulated
//! `max_bit_errors`, or when `max_trials` is reached.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::{spectral_efficiency, trial_rng, StreamPurpose};
use crate::config::{FtnConfig, Modulation};
use crate::detect::qam::ReceivePath;
use crate::detect::{detect_16qam, detect_psk, mlse_with_limit};
use crate::detect::mlse::SEARCH_SPACE_LIMIT;
use crate::error::{Error, Result};
use crate::signal::channel::{amplitude, simulate_block};
use crate::signal::constellation::{Constellation, SymbolVector};
use crate::signal::isi::{build_isi_model, IsiModel};
use crate::signal::pulse::rrc_pulse;

const BATCH: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    SdrPsk,
    Stsdrse16Qam,
    MlseOracle,
}

impl DetectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::SdrPsk => "sdr-psk",
            DetectorKind::Stsdrse16Qam => "stsdrse",
            DetectorKind::MlseOracle => "mlse",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [DetectorKind::SdrPsk, DetectorKind::Stsdrse16Qam, DetectorKind::MlseOracle]
            .into_iter()
            .find(|k| k.name() == name)
    }

    fn stream(&self) -> u8 {
        match self {
            DetectorKind::SdrPsk => 0,
            DetectorKind::Stsdrse16Qam => 1,
            DetectorKind::MlseOracle => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub cfg: FtnConfig,
    pub snr_grid_db: Vec<f64>,
    pub detectors: Vec<DetectorKind>,
    pub max_trials: u64,
    pub max_bit_errors: u64,
    pub linked_noise: bool,
    /// Bound on `M^N` for the exhaustive reference detector.
    pub mlse_search_limit: f64,
}

impl SweepSpec {
    pub fn new(cfg: FtnConfig, snr_grid_db: Vec<f64>, detectors: Vec<DetectorKind>) -> Self {
        let linked_noise = cfg.linked_noise;
        SweepSpec {
            cfg,
            snr_grid_db,
            detectors,
            max_trials: 1000,
            max_bit_errors: 200,
            linked_noise,
            mlse_search_limit: SEARCH_SPACE_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Parameter("SNR grid must be non-empty and free of NaN".into()));
        }
        if self.max_trials == 0 {
            return Err(Error::Parameter("max_trials must be at least 1".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Parameter("no detector selected".into()));
        }
        for d in &self.detectors {
            match (d, self.cfg.modulation) {
                (DetectorKind::SdrPsk, Modulation::Qam16) => {
                    return Err(Error::Parameter("sdr-psk needs PSK modulation".into()))
                }
                (DetectorKind::Stsdrse16Qam, Modulation::Psk) => {
                    return Err(Error::Parameter("stsdrse needs 16-QAM modulation".into()))
                }
                (DetectorKind::MlseOracle, _) => {
                    let size = (self.cfg.order as f64).powi(self.cfg.block_len as i32);
                    if size > self.mlse_search_limit {
                        return Err(Error::SearchSpace { size, limit: self.mlse_search_limit });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Counters for one detector at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub detector: DetectorKind,
    pub snr_db: f64,
    /// Completed (non-erased) trials.
    pub trials: u64,
    /// Trials on which the detector returned an error.
    pub erasures: u64,
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub ber: f64,
    pub ser: f64,
    /// Sum of per-trial detection times.
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerReport {
    pub cfg: FtnConfig,
    pub seed: u64,
    pub spectral_efficiency: f64,
    pub points: Vec<BerPoint>,
}

pub const CSV_HEADER: [&str; 14] = [
    "detector", "M", "tau", "beta", "N", "snr_db", "trials", "bit_errors", "symbol_errors", "ber", "ser",
    "se_bits_per_s_per_hz", "seed", "wall_time_ms",
];

impl BerReport {
    pub fn point(&self, detector: DetectorKind, snr_db: f64) -> Option<&BerPoint> {
        self.points.iter().find(|p| p.detector == detector && p.snr_db == snr_db)
    }

    /// `(snr_db, ber)` pairs of one detector in grid order.
    pub fn curve(&self, detector: DetectorKind) -> Vec<(f64, f64)> {
        self.points.iter().filter(|p| p.detector == detector).map(|p| (p.snr_db, p.ber)).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Parameter(format!("writing CSV failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(io)?;
        for p in &self.points {
            w.write_record([
                p.detector.name().to_string(),
                self.cfg.order.to_string(),
                self.cfg.tau.to_string(),
                self.cfg.beta.to_string(),
                self.cfg.block_len.to_string(),
                p.snr_db.to_string(),
                p.trials.to_string(),
                p.bit_errors.to_string(),
                p.symbol_errors.to_string(),
                p.ber.to_string(),
                p.ser.to_string(),
                self.spectral_efficiency.to_string(),
                self.seed.to_string(),
                format!("{:.3}", p.wall_time_ms),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parameter(format!("writing CSV failed: {e}")))?;
        Ok(())
    }
}

enum Outcome {
    Counted { bits: u64, symbols: u64, ms: f64 },
    Erased { ms: f64 },
}

fn random_symbols<R: Rng + ?Sized>(c: Constellation, n: usize, rng: &mut R) -> Result<SymbolVector> {
    let idx = (0..n).map(|_| rng.random_range(0..c.size())).collect();
    SymbolVector::from_indices(c, idx)
}

#[allow(clippy::too_many_arguments)]
fn run_detector(
    kind: DetectorKind,
    truth: &SymbolVector,
    rx: &crate::signal::channel::ReceivedBlock,
    model: &IsiModel,
    cfg: &FtnConfig,
    mlse_channel: &DMatrix<f64>,
    mlse_limit: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Outcome {
    let start = Instant::now();
    let detected = match kind {
        DetectorKind::SdrPsk => rx
            .whitened
            .as_ref()
            .ok_or_else(|| Error::Model("whitened samples missing".into()))
            .and_then(|y| detect_psk(y, model, cfg, rng))
            .map(|d| d.a_hat),
        DetectorKind::Stsdrse16Qam => detect_16qam(rx, model, cfg, ReceivePath::Whitened, rng).map(|d| d.a_hat),
        DetectorKind::MlseOracle => rx
            .whitened
            .as_ref()
            .ok_or_else(|| Error::Model("whitened samples missing".into()))
            .and_then(|y| mlse_with_limit(y, mlse_channel, truth.constellation, mlse_limit))
            .map(|(a, _)| a),
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match detected {
        Ok(a) => Outcome::Counted { bits: truth.bit_errors(&a), symbols: truth.symbol_errors(&a), ms },
        Err(_) => Outcome::Erased { ms },
    }
}

/// Runs every detector of `spec` over the SNR grid.
pub fn run_ber_sweep(spec: &SweepSpec) -> Result<BerReport> {
    spec.validate()?;
    let base = FtnConfig { linked_noise: spec.linked_noise, ..spec.cfg.clone() };
    let constellation = Constellation::from_config(&base)?;
    let model = build_isi_model(&rrc_pulse(base.beta, base.symbol_period)?, &base)?;
    let n = base.block_len;
    let bits_per_block = n as u64 * u64::from(constellation.bits_per_symbol());
    let mlse_channel = &model.whitened * amplitude(&base, constellation.mean_energy());

    let mut points = Vec::new();
    for (pi, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let cfg = base.with_snr_db(snr_db);
        let d = spec.detectors.len();
        let mut trials = vec![0u64; d];
        let mut erasures = vec![0u64; d];
        let mut bit_errors = vec![0u64; d];
        let mut symbol_errors = vec![0u64; d];
        let mut ms = vec![0.0f64; d];
        let mut active = vec![true; d];
        let mut next = 0u64;

        while next < spec.max_trials && active.iter().any(|a| *a) {
            let end = (next + BATCH).min(spec.max_trials);
            let running: Vec<usize> = (0..d).filter(|&k| active[k]).collect();
            let results: Vec<Result<Vec<(usize, Outcome)>>> = (next..end)
                .into_par_iter()
                .map(|t| {
                    let mut data_rng = trial_rng(spec.cfg.seed, pi, t, StreamPurpose::Data);
                    let truth = random_symbols(constellation, n, &mut data_rng)?;
                    let rx = simulate_block(&truth, &model, &cfg, &mut data_rng)?;
                    Ok(running
                        .iter()
                        .map(|&k| {
                            let kind = spec.detectors[k];
                            let mut rng = trial_rng(spec.cfg.seed, pi, t, StreamPurpose::Detection(kind.stream()));
                            (k, run_detector(kind, &truth, &rx, &model, &cfg, &mlse_channel, spec.mlse_search_limit, &mut rng))
                        })
                        .collect())
                })
                .collect();
            for trial in results {
                for (k, outcome) in trial? {
                    match outcome {
                        Outcome::Counted { bits, symbols, ms: t } => {
                            trials[k] += 1;
                            bit_errors[k] += bits;
                            symbol_errors[k] += symbols;
                            ms[k] += t;
                        }
                        Outcome::Erased { ms: t } => {
                            erasures[k] += 1;
                            ms[k] += t;
                        }
                    }
                }
            }
            for k in 0..d {
                if bit_errors[k] >= spec.max_bit_errors {
                    active[k] = false;
                }
            }
            next = end;
        }

        for k in 0..d {
            let denom = trials[k].max(1) as f64;
            points.push(BerPoint {
                detector: spec.detectors[k],
                snr_db,
                trials: trials[k],
                erasures: erasures[k],
                bit_errors: bit_errors[k],
                symbol_errors: symbol_errors[k],
                ber: bit_errors[k] as f64 / (denom * bits_per_block as f64),
                ser: symbol_errors[k] as f64 / (denom * n as f64),
                wall_time_ms: ms[k],
            });
        }
    }

    Ok(BerReport {
        spectral_efficiency: spectral_efficiency(base.order, base.tau, base.beta),
        seed: base.seed,
        cfg: base,
        points,
    })
}
