//! Received-sample generation for the colored and whitened receive paths.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::constellation::SymbolVector;
use super::isi::IsiModel;
use crate::config::FtnConfig;
use crate::error::{Error, Result};

/// Matched-filter output of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    /// `y_c = sqrt(tau Es) G a + q_c`.
    pub colored: Option<DVector<Complex64>>,
    /// `y_w = sqrt(tau Es) V a + q_w`.
    pub whitened: Option<DVector<Complex64>>,
    pub snr_db: f64,
}

/// Scale applied to alphabet points so that the mean transmitted energy per
/// symbol is `Es`, including the `sqrt(tau)` packing factor.
pub fn amplitude(cfg: &FtnConfig, mean_energy: f64) -> f64 {
    (cfg.tau * cfg.symbol_energy / mean_energy).sqrt()
}

/// Draws `n` circularly-symmetric complex Gaussians with total variance `sigma2`.
pub fn complex_noise<R: Rng + ?Sized>(n: usize, sigma2: f64, rng: &mut R) -> DVector<Complex64> {
    let std = (0.5 * sigma2).sqrt();
    DVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(std * re, std * im)
    })
}

fn real_times_complex(m: &nalgebra::DMatrix<f64>, x: &DVector<Complex64>) -> DVector<Complex64> {
    let re = m * x.map(|z| z.re);
    let im = m * x.map(|z| z.im);
    DVector::from_fn(x.len(), |i, _| Complex64::new(re[i], im[i]))
}

/// Passes a symbol block through both receive paths.
///
/// The colored noise is `G^{1/2} w` with `w` white, so its covariance is
/// `sigma2 G` with independent real and imaginary parts of covariance
/// `sigma2 G / 2` each. The whitened path uses an independent white draw,
/// or with `cfg.linked_noise` the colored draw filtered by `V^{-T}`.
pub fn simulate_block<R: Rng + ?Sized>(
    symbols: &SymbolVector,
    model: &IsiModel,
    cfg: &FtnConfig,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    let n = model.block_len();
    if symbols.len() != n {
        return Err(Error::Parameter(format!(
            "block of {} symbols does not match model length {n}",
            symbols.len()
        )));
    }
    let scale = amplitude(cfg, symbols.constellation.mean_energy());
    let a = &symbols.symbols * Complex64::new(scale, 0.0);

    let gram_sqrt = model.gram_sqrt()?;
    let white = complex_noise(n, cfg.sigma2, rng);
    let colored_noise = real_times_complex(gram_sqrt, &white);
    let colored = real_times_complex(&model.gram, &a) + &colored_noise;

    let whitened_noise = if cfg.linked_noise {
        let upper = model.whitened.transpose();
        let re = upper
            .solve_upper_triangular(&colored_noise.map(|z| z.re))
            .ok_or_else(|| Error::Model("whitening factor is singular".into()))?;
        let im = upper
            .solve_upper_triangular(&colored_noise.map(|z| z.im))
            .ok_or_else(|| Error::Model("whitening factor is singular".into()))?;
        DVector::from_fn(n, |i, _| Complex64::new(re[i], im[i]))
    } else {
        complex_noise(n, cfg.sigma2, rng)
    };
    let whitened = real_times_complex(&model.whitened, &a) + whitened_noise;

    Ok(ReceivedBlock {
        colored: Some(colored),
        whitened: Some(whitened),
        snr_db: cfg.snr_db(),
    })
}
