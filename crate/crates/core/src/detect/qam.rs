//! 16-QAM detection by semidefinite relaxation over the real-stacked symbols.
//!
//! Each real coordinate `x` of the stacked vector must lie in `{±1, ±3}`.
//! That set is exactly `1 <= x^2 <= 9`, `(x + 1)(x + 3) >= 0` and
//! `(x - 1)(x - 3) >= 0`; lifting `psi = [a; 1]` turns all three into linear
//! constraints on `Psi = psi psi^T`.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;

use super::lifted::{build_theta_c, build_theta_w, LiftedCost};
use super::{check_candidates, check_status, DetectionResult, GaussianSampler, RandomizationDraws};
use crate::config::{FtnConfig, Modulation};
use crate::error::{Error, Result};
use crate::sdp::{solve, SdpProblem, SolverOptions, SparseSym};
use crate::signal::channel::{amplitude, ReceivedBlock};
use crate::signal::constellation::{Constellation, SymbolVector};
use crate::signal::isi::IsiModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceivePath {
    Whitened,
    Colored,
}

/// Relaxation of the lifted cost with per-coordinate alphabet constraints.
pub fn build_stsdrse(cost: &LiftedCost, n: usize) -> Result<SdpProblem> {
    let order = 2 * n + 1;
    if cost.theta.nrows() != order || cost.n != 2 * n {
        return Err(Error::Parameter(format!(
            "lifted cost has order {}, expected {order}",
            cost.theta.nrows()
        )));
    }
    let last = 2 * n;
    let mut problem = SdpProblem::new(cost.theta.clone());
    problem.add_equality(SparseSym::diagonal_unit(order, last), 1.0);
    for k in 0..2 * n {
        problem.add_inequality(SparseSym::diagonal_unit(order, k), 1.0);
        let mut upper = SparseSym::new(order);
        upper.push(k, k, -1.0);
        problem.add_inequality(upper, -9.0);
        for sign in [1.0, -1.0] {
            // Psi_kk ± 4 Psi_{k,last} >= -3; off-diagonal entries count twice in the trace
            let mut a = SparseSym::new(order);
            a.push(k, k, 1.0).push(k, last, 2.0 * sign);
            problem.add_inequality(a, -3.0);
        }
    }
    Ok(problem)
}

/// Nearest of `{-3, -1, 1, 3}`; midpoints round up.
pub fn quantize_16qam(x: f64) -> f64 {
    if x >= 2.0 {
        3.0
    } else if x >= 0.0 {
        1.0
    } else if x >= -2.0 {
        -1.0
    } else {
        -3.0
    }
}

fn level_index(x: f64) -> usize {
    ((x + 3.0) / 2.0) as usize
}

/// Draws `zeta ~ N(0, Psi_op)`, rescales so the last entry is 1 and quantizes.
///
/// Candidates are returned as 16-QAM symbol indices.
pub fn randomize_qam<R: Rng + ?Sized>(
    psi_opt: &DMatrix<f64>,
    cost: &LiftedCost,
    l: usize,
    rng: &mut R,
) -> Result<RandomizationDraws> {
    check_candidates(l)?;
    let order = psi_opt.nrows();
    if order != cost.theta.nrows() || order.is_multiple_of(2) {
        return Err(Error::Parameter("relaxed solution does not match the cost dimensions".into()));
    }
    let n = (order - 1) / 2;
    let sampler = GaussianSampler::new(psi_opt.clone());

    let mut candidates = Vec::with_capacity(l);
    let mut objectives = Vec::with_capacity(l);
    let mut a = vec![0.0; 2 * n];
    for _ in 0..l {
        let zeta = sampler.sample(rng);
        // psi and any nonzero multiple lift to the same ray
        let scale = if zeta[2 * n] != 0.0 { 1.0 / zeta[2 * n] } else { 1.0 };
        for (k, x) in a.iter_mut().enumerate() {
            *x = quantize_16qam(zeta[k] * scale);
        }
        objectives.push(cost.objective_real(&a));
        candidates.push((0..n).map(|k| 4 * level_index(a[k]) + level_index(a[n + k])).collect());
    }
    Ok(RandomizationDraws { candidates, objectives, psd_clip: sampler.clip })
}

/// Cost construction, relaxation, solve and randomization on the chosen path.
pub fn detect_16qam<R: Rng + ?Sized>(
    rx: &ReceivedBlock,
    model: &IsiModel,
    cfg: &FtnConfig,
    path: ReceivePath,
    rng: &mut R,
) -> Result<DetectionResult> {
    let start = Instant::now();
    if cfg.modulation != Modulation::Qam16 {
        return Err(Error::Parameter("16-QAM detector requires 16-QAM modulation".into()));
    }
    let s = amplitude(cfg, Constellation::Qam16.mean_energy());
    let cost = match path {
        ReceivePath::Whitened => {
            let y = rx.whitened.as_ref().ok_or_else(|| Error::Parameter("whitened samples missing".into()))?;
            build_theta_w(model, y, s)?
        }
        ReceivePath::Colored => {
            let y = rx.colored.as_ref().ok_or_else(|| Error::Parameter("colored samples missing".into()))?;
            build_theta_c(model, y, s)?
        }
    };
    let n = model.block_len();
    let problem = build_stsdrse(&cost, n)?;
    let solution = solve(&problem, &SolverOptions::default())?;
    let solve_time = start.elapsed();
    check_status(solution.status)?;

    let draws = randomize_qam(&solution.x, &cost, cfg.randomizations, rng)?;
    let (l_op, best, rounded_objective) = draws.best();
    Ok(DetectionResult {
        a_hat: SymbolVector::from_indices(Constellation::Qam16, best.to_vec())?,
        relaxed_objective: solution.objective,
        rounded_objective,
        l_op,
        num_candidates: draws.candidates.len(),
        solver_status: solution.status,
        solver_iterations: solution.iterations,
        psd_clip: draws.psd_clip,
        solve_time,
        total_time: start.elapsed(),
    })
}
