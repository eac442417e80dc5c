//! M-PSK detection by semidefinite relaxation and Gaussian randomization.
//!
//! The lifted matrix `B = [[A, a], [a^H, 1]]` is relaxed to `B ⪰ 0` with
//! unit diagonal and solved in its real embedding of order `2(N + 1)`.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::lifted::{build_theta_psk, complex_from_embedding, real_embedding, LiftedCost};
use super::{check_candidates, check_status, DetectionResult, GaussianSampler, RandomizationDraws};
use crate::config::{FtnConfig, Modulation};
use crate::error::{Error, Result};
use crate::sdp::{solve, SdpProblem, SolverOptions, SparseSym};
use crate::signal::channel::amplitude;
use crate::signal::constellation::{Constellation, SymbolVector};
use crate::signal::isi::IsiModel;

/// Builds the relaxation `min tr(Theta B)` s.t. `B_kk = 1`, `B ⪰ 0` in real form.
pub fn build_psk_sdr(model: &IsiModel, y_w: &DVector<Complex64>, cfg: &FtnConfig) -> Result<(SdpProblem, LiftedCost)> {
    if cfg.modulation != Modulation::Psk {
        return Err(Error::Parameter("PSK relaxation requires PSK modulation".into()));
    }
    let cost = build_theta_psk(model, y_w, amplitude(cfg, 1.0))?;
    let order = cost.theta.nrows();
    let mut problem = SdpProblem::new(cost.theta.clone());
    for k in 0..order {
        problem.add_equality(SparseSym::diagonal_unit(order, k), 1.0);
    }
    Ok((problem, cost))
}

/// Sector quantizer onto `exp(j(2i+1)pi/M)`: `arg z` in `[2 pi i/M, 2 pi (i+1)/M)` maps to `i`.
pub fn quantize_psk(z: Complex64, order: usize) -> usize {
    let angle = z.im.atan2(z.re).rem_euclid(2.0 * PI);
    ((angle * order as f64 / (2.0 * PI)).floor() as usize).min(order - 1)
}

/// Draws `l` candidates `xi ~ CN(a*, A* - a* a*^H)` in sequence and quantizes each.
pub fn randomize_psk<R: Rng + ?Sized>(
    a_star: &DVector<Complex64>,
    a_mat: &DMatrix<Complex64>,
    cost: &LiftedCost,
    l: usize,
    constellation: Constellation,
    rng: &mut R,
) -> Result<RandomizationDraws> {
    check_candidates(l)?;
    let Constellation::Psk { order } = constellation else {
        return Err(Error::Parameter("PSK randomization needs a PSK alphabet".into()));
    };
    let n = a_star.len();
    if a_mat.shape() != (n, n) || cost.n != n {
        return Err(Error::Parameter("relaxed solution does not match the cost dimensions".into()));
    }
    let cov = a_mat - a_star * a_star.adjoint();
    // a circular complex Gaussian with covariance S has real-stacked covariance R(S) / 2
    let sampler = GaussianSampler::new(real_embedding(&cov) * 0.5);
    let points = constellation.points();

    let mut candidates = Vec::with_capacity(l);
    let mut objectives = Vec::with_capacity(l);
    let mut symbols = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..l {
        let w = sampler.sample(rng);
        let idx: Vec<usize> = (0..n)
            .map(|k| quantize_psk(a_star[k] + Complex64::new(w[k], w[n + k]), order))
            .collect();
        for (s, &i) in symbols.iter_mut().zip(&idx) {
            *s = points[i];
        }
        objectives.push(cost.objective_complex(&symbols));
        candidates.push(idx);
    }
    Ok(RandomizationDraws { candidates, objectives, psd_clip: sampler.clip })
}

/// Relaxation, solve and randomization on a whitened block.
pub fn detect_psk<R: Rng + ?Sized>(
    y_w: &DVector<Complex64>,
    model: &IsiModel,
    cfg: &FtnConfig,
    rng: &mut R,
) -> Result<DetectionResult> {
    let start = Instant::now();
    let constellation = Constellation::from_config(cfg)?;
    let (problem, cost) = build_psk_sdr(model, y_w, cfg)?;
    let solution = solve(&problem, &SolverOptions::default())?;
    let solve_time = start.elapsed();
    check_status(solution.status)?;

    let n = cost.n;
    let b = complex_from_embedding(&solution.x);
    let a_star = b.view((0, n), (n, 1)).column(0).into_owned();
    let a_mat = b.view((0, 0), (n, n)).into_owned();
    let draws = randomize_psk(&a_star, &a_mat, &cost, cfg.randomizations, constellation, rng)?;
    let (l_op, best, rounded_objective) = draws.best();

    Ok(DetectionResult {
        a_hat: SymbolVector::from_indices(constellation, best.to_vec())?,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::mlse::mlse_exhaustive;
    use crate::sdp::check_solution;
    use crate::signal::channel::simulate_block;
    use crate::signal::isi::build_isi_model;
    use crate::signal::pulse::rrc_pulse;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(tau: f64, order: usize, n: usize, sigma2: f64) -> (FtnConfig, IsiModel) {
        let cfg = FtnConfig { tau, beta: 0.3, order, block_len: n, sigma2, randomizations: 200, ..FtnConfig::default() };
        let model = build_isi_model(&rrc_pulse(0.3, 1.0).unwrap(), &cfg).unwrap();
        (cfg, model)
    }

    fn random_block(cfg: &FtnConfig, model: &IsiModel, rng: &mut ChaCha8Rng) -> (SymbolVector, DVector<Complex64>) {
        let c = Constellation::from_config(cfg).unwrap();
        let idx = (0..cfg.block_len).map(|_| rng.random_range(0..c.size())).collect();
        let truth = SymbolVector::from_indices(c, idx).unwrap();
        let y = simulate_block(&truth, model, cfg, rng).unwrap().whitened.unwrap();
        (truth, y)
    }

    #[test]
    fn sector_quantizer() {
        let m = 8;
        let step = 2.0 * PI / m as f64;
        for i in 0..m {
            let lo = step * i as f64;
            assert_eq!(quantize_psk(Complex64::from_polar(1.0, lo + 1e-9), m), i);
            assert_eq!(quantize_psk(Complex64::from_polar(2.0, lo + 0.5 * step), m), i);
            assert_eq!(quantize_psk(Complex64::from_polar(0.3, lo + step - 1e-9), m), i);
        }
        // every alphabet point sits at the centre of its own sector
        let c = Constellation::psk(m).unwrap();
        for i in 0..m {
            assert_eq!(quantize_psk(c.point(i), m), i);
        }
    }

    #[test]
    fn rank_one_noiseless_single_symbol() {
        let model = IsiModel::from_taps(vec![1.0], 1, 0.0).unwrap();
        let cfg = FtnConfig { tau: 1.0, order: 4, block_len: 1, sigma2: 0.0, ..FtnConfig::default() };
        let truth = Constellation::psk(4).unwrap().point(2);
        let y = DVector::from_element(1, truth * amplitude(&cfg, 1.0));
        let (problem, _) = build_psk_sdr(&model, &y, &cfg).unwrap();
        let sol = solve(&problem, &SolverOptions::default()).unwrap();
        let b = complex_from_embedding(&sol.x);
        assert!((b[(0, 0)].re - 1.0).abs() < 1e-5);
        assert!((b[(0, 1)] - truth).norm() < 1e-5);
    }

    #[test]
    fn degenerate_covariance_gives_identical_candidates() {
        let c = Constellation::psk(4).unwrap();
        let a = DVector::from_vec(vec![c.point(1), c.point(3), c.point(0)]);
        let a_mat = &a * a.adjoint();
        let model = IsiModel::from_taps(vec![1.0, 0.2], 3, 0.0).unwrap();
        let cost = build_theta_psk(&model, &DVector::from_element(3, Complex64::new(0.5, 0.0)), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = randomize_psk(&a, &a_mat, &cost, 25, c, &mut rng).unwrap();
        assert_eq!(draws.candidates.len(), 25);
        assert!(draws.candidates.iter().all(|x| x == &vec![1, 3, 0]));
        assert_eq!(draws.best().0, 0);
    }

    #[test]
    fn zero_candidates_is_an_error() {
        let c = Constellation::psk(4).unwrap();
        let a = DVector::from_element(1, c.point(0));
        let cost = build_theta_psk(&IsiModel::from_taps(vec![1.0], 1, 0.0).unwrap(), &a, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(randomize_psk(&a, &(&a * a.adjoint()), &cost, 0, c, &mut rng).is_err());
    }

    #[test]
    fn noiseless_recovery_matches_mlse() {
        let (cfg, model) = setup(0.8, 4, 8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let (truth, y) = random_block(&cfg, &model, &mut rng);
            let det = detect_psk(&y, &model, &cfg, &mut rng).unwrap();
            let h = &model.whitened * amplitude(&cfg, 1.0);
            let (mlse, _) = mlse_exhaustive(&y, &h, truth.constellation).unwrap();
            assert_eq!(det.a_hat.indices, truth.indices);
            assert_eq!(mlse.indices, truth.indices);
        }
    }

    #[test]
    fn rounded_objective_is_recomputable() {
        let (cfg, model) = setup(0.85, 8, 6, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (_, y) = random_block(&cfg, &model, &mut rng);
        let det = detect_psk(&y, &model, &cfg, &mut rng).unwrap();
        let h = &model.whitened * amplitude(&cfg, 1.0);
        let direct = crate::detect::sequence_metric(&y, &h, det.a_hat.symbols.as_slice());
        assert!((det.rounded_objective - direct).abs() < 1e-9 * (1.0 + direct));
        assert!(det.rounded_objective >= det.relaxed_objective - 1e-6 * (1.0 + det.relaxed_objective.abs()));
        assert_eq!(det.num_candidates, 200);
    }

    #[test]
    fn relaxation_bounds_every_discrete_lifting() {
        let (cfg, model) = setup(0.8, 4, 4, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (_, y) = random_block(&cfg, &model, &mut rng);
        let (problem, cost) = build_psk_sdr(&model, &y, &cfg).unwrap();
        let sol = solve(&problem, &SolverOptions::default()).unwrap();
        assert!(check_solution(&problem, &sol.x).is_feasible(1e-6));
        let c = Constellation::psk(4).unwrap();
        let mut min = f64::INFINITY;
        for code in 0..256usize {
            let a: Vec<Complex64> = (0..4).map(|k| c.point((code >> (2 * k)) & 3)).collect();
            min = min.min(cost.objective_complex(&a));
        }
        assert!(sol.objective <= min + 1e-6);
    }

    #[test]
    fn sandwich_on_random_blocks() {
        let (cfg, model) = setup(0.85, 8, 5, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let h = &model.whitened * amplitude(&cfg, 1.0);
        for _ in 0..10 {
            let (truth, y) = random_block(&cfg, &model, &mut rng);
            let det = detect_psk(&y, &model, &cfg, &mut rng).unwrap();
            let (_, opt) = mlse_exhaustive(&y, &h, truth.constellation).unwrap();
            assert!(det.relaxed_objective <= opt + 1e-5);
            assert!(opt <= det.rounded_objective + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn more_draws_never_hurt(seed in 0u64..10_000, l1 in 1usize..20, extra in 0usize..40) {
            let (cfg, model) = setup(0.85, 8, 4, 0.5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, y) = random_block(&cfg, &model, &mut rng);
            let (problem, cost) = build_psk_sdr(&model, &y, &cfg).unwrap();
            let sol = solve(&problem, &SolverOptions::default()).unwrap();
            let b = complex_from_embedding(&sol.x);
            let a = b.view((0, 4), (4, 1)).column(0).into_owned();
            let am = b.view((0, 0), (4, 4)).into_owned();
            let c = Constellation::psk(8).unwrap();
            let short = randomize_psk(&a, &am, &cost, l1, c, &mut ChaCha8Rng::seed_from_u64(seed + 1)).unwrap();
            let long = randomize_psk(&a, &am, &cost, l1 + extra, c, &mut ChaCha8Rng::seed_from_u64(seed + 1)).unwrap();
            prop_assert_eq!(&long.candidates[..l1], &short.candidates[..]);
            prop_assert!(long.best().2 <= short.best().2);
            prop_assert!(long.objectives.iter().all(|o| o.is_finite()));
        }

        #[test]
        fn embedding_preserves_objective(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = IsiModel::from_taps(vec![1.0, 0.4, 0.1], 3, 0.0).unwrap();
            let y = DVector::from_fn(3, |_, _| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
            let cost = build_theta_psk(&model, &y, 0.9).unwrap();
            let r = DMatrix::from_fn(4, 4, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let b = &r * r.adjoint();
            let theta = complex_from_embedding(&(&cost.theta * 2.0));
            let complex = (theta * &b).trace().re;
            let real = cost.theta.dot(&real_embedding(&b));
            prop_assert!((complex - real).abs() <= 1e-9 * (1.0 + complex.abs()));
        }
    }
}
