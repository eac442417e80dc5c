//! Closed-form AWGN references and interval estimates.

use std::f64::consts::PI;

use crate::quad::GaussLegendre;
use crate::signal::constellation::gray;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Density of the received phase for a unit point at angle 0 with `gamma = Es / sigma2`.
pub fn psk_phase_pdf(theta: f64, gamma: f64) -> f64 {
    let c = theta.cos();
    let s = theta.sin();
    (-gamma).exp() / (2.0 * PI)
        + (gamma / PI).sqrt() * c * (-gamma * s * s).exp() * normal_cdf((2.0 * gamma).sqrt() * c)
}

/// Probability that the detected symbol is `d` positions away from the sent one.
pub fn psk_offset_probabilities(order: usize, snr_db: f64) -> Vec<f64> {
    let gamma = 10f64.powf(snr_db / 10.0);
    let width = 2.0 * PI / order as f64;
    let rule = GaussLegendre::new(16);
    (0..order)
        .map(|d| {
            let centre = d as f64 * width;
            rule.integrate(|t| psk_phase_pdf(t, gamma), centre - 0.5 * width, centre + 0.5 * width, 64)
        })
        .collect()
}

/// Symbol error rate of coherent M-PSK on AWGN.
pub fn psk_ser_awgn(order: usize, snr_db: f64) -> f64 {
    1.0 - psk_offset_probabilities(order, snr_db)[0]
}

/// Gray-labelled bit error rate of coherent M-PSK on AWGN.
pub fn psk_ber_awgn(order: usize, snr_db: f64) -> f64 {
    let probs = psk_offset_probabilities(order, snr_db);
    let bits = order.trailing_zeros() as f64;
    let mut total = 0.0;
    for (d, p) in probs.iter().enumerate().skip(1) {
        let mean_dist = (0..order)
            .map(|m| (gray(m) ^ gray((m + d) % order)).count_ones() as f64)
            .sum::<f64>()
            / order as f64;
        total += p * mean_dist;
    }
    total / bits
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// SNR at which a BER curve crosses `target`, by linear interpolation of
/// `log10(BER)` between the bracketing grid points. Points must be sorted by SNR.
pub fn snr_at_ber(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    let lt = target.log10();
    curve.windows(2).find_map(|w| {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 <= 0.0 || b1 <= 0.0 || !(b0 >= target && b1 <= target) {
            return None;
        }
        let (l0, l1) = (b0.log10(), b1.log10());
        if l0 == l1 {
            return Some(s0);
        }
        Some(s0 + (lt - l0) / (l1 - l0) * (s1 - s0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: f64) -> f64 {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn phase_pdf_integrates_to_one() {
        let rule = GaussLegendre::new(16);
        for gamma in [0.0, 0.5, 3.0, 40.0] {
            let total = rule.integrate(|t| psk_phase_pdf(t, gamma), -PI, PI, 128);
            assert!((total - 1.0).abs() < 1e-12, "{gamma}: {total}");
        }
    }

    #[test]
    fn bpsk_and_qpsk_match_q_function() {
        for snr in [0.0, 4.0, 8.0, 12.0] {
            let g: f64 = 10f64.powf(snr / 10.0);
            // QPSK: each quadrature sees amplitude sqrt(Es/2) against variance sigma2/2
            assert!((psk_ber_awgn(4, snr) - q(g.sqrt())).abs() < 1e-10 * q(g.sqrt()));
            assert!((psk_ber_awgn(2, snr) - q((2.0 * g).sqrt())).abs() < 1e-13);
            let ps = 1.0 - (1.0 - q(g.sqrt())).powi(2);
            assert!((psk_ser_awgn(4, snr) - ps).abs() < 1e-13);
        }
    }

    #[test]
    fn eight_psk_matches_planar_integration() {
        // independent route: integrate the 2-D Gaussian over the correct wedge in polar coordinates
        let snr_db = 12.0;
        let g = 10f64.powf(snr_db / 10.0);
        let var = 0.5 / g;
        let rule = GaussLegendre::new(20);
        let wedge = PI / 8.0;
        let inner = |phi: f64| {
            rule.integrate(
                |r| {
                    let (x, y) = (r * phi.cos() - 1.0, r * phi.sin());
                    r * (-(x * x + y * y) / (2.0 * var)).exp() / (2.0 * PI * var)
                },
                0.0,
                3.0,
                60,
            )
        };
        let p_correct = rule.integrate(inner, -wedge, wedge, 16);
        let ser = psk_ser_awgn(8, snr_db);
        assert!((ser - (1.0 - p_correct)).abs() < 1e-10, "{ser} vs {}", 1.0 - p_correct);
        // at high SNR, Gray BER is close to SER / log2 M
        let ber = psk_ber_awgn(8, snr_db);
        assert!(ber > ser / 3.0 && ber < 1.05 * ser / 3.0);
        // frozen from an adaptive 2-D integration of the same wedge probability
        assert!((ser - 0.031_197_810_389_385).abs() < 1e-11, "{ser}");
    }

    #[test]
    fn wilson_interval_properties() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert!((hi - lo - 0.1918).abs() < 1e-3);
    }

    #[test]
    fn interpolated_crossing() {
        let curve = [(0.0, 1e-1), (2.0, 1e-2), (4.0, 1e-3)];
        assert!((snr_at_ber(&curve, 1e-2).unwrap() - 2.0).abs() < 1e-12);
        assert!((snr_at_ber(&curve, 10f64.powf(-1.5)).unwrap() - 1.0).abs() < 1e-12);
        assert!(snr_at_ber(&curve, 1e-5).is_none());
    }
}
