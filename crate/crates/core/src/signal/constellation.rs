//! PSK and 16-QAM alphabets with Gray bit labels.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::config::{FtnConfig, Modulation};
use crate::error::{Error, Result};

/// 16-QAM per-axis amplitude levels, indexed by position.
pub const QAM_LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// A discrete symbol alphabet.
///
/// Symbol indices are positional: PSK index `i` is the point
/// `exp(j(2i+1)pi/M)`, and 16-QAM index `4p + q` is `QAM_LEVELS[p] + j QAM_LEVELS[q]`.
/// Bit labels are the binary-reflected Gray code of the position (per axis for QAM).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Psk { order: usize },
    Qam16,
}

pub fn gray(x: usize) -> usize {
    x ^ (x >> 1)
}

pub fn gray_inverse(mut g: usize) -> usize {
    let mut x = g;
    while g > 1 {
        g >>= 1;
        x ^= g;
    }
    x
}

impl Constellation {
    pub fn from_config(cfg: &FtnConfig) -> Result<Self> {
        match cfg.modulation {
            Modulation::Psk => Constellation::psk(cfg.order),
            Modulation::Qam16 if cfg.order == 16 => Ok(Constellation::Qam16),
            Modulation::Qam16 => Err(Error::Parameter(format!("16-QAM requires M = 16, got {}", cfg.order))),
        }
    }

    pub fn psk(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::Parameter(format!("PSK order must be a power of two >= 2, got {order}")));
        }
        Ok(Constellation::Psk { order })
    }

    pub fn size(&self) -> usize {
        match self {
            Constellation::Psk { order } => *order,
            Constellation::Qam16 => 16,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.size().trailing_zeros()
    }

    /// Average energy of the alphabet with equiprobable symbols.
    pub fn mean_energy(&self) -> f64 {
        match self {
            Constellation::Psk { .. } => 1.0,
            Constellation::Qam16 => 10.0,
        }
    }

    pub fn point(&self, index: usize) -> Complex64 {
        match self {
            Constellation::Psk { order } => {
                Complex64::from_polar(1.0, (2 * index + 1) as f64 * PI / *order as f64)
            }
            Constellation::Qam16 => Complex64::new(QAM_LEVELS[index >> 2], QAM_LEVELS[index & 3]),
        }
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.size()).map(|i| self.point(i)).collect()
    }

    /// Gray bit label of a symbol index.
    pub fn bits(&self, index: usize) -> usize {
        match self {
            Constellation::Psk { .. } => gray(index),
            Constellation::Qam16 => (gray(index >> 2) << 2) | gray(index & 3),
        }
    }

    /// Symbol index carrying the given bit label.
    pub fn index_of_bits(&self, bits: usize) -> usize {
        match self {
            Constellation::Psk { .. } => gray_inverse(bits),
            Constellation::Qam16 => (gray_inverse(bits >> 2) << 2) | gray_inverse(bits & 3),
        }
    }

    /// Index of the nearest alphabet point; ties go to the smaller index.
    pub fn nearest(&self, x: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for i in 0..self.size() {
            let d = (x - self.point(i)).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn contains(&self, x: Complex64) -> bool {
        (0..self.size()).any(|i| x == self.point(i))
    }
}

/// A block of transmitted or detected symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector {
    pub constellation: Constellation,
    pub indices: Vec<usize>,
    pub symbols: DVector<Complex64>,
}

impl SymbolVector {
    pub fn from_indices(constellation: Constellation, indices: Vec<usize>) -> Result<Self> {
        let size = constellation.size();
        if let Some(bad) = indices.iter().find(|&&i| i >= size) {
            return Err(Error::Parameter(format!("symbol index {bad} out of range for M = {size}")));
        }
        let symbols = DVector::from_iterator(indices.len(), indices.iter().map(|&i| constellation.point(i)));
        Ok(SymbolVector { constellation, indices, symbols })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of differing bits against `other` under the Gray labeling.
    pub fn bit_errors(&self, other: &SymbolVector) -> u64 {
        self.indices
            .iter()
            .zip(&other.indices)
            .map(|(&a, &b)| (self.constellation.bits(a) ^ self.constellation.bits(b)).count_ones() as u64)
            .sum()
    }

    pub fn symbol_errors(&self, other: &SymbolVector) -> u64 {
        self.indices.iter().zip(&other.indices).filter(|(a, b)| a != b).count() as u64
    }
}

/// Maps positional indices onto the configured alphabet.
pub fn map_symbols(indices: &[usize], cfg: &FtnConfig) -> Result<SymbolVector> {
    SymbolVector::from_indices(Constellation::from_config(cfg)?, indices.to_vec())
}

/// Maps (possibly noisy) points back to the nearest symbol indices.
pub fn demap_symbols(points: &[Complex64], constellation: Constellation) -> Vec<usize> {
    points.iter().map(|&x| constellation.nearest(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn psk_alphabet_is_rotated() {
        let qpsk = Constellation::psk(4).unwrap();
        assert!(close(qpsk.point(0), Complex64::from_polar(1.0, PI / 4.0)));
        let bpsk = Constellation::psk(2).unwrap();
        assert!(close(bpsk.point(0), Complex64::new(0.0, 1.0)));
        assert!(close(bpsk.point(1), Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn qam_corner_round_trips() {
        let qam = Constellation::Qam16;
        let idx = qam.nearest(Complex64::new(3.0, 3.0));
        assert_eq!(qam.point(idx), Complex64::new(3.0, 3.0));
        assert_eq!(demap_symbols(&[qam.point(idx)], qam), vec![idx]);
        assert!((qam.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        for order in [2, 4, 8, 16] {
            let c = Constellation::psk(order).unwrap();
            for i in 0..order {
                let j = (i + 1) % order;
                assert_eq!((c.bits(i) ^ c.bits(j)).count_ones(), 1, "M={order} i={i}");
            }
        }
        let qam = Constellation::Qam16;
        for p in 0..4 {
            for q in 0..3 {
                let a = 4 * p + q;
                assert_eq!((qam.bits(a) ^ qam.bits(a + 1)).count_ones(), 1);
            }
        }
    }

    #[test]
    fn out_of_range_index() {
        let cfg = FtnConfig { order: 4, ..FtnConfig::default() };
        assert!(matches!(map_symbols(&[0, 4], &cfg), Err(Error::Parameter(_))));
    }

    proptest! {
        #[test]
        fn demap_inverts_map(order_log in 1u32..5, raw in prop::collection::vec(0usize..16, 1..32), qam in any::<bool>()) {
            let c = if qam { Constellation::Qam16 } else { Constellation::psk(1 << order_log).unwrap() };
            let idx: Vec<usize> = raw.iter().map(|i| i % c.size()).collect();
            let sv = SymbolVector::from_indices(c, idx.clone()).unwrap();
            let pts: Vec<Complex64> = sv.symbols.iter().copied().collect();
            prop_assert_eq!(demap_symbols(&pts, c), idx.clone());
            for &i in &idx {
                prop_assert_eq!(c.index_of_bits(c.bits(i)), i);
            }
        }
    }
}
