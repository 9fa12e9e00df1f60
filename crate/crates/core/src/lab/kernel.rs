use alloc::vec::Vec;

use num_rational::Ratio;

use super::Correlate;
use crate::{Error, LevelSet, Result};

/// Triangular weights `c(n) = (H + 1 - |n|) / (H + 1)^2` on `|n| <= H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularKernel {
    half_width: u64,
    weights: Vec<Ratio<u64>>,
}

impl TriangularKernel {
    pub fn new(half_width: u64) -> Self {
        let side = half_width + 1;
        let den = side * side;
        let weights = (0..=2 * half_width)
            .map(|i| {
                let n = i.abs_diff(half_width);
                Ratio::new(side - n, den)
            })
            .collect();
        TriangularKernel {
            half_width,
            weights,
        }
    }

    /// `H`.
    pub fn half_width(&self) -> u64 {
        self.half_width
    }

    pub fn weight(&self, n: i64) -> Ratio<u64> {
        if n.unsigned_abs() > self.half_width {
            return Ratio::from_integer(0);
        }
        self.weights[(n + self.half_width as i64) as usize]
    }

    /// `(n, c(n))` for `n = -H..=H`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Ratio<u64>)> + '_ {
        let h = self.half_width as i64;
        (-h..=h).zip(self.weights.iter().copied())
    }

    pub fn total(&self) -> Ratio<u64> {
        self.weights.iter().copied().sum()
    }
}

/// `sum_n c(n) mu(T^n A ∩ B)`, exactly.
pub fn kernel_smoothed_prediction<C: Correlate>(
    kernel: &TriangularKernel,
    correlator: &C,
    a: &LevelSet,
    b: &LevelSet,
) -> Result<Ratio<u128>> {
    let h = kernel.half_width();
    if h > correlator.height() {
        return Err(Error::OutOfWindow {
            shift: i128::from(h),
            height: correlator.height(),
            factor: None,
        });
    }
    let side = u128::from(h) + 1;
    let mut numerator = 0u128;
    for (n, _) in kernel.iter() {
        let count = correlator.correlation(n, a, b)?.value.count;
        numerator += (side - u128::from(n.unsigned_abs())) * u128::from(count);
    }
    Ok(Ratio::new(numerator, side * side * u128::from(correlator.total())))
}
