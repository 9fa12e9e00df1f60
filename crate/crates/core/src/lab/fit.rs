use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{Correlate, LevelPair};
use crate::{Error, Result};

/// Relative tolerance below which a scaled basis column counts as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// One measured correlation with the basis values of its pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSample {
    pub value: f64,
    /// `mu(T^k A ∩ B)` for `k = -K..=K`.
    pub shifts: Vec<f64>,
    /// `mu(A) mu(B)`.
    pub product: f64,
}

/// Least-squares coefficients over `{T^k : |k| <= K} ∪ {Θ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakLimitFit {
    pub k_max: usize,
    /// `(k, coefficient)` for `k = -K..=K`.
    pub shift_coefficients: Vec<(i64, f64)>,
    pub theta_coefficient: f64,
    /// Root-mean-square of the fit residuals.
    pub residual: f64,
    /// `residual` divided by the root-mean-square of the measured values.
    pub relative_residual: f64,
    pub samples: usize,
}

impl WeakLimitFit {
    pub fn shift(&self, k: i64) -> Option<f64> {
        self.shift_coefficients
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|&(_, c)| c)
    }

    /// Basis labels in column order: `T^-K, ..., T^K, Theta`.
    pub fn labels(&self) -> impl Iterator<Item = (alloc::string::String, f64)> + '_ {
        self.shift_coefficients
            .iter()
            .map(|&(k, c)| (alloc::format!("T^{k}"), c))
            .chain(core::iter::once(("Theta".into(), self.theta_coefficient)))
    }
}

/// Builds the samples for one time `m` over a pair family. All basis values
/// are exact counts at the correlator's truncation.
pub fn fit_samples<C: Correlate>(
    correlator: &C,
    m: i64,
    pairs: &[LevelPair],
    k_max: usize,
) -> Result<Vec<FitSample>> {
    let k = k_max as i64;
    pairs
        .iter()
        .map(|(a, b)| {
            let value = correlator.correlation(m, a, b)?.value.to_f64();
            let shifts = (-k..=k)
                .map(|s| Ok(correlator.correlation(s, a, b)?.value.to_f64()))
                .collect::<Result<Vec<f64>>>()?;
            let product = correlator.measure(a)?.to_f64() * correlator.measure(b)?.to_f64();
            Ok(FitSample {
                value,
                shifts,
                product,
            })
        })
        .collect()
}

/// Columns that lie in the span of earlier ones, by modified Gram-Schmidt on
/// unit-scaled columns.
fn dependent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for (i, col) in x.column_iter().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            dependent.push(i);
            continue;
        }
        let mut v: DVector<f64> = col / norm;
        for q in &basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        let rest = v.norm();
        if rest * rest < RANK_TOLERANCE {
            dependent.push(i);
        } else {
            basis.push(v / rest);
        }
    }
    dependent
}

pub fn fit_weak_limit(samples: &[FitSample], k_max: usize) -> Result<WeakLimitFit> {
    let width = 2 * k_max + 2;
    if samples.len() < width {
        return Err(Error::Parameter(alloc::format!(
            "{} samples cannot determine {width} coefficients",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|s| s.shifts.len() != 2 * k_max + 1) {
        return Err(Error::Parameter(alloc::format!(
            "sample has {} shift values, expected {}",
            bad.shifts.len(),
            2 * k_max + 1
        )));
    }
    let x = DMatrix::from_fn(samples.len(), width, |r, c| {
        let s = &samples[r];
        if c + 1 == width {
            s.product
        } else {
            s.shifts[c]
        }
    });
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.value));

    let dependent = dependent_columns(&x);
    if !dependent.is_empty() {
        return Err(Error::DegenerateFamily { columns: dependent });
    }

    // Scale columns to unit norm before forming the normal equations.
    let scales: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    let mut xs = x.clone();
    for (c, &s) in scales.iter().enumerate() {
        xs.column_mut(c).unscale_mut(s);
    }
    let normal = xs.transpose() * &xs;
    let rhs = xs.transpose() * &y;
    let scaled = match normal.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => normal
            .full_piv_lu()
            .solve(&rhs)
            .ok_or(Error::DegenerateFamily { columns: vec![] })?,
    };
    let beta: Vec<f64> = scaled.iter().zip(&scales).map(|(b, s)| b / s).collect();

    let fitted = &x * DVector::from_column_slice(&beta);
    let n = samples.len() as f64;
    let residual = libm::sqrt((&fitted - &y).norm_squared() / n);
    let scale = libm::sqrt(y.norm_squared() / n);
    let relative_residual = if scale > 0.0 { residual / scale } else { residual };

    let k = k_max as i64;
    Ok(WeakLimitFit {
        k_max,
        shift_coefficients: (-k..=k).zip(beta.iter().copied()).collect(),
        theta_coefficient: beta[width - 1],
        residual,
        relative_residual,
        samples: samples.len(),
    })
}
