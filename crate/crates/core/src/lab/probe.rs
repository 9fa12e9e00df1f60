use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::Correlate;
use crate::{Error, LevelSet, Result};

/// Eigenvalues below this fraction of the largest one do not count toward
/// the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GramProbe {
    /// Row-major `M x M` Gram matrix.
    pub gram: Vec<Vec<f64>>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub rank: usize,
}

/// Gram matrix of `U^{p step} F`, `p = 0..M`, where `F` is the tensor power
/// of the centered indicator of `f` and `U = T^{k_1} ⊗ ... ⊗ T^{k_d}`:
/// `G_pq = prod_i <T^{k_i (p - q) step} f_c, f_c>`.
pub fn cyclicity_probe<C: Correlate>(
    correlator: &C,
    exponents: &[u64],
    f: &LevelSet,
    size: usize,
    step: u64,
) -> Result<GramProbe> {
    if exponents.is_empty() || size == 0 {
        return Err(Error::Parameter("probe needs exponents and M >= 1".into()));
    }
    let kmax = *exponents.iter().max().expect("nonempty");
    let reach = u128::from(kmax) * u128::from(step) * size as u128;
    if reach > u128::from(correlator.height()) {
        return Err(Error::OutOfWindow {
            shift: reach as i128,
            height: correlator.height(),
            factor: None,
        });
    }
    let mu = correlator.measure(f)?.to_f64();
    let centered = |d: i64| -> Result<f64> { Ok(correlator.correlation(d, f, f)?.value.to_f64() - mu * mu) };

    // Entries depend only on p - q; compute each lag once.
    let lags = (0..size as i64)
        .map(|lag| {
            exponents
                .iter()
                .map(|&k| centered(k as i64 * lag * step as i64))
                .product::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    let g = DMatrix::from_fn(size, size, |p, q| lags[p.abs_diff(q)]);
    let mut eigenvalues: Vec<f64> = g.clone().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let top = eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let rank = eigenvalues
        .iter()
        .filter(|&&e| top > 0.0 && e > RANK_TOLERANCE * top)
        .count();
    Ok(GramProbe {
        gram: (0..size).map(|p| (0..size).map(|q| g[(p, q)]).collect()).collect(),
        min_eigenvalue: eigenvalues[0],
        eigenvalues,
        rank,
    })
}
