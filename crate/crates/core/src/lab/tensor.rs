use alloc::vec::Vec;

use super::Correlate;
use crate::{Error, LevelSet, Result};

/// `prod_i <T^{k_i m} f_i, g_i>` with centered indicators
/// `f_i = 1_{A_i} - mu(A_i)` and `g_i = 1_{B_i} - mu(B_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorQuery {
    pub exponents: Vec<u64>,
    pub m: i64,
    pub factors: Vec<(LevelSet, LevelSet)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub value: f64,
    /// The centered correlation of each factor.
    pub factors: Vec<f64>,
    /// Worst-case change of the product when every factor moves by its
    /// window-loss bound `|k_i m| / (h_J + 1)`.
    pub error_bound: f64,
}

/// The product of centered correlations of the given factors, each
/// with its own window loss `bounds[i]`.
pub fn centered_product(factors: &[f64], bounds: &[f64]) -> (f64, f64) {
    let value = factors.iter().product();
    let exact: f64 = factors.iter().map(|f| f.abs()).product();
    let loose: f64 = factors.iter().zip(bounds).map(|(f, e)| f.abs() + e).product();
    (value, loose - exact)
}

pub fn tensor_correlation<C: Correlate>(correlator: &C, q: &TensorQuery) -> Result<TensorValue> {
    if q.exponents.is_empty() {
        return Err(Error::Parameter("tensor query needs at least one factor".into()));
    }
    if q.exponents.len() != q.factors.len() {
        return Err(Error::Parameter(alloc::format!(
            "{} exponents but {} factor pairs",
            q.exponents.len(),
            q.factors.len()
        )));
    }
    for (i, k) in q.exponents.iter().enumerate() {
        if q.exponents[..i].contains(k) {
            return Err(Error::Parameter(alloc::format!("exponent {k} repeated")));
        }
    }
    let height = correlator.height();
    let mut factors = Vec::with_capacity(q.exponents.len());
    let mut bounds = Vec::with_capacity(q.exponents.len());
    for (i, (&k, (a, b))) in q.exponents.iter().zip(&q.factors).enumerate() {
        let shift = i128::from(k) * i128::from(q.m);
        if shift.unsigned_abs() > u128::from(height) {
            return Err(Error::OutOfWindow {
                shift,
                height,
                factor: Some(i),
            });
        }
        let shift = shift as i64;
        let c = correlator.correlation(shift, a, b)?;
        let product = correlator.measure(a)?.to_f64() * correlator.measure(b)?.to_f64();
        factors.push(c.value.to_f64() - product);
        bounds.push(c.error_bound.to_f64());
    }
    let (value, error_bound) = centered_product(&factors, &bounds);
    Ok(TensorValue {
        value,
        factors,
        error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::TowerCorrelator;
    use crate::SpacerSchedule;
    use alloc::vec;

    #[test]
    fn product_of_factors() {
        let (v, e) = centered_product(&[0.1, 0.2, 0.3], &[0.0, 0.0, 0.0]);
        assert!((v - 0.006).abs() < 1e-15);
        assert_eq!(e, 0.0);
    }

    fn schedule() -> SpacerSchedule {
        SpacerSchedule::from_spacers(2, [vec![1, 0, 2], vec![0, 1, 3, 1]]).unwrap()
    }

    #[test]
    fn full_tower_factor_vanishes() {
        let s = schedule();
        let t = TowerCorrelator::new(&s, 3).unwrap();
        let full = LevelSet::full(&s, 3).unwrap();
        let a = LevelSet::single(1, 1);
        let q = TensorQuery {
            exponents: vec![1, 2],
            m: 0,
            factors: vec![(a.clone(), a), (full.clone(), full)],
        };
        let v = tensor_correlation(&t, &q).unwrap();
        assert_eq!(v.factors[1], 0.0);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn single_factor_is_the_centered_correlation() {
        let s = schedule();
        let t = TowerCorrelator::new(&s, 3).unwrap();
        let a = LevelSet::new(1, [0, 2]);
        let b = LevelSet::single(2, 4);
        let q = TensorQuery {
            exponents: vec![3],
            m: 2,
            factors: vec![(a.clone(), b.clone())],
        };
        let v = tensor_correlation(&t, &q).unwrap();
        let direct = t.correlation(6, &a, &b).unwrap().value.to_f64()
            - t.measure(&a).unwrap().to_f64() * t.measure(&b).unwrap().to_f64();
        assert_eq!(v.value, direct);
    }

    #[test]
    fn window_violation_names_the_factor() {
        let s = schedule();
        let t = TowerCorrelator::new(&s, 3).unwrap();
        let a = LevelSet::single(1, 0);
        let q = TensorQuery {
            exponents: vec![1, 60],
            m: 1,
            factors: vec![(a.clone(), a.clone()), (a.clone(), a)],
        };
        assert!(matches!(
            tensor_correlation(&t, &q),
            Err(Error::OutOfWindow { factor: Some(1), .. })
        ));
    }

    #[test]
    fn repeated_exponents_rejected() {
        let s = schedule();
        let t = TowerCorrelator::new(&s, 3).unwrap();
        let a = LevelSet::single(1, 0);
        let q = TensorQuery {
            exponents: vec![2, 2],
            m: 1,
            factors: vec![(a.clone(), a.clone()), (a.clone(), a)],
        };
        assert!(matches!(tensor_correlation(&t, &q), Err(Error::Parameter(_))));
    }
}
