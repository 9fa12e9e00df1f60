use alloc::vec::Vec;

use super::{Correlate, LevelPair};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingRow {
    pub m: i64,
    /// `max |mu(T^m A ∩ B) - mu(A) mu(B)|` over the pairs.
    pub sup_deviation: f64,
    /// `min mu(T^m A ∩ B) / (mu(A) mu(B))` over pairs with a nonzero product.
    pub min_ratio: Option<f64>,
}

pub fn mixing_profile<C: Correlate>(correlator: &C, ms: &[i64], pairs: &[LevelPair]) -> Result<Vec<MixingRow>> {
    let products = pairs
        .iter()
        .map(|(a, b)| Ok(correlator.measure(a)?.to_f64() * correlator.measure(b)?.to_f64()))
        .collect::<Result<Vec<f64>>>()?;
    ms.iter()
        .map(|&m| {
            let mut sup_deviation = 0.0f64;
            let mut min_ratio: Option<f64> = None;
            for ((a, b), &product) in pairs.iter().zip(&products) {
                let value = correlator.correlation(m, a, b)?.value.to_f64();
                sup_deviation = sup_deviation.max((value - product).abs());
                if product > 0.0 {
                    let ratio = value / product;
                    min_ratio = Some(min_ratio.map_or(ratio, |r| r.min(ratio)));
                }
            }
            Ok(MixingRow {
                m,
                sup_deviation,
                min_ratio,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::TowerCorrelator;
    use crate::{LevelSet, SpacerSchedule};
    use alloc::vec;

    #[test]
    fn zero_shift_deviation_is_mu_minus_mu_squared() {
        let s = SpacerSchedule::from_spacers(3, [vec![1, 0, 2], vec![0, 3]]).unwrap();
        let t = TowerCorrelator::new(&s, 3).unwrap();
        let small = LevelSet::single(1, 2);
        let big = LevelSet::new(1, 0..=3);
        let pairs = [(small.clone(), small.clone()), (big.clone(), big.clone())];
        let rows = mixing_profile(&t, &[0], &pairs).unwrap();
        let worst = [small, big]
            .iter()
            .map(|a| {
                let mu = t.measure(a).unwrap().to_f64();
                mu - mu * mu
            })
            .fold(0.0, f64::max);
        assert!((rows[0].sup_deviation - worst).abs() < 1e-15);
    }
}
