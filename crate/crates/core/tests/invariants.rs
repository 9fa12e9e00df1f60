use num_rational::Ratio;
use proptest::prelude::*;
use rankone_core::lab::TriangularKernel;
use rankone_core::recipes::*;
use rankone_core::{LevelSet, SpacerSchedule};

fn schedule_strategy() -> impl Strategy<Value = SpacerSchedule> {
    (0u64..4, prop::collection::vec(prop::collection::vec(0u64..8, 2..5), 1..5)).prop_map(|(h1, stages)| {
        SpacerSchedule::from_spacers(h1, stages).unwrap()
    })
}

proptest! {
    #[test]
    fn heights_follow_recursion(s in schedule_strategy()) {
        for st in s.stages() {
            let j = st.index();
            let lhs = s.height(j + 1).unwrap() + 1;
            let rhs = (s.height(j).unwrap() + 1) * st.cuts() as u64 + st.spacer_total();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn occurrences_compose(s in schedule_strategy()) {
        let last = s.last_tower();
        for j in 1..=last {
            for k in j..=last {
                let direct = s.occurrences(j, last).unwrap();
                let step = s.occurrences(j, k).unwrap();
                let outer = s.occurrences(k, last).unwrap();
                let mut composed: Vec<u64> = outer.offsets.iter()
                    .flat_map(|&o| step.offsets.iter().map(move |&p| o + p))
                    .collect();
                composed.sort_unstable();
                prop_assert_eq!(&direct.offsets, &composed);
            }
        }
    }

    #[test]
    fn measure_is_additive(s in schedule_strategy(), split in 0u64..100) {
        let j = 1 + (split as usize) % s.last_tower();
        let h = s.height(j).unwrap();
        let cut = split % (h + 1);
        let lo = LevelSet::new(j, 0..cut);
        let hi = LevelSet::new(j, cut..=h);
        let last = s.last_tower();
        let whole = s.level_measure(&lo.union(&hi), last).unwrap();
        let parts = s.level_measure(&lo, last).unwrap() + s.level_measure(&hi, last).unwrap();
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn levels_and_spacers_partition_the_top(s in schedule_strategy()) {
        let last = s.last_tower();
        for j in 1..=last {
            let full = LevelSet::full(&s, j).unwrap();
            let covered = s.level_measure(&full, last).unwrap().ratio();
            let kept: Ratio<u128> = s.spacer_mass_report().iter()
                .filter(|m| m.stage >= j)
                .map(|m| Ratio::from_integer(1) - m.fraction)
                .product();
            prop_assert_eq!(covered, kept);
        }
    }

    #[test]
    fn kernel_is_a_symmetric_probability(h in 0u64..400) {
        let k = TriangularKernel::new(h);
        prop_assert_eq!(k.total(), Ratio::from_integer(1));
        for n in 0..=(h as i64 + 1) {
            prop_assert_eq!(k.weight(n), k.weight(-n));
        }
    }

    #[test]
    fn ornstein_spacers_telescope(mean in 1u64..60, cuts in 1usize..200, seed in any::<u64>()) {
        let d = ornstein_draws(&OrnsteinParams { mean, cuts, seed, stream: 1 }).unwrap();
        prop_assert!(d.spacers.iter().all(|&s| s <= 2 * mean));
        let total: u64 = d.spacers.iter().sum();
        let (first, last) = (d.draws[0] as i64, d.draws[cuts] as i64);
        prop_assert_eq!(total as i64 - (cuts as u64 * mean) as i64, first - last);
    }
}

#[test]
fn staircase_spacer_fraction_shrinks_past_quadratic_growth() {
    let s = build_staircase_schedule(&PerStage::new((2..12).collect()).unwrap(), 10, 1).unwrap();
    let report = s.spacer_mass_report();
    let fractions: Vec<f64> = report.iter().map(|m| {
        let f = m.fraction;
        *f.numer() as f64 / *f.denom() as f64
    }).collect();
    assert!(fractions.windows(2).skip(2).all(|w| w[1] < w[0]), "{fractions:?}");
}

#[test]
fn ornstein_stage_is_deterministic() {
    let p = OrnsteinParams { mean: 50, cuts: 10_000, seed: 42, stream: 3 };
    assert_eq!(ornstein_draws(&p).unwrap(), ornstein_draws(&p).unwrap());
    let q = OrnsteinParams { stream: 4, ..p.clone() };
    assert_ne!(ornstein_spacers(&p).unwrap(), ornstein_spacers(&q).unwrap());
}

#[test]
fn lemma1_stage_has_expected_cut_count() {
    let p = Lemma1Params {
        blocks: 5,
        exclusive: 3,
        unit: 2,
        mean: 7,
        epsilon: Ratio::new(1, 2),
        seed: 9,
        stream: 1,
    };
    let stage = lemma1_spacers(&p).unwrap();
    assert_eq!(stage.spacers.len(), p.cut_count());
    let covered: usize = stage.blocks.iter().map(|b| b.len).sum();
    assert_eq!(covered, stage.spacers.len());
}

#[test]
fn nab_parts_partition_the_cuts() {
    for cuts in [10usize, 20, 100, 200] {
        let p = NabParams {
            n: 2,
            a: Ratio::new(3, 10),
            b: Ratio::new(3, 10),
            cuts,
            mean: 17,
            divisibility: Divisibility::Absolute,
        };
        let parts = p.parts().unwrap();
        assert!(parts.flat_end <= parts.poly_end && parts.poly_end <= parts.cuts);
        assert_eq!(nab_spacers(&p).unwrap().len(), cuts);
    }
}
