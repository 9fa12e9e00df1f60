use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::tower::tower_len;
use crate::{BitSet, Error, LevelSet, Measure, Result, SpacerSchedule};

/// `mu(T^m A ∩ B)` inside truncation tower `truncation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationQuery {
    pub m: i64,
    pub a: LevelSet,
    pub b: LevelSet,
    pub truncation: usize,
}

/// Exact value for the truncated system plus the mass of `A` that the shift
/// can push out of the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Correlation {
    pub value: Measure,
    pub error_bound: Measure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelationRow {
    pub m: i64,
    pub pair: usize,
    pub value: Measure,
    pub error_bound: Measure,
}

pub trait Correlate {
    /// Truncation tower index `J`.
    fn truncation(&self) -> usize;

    /// `h_J + 1`.
    fn total(&self) -> u64;

    fn measure(&self, set: &LevelSet) -> Result<Measure>;

    fn correlation(&self, m: i64, a: &LevelSet, b: &LevelSet) -> Result<Correlation>;

    fn height(&self) -> u64 {
        self.total() - 1
    }

    fn check_window(&self, shift: i128) -> Result<()> {
        if shift.unsigned_abs() > u128::from(self.height()) {
            return Err(Error::OutOfWindow {
                shift,
                height: self.height(),
                factor: None,
            });
        }
        Ok(())
    }

    fn error_bound(&self, m: i64) -> Measure {
        Measure::new(m.unsigned_abs(), self.total())
    }
}

/// Counts through the position bit vectors of both sets.
#[derive(Debug, Clone, Copy)]
pub struct TowerCorrelator<'a> {
    schedule: &'a SpacerSchedule,
    truncation: usize,
    total: u64,
}

impl<'a> TowerCorrelator<'a> {
    pub fn new(schedule: &'a SpacerSchedule, truncation: usize) -> Result<Self> {
        schedule.check_range(truncation, truncation)?;
        let total = schedule.height(truncation).expect("checked") + 1;
        Ok(TowerCorrelator {
            schedule,
            truncation,
            total,
        })
    }
}

impl Correlate for TowerCorrelator<'_> {
    fn truncation(&self) -> usize {
        self.truncation
    }

    fn total(&self) -> u64 {
        self.total
    }

    fn measure(&self, set: &LevelSet) -> Result<Measure> {
        self.schedule.level_measure(set, self.truncation)
    }

    fn correlation(&self, m: i64, a: &LevelSet, b: &LevelSet) -> Result<Correlation> {
        self.check_window(i128::from(m))?;
        let pa = self.schedule.positions(a, self.truncation)?;
        let pb = self.schedule.positions(b, self.truncation)?;
        let count = pa.bits.overlap_shifted(&pb.bits, m);
        Ok(Correlation {
            value: Measure::new(count, self.total),
            error_bound: self.error_bound(m),
        })
    }
}

/// Exact `mu(T^m A ∩ B)` for a single query, by position counting.
pub fn correlation(schedule: &SpacerSchedule, q: &CorrelationQuery) -> Result<Correlation> {
    TowerCorrelator::new(schedule, q.truncation)?.correlation(q.m, &q.a, &q.b)
}

/// Correlations between level sets of one tower `stage`, read off the
/// autocorrelation `C(d) = #{o in O : o + d in O}` of the offsets `O` of that
/// tower inside the truncation: levels `x` of `A` and `y` of `B` meet under
/// `T^m` exactly `C(m + x - y)` times.
///
/// Sets living on lower towers are lifted to `stage` first.
#[derive(Debug, Clone)]
pub struct StageCorrelator<'a> {
    schedule: &'a SpacerSchedule,
    stage: usize,
    truncation: usize,
    offsets: BitSet,
    copies: u64,
    total: u64,
    table: BTreeMap<u64, u64>,
}

impl<'a> StageCorrelator<'a> {
    pub fn new(schedule: &'a SpacerSchedule, stage: usize, truncation: usize) -> Result<Self> {
        let offsets = schedule.occurrence_bits(stage, truncation)?;
        let copies = offsets.count_ones();
        let total = tower_len(schedule.height(truncation).expect("checked"))? as u64;
        Ok(StageCorrelator {
            schedule,
            stage,
            truncation,
            offsets,
            copies,
            total,
            table: BTreeMap::new(),
        })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn schedule(&self) -> &'a SpacerSchedule {
        self.schedule
    }

    /// Number of copies of the stage tower inside the truncation.
    pub fn copies(&self) -> u64 {
        self.copies
    }

    /// `C(d)`, from the table when present. `C` is even in `d`.
    pub fn autocorrelation(&self, d: i64) -> u64 {
        let d = d.unsigned_abs();
        match self.table.get(&d) {
            Some(&c) => c,
            None => self.count_displacement(d),
        }
    }

    /// Always counts, bypassing the table.
    pub fn count_displacement(&self, d: u64) -> u64 {
        if d == 0 {
            return self.copies;
        }
        if d >= self.total {
            return 0;
        }
        self.offsets.overlap_shifted(&self.offsets, d as i64)
    }

    /// Stores precomputed `(d, C(d))` pairs, e.g. from a parallel driver.
    pub fn insert_counts<I: IntoIterator<Item = (u64, u64)>>(&mut self, counts: I) {
        self.table.extend(counts);
    }

    pub fn precompute<I: IntoIterator<Item = u64>>(&mut self, displacements: I) {
        let missing: Vec<u64> = displacements
            .into_iter()
            .filter(|d| !self.table.contains_key(d))
            .collect();
        for d in missing {
            let c = self.count_displacement(d);
            self.table.insert(d, c);
        }
    }

    /// Re-expresses `set` on the correlator's tower.
    pub fn lift(&self, set: &LevelSet) -> Result<LevelSet> {
        if set.stage() > self.stage {
            return Err(Error::InvalidRange {
                from: set.stage(),
                to: self.stage,
                last: self.schedule.last_tower(),
            });
        }
        set.lift(self.schedule, self.stage)
    }

    /// `x - y` over `x in A`, `y in B` with multiplicities.
    fn differences(a: &LevelSet, b: &LevelSet) -> BTreeMap<i64, u64> {
        let mut diffs = BTreeMap::new();
        for &x in a.levels() {
            for &y in b.levels() {
                *diffs.entry(x as i64 - y as i64).or_insert(0) += 1;
            }
        }
        diffs
    }

    /// The displacements `|m + x - y|` a query needs.
    pub fn displacements(&self, m: i64, a: &LevelSet, b: &LevelSet) -> Result<BTreeSet<u64>> {
        let (a, b) = (self.lift(a)?, self.lift(b)?);
        Ok(Self::differences(&a, &b)
            .keys()
            .map(|diff| (m + diff).unsigned_abs())
            .collect())
    }
}

impl Correlate for StageCorrelator<'_> {
    fn truncation(&self) -> usize {
        self.truncation
    }

    fn total(&self) -> u64 {
        self.total
    }

    fn measure(&self, set: &LevelSet) -> Result<Measure> {
        self.schedule.level_measure(set, self.truncation)
    }

    fn correlation(&self, m: i64, a: &LevelSet, b: &LevelSet) -> Result<Correlation> {
        self.check_window(i128::from(m))?;
        let (a, b) = (self.lift(a)?, self.lift(b)?);
        let count = Self::differences(&a, &b)
            .into_iter()
            .map(|(diff, mult)| mult * self.autocorrelation(m + diff))
            .sum();
        Ok(Correlation {
            value: Measure::new(count, self.total),
            error_bound: self.error_bound(m),
        })
    }
}

/// One row per `(m, pair)`, `m`-major.
pub fn correlation_profile<C: Correlate>(
    correlator: &C,
    ms: &[i64],
    pairs: &[(LevelSet, LevelSet)],
) -> Result<Vec<CorrelationRow>> {
    let mut rows = Vec::with_capacity(ms.len() * pairs.len());
    for &m in ms {
        for (pair, (a, b)) in pairs.iter().enumerate() {
            let c = correlator.correlation(m, a, b)?;
            rows.push(CorrelationRow {
                m,
                pair,
                value: c.value,
                error_bound: c.error_bound,
            });
        }
    }
    Ok(rows)
}
