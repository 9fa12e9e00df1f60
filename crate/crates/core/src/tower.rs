//! Stage bookkeeping for rank-one towers.
//!
//! Towers are numbered from 1. Stage `j` cuts tower `j` (levels `0..=h_j`)
//! into `r_j` columns, puts `s_j(i)` spacer levels on top of column `i` and
//! stacks the columns left to right into tower `j + 1`, so that
//! `h_{j+1} + 1 = (h_j + 1) r_j + sum_i s_j(i)`.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::{BitSet, Error, Measure, Result};

/// Default cap on materialized occurrence lists (2^26 offsets).
pub const DEFAULT_OFFSET_BUDGET: u64 = 1 << 26;

/// One cut-and-stack step: the cut count is the number of spacer entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    index: usize,
    spacers: Vec<u64>,
}

impl Stage {
    /// Tower index this stage cuts.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn cuts(&self) -> usize {
        self.spacers.len()
    }

    pub fn spacers(&self) -> &[u64] {
        &self.spacers
    }

    pub fn spacer_total(&self) -> u64 {
        self.spacers.iter().sum()
    }
}

/// A recipe-specific special time `m_j` attached to stage `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Marker {
    pub stage: usize,
    pub time: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacerSchedule {
    initial_height: u64,
    stages: Vec<Stage>,
    heights: Vec<u64>,
    markers: Vec<Marker>,
}

impl SpacerSchedule {
    /// A schedule with only tower 1, of height `initial_height`.
    pub fn new(initial_height: u64) -> Self {
        SpacerSchedule {
            initial_height,
            stages: Vec::new(),
            heights: vec![initial_height],
            markers: Vec::new(),
        }
    }

    /// Builds a schedule from explicit per-stage spacer vectors.
    pub fn from_spacers<I>(initial_height: u64, stages: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u64>>,
    {
        let mut schedule = SpacerSchedule::new(initial_height);
        for spacers in stages {
            let cuts = spacers.len();
            schedule.push_stage(cuts, spacers)?;
        }
        Ok(schedule)
    }

    /// Returns a copy of the schedule extended by one stage.
    pub fn append_stage(&self, cuts: usize, spacers: Vec<u64>) -> Result<SpacerSchedule> {
        let mut next = self.clone();
        next.push_stage(cuts, spacers)?;
        Ok(next)
    }

    /// In-place version of [`append_stage`](Self::append_stage). Returns the
    /// new tower height.
    pub fn push_stage(&mut self, cuts: usize, spacers: Vec<u64>) -> Result<u64> {
        if spacers.len() != cuts {
            return Err(Error::ScheduleShape {
                cuts,
                spacers: spacers.len(),
            });
        }
        if cuts < 2 {
            return Err(Error::InvalidStage { cuts });
        }
        let index = self.stages.len() + 1;
        let overflow = Error::Overflow { stage: index };
        let h = self.top_height();
        let levels = (h.checked_add(1))
            .and_then(|l| l.checked_mul(cuts as u64))
            .ok_or(overflow.clone())?;
        let spacer_sum = spacers
            .iter()
            .try_fold(0u64, |acc, &s| acc.checked_add(s))
            .ok_or(overflow.clone())?;
        let next = levels.checked_add(spacer_sum).ok_or(overflow)? - 1;
        self.stages.push(Stage { index, spacers });
        self.heights.push(next);
        Ok(next)
    }

    pub fn push_marker(&mut self, stage: usize, time: u64) {
        self.markers.push(Marker { stage, time });
    }

    pub fn initial_height(&self) -> u64 {
        self.initial_height
    }

    /// Number of cut-and-stack stages.
    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// Index of the tallest tower, `depth() + 1`.
    pub fn last_tower(&self) -> usize {
        self.heights.len()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// The stage cutting tower `j`.
    pub fn stage(&self, j: usize) -> Option<&Stage> {
        j.checked_sub(1).and_then(|i| self.stages.get(i))
    }

    /// `h_1, h_2, ...`
    pub fn heights(&self) -> &[u64] {
        &self.heights
    }

    pub fn height(&self, j: usize) -> Option<u64> {
        j.checked_sub(1).and_then(|i| self.heights.get(i)).copied()
    }

    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn marker(&self, stage: usize) -> Option<u64> {
        self.markers
            .iter()
            .find(|m| m.stage == stage)
            .map(|m| m.time)
    }

    fn top_height(&self) -> u64 {
        *self.heights.last().expect("tower 1 always exists")
    }

    pub(crate) fn check_range(&self, from: usize, to: usize) -> Result<()> {
        if from == 0 || from > to || to > self.last_tower() {
            return Err(Error::InvalidRange {
                from,
                to,
                last: self.last_tower(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_levels(&self, set: &LevelSet) -> Result<()> {
        let height = self.height(set.stage).ok_or(Error::InvalidRange {
            from: set.stage,
            to: set.stage,
            last: self.last_tower(),
        })?;
        match set.levels.last() {
            Some(&level) if level > height => Err(Error::LevelOutOfRange {
                stage: set.stage,
                level,
                height,
            }),
            _ => Ok(()),
        }
    }

    /// Start offsets of the `r_j` copies of tower `j` inside tower `j + 1`.
    pub fn column_offsets(&self, j: usize) -> Result<Vec<u64>> {
        let stage = self.stage(j).ok_or(Error::InvalidRange {
            from: j,
            to: j + 1,
            last: self.last_tower(),
        })?;
        let h = self.heights[j - 1];
        let mut offsets = Vec::with_capacity(stage.cuts());
        let mut o = 0u64;
        for &s in stage.spacers() {
            offsets.push(o);
            o += h + 1 + s;
        }
        Ok(offsets)
    }

    /// Number of copies of tower `j` inside tower `to`.
    pub fn copy_count(&self, j: usize, to: usize) -> Result<u128> {
        self.check_range(j, to)?;
        Ok(self.stages[j - 1..to - 1]
            .iter()
            .map(|s| s.cuts() as u128)
            .product())
    }

    /// Materialized offsets of tower `j` copies inside tower `to`, subject to
    /// [`DEFAULT_OFFSET_BUDGET`].
    pub fn occurrences(&self, j: usize, to: usize) -> Result<Occurrences> {
        self.occurrences_with_budget(j, to, DEFAULT_OFFSET_BUDGET)
    }

    pub fn occurrences_with_budget(&self, j: usize, to: usize, budget: u64) -> Result<Occurrences> {
        let required = self.copy_count(j, to)?;
        if required > u128::from(budget) {
            return Err(Error::Resource { required, budget });
        }
        // Compose from the top: offsets(j -> to) = offsets(j -> j+1) + offsets(j+1 -> to).
        let mut offsets = vec![0u64];
        for t in (j..to).rev() {
            let inner = self.column_offsets(t)?;
            offsets = offsets
                .iter()
                .flat_map(|&outer| inner.iter().map(move |&o| outer + o))
                .collect();
        }
        Ok(Occurrences {
            from_stage: j,
            to_stage: to,
            offsets,
        })
    }

    /// Copies a bit pattern living on tower `j` into every copy of tower `j`
    /// inside tower `to`, one stage at a time.
    pub fn lift_bits(&self, pattern: &BitSet, j: usize, to: usize) -> Result<BitSet> {
        self.check_range(j, to)?;
        assert_eq!(pattern.len() as u64, self.heights[j - 1] + 1);
        let mut current = pattern.clone();
        for t in j..to {
            let mut next = BitSet::new(tower_len(self.heights[t])?);
            for o in self.column_offsets(t)? {
                next.or_shifted(&current, o as usize);
            }
            current = next;
        }
        Ok(current)
    }

    /// Occurrence offsets of tower `j` inside tower `to`, as a bit vector.
    pub fn occurrence_bits(&self, j: usize, to: usize) -> Result<BitSet> {
        self.check_range(j, to)?;
        let mut base = BitSet::new(tower_len(self.heights[j - 1])?);
        base.insert(0);
        self.lift_bits(&base, j, to)
    }

    pub fn positions(&self, set: &LevelSet, to: usize) -> Result<PositionSet> {
        self.check_range(set.stage, to)?;
        self.check_levels(set)?;
        let mut base = BitSet::new(tower_len(self.heights[set.stage - 1])?);
        for &l in &set.levels {
            base.insert(l as usize);
        }
        Ok(PositionSet {
            to_stage: to,
            bits: self.lift_bits(&base, set.stage, to)?,
        })
    }

    /// `|positions(set, to)| / (h_to + 1)`, computed by counting rather than
    /// by building the position set.
    pub fn level_measure(&self, set: &LevelSet, to: usize) -> Result<Measure> {
        self.check_range(set.stage, to)?;
        self.check_levels(set)?;
        let copies = self.copy_count(set.stage, to)?;
        let count = copies * set.levels.len() as u128;
        let count = u64::try_from(count).map_err(|_| Error::Overflow { stage: to })?;
        Ok(Measure::new(count, self.heights[to - 1] + 1))
    }

    /// Fraction of each new tower taken by the spacers added at that stage,
    /// with the running mass of tower 1.
    pub fn spacer_mass_report(&self) -> Vec<SpacerMass> {
        let mut base_levels = u128::from(self.initial_height) + 1;
        self.stages
            .iter()
            .enumerate()
            .map(|(i, stage)| {
                let total = u128::from(self.heights[i + 1]) + 1;
                base_levels *= stage.cuts() as u128;
                SpacerMass {
                    stage: stage.index,
                    fraction: Ratio::new(u128::from(stage.spacer_total()), total),
                    base_mass: Ratio::new(base_levels, total),
                }
            })
            .collect()
    }
}

pub(crate) fn tower_len(height: u64) -> Result<usize> {
    usize::try_from(height)
        .ok()
        .and_then(|h| h.checked_add(1))
        .ok_or(Error::Resource {
            required: u128::from(height) + 1,
            budget: usize::MAX as u64,
        })
}

/// Per-stage row of [`SpacerSchedule::spacer_mass_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacerMass {
    pub stage: usize,
    /// `sum_i s_j(i) / (h_{j+1} + 1)`.
    pub fraction: Ratio<u128>,
    /// Measure of tower 1 inside tower `j + 1`: the product of `1 - fraction`.
    pub base_mass: Ratio<u128>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrences {
    pub from_stage: usize,
    pub to_stage: usize,
    pub offsets: Vec<u64>,
}

/// A union of levels `T^l E_j` of tower `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelSet {
    stage: usize,
    levels: Vec<u64>,
}

impl LevelSet {
    pub fn new<I: IntoIterator<Item = u64>>(stage: usize, levels: I) -> Self {
        let mut levels: Vec<u64> = levels.into_iter().collect();
        levels.sort_unstable();
        levels.dedup();
        LevelSet { stage, levels }
    }

    pub fn single(stage: usize, level: u64) -> Self {
        LevelSet {
            stage,
            levels: vec![level],
        }
    }

    pub fn empty(stage: usize) -> Self {
        LevelSet {
            stage,
            levels: Vec::new(),
        }
    }

    /// Every level of tower `stage`.
    pub fn full(schedule: &SpacerSchedule, stage: usize) -> Result<Self> {
        let h = schedule.height(stage).ok_or(Error::InvalidRange {
            from: stage,
            to: stage,
            last: schedule.last_tower(),
        })?;
        Ok(LevelSet::new(stage, 0..=h))
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn union(&self, other: &LevelSet) -> LevelSet {
        assert_eq!(self.stage, other.stage, "union across stages");
        LevelSet::new(self.stage, self.levels.iter().chain(&other.levels).copied())
    }

    pub fn is_disjoint(&self, other: &LevelSet) -> bool {
        self.stage != other.stage || !self.levels.iter().any(|l| other.levels.binary_search(l).is_ok())
    }

    /// Re-expresses the set as levels of the taller tower `to`.
    pub fn lift(&self, schedule: &SpacerSchedule, to: usize) -> Result<LevelSet> {
        if to == self.stage {
            schedule.check_levels(self)?;
            return Ok(self.clone());
        }
        let positions = schedule.positions(self, to)?;
        Ok(LevelSet {
            stage: to,
            levels: positions.bits.iter_ones().map(|p| p as u64).collect(),
        })
    }
}

/// A level set realized inside truncation tower `to_stage`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionSet {
    pub to_stage: usize,
    pub bits: BitSet,
}

impl PositionSet {
    pub fn count(&self) -> u64 {
        self.bits.count_ones()
    }

    pub fn contains(&self, position: u64) -> bool {
        self.bits.contains(position as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn small() -> SpacerSchedule {
        SpacerSchedule::from_spacers(0, [vec![0, 1, 0]]).unwrap()
    }

    #[test]
    fn append_stage_applies_height_recursion() {
        let s = SpacerSchedule::new(0).append_stage(3, vec![0, 1, 0]).unwrap();
        assert_eq!(s.heights(), &[0, 3]);
        let s = SpacerSchedule::new(3).append_stage(2, vec![1, 2]).unwrap();
        assert_eq!(s.height(2), Some(10));
    }

    #[test]
    fn append_stage_leaves_input_alone() {
        let base = SpacerSchedule::new(3);
        let _ = base.append_stage(2, vec![1, 2]).unwrap();
        assert_eq!(base.depth(), 0);
        assert_eq!(base.heights(), &[3]);
    }

    #[test]
    fn append_stage_rejects_bad_shapes() {
        let base = SpacerSchedule::new(3);
        assert_eq!(
            base.append_stage(2, vec![1, 2, 0]),
            Err(Error::ScheduleShape { cuts: 2, spacers: 3 })
        );
        assert_eq!(base.append_stage(1, vec![4]), Err(Error::InvalidStage { cuts: 1 }));
    }

    #[test]
    fn height_overflow_is_an_error() {
        let base = SpacerSchedule::new(u64::MAX / 4);
        assert_eq!(
            base.append_stage(8, vec![0; 8]),
            Err(Error::Overflow { stage: 1 })
        );
        let base = SpacerSchedule::new(1);
        assert!(base.append_stage(2, vec![u64::MAX, 1]).is_err());
    }

    #[test]
    fn one_stage_offsets_skip_the_spacer() {
        let occ = small().occurrences(1, 2).unwrap();
        assert_eq!(occ.offsets, [0, 1, 3]);
        assert_eq!(small().occurrences(2, 2).unwrap().offsets, [0]);
    }

    #[test]
    fn two_stage_composition_without_spacers() {
        let s = SpacerSchedule::from_spacers(4, [vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(s.occurrences(1, 3).unwrap().offsets, [0, 5, 10, 15]);
    }

    #[test]
    fn occurrence_ranges_are_checked() {
        let s = small();
        assert!(matches!(s.occurrences(2, 1), Err(Error::InvalidRange { .. })));
        assert!(matches!(s.occurrences(1, 3), Err(Error::InvalidRange { .. })));
        assert!(matches!(s.occurrences(0, 1), Err(Error::InvalidRange { .. })));
    }

    #[test]
    fn occurrence_budget_reports_required_count() {
        let s = SpacerSchedule::from_spacers(0, [vec![0; 8], vec![0; 8]]).unwrap();
        assert_eq!(
            s.occurrences_with_budget(1, 3, 10),
            Err(Error::Resource {
                required: 64,
                budget: 10
            })
        );
    }

    #[test]
    fn positions_are_sumsets() {
        let s = small();
        let p = s.positions(&LevelSet::single(1, 0), 2).unwrap();
        assert_eq!(p.bits.iter_ones().collect::<Vec<_>>(), [0, 1, 3]);

        // h_1 = 3 with offsets {0, 11}: s = (7, 0) gives o_2 = 4 + 7.
        let s = SpacerSchedule::from_spacers(3, [vec![7, 0]]).unwrap();
        assert_eq!(s.occurrences(1, 2).unwrap().offsets, [0, 11]);
        let p = s.positions(&LevelSet::new(1, [0, 2]), 2).unwrap();
        assert_eq!(p.bits.iter_ones().collect::<Vec<_>>(), [0, 2, 11, 13]);
    }

    #[test]
    fn full_tower_positions_count() {
        let s = SpacerSchedule::from_spacers(2, [vec![1, 0, 2], vec![3, 3]]).unwrap();
        let p = s.positions(&LevelSet::full(&s, 1).unwrap(), 3).unwrap();
        assert_eq!(p.count(), 3 * 3 * 2);
    }

    #[test]
    fn level_measures() {
        let s = small();
        assert_eq!(
            s.level_measure(&LevelSet::single(1, 0), 2).unwrap(),
            Measure::new(3, 4)
        );
        let full = LevelSet::full(&s, 2).unwrap();
        assert_eq!(s.level_measure(&full, 2).unwrap().ratio(), Ratio::from_integer(1));
        assert!(matches!(
            s.level_measure(&LevelSet::single(1, 1), 2),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn equal_cut_pieces_share_the_measure() {
        // Each of the r_j columns of E_j is one copy of the base level in tower j+1.
        let s = SpacerSchedule::from_spacers(2, [vec![0, 4, 1, 2]]).unwrap();
        let e = s.level_measure(&LevelSet::single(1, 0), 2).unwrap();
        assert_eq!(e.ratio() / 4, Ratio::new(1, u128::from(s.height(2).unwrap() + 1)));
    }

    #[test]
    fn spacer_mass_examples() {
        let report = small().spacer_mass_report();
        assert_eq!(report[0].fraction, Ratio::new(1, 4));
        assert_eq!(report[0].base_mass, Ratio::new(3, 4));

        let flat = SpacerSchedule::from_spacers(5, [vec![0; 3], vec![0; 2]]).unwrap();
        for row in flat.spacer_mass_report() {
            assert_eq!(row.fraction, Ratio::from_integer(0));
            assert_eq!(row.base_mass, Ratio::from_integer(1));
        }
    }

    #[test]
    fn base_mass_is_the_product_of_complements() {
        let s = SpacerSchedule::from_spacers(1, [vec![2, 0, 1], vec![0, 5], vec![1, 1, 1, 1]]).unwrap();
        let mut running = Ratio::from_integer(1u128);
        for row in s.spacer_mass_report() {
            running *= Ratio::from_integer(1) - row.fraction;
            assert_eq!(running, row.base_mass);
        }
    }

    #[test]
    fn lift_reexpresses_levels() {
        let s = small();
        let lifted = LevelSet::single(1, 0).lift(&s, 2).unwrap();
        assert_eq!(lifted.levels(), &[0, 1, 3]);
    }
}
