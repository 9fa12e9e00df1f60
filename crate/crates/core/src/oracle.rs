//! Brute-force replay of the cut-and-stack construction.
//!
//! Independent of the offset arithmetic in [`crate::tower`]: the tower is
//! unrolled as a flat list of positions carrying their ancestry, and `T` is
//! `p -> p + 1`. Intended for cross-checking at small heights only.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, LevelSet, Measure, Result, SpacerSchedule};

/// Largest `h_J` the oracle will unroll.
pub const ORACLE_LIMIT: u64 = 1_000_000;

/// What a position of the flat tower is, seen from one tracked stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ancestry {
    /// Level `l` of a copy of the tracked tower.
    Level(u64),
    /// A spacer added at the given (later) stage.
    Spacer(usize),
}

#[derive(Debug, Clone)]
pub struct FlatTower {
    truncation: usize,
    height: u64,
    tracked: Vec<usize>,
    labels: Vec<Vec<Ancestry>>,
}

impl FlatTower {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn tracked(&self) -> &[usize] {
        &self.tracked
    }

    /// Per-position labels for a tracked stage.
    pub fn labels(&self, stage: usize) -> Option<&[Ancestry]> {
        let i = self.tracked.iter().position(|&s| s == stage)?;
        Some(&self.labels[i])
    }

    fn membership(&self, set: &LevelSet) -> Result<Vec<bool>> {
        let labels = self.labels(set.stage()).ok_or(Error::Parameter(alloc::format!(
            "stage {} is not tracked",
            set.stage()
        )))?;
        Ok(labels
            .iter()
            .map(|l| matches!(l, Ancestry::Level(x) if set.levels().binary_search(x).is_ok()))
            .collect())
    }

    pub fn measure(&self, set: &LevelSet) -> Result<Measure> {
        let count = self.membership(set)?.iter().filter(|&&b| b).count() as u64;
        Ok(Measure::new(count, self.height + 1))
    }

    /// Positions of `set`, listed directly.
    pub fn positions(&self, set: &LevelSet) -> Result<Vec<u64>> {
        Ok(self
            .membership(set)?
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(p, _)| p as u64)
            .collect())
    }
}

/// Replays the construction up to tower `truncation`, recording ancestry for
/// each tracked stage.
pub fn unroll(schedule: &SpacerSchedule, truncation: usize, tracked: &[usize]) -> Result<FlatTower> {
    let last = schedule.last_tower();
    if truncation == 0 || truncation > last {
        return Err(Error::InvalidRange {
            from: truncation,
            to: truncation,
            last,
        });
    }
    if let Some(&bad) = tracked.iter().find(|&&s| s == 0 || s > truncation) {
        return Err(Error::InvalidRange {
            from: bad,
            to: truncation,
            last,
        });
    }
    let height = schedule.height(truncation).expect("checked");
    if height > ORACLE_LIMIT {
        return Err(Error::OracleScale {
            height,
            limit: ORACLE_LIMIT,
        });
    }

    // Current tower as a list of per-tracked-stage labels; `None` until the
    // tracked stage is reached.
    let mut column: Vec<Vec<Option<Ancestry>>> = vec![vec![None; tracked.len()]; schedule.initial_height() as usize + 1];
    let mark_levels = |column: &mut Vec<Vec<Option<Ancestry>>>, tower: usize| {
        for (slot, &s) in tracked.iter().enumerate() {
            if s == tower {
                for (level, labels) in column.iter_mut().enumerate() {
                    labels[slot] = Some(Ancestry::Level(level as u64));
                }
            }
        }
    };
    mark_levels(&mut column, 1);

    for stage in schedule.stages().iter().take(truncation - 1) {
        let mut next = Vec::new();
        for &spacers in stage.spacers() {
            next.extend(column.iter().cloned());
            for _ in 0..spacers {
                next.push(vec![None; tracked.len()]);
            }
        }
        // Spacers are labeled with the stage that added them, for every
        // tracked tower that already exists.
        for labels in next.iter_mut() {
            for (slot, &s) in tracked.iter().enumerate() {
                if labels[slot].is_none() && s <= stage.index() {
                    labels[slot] = Some(Ancestry::Spacer(stage.index()));
                }
            }
        }
        column = next;
        mark_levels(&mut column, stage.index() + 1);
    }
    debug_assert_eq!(column.len() as u64, height + 1);

    let labels = (0..tracked.len())
        .map(|slot| column.iter().map(|l| l[slot].expect("every tracked stage reached")).collect())
        .collect();
    Ok(FlatTower {
        truncation,
        height,
        tracked: tracked.to_vec(),
        labels,
    })
}

/// `#{p : p in A, 0 <= p + m <= h_J, p + m in B} / (h_J + 1)` by a scan.
pub fn oracle_correlation(tower: &FlatTower, m: i64, a: &LevelSet, b: &LevelSet) -> Result<Measure> {
    if m.unsigned_abs() > tower.height {
        return Err(Error::OutOfWindow {
            shift: i128::from(m),
            height: tower.height,
            factor: None,
        });
    }
    let in_a = tower.membership(a)?;
    let in_b = tower.membership(b)?;
    let mut count = 0u64;
    for (p, &hit) in in_a.iter().enumerate() {
        let q = p as i64 + m;
        if hit && q >= 0 && (q as usize) < in_b.len() && in_b[q as usize] {
            count += 1;
        }
    }
    Ok(Measure::new(count, tower.height + 1))
}
