use alloc::vec::Vec;

use crate::{Error, LevelSet, Result, SpacerSchedule};

pub type LevelPair = (LevelSet, LevelSet);

/// Default cap on the size of a pair family.
pub const DEFAULT_PAIR_CAP: usize = 4096;

fn height_of(schedule: &SpacerSchedule, stage: usize) -> Result<u64> {
    schedule.height(stage).ok_or(Error::InvalidRange {
        from: stage,
        to: stage,
        last: schedule.last_tower(),
    })
}

/// Keeps at most `cap` pairs, taking every `ceil(len / cap)`-th one.
fn subsample(pairs: Vec<LevelPair>, cap: usize) -> Vec<LevelPair> {
    if cap == 0 || pairs.len() <= cap {
        return pairs;
    }
    let stride = pairs.len().div_ceil(cap);
    pairs.into_iter().step_by(stride).collect()
}

/// All `(level x, level y)` of tower `stage`, `x`-major, capped at `cap`.
pub fn single_level_pairs(schedule: &SpacerSchedule, stage: usize, cap: usize) -> Result<Vec<LevelPair>> {
    let h = height_of(schedule, stage)?;
    let mut pairs = Vec::new();
    for x in 0..=h {
        for y in 0..=h {
            pairs.push((LevelSet::single(stage, x), LevelSet::single(stage, y)));
        }
    }
    Ok(subsample(pairs, cap))
}

/// Splits tower `stage` into `blocks` runs of consecutive levels (sizes
/// differ by at most one) and returns all ordered pairs of runs.
pub fn block_pairs(schedule: &SpacerSchedule, stage: usize, blocks: usize) -> Result<Vec<LevelPair>> {
    let levels = height_of(schedule, stage)? + 1;
    if blocks == 0 || blocks as u64 > levels {
        return Err(Error::Parameter(alloc::format!(
            "cannot split {levels} levels into {blocks} blocks"
        )));
    }
    let b = blocks as u64;
    let runs: Vec<LevelSet> = (0..b)
        .map(|i| LevelSet::new(stage, (i * levels / b)..((i + 1) * levels / b)))
        .collect();
    let mut pairs = Vec::with_capacity(blocks * blocks);
    for a in &runs {
        for c in &runs {
            pairs.push((a.clone(), c.clone()));
        }
    }
    Ok(pairs)
}
