//! Spacer schedule generators.
//!
//! Four families are provided: Ornstein's stochastic spacers, the staircase,
//! the `(N, s)` block construction and the `(n, a, b)` flat/polynomial/mixing
//! construction. The last two attach their special times `m_j` to the
//! schedule as markers.
//!
//! Randomness comes from ChaCha8 with one stream per stage, so a stage's
//! spacers depend only on `(seed, stage)`.

use alloc::format;
use alloc::vec::Vec;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, SpacerSchedule};

/// Random stream for one stage of a recipe.
pub fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A per-stage parameter: stage `k` of a recipe reads entry `k`, and the
/// last entry repeats forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerStage(Vec<u64>);

impl PerStage {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("per-stage list is empty".into()));
        }
        Ok(PerStage(values))
    }

    pub fn constant(value: u64) -> Self {
        PerStage(alloc::vec![value])
    }

    pub fn at(&self, k: usize) -> u64 {
        self.0[k.min(self.0.len() - 1)]
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }
}

// ---------------------------------------------------------------- Ornstein

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrnsteinParams {
    /// `H_j`, the mean spacer count.
    pub mean: u64,
    /// `r_j`.
    pub cuts: usize,
    pub seed: u64,
    /// Stream index; builders use the stage number.
    pub stream: u64,
}

/// The uniform draws `a(1..=r+1)` together with the spacers they produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrnsteinDraws {
    pub draws: Vec<u64>,
    pub spacers: Vec<u64>,
}

/// `s(i) = H + a(i) - a(i+1)` over consecutive draws.
fn spacers_from_draws(mean: u64, draws: &[u64]) -> Vec<u64> {
    draws.windows(2).map(|w| mean + w[0] - w[1]).collect()
}

/// Draws `len + 1` uniform values on `{0..=mean}`. With `cyclic` the last
/// draw repeats the first, which makes the spacer total exactly `len * mean`.
fn draw_levels<R: Rng>(rng: &mut R, mean: u64, len: usize, cyclic: bool) -> Vec<u64> {
    let mut draws: Vec<u64> = (0..len).map(|_| rng.random_range(0..=mean)).collect();
    let last = if cyclic {
        draws[0]
    } else {
        rng.random_range(0..=mean)
    };
    draws.push(last);
    draws
}

pub fn ornstein_draws(p: &OrnsteinParams) -> Result<OrnsteinDraws> {
    if p.mean < 1 {
        return Err(Error::Parameter("Ornstein spacers need H_j >= 1".into()));
    }
    if p.cuts < 1 {
        return Err(Error::Parameter("Ornstein spacers need r_j >= 1".into()));
    }
    let mut rng = stage_rng(p.seed, p.stream);
    let draws = draw_levels(&mut rng, p.mean, p.cuts, false);
    let spacers = spacers_from_draws(p.mean, &draws);
    Ok(OrnsteinDraws { draws, spacers })
}

pub fn ornstein_spacers(p: &OrnsteinParams) -> Result<Vec<u64>> {
    Ok(ornstein_draws(p)?.spacers)
}

/// Every stage Ornstein, with per-stage `H_j` and `r_j`.
pub fn build_ornstein_schedule(
    mean: &PerStage,
    cuts: &PerStage,
    seed: u64,
    depth: usize,
    initial_height: u64,
) -> Result<SpacerSchedule> {
    let mut schedule = SpacerSchedule::new(initial_height);
    for k in 0..depth {
        let p = OrnsteinParams {
            mean: mean.at(k),
            cuts: cuts.at(k) as usize,
            seed,
            stream: k as u64 + 1,
        };
        schedule.push_stage(p.cuts, ornstein_spacers(&p)?)?;
    }
    Ok(schedule)
}

// --------------------------------------------------------------- staircase

/// `(1, 2, ..., r)`.
pub fn staircase_spacers(cuts: usize) -> Result<Vec<u64>> {
    if cuts < 2 {
        return Err(Error::InvalidStage { cuts });
    }
    Ok((1..=cuts as u64).collect())
}

pub fn build_staircase_schedule(
    cuts: &PerStage,
    depth: usize,
    initial_height: u64,
) -> Result<SpacerSchedule> {
    let mut schedule = SpacerSchedule::new(initial_height);
    for k in 0..depth {
        let r = cuts.at(k) as usize;
        schedule.push_stage(r, staircase_spacers(r)?)?;
    }
    Ok(schedule)
}

// ------------------------------------------------------- (N, s) blocks

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Params {
    /// `N`, the largest block index.
    pub blocks: u32,
    /// `s`, the index whose repeated block is left out.
    pub exclusive: u32,
    /// `L_j`, the block length unit.
    pub unit: usize,
    /// `H_j`, the mean spacer count of every block.
    pub mean: u64,
    /// `epsilon`, in `(0, 1)`.
    pub epsilon: Ratio<u64>,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// One of the two identical copies of `Sk`.
    Repeated { copy: u8 },
    /// The independent array `Ak`.
    Independent,
}

/// Location of one array inside the concatenated spacer vector (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub k: u32,
    pub kind: BlockKind,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Stage {
    pub spacers: Vec<u64>,
    pub blocks: Vec<Block>,
    unit: usize,
    mean: u64,
}

impl Lemma1Stage {
    /// `m_j = (h_j + 1 + H_j) L_j`: the displacement between matching
    /// columns of the two `Sk` copies is exactly `k m_j`.
    pub fn special_time(&self, height: u64) -> Option<u64> {
        height
            .checked_add(1 + self.mean)?
            .checked_mul(self.unit as u64)
    }
}

impl Lemma1Params {
    pub fn validate(&self) -> Result<()> {
        if self.blocks < 1 || self.exclusive < 1 || self.exclusive > self.blocks {
            return Err(Error::Parameter(format!(
                "(N,s) construction needs 1 <= s <= N, got N = {}, s = {}",
                self.blocks, self.exclusive
            )));
        }
        if *self.epsilon.numer() == 0 || self.epsilon >= Ratio::from_integer(1) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.unit < 1 {
            return Err(Error::Parameter("L_j must be at least 1".into()));
        }
        if self.mean < 1 {
            return Err(Error::Parameter("H_j must be at least 1".into()));
        }
        Ok(())
    }

    /// `(|Sk|, |Ak|) = (k L_j, floor(k L_j / epsilon))`.
    pub fn block_lengths(&self, k: u32) -> (usize, usize) {
        let s = k as usize * self.unit;
        let a = (s as u128 * u128::from(*self.epsilon.denom())) / u128::from(*self.epsilon.numer());
        (s, a as usize)
    }

    /// `r_j = sum_{k != s} (2 k L_j + floor(k L_j / epsilon))`.
    pub fn cut_count(&self) -> usize {
        (1..=self.blocks)
            .filter(|&k| k != self.exclusive)
            .map(|k| {
                let (s, a) = self.block_lengths(k);
                2 * s + a
            })
            .sum()
    }
}

/// Concatenates `Sk, Sk, Ak` for `k = 1..=N`, `k != s`.
///
/// The two `Sk` copies hold the same draws, and each `Sk` closes its draws
/// cyclically so its spacer total is exactly `k L_j H_j`. The `Ak` arrays are
/// ordinary Ornstein arrays.
pub fn lemma1_spacers(p: &Lemma1Params) -> Result<Lemma1Stage> {
    p.validate()?;
    let mut rng = stage_rng(p.seed, p.stream);
    let mut spacers = Vec::with_capacity(p.cut_count());
    let mut blocks = Vec::new();
    for k in (1..=p.blocks).filter(|&k| k != p.exclusive) {
        let (s_len, a_len) = p.block_lengths(k);
        let repeated = spacers_from_draws(p.mean, &draw_levels(&mut rng, p.mean, s_len, true));
        for copy in 0..2 {
            blocks.push(Block {
                k,
                kind: BlockKind::Repeated { copy },
                start: spacers.len(),
                len: s_len,
            });
            spacers.extend_from_slice(&repeated);
        }
        if a_len > 0 {
            let independent =
                spacers_from_draws(p.mean, &draw_levels(&mut rng, p.mean, a_len, false));
            blocks.push(Block {
                k,
                kind: BlockKind::Independent,
                start: spacers.len(),
                len: a_len,
            });
            spacers.extend(independent);
        }
    }
    if spacers.len() < 2 {
        return Err(Error::Parameter(
            "(N,s) construction produced fewer than 2 columns".into(),
        ));
    }
    Ok(Lemma1Stage {
        spacers,
        blocks,
        unit: p.unit,
        mean: p.mean,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Recipe {
    pub blocks: u32,
    pub exclusive: u32,
    pub unit: PerStage,
    pub mean: PerStage,
    pub epsilon: Ratio<u64>,
    pub seed: u64,
}

impl Lemma1Recipe {
    pub fn stage_params(&self, k: usize) -> Lemma1Params {
        Lemma1Params {
            blocks: self.blocks,
            exclusive: self.exclusive,
            unit: self.unit.at(k) as usize,
            mean: self.mean.at(k),
            epsilon: self.epsilon,
            seed: self.seed,
            stream: k as u64 + 1,
        }
    }
}

/// Every stage is an `(N, s)` stage; each gets the marker `m_j`.
pub fn build_lemma1_schedule(
    recipe: &Lemma1Recipe,
    depth: usize,
    initial_height: u64,
) -> Result<SpacerSchedule> {
    let mut schedule = SpacerSchedule::new(initial_height);
    for k in 0..depth {
        let stage = lemma1_spacers(&recipe.stage_params(k))?;
        let j = schedule.last_tower();
        let h = schedule.height(j).expect("top tower");
        let m = stage.special_time(h).ok_or(Error::Overflow { stage: j })?;
        schedule.push_stage(stage.spacers.len(), stage.spacers)?;
        schedule.push_marker(j, m);
    }
    Ok(schedule)
}

// ------------------------------------------------------ (n, a, b) parts

/// Where the multiples of `n` are counted in the polynomial part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Divisibility {
    /// `n | i` for the column index `i` itself.
    #[default]
    Absolute,
    /// `n | (i - floor(a r))`.
    Relative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NabParams {
    pub n: u64,
    pub a: Ratio<u64>,
    pub b: Ratio<u64>,
    /// `r_j`.
    pub cuts: usize,
    /// `H_j`.
    pub mean: u64,
    pub divisibility: Divisibility,
}

/// 1-based inclusive part boundaries: flat part `1..=flat_end`, polynomial
/// part `flat_end+1..=poly_end`, mixing part `poly_end+1..=r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NabParts {
    pub flat_end: usize,
    pub poly_end: usize,
    pub cuts: usize,
}

fn floor_mul(x: Ratio<u64>, r: usize) -> usize {
    ((u128::from(*x.numer()) * r as u128) / u128::from(*x.denom())) as usize
}

impl NabParams {
    pub fn validate_shape(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter(format!("n must exceed 1, got {}", self.n)));
        }
        if *self.a.numer() == 0 || *self.b.numer() == 0 {
            return Err(Error::Parameter("a and b must be positive".into()));
        }
        if self.a + self.b >= Ratio::from_integer(1) {
            return Err(Error::Parameter(format!(
                "a + b must be below 1 so that c > 0, got {}",
                self.a + self.b
            )));
        }
        Ok(())
    }

    pub fn parts(&self) -> Result<NabParts> {
        self.validate_shape()?;
        let flat_end = floor_mul(self.a, self.cuts);
        let poly_end = floor_mul(self.a + self.b, self.cuts);
        if flat_end < 1 {
            return Err(Error::Parameter(format!(
                "a-part is empty: floor(a r) = 0 for r = {}",
                self.cuts
            )));
        }
        if poly_end <= flat_end {
            return Err(Error::Parameter(format!(
                "b-part is empty for r = {}",
                self.cuts
            )));
        }
        if poly_end >= self.cuts {
            return Err(Error::Parameter(format!(
                "c-part is empty for r = {}",
                self.cuts
            )));
        }
        Ok(NabParts {
            flat_end,
            poly_end,
            cuts: self.cuts,
        })
    }
}

/// Flat part `H_j`, polynomial part `n H_j - 1` on multiples of `n` and `0`
/// elsewhere, staircase `s(i) = i` in the mixing part.
pub fn nab_spacers(p: &NabParams) -> Result<Vec<u64>> {
    let parts = p.parts()?;
    let tall = p
        .n
        .checked_mul(p.mean)
        .filter(|&t| t >= 1)
        .ok_or_else(|| Error::Parameter(format!("n H_j must be at least 1, got H_j = {}", p.mean)))?
        - 1;
    Ok((1..=p.cuts)
        .map(|i| {
            if i <= parts.flat_end {
                p.mean
            } else if i <= parts.poly_end {
                let idx = match p.divisibility {
                    Divisibility::Absolute => i,
                    Divisibility::Relative => i - parts.flat_end,
                };
                if idx as u64 % p.n == 0 {
                    tall
                } else {
                    0
                }
            } else {
                i as u64
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NabRecipe {
    pub n: u64,
    pub a: Ratio<u64>,
    pub b: Ratio<u64>,
    /// Cut counts of the `(n, a, b)` stages, in order.
    pub cuts: PerStage,
    /// Cut counts of the staircase stages, in order.
    pub staircase_cuts: PerStage,
    pub divisibility: Divisibility,
}

/// Odd stages are pure staircases, even stages are `(n, a, b)` stages with
/// `H_j = h_{j-1}`. Each `(n, a, b)` stage gets the marker
/// `m_j = h_j + 1 + H_j`, the column period of its flat part.
pub fn build_nab_schedule(recipe: &NabRecipe, depth: usize, initial_height: u64) -> Result<SpacerSchedule> {
    if depth < 2 {
        return Err(Error::Parameter(format!("(n,a,b) schedules need depth >= 2, got {depth}")));
    }
    let mut schedule = SpacerSchedule::new(initial_height);
    for k in 0..depth {
        let j = schedule.last_tower();
        if k % 2 == 0 {
            let r = recipe.staircase_cuts.at(k / 2) as usize;
            schedule.push_stage(r, staircase_spacers(r)?)?;
        } else {
            let mean = schedule.height(j - 1).expect("previous tower");
            let p = NabParams {
                n: recipe.n,
                a: recipe.a,
                b: recipe.b,
                cuts: recipe.cuts.at(k / 2) as usize,
                mean,
                divisibility: recipe.divisibility,
            };
            let spacers = nab_spacers(&p)?;
            let h = schedule.height(j).expect("top tower");
            let m = h
                .checked_add(1)
                .and_then(|x| x.checked_add(mean))
                .ok_or(Error::Overflow { stage: j })?;
            schedule.push_stage(p.cuts, spacers)?;
            schedule.push_marker(j, m);
        }
    }
    Ok(schedule)
}
