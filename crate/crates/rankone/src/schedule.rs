//! Turns a recipe block into a spacer schedule.

use num_rational::Ratio;
use rankone_core::recipes::{
    build_lemma1_schedule, build_nab_schedule, build_ornstein_schedule, build_staircase_schedule, Divisibility,
    Lemma1Recipe, NabRecipe, PerStage,
};
use rankone_core::{Error, Result, SpacerSchedule};

use crate::config::{DivisibilityConfig, NabConfig, PerStageValue, Rational, RecipeConfig};

fn per_stage(v: &PerStageValue) -> Result<PerStage> {
    PerStage::new(v.values())
}

fn unsigned(r: &Rational, field: &str) -> Result<Ratio<u64>> {
    r.unsigned()
        .ok_or_else(|| Error::Parameter(format!("{field} must be nonnegative, got {r}")))
}

pub fn nab_recipe(c: &NabConfig) -> Result<NabRecipe> {
    Ok(NabRecipe {
        n: c.n,
        a: unsigned(&c.a, "a")?,
        b: unsigned(&c.b, "b")?,
        cuts: per_stage(&c.r_j)?,
        staircase_cuts: per_stage(&c.staircase_r_j)?,
        divisibility: match c.divisibility {
            DivisibilityConfig::Absolute => Divisibility::Absolute,
            DivisibilityConfig::Relative => Divisibility::Relative,
        },
    })
}

/// Builds `depth` stages of the recipe; `seed` drives the stochastic ones.
pub fn build_schedule(recipe: &RecipeConfig, depth: usize, seed: u64) -> Result<SpacerSchedule> {
    match recipe {
        RecipeConfig::Explicit(c) => {
            if c.s_j.len() < depth {
                return Err(Error::Parameter(format!(
                    "explicit recipe lists {} stages but depth is {depth}",
                    c.s_j.len()
                )));
            }
            SpacerSchedule::from_spacers(c.h_1, c.s_j.iter().take(depth).cloned())
        }
        RecipeConfig::Ornstein(c) => build_ornstein_schedule(&per_stage(&c.h_j)?, &per_stage(&c.r_j)?, seed, depth, c.h_1),
        RecipeConfig::Staircase(c) => build_staircase_schedule(&per_stage(&c.r_j)?, depth, c.h_1),
        RecipeConfig::Lemma1(c) => {
            let recipe = Lemma1Recipe {
                blocks: c.n,
                exclusive: c.s,
                unit: per_stage(&c.l_j)?,
                mean: per_stage(&c.h_j)?,
                epsilon: unsigned(&c.epsilon, "epsilon")?,
                seed,
            };
            build_lemma1_schedule(&recipe, depth, c.h_1)
        }
        RecipeConfig::Nab(c) => build_nab_schedule(&nab_recipe(c)?, depth, c.h_1),
    }
}
