//! Experiment configuration: a JSON document naming a recipe, the depth and
//! truncation, a seed, a list of analyses and an output directory.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub recipe: RecipeConfig,
    pub depth: usize,
    pub truncate_at: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub analyses: Vec<AnalysisConfig>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A scalar applying to every stage, or a list whose last entry repeats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerStageValue {
    Scalar(u64),
    List(Vec<u64>),
}

impl PerStageValue {
    pub fn values(&self) -> Vec<u64> {
        match self {
            PerStageValue::Scalar(v) => vec![*v],
            PerStageValue::List(v) => v.clone(),
        }
    }
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecipeConfig {
    Explicit(ExplicitRecipe),
    Ornstein(OrnsteinRecipe),
    Staircase(StaircaseRecipe),
    Lemma1(Lemma1Config),
    Nab(NabConfig),
}

impl RecipeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RecipeConfig::Explicit(_) => "explicit",
            RecipeConfig::Ornstein(_) => "ornstein",
            RecipeConfig::Staircase(_) => "staircase",
            RecipeConfig::Lemma1(_) => "lemma1",
            RecipeConfig::Nab(_) => "nab",
        }
    }
}

/// Spacer vectors given stage by stage; `r_j` is the length of each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitRecipe {
    #[serde(default)]
    pub h_1: u64,
    pub s_j: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrnsteinRecipe {
    #[serde(default)]
    pub h_1: u64,
    #[serde(rename = "H_j")]
    pub h_j: PerStageValue,
    pub r_j: PerStageValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseRecipe {
    #[serde(default)]
    pub h_1: u64,
    pub r_j: PerStageValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Config {
    #[serde(default)]
    pub h_1: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub s: u32,
    #[serde(rename = "L_j")]
    pub l_j: PerStageValue,
    #[serde(rename = "H_j")]
    pub h_j: PerStageValue,
    pub epsilon: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisibilityConfig {
    #[default]
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NabConfig {
    #[serde(default = "one")]
    pub h_1: u64,
    pub n: u64,
    pub a: Rational,
    pub b: Rational,
    /// Cut counts of the `(n, a, b)` stages.
    pub r_j: PerStageValue,
    /// Cut counts of the staircase stages in between.
    pub staircase_r_j: PerStageValue,
    #[serde(default)]
    pub divisibility: DivisibilityConfig,
}

/// Which test-set pairs an analysis ranges over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum PairsConfig {
    /// All pairs of single levels of tower `stage`, subsampled to `cap`.
    Single {
        stage: usize,
        #[serde(default = "default_cap")]
        cap: usize,
    },
    /// All ordered pairs of `blocks` runs of consecutive levels.
    Blocks { stage: usize, blocks: usize },
    /// Explicit `(A, B)` level lists on tower `stage`.
    Explicit { stage: usize, sets: Vec<(Vec<u64>, Vec<u64>)> },
}

fn default_cap() -> usize {
    rankone_core::lab::DEFAULT_PAIR_CAP
}

impl PairsConfig {
    pub fn stage(&self) -> usize {
        match self {
            PairsConfig::Single { stage, .. }
            | PairsConfig::Blocks { stage, .. }
            | PairsConfig::Explicit { stage, .. } => *stage,
        }
    }
}

/// Either explicit powers `m`, or multiples `K m_j` of the markers of the
/// listed stages.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Times {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiples: Option<Vec<i64>>,
}

fn default_k_max() -> usize {
    2
}

fn default_step() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AnalysisConfig {
    Correlate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(flatten)]
        times: Times,
        pairs: PairsConfig,
    },
    Fit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(flatten)]
        times: Times,
        pairs: PairsConfig,
        #[serde(rename = "K_max", default = "default_k_max")]
        k_max: usize,
    },
    Mixing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(flatten)]
        times: Times,
        pairs: PairsConfig,
    },
    Tensor {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(flatten)]
        times: Times,
        exponents: Vec<u64>,
        /// Tower carrying the factor set.
        stage: usize,
        /// Levels of the factor set; defaults to the lower half of the tower.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        levels: Option<Vec<u64>>,
    },
    Probe {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        exponents: Vec<u64>,
        stage: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        levels: Option<Vec<u64>>,
        #[serde(rename = "M")]
        size: usize,
        #[serde(default = "default_step")]
        step: u64,
    },
}

impl AnalysisConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisConfig::Correlate { .. } => "correlate",
            AnalysisConfig::Fit { .. } => "fit",
            AnalysisConfig::Mixing { .. } => "mixing",
            AnalysisConfig::Tensor { .. } => "tensor",
            AnalysisConfig::Probe { .. } => "probe",
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            AnalysisConfig::Correlate { name, .. }
            | AnalysisConfig::Fit { name, .. }
            | AnalysisConfig::Mixing { name, .. }
            | AnalysisConfig::Tensor { name, .. }
            | AnalysisConfig::Probe { name, .. } => name.as_deref(),
        }
    }

    pub fn times(&self) -> Option<&Times> {
        match self {
            AnalysisConfig::Correlate { times, .. }
            | AnalysisConfig::Fit { times, .. }
            | AnalysisConfig::Mixing { times, .. }
            | AnalysisConfig::Tensor { times, .. } => Some(times),
            AnalysisConfig::Probe { .. } => None,
        }
    }

    /// File stem of the analysis output.
    pub fn file_stem(&self, index: usize) -> String {
        match self.name() {
            Some(name) => name.to_string(),
            None => format!("{:02}_{}", index, self.kind()),
        }
    }
}

/// A signed rational read from a JSON number, an integer, or a string such
/// as `"3/10"` or `"0.3"`. Decimals are converted exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational(pub Ratio<i64>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot read {0:?} as an exact rational")]
pub struct RationalError(String);

impl FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RationalError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| err())?;
            let d: i64 = d.trim().parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            return Ok(Rational(Ratio::new(n, d)));
        }
        if t.contains(['e', 'E']) {
            return Err(err());
        }
        let (neg, digits) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 17 {
            return Err(err());
        }
        let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(err)?;
        let whole: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
        let part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
        let num = whole.checked_mul(den).and_then(|w| w.checked_add(part)).ok_or_else(err)?;
        Ok(Rational(Ratio::new(if neg { -num } else { num }, den)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Rational {
    /// The value as an unsigned rational, when nonnegative.
    pub fn unsigned(&self) -> Option<Ratio<u64>> {
        let (n, d) = (*self.0.numer(), *self.0.denom());
        (n >= 0 && d > 0).then(|| Ratio::new(n as u64, d as u64))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s.clone(),
            _ => return Err(serde::de::Error::custom("expected a number or a string like \"3/10\"")),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}
