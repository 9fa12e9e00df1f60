//! The JSON manifest written next to the CSV outputs.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    /// The config as run, after the `--seed` override.
    pub config: ExperimentConfig,
    /// `J`.
    pub truncation: usize,
    /// `h_1, ..., h_{depth+1}`.
    pub heights: Vec<u64>,
    pub markers: Vec<MarkerEntry>,
    pub spacer_mass: Vec<SpacerMassEntry>,
    pub stages_file: String,
    pub analyses: Vec<AnalysisEntry>,
    pub wall_times: WallTimes,
    pub threads: usize,
    /// Seconds since the Unix epoch at completion.
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerEntry {
    pub stage: usize,
    pub m_j: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacerMassEntry {
    pub stage: usize,
    /// Exact `sum_i s_j(i) / (h_{j+1} + 1)` as `num/den`.
    pub fraction: String,
    /// Exact mass of tower 1 inside tower `j + 1`.
    pub base_mass: String,
    pub fraction_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisEntry {
    pub index: usize,
    pub kind: String,
    pub files: Vec<String>,
    pub rows: usize,
    /// Test-set stage.
    pub stage: Option<usize>,
    /// Size of the pair family.
    pub pairs: usize,
    /// `(j, m)` of each evaluated time.
    pub times: Vec<(usize, i64)>,
    pub wall_time_s: f64,
    pub summary: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallTimes {
    pub build_s: f64,
    pub analyses_s: f64,
    pub total_s: f64,
}
