//! Batch experiments on rank-one cut-and-stack constructions: JSON configs,
//! schedule building, correlation analyses and CSV/JSON reports.

pub mod analysis;
pub mod config;
pub mod locate;
pub mod manifest;
pub mod output;
pub mod schedule;
pub mod validate;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rankone_core::SpacerSchedule;

use crate::analysis::Lab;
use crate::config::{AnalysisConfig, ExperimentConfig};
use crate::manifest::{AnalysisEntry, Manifest, MarkerEntry, SpacerMassEntry, WallTimes, MANIFEST_FILE, MANIFEST_FORMAT};
use crate::output::{fmt_float, round_float, Table, STAGE_COLUMNS};
use crate::validate::Diagnostic;

pub use crate::config::Rational;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Core(#[from] rankone_core::Error),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl RunError {
    /// 2 for config problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Read { .. } | RunError::Parse { .. } | RunError::Invalid(_) => 2,
            _ => 1,
        }
    }
}

/// A parsed config together with its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub source: String,
    pub config: ExperimentConfig,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, RunError> {
    let source = fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config = ExperimentConfig::from_json(&source).map_err(|e| RunError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(LoadedConfig {
        path: path.to_path_buf(),
        source,
        config,
    })
}

/// Checks the config and builds its schedule; any diagnostic is an error.
pub fn prepare(loaded: &LoadedConfig) -> Result<SpacerSchedule, RunError> {
    let diags = validate::validate(&loaded.config, &loaded.source);
    if !diags.is_empty() {
        return Err(RunError::Invalid(diags));
    }
    let (_, schedule) = validate::check(&loaded.config);
    Ok(schedule.expect("valid configs build"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Per-stage table: cut count, height, spacer total and marker.
pub fn stage_table(schedule: &SpacerSchedule) -> Table {
    let mut t = Table::new("stages.csv".into(), STAGE_COLUMNS);
    let mass = schedule.spacer_mass_report();
    for (st, m) in schedule.stages().iter().zip(&mass) {
        let j = st.index();
        t.push(vec![
            j.to_string(),
            st.cuts().to_string(),
            schedule.height(j).unwrap_or(0).to_string(),
            st.spacer_total().to_string(),
            format!("{}/{}", m.fraction.numer(), m.fraction.denom()),
            schedule.marker(j).map(|m| m.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

fn ratio_f64(r: &num_rational::Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn base_manifest(config: &ExperimentConfig, schedule: &SpacerSchedule, threads: usize) -> Manifest {
    Manifest {
        format: MANIFEST_FORMAT,
        config: config.clone(),
        truncation: config.truncate_at,
        heights: schedule.heights().to_vec(),
        markers: schedule
            .markers()
            .iter()
            .map(|m| MarkerEntry { stage: m.stage, m_j: m.time })
            .collect(),
        spacer_mass: schedule
            .spacer_mass_report()
            .iter()
            .map(|m| SpacerMassEntry {
                stage: m.stage,
                fraction: format!("{}/{}", m.fraction.numer(), m.fraction.denom()),
                base_mass: format!("{}/{}", m.base_mass.numer(), m.base_mass.denom()),
                fraction_approx: round_float(ratio_f64(&m.fraction)),
            })
            .collect(),
        stages_file: "stages.csv".into(),
        analyses: Vec::new(),
        wall_times: WallTimes {
            build_s: 0.0,
            analyses_s: 0.0,
            total_s: 0.0,
        },
        threads,
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    }
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), RunError> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text + "\n").map_err(io_err(&path))
}

/// Options shared by `build` and `run`.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

fn apply_options(loaded: &mut LoadedConfig, opts: &RunOptions) -> PathBuf {
    if let Some(seed) = opts.seed {
        loaded.config.seed = seed;
    }
    opts.out.clone().unwrap_or_else(|| loaded.config.output.clone())
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, RunError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    Ok(b.build()?)
}

/// Builds the schedule and writes `stages.csv` and the manifest.
pub fn build(mut loaded: LoadedConfig, opts: &RunOptions) -> Result<Manifest, RunError> {
    let start = Instant::now();
    let out = apply_options(&mut loaded, opts);
    let schedule = prepare(&loaded)?;
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    stage_table(&schedule).write_in(&out)?;
    let mut manifest = base_manifest(&loaded.config, &schedule, 1);
    let t = start.elapsed().as_secs_f64();
    manifest.wall_times = WallTimes {
        build_s: t,
        analyses_s: 0.0,
        total_s: t,
    };
    write_manifest(&out, &manifest)?;
    Ok(manifest)
}

/// Builds the schedule, runs every analysis and writes all reports.
pub fn run(mut loaded: LoadedConfig, opts: &RunOptions) -> Result<Manifest, RunError> {
    let start = Instant::now();
    let out = apply_options(&mut loaded, opts);
    let schedule = prepare(&loaded)?;
    let build_s = start.elapsed().as_secs_f64();
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    stage_table(&schedule).write_in(&out)?;

    let pool = pool(opts.threads)?;
    let config = &loaded.config;
    let mut manifest = base_manifest(config, &schedule, pool.current_num_threads());
    let analyses_start = Instant::now();
    pool.install(|| -> Result<(), RunError> {
        let mut lab = Lab::new(&schedule, config.truncate_at);
        for (i, a) in config.analyses.iter().enumerate() {
            let t = Instant::now();
            let result = lab.run(i, a)?;
            for table in &result.tables {
                table.write_in(&out)?;
            }
            manifest.analyses.push(AnalysisEntry {
                index: i,
                kind: a.kind().into(),
                files: result.tables.iter().map(|t| t.file.clone()).collect(),
                rows: result.tables.first().map_or(0, |t| t.rows.len()),
                stage: analysis_stage(a),
                pairs: result.pairs,
                times: result.times,
                wall_time_s: t.elapsed().as_secs_f64(),
                summary: result.summary,
            });
        }
        Ok(())
    })?;
    manifest.wall_times = WallTimes {
        build_s,
        analyses_s: analyses_start.elapsed().as_secs_f64(),
        total_s: start.elapsed().as_secs_f64(),
    };
    write_manifest(&out, &manifest)?;
    Ok(manifest)
}

fn analysis_stage(a: &AnalysisConfig) -> Option<usize> {
    match a {
        AnalysisConfig::Correlate { pairs, .. } | AnalysisConfig::Fit { pairs, .. } | AnalysisConfig::Mixing { pairs, .. } => {
            Some(pairs.stage())
        }
        AnalysisConfig::Tensor { stage, .. } | AnalysisConfig::Probe { stage, .. } => Some(*stage),
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, RunError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Human-readable summary of a finished run.
pub fn report(manifest: &Manifest) -> String {
    let mut s = String::new();
    let c = &manifest.config;
    s.push_str(&format!(
        "recipe {} depth {} truncation J = {} (h_J = {}) seed {}\n",
        c.recipe.name(),
        c.depth,
        manifest.truncation,
        manifest.heights.get(manifest.truncation - 1).copied().unwrap_or(0),
        c.seed
    ));
    s.push_str(&format!("heights {:?}\n", manifest.heights));
    if !manifest.markers.is_empty() {
        let m: Vec<String> = manifest.markers.iter().map(|m| format!("m_{} = {}", m.stage, m.m_j)).collect();
        s.push_str(&format!("markers {}\n", m.join(", ")));
    }
    for a in &manifest.analyses {
        s.push_str(&format!(
            "[{}] {} -> {} ({} rows, {} pairs, {}s)\n",
            a.index,
            a.kind,
            a.files.join(", "),
            a.rows,
            a.pairs,
            fmt_float(a.wall_time_s)
        ));
        if let Some(fits) = a.summary.get("fits").and_then(|f| f.as_array()) {
            for f in fits {
                s.push_str(&format!("    j={} m={} {}\n", f["j"], f["m"], f["coefficients"]));
            }
        }
        for key in ["min_eigenvalue", "rank"] {
            if let Some(v) = a.summary.get(key) {
                s.push_str(&format!("    {key} = {v}\n"));
            }
        }
    }
    s.push_str(&format!(
        "wall time: build {}s, analyses {}s, total {}s\n",
        fmt_float(manifest.wall_times.build_s),
        fmt_float(manifest.wall_times.analyses_s),
        fmt_float(manifest.wall_times.total_s)
    ));
    s
}
