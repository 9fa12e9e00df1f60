//! Executes analysis blocks against a built schedule.
//!
//! Every correlation reduces to autocorrelation counts `C(d)` of one tower's
//! offsets. Each block first gathers the displacements it needs, counts the
//! missing ones in parallel and stores them; evaluation then runs
//! sequentially from the table, so results do not depend on the thread count.

use std::collections::{BTreeMap, BTreeSet};

use rankone_core::lab::{
    block_pairs, cyclicity_probe, fit_samples, fit_weak_limit, mixing_profile, single_level_pairs, tensor_correlation,
    Correlate, LevelPair, StageCorrelator, TensorQuery,
};
use rankone_core::{LevelSet, Result, SpacerSchedule};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{AnalysisConfig, PairsConfig};
use crate::output::{
    fmt_float, fmt_measure, round_float, Table, CORRELATION_COLUMNS, FIT_COLUMNS, MIXING_COLUMNS, PROBE_COLUMNS,
    TENSOR_COLUMNS,
};
use crate::validate::resolve_times;

/// Result of one analysis block.
#[derive(Debug, Clone)]
pub struct AnalysisOutput {
    pub tables: Vec<Table>,
    /// `(j, m)` of every evaluated time, in row order.
    pub times: Vec<(usize, i64)>,
    pub pairs: usize,
    pub summary: Value,
}

/// Correlators over one truncation, one per test-set stage, sharing count
/// tables across blocks.
pub struct Lab<'a> {
    schedule: &'a SpacerSchedule,
    truncation: usize,
    correlators: BTreeMap<usize, StageCorrelator<'a>>,
}

impl<'a> Lab<'a> {
    pub fn new(schedule: &'a SpacerSchedule, truncation: usize) -> Self {
        Lab {
            schedule,
            truncation,
            correlators: BTreeMap::new(),
        }
    }

    pub fn correlator(&mut self, stage: usize) -> Result<&mut StageCorrelator<'a>> {
        if !self.correlators.contains_key(&stage) {
            let c = StageCorrelator::new(self.schedule, stage, self.truncation)?;
            self.correlators.insert(stage, c);
        }
        Ok(self.correlators.get_mut(&stage).expect("inserted"))
    }

    /// Makes sure `C(d)` is stored for every `(m, A, B)` in `queries`.
    fn warm<'q, I>(&mut self, stage: usize, queries: I) -> Result<()>
    where
        I: IntoIterator<Item = (i64, &'q LevelSet, &'q LevelSet)>,
    {
        let c = self.correlator(stage)?;
        let mut needed = BTreeSet::new();
        for (m, a, b) in queries {
            c.check_window(i128::from(m))?;
            needed.extend(c.displacements(m, a, b)?);
        }
        let shared: &StageCorrelator = c;
        let counts: Vec<(u64, u64)> = needed
            .into_par_iter()
            .map(|d| (d, shared.count_displacement(d)))
            .collect();
        c.insert_counts(counts);
        Ok(())
    }

    pub fn run(&mut self, index: usize, config: &AnalysisConfig) -> Result<AnalysisOutput> {
        let stem = config.file_stem(index);
        match config {
            AnalysisConfig::Correlate { times, pairs, .. } => {
                let family = build_pairs(self.schedule, pairs)?;
                let times = resolve_times(times, self.schedule, pairs.stage());
                self.correlate(stem, pairs.stage(), &times, &family)
            }
            AnalysisConfig::Fit { times, pairs, k_max, .. } => {
                let family = build_pairs(self.schedule, pairs)?;
                let times = resolve_times(times, self.schedule, pairs.stage());
                self.fit(stem, pairs.stage(), &times, &family, *k_max)
            }
            AnalysisConfig::Mixing { times, pairs, .. } => {
                let family = build_pairs(self.schedule, pairs)?;
                let times = resolve_times(times, self.schedule, pairs.stage());
                self.mixing(stem, pairs.stage(), &times, &family)
            }
            AnalysisConfig::Tensor { times, exponents, stage, levels, .. } => {
                let f = factor_set(self.schedule, *stage, levels.as_deref());
                let times = resolve_times(times, self.schedule, *stage);
                self.tensor(stem, *stage, &times, exponents, &f)
            }
            AnalysisConfig::Probe { exponents, stage, levels, size, step, .. } => {
                let f = factor_set(self.schedule, *stage, levels.as_deref());
                self.probe(stem, *stage, exponents, &f, *size, *step)
            }
        }
    }

    fn correlate(&mut self, stem: String, stage: usize, times: &[(usize, i64)], family: &[LevelPair]) -> Result<AnalysisOutput> {
        self.warm(stage, times.iter().flat_map(|&(_, m)| family.iter().map(move |(a, b)| (m, a, b))))?;
        let c = self.correlator(stage)?;
        let mut table = Table::new(format!("{stem}.csv"), CORRELATION_COLUMNS);
        for &(j, m) in times {
            for (p, (a, b)) in family.iter().enumerate() {
                let v = c.correlation(m, a, b)?;
                table.push(vec![
                    j.to_string(),
                    c.truncation().to_string(),
                    m.to_string(),
                    p.to_string(),
                    v.value.count.to_string(),
                    v.value.total.to_string(),
                    fmt_measure(&v.error_bound),
                ]);
            }
        }
        Ok(AnalysisOutput {
            tables: vec![table],
            times: times.to_vec(),
            pairs: family.len(),
            summary: json!({ "rows": times.len() * family.len() }),
        })
    }

    fn fit(
        &mut self,
        stem: String,
        stage: usize,
        times: &[(usize, i64)],
        family: &[LevelPair],
        k_max: usize,
    ) -> Result<AnalysisOutput> {
        let k = k_max as i64;
        let shifts: Vec<i64> = times.iter().map(|&(_, m)| m).chain(-k..=k).collect();
        self.warm(stage, shifts.iter().flat_map(|&m| family.iter().map(move |(a, b)| (m, a, b))))?;
        let c = self.correlator(stage)?;
        let big_j = c.truncation().to_string();
        let mut coefficients = Table::new(format!("{stem}.csv"), FIT_COLUMNS);
        let mut samples = Table::new(format!("{stem}_samples.csv"), CORRELATION_COLUMNS);
        let mut fits = Vec::new();
        for &(j, m) in times {
            for (p, (a, b)) in family.iter().enumerate() {
                let v = c.correlation(m, a, b)?;
                samples.push(vec![
                    j.to_string(),
                    big_j.clone(),
                    m.to_string(),
                    p.to_string(),
                    v.value.count.to_string(),
                    v.value.total.to_string(),
                    fmt_measure(&v.error_bound),
                ]);
            }
            let fit = fit_weak_limit(&fit_samples(&*c, m, family, k_max)?, k_max)?;
            let bound = fmt_measure(&c.error_bound(m));
            for (label, coef) in fit.labels() {
                coefficients.push(vec![
                    j.to_string(),
                    big_j.clone(),
                    m.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    bound.clone(),
                    label,
                    fmt_float(coef),
                    fmt_float(fit.residual),
                    fmt_float(fit.relative_residual),
                    fit.samples.to_string(),
                ]);
            }
            let coefs: serde_json::Map<String, Value> = fit.labels().map(|(l, c)| (l, json!(round_float(c)))).collect();
            fits.push(json!({
                "j": j,
                "m": m,
                "coefficients": coefs,
                "residual": round_float(fit.residual),
                "relative_residual": round_float(fit.relative_residual),
            }));
        }
        Ok(AnalysisOutput {
            tables: vec![coefficients, samples],
            times: times.to_vec(),
            pairs: family.len(),
            summary: json!({ "K_max": k_max, "fits": fits }),
        })
    }

    fn mixing(&mut self, stem: String, stage: usize, times: &[(usize, i64)], family: &[LevelPair]) -> Result<AnalysisOutput> {
        self.warm(stage, times.iter().flat_map(|&(_, m)| family.iter().map(move |(a, b)| (m, a, b))))?;
        let c = self.correlator(stage)?;
        let ms: Vec<i64> = times.iter().map(|&(_, m)| m).collect();
        let rows = mixing_profile(&*c, &ms, family)?;
        let mut table = Table::new(format!("{stem}.csv"), MIXING_COLUMNS);
        let mut summary = Vec::new();
        for (&(j, m), row) in times.iter().zip(&rows) {
            table.push(vec![
                j.to_string(),
                c.truncation().to_string(),
                m.to_string(),
                family.len().to_string(),
                fmt_float(row.sup_deviation),
                row.min_ratio.map(fmt_float).unwrap_or_default(),
                fmt_measure(&c.error_bound(m)),
            ]);
            summary.push(json!({
                "j": j,
                "m": m,
                "sup_deviation": round_float(row.sup_deviation),
                "min_ratio": row.min_ratio.map(round_float),
            }));
        }
        Ok(AnalysisOutput {
            tables: vec![table],
            times: times.to_vec(),
            pairs: family.len(),
            summary: json!({ "profile": summary }),
        })
    }

    fn tensor(
        &mut self,
        stem: String,
        stage: usize,
        times: &[(usize, i64)],
        exponents: &[u64],
        f: &LevelSet,
    ) -> Result<AnalysisOutput> {
        let mut shifts = Vec::new();
        for &(_, m) in times {
            for &k in exponents {
                shifts.push(m.saturating_mul(k as i64));
            }
        }
        self.warm(stage, shifts.iter().map(|&m| (m, f, f)))?;
        let c = self.correlator(stage)?;
        let label = exponents.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
        let mut table = Table::new(format!("{stem}.csv"), TENSOR_COLUMNS);
        let mut summary = Vec::new();
        for &(j, m) in times {
            let q = TensorQuery {
                exponents: exponents.to_vec(),
                m,
                factors: vec![(f.clone(), f.clone()); exponents.len()],
            };
            let v = tensor_correlation(&*c, &q)?;
            table.push(vec![
                j.to_string(),
                c.truncation().to_string(),
                m.to_string(),
                label.clone(),
                fmt_float(v.value),
                v.factors.iter().map(|&x| fmt_float(x)).collect::<Vec<_>>().join(" "),
                fmt_float(v.error_bound),
            ]);
            summary.push(json!({ "j": j, "m": m, "value": round_float(v.value), "error_bound": round_float(v.error_bound) }));
        }
        Ok(AnalysisOutput {
            tables: vec![table],
            times: times.to_vec(),
            pairs: 1,
            summary: json!({ "exponents": exponents, "levels": f.levels(), "values": summary }),
        })
    }

    fn probe(
        &mut self,
        stem: String,
        stage: usize,
        exponents: &[u64],
        f: &LevelSet,
        size: usize,
        step: u64,
    ) -> Result<AnalysisOutput> {
        let mut lags = Vec::new();
        for lag in 0..size as i64 {
            for &k in exponents {
                lags.push(k as i64 * lag * step as i64);
            }
        }
        let kmax = exponents.iter().copied().max().unwrap_or(1);
        if u128::from(kmax) * u128::from(step) * size as u128 <= u128::from(self.schedule.height(self.truncation).unwrap_or(0)) {
            self.warm(stage, lags.iter().map(|&m| (m, f, f)))?;
        }
        let c = self.correlator(stage)?;
        let probe = cyclicity_probe(&*c, exponents, f, size, step)?;
        let mut table = Table::new(format!("{stem}.csv"), PROBE_COLUMNS);
        for (p, row) in probe.gram.iter().enumerate() {
            for (q, &g) in row.iter().enumerate() {
                table.push(vec![c.truncation().to_string(), p.to_string(), q.to_string(), fmt_float(g)]);
            }
        }
        Ok(AnalysisOutput {
            tables: vec![table],
            times: Vec::new(),
            pairs: 1,
            summary: json!({
                "exponents": exponents,
                "levels": f.levels(),
                "M": size,
                "step": step,
                "eigenvalues": probe.eigenvalues.iter().map(|&e| round_float(e)).collect::<Vec<_>>(),
                "min_eigenvalue": round_float(probe.min_eigenvalue),
                "rank": probe.rank,
            }),
        })
    }
}

pub fn build_pairs(schedule: &SpacerSchedule, pairs: &PairsConfig) -> Result<Vec<LevelPair>> {
    match pairs {
        PairsConfig::Single { stage, cap } => single_level_pairs(schedule, *stage, *cap),
        PairsConfig::Blocks { stage, blocks } => block_pairs(schedule, *stage, *blocks),
        PairsConfig::Explicit { stage, sets } => Ok(sets
            .iter()
            .map(|(a, b)| (LevelSet::new(*stage, a.iter().copied()), LevelSet::new(*stage, b.iter().copied())))
            .collect()),
    }
}

/// The given levels, or the lower half of tower `stage`.
pub fn factor_set(schedule: &SpacerSchedule, stage: usize, levels: Option<&[u64]>) -> LevelSet {
    match levels {
        Some(l) => LevelSet::new(stage, l.iter().copied()),
        None => {
            let h = schedule.height(stage).unwrap_or(0);
            LevelSet::new(stage, 0..(h + 1) / 2)
        }
    }
}
