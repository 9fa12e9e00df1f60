//! Config diagnostics. Static checks run first; when they pass, the schedule
//! is built and every analysis is checked against it (stage ranges, level
//! ranges, shift windows).

use std::fmt;

use num_rational::Ratio;
use rankone_core::recipes::NabParams;
use rankone_core::SpacerSchedule;

use crate::config::{AnalysisConfig, ExperimentConfig, PairsConfig, PerStageValue, RecipeConfig, Times};
use crate::locate::LineIndex;
use crate::schedule::{build_schedule, nab_recipe};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Dotted path of the offending field, e.g. `analyses[1].pairs.stage`.
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Default)]
struct Sink(Vec<Diagnostic>);

impl Sink {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            path: path.into(),
            line: None,
            message: message.into(),
        });
    }
}

/// All violations in `config`; empty when it is valid. The schedule is
/// returned when it could be built.
pub fn check(config: &ExperimentConfig) -> (Vec<Diagnostic>, Option<SpacerSchedule>) {
    let mut sink = Sink::default();
    check_static(config, &mut sink);
    if !sink.0.is_empty() {
        return (sink.0, None);
    }
    let schedule = match build_schedule(&config.recipe, config.depth, config.seed) {
        Ok(s) => s,
        Err(e) => {
            sink.push("recipe", e.to_string());
            return (sink.0, None);
        }
    };
    for (i, a) in config.analyses.iter().enumerate() {
        check_against_schedule(&format!("analyses[{i}]"), a, config.truncate_at, &schedule, &mut sink);
    }
    (sink.0, Some(schedule))
}

/// [`check`], with line numbers resolved against the config source.
pub fn validate(config: &ExperimentConfig, source: &str) -> Vec<Diagnostic> {
    let index = LineIndex::new(source);
    let (mut diags, _) = check(config);
    for d in &mut diags {
        d.line = index.line(&d.path);
    }
    diags
}

fn positive_list(path: &str, v: &PerStageValue, min: u64, what: &str, sink: &mut Sink) {
    let values = v.values();
    if values.is_empty() {
        sink.push(path, "per-stage list is empty");
    }
    for (k, &x) in values.iter().enumerate() {
        if x < min {
            let at = match v {
                PerStageValue::Scalar(_) => path.to_string(),
                PerStageValue::List(_) => format!("{path}[{k}]"),
            };
            sink.push(at, format!("{what} must be at least {min}, got {x}"));
        }
    }
}

fn check_recipe(recipe: &RecipeConfig, sink: &mut Sink) {
    match recipe {
        RecipeConfig::Explicit(c) => {
            for (k, s) in c.s_j.iter().enumerate() {
                if s.len() < 2 {
                    sink.push(format!("recipe.explicit.s_j[{k}]"), format!("a stage needs r_j >= 2 spacers, got {}", s.len()));
                }
            }
        }
        RecipeConfig::Ornstein(c) => {
            positive_list("recipe.ornstein.H_j", &c.h_j, 1, "H_j", sink);
            positive_list("recipe.ornstein.r_j", &c.r_j, 2, "r_j", sink);
        }
        RecipeConfig::Staircase(c) => positive_list("recipe.staircase.r_j", &c.r_j, 2, "r_j", sink),
        RecipeConfig::Lemma1(c) => {
            if c.s < 1 || c.s > c.n {
                sink.push(
                    "recipe.lemma1.s",
                    format!("the (N,s)-construction requires 1 <= s <= N, got s = {}, N = {}", c.s, c.n),
                );
            }
            let eps = c.epsilon.0;
            if eps <= Ratio::from_integer(0) || eps >= Ratio::from_integer(1) {
                sink.push("recipe.lemma1.epsilon", format!("epsilon must lie strictly between 0 and 1, got {}", c.epsilon));
            }
            positive_list("recipe.lemma1.L_j", &c.l_j, 1, "L_j", sink);
            positive_list("recipe.lemma1.H_j", &c.h_j, 1, "H_j", sink);
        }
        RecipeConfig::Nab(c) => {
            if c.n < 2 {
                sink.push("recipe.nab.n", format!("n must exceed 1, got {}", c.n));
            }
            for (field, v) in [("a", c.a), ("b", c.b)] {
                if v.0 <= Ratio::from_integer(0) {
                    sink.push(format!("recipe.nab.{field}"), format!("{field} must be positive, got {v}"));
                }
            }
            if c.a.0 + c.b.0 >= Ratio::from_integer(1) {
                sink.push("recipe.nab.b", format!("a + b must be below 1, got {}", c.a.0 + c.b.0));
            }
            if c.h_1 < 1 {
                sink.push("recipe.nab.h_1", "h_1 must be at least 1 so that the first H_j is positive");
            }
            positive_list("recipe.nab.staircase_r_j", &c.staircase_r_j, 2, "staircase r_j", sink);
            if sink.0.is_empty() {
                if let Ok(recipe) = nab_recipe(c) {
                    let values = c.r_j.values();
                    for (k, &r) in values.iter().enumerate() {
                        let p = NabParams {
                            n: recipe.n,
                            a: recipe.a,
                            b: recipe.b,
                            cuts: r as usize,
                            mean: 1,
                            divisibility: recipe.divisibility,
                        };
                        if let Err(e) = p.parts() {
                            let at = match c.r_j {
                                PerStageValue::Scalar(_) => "recipe.nab.r_j".to_string(),
                                PerStageValue::List(_) => format!("recipe.nab.r_j[{k}]"),
                            };
                            sink.push(at, e.to_string());
                        }
                    }
                }
            }
        }
    }
}

/// Stages that carry a marker `m_j` for this recipe.
fn marker_stages(recipe: &RecipeConfig, depth: usize) -> Vec<usize> {
    match recipe {
        RecipeConfig::Lemma1(_) => (1..=depth).collect(),
        RecipeConfig::Nab(_) => (2..=depth).step_by(2).collect(),
        _ => Vec::new(),
    }
}

fn check_times(path: &str, t: &Times, config: &ExperimentConfig, sink: &mut Sink) {
    match (&t.m, &t.stages) {
        (Some(_), Some(_)) => sink.push(format!("{path}.m"), "give either m or stages, not both"),
        (None, None) => sink.push(path, "an analysis needs m or stages"),
        (Some(_), None) => {
            if t.multiples.is_some() {
                sink.push(format!("{path}.multiples"), "multiples apply to stages, not to explicit m");
            }
        }
        (None, Some(stages)) => {
            let allowed = marker_stages(&config.recipe, config.depth);
            for (k, &j) in stages.iter().enumerate() {
                if !allowed.contains(&j) {
                    sink.push(
                        format!("{path}.stages[{k}]"),
                        format!("stage {j} has no special time m_j in a {} recipe of depth {}", config.recipe.name(), config.depth),
                    );
                } else if j >= config.truncate_at {
                    sink.push(
                        format!("{path}.stages[{k}]"),
                        format!("stage {j} is not below truncate_at = {}", config.truncate_at),
                    );
                }
            }
            if stages.is_empty() {
                sink.push(format!("{path}.stages"), "no stages listed");
            }
        }
    }
}

fn check_stage(path: &str, stage: usize, config: &ExperimentConfig, sink: &mut Sink) {
    if stage < 1 || stage > config.truncate_at {
        sink.push(path, format!("stage {stage} is outside 1..={}", config.truncate_at));
    }
}

fn check_exponents(path: &str, e: &[u64], sink: &mut Sink) {
    if e.is_empty() {
        sink.push(path, "no exponents listed");
    }
    for (i, k) in e.iter().enumerate() {
        if *k == 0 {
            sink.push(format!("{path}[{i}]"), "exponents must be positive");
        }
        if e[..i].contains(k) {
            sink.push(format!("{path}[{i}]"), format!("exponent {k} repeated"));
        }
    }
}

fn check_pairs(path: &str, p: &PairsConfig, config: &ExperimentConfig, sink: &mut Sink) {
    check_stage(&format!("{path}.stage"), p.stage(), config, sink);
    match p {
        PairsConfig::Single { cap, .. } if *cap == 0 => sink.push(format!("{path}.cap"), "cap must be positive"),
        PairsConfig::Blocks { blocks, .. } if *blocks == 0 => sink.push(format!("{path}.blocks"), "blocks must be positive"),
        PairsConfig::Explicit { sets, .. } if sets.is_empty() => sink.push(format!("{path}.sets"), "no pairs listed"),
        _ => {}
    }
}

fn check_static(config: &ExperimentConfig, sink: &mut Sink) {
    if config.depth < 1 {
        sink.push("depth", "depth must be at least 1");
    }
    if config.truncate_at < 1 || config.truncate_at > config.depth {
        sink.push(
            "truncate_at",
            format!("truncate_at must lie in 1..=depth, got {} with depth {}", config.truncate_at, config.depth),
        );
        return;
    }
    check_recipe(&config.recipe, sink);
    for (i, a) in config.analyses.iter().enumerate() {
        let path = format!("analyses[{i}]");
        if let Some(t) = a.times() {
            check_times(&path, t, config, sink);
        }
        match a {
            AnalysisConfig::Correlate { pairs, .. } | AnalysisConfig::Mixing { pairs, .. } => {
                check_pairs(&format!("{path}.pairs"), pairs, config, sink)
            }
            AnalysisConfig::Fit { pairs, .. } => check_pairs(&format!("{path}.pairs"), pairs, config, sink),
            AnalysisConfig::Tensor { exponents, stage, .. } => {
                check_exponents(&format!("{path}.exponents"), exponents, sink);
                check_stage(&format!("{path}.stage"), *stage, config, sink);
            }
            AnalysisConfig::Probe { exponents, stage, size, step, .. } => {
                check_exponents(&format!("{path}.exponents"), exponents, sink);
                check_stage(&format!("{path}.stage"), *stage, config, sink);
                if *size == 0 {
                    sink.push(format!("{path}.M"), "M must be positive");
                }
                if *step == 0 {
                    sink.push(format!("{path}.step"), "step must be positive");
                }
            }
        }
    }
    let mut stems: Vec<String> = config.analyses.iter().enumerate().map(|(i, a)| a.file_stem(i)).collect();
    stems.sort();
    for w in stems.windows(2) {
        if w[0] == w[1] {
            sink.push("analyses", format!("two analyses write {}.csv", w[0]));
        }
    }
}

/// Powers `m` an analysis evaluates, with the stage each belongs to.
pub fn resolve_times(t: &Times, schedule: &SpacerSchedule, fallback_stage: usize) -> Vec<(usize, i64)> {
    match (&t.m, &t.stages) {
        (Some(ms), _) => ms.iter().map(|&m| (fallback_stage, m)).collect(),
        (None, Some(stages)) => {
            let multiples = t.multiples.clone().unwrap_or_else(|| vec![1]);
            let mut out = Vec::new();
            for &j in stages {
                let mj = schedule.marker(j).unwrap_or(0) as i64;
                for &k in &multiples {
                    out.push((j, k.saturating_mul(mj)));
                }
            }
            out
        }
        (None, None) => Vec::new(),
    }
}

fn check_levels(path: &str, stage: usize, levels: &[u64], schedule: &SpacerSchedule, sink: &mut Sink) {
    let h = schedule.height(stage).unwrap_or(0);
    for (i, &l) in levels.iter().enumerate() {
        if l > h {
            sink.push(format!("{path}[{i}]"), format!("level {l} exceeds h_{stage} = {h}"));
        }
    }
}

fn check_against_schedule(path: &str, a: &AnalysisConfig, truncation: usize, schedule: &SpacerSchedule, sink: &mut Sink) {
    let h_j = schedule.height(truncation).unwrap_or(0);
    let window = |sink: &mut Sink, field: String, shift: i128| {
        if shift.unsigned_abs() > u128::from(h_j) {
            sink.push(field, format!("shift {shift} leaves the window |m| <= h_J = {h_j}"));
        }
    };
    if let Some(t) = a.times() {
        let field = if t.m.is_some() { format!("{path}.m") } else { format!("{path}.multiples") };
        let reach: u64 = match a {
            AnalysisConfig::Tensor { exponents, .. } => exponents.iter().copied().max().unwrap_or(1),
            _ => 1,
        };
        for (_, m) in resolve_times(t, schedule, 0) {
            window(sink, field.clone(), i128::from(m) * i128::from(reach));
        }
    }
    match a {
        AnalysisConfig::Correlate { pairs, .. } | AnalysisConfig::Mixing { pairs, .. } | AnalysisConfig::Fit { pairs, .. } => {
            let ppath = format!("{path}.pairs");
            match pairs {
                PairsConfig::Blocks { stage, blocks } => {
                    let levels = schedule.height(*stage).unwrap_or(0) + 1;
                    if *blocks as u64 > levels {
                        sink.push(format!("{ppath}.blocks"), format!("tower {stage} has only {levels} levels"));
                    }
                }
                PairsConfig::Explicit { stage, sets } => {
                    for (k, (x, y)) in sets.iter().enumerate() {
                        check_levels(&format!("{ppath}.sets[{k}][0]"), *stage, x, schedule, sink);
                        check_levels(&format!("{ppath}.sets[{k}][1]"), *stage, y, schedule, sink);
                    }
                }
                PairsConfig::Single { .. } => {}
            }
            if let AnalysisConfig::Fit { k_max, .. } = a {
                let family = match pairs {
                    PairsConfig::Single { stage, cap } => {
                        let l = schedule.height(*stage).unwrap_or(0) as usize + 1;
                        (l * l).min(*cap)
                    }
                    PairsConfig::Blocks { blocks, .. } => blocks * blocks,
                    PairsConfig::Explicit { sets, .. } => sets.len(),
                };
                if family < 2 * k_max + 2 {
                    sink.push(
                        format!("{ppath}"),
                        format!("{family} pairs cannot determine {} basis coefficients", 2 * k_max + 2),
                    );
                }
            }
        }
        AnalysisConfig::Tensor { stage, levels, .. } => {
            if let Some(l) = levels {
                check_levels(&format!("{path}.levels"), *stage, l, schedule, sink);
            }
        }
        AnalysisConfig::Probe { exponents, stage, levels, size, step, .. } => {
            if let Some(l) = levels {
                check_levels(&format!("{path}.levels"), *stage, l, schedule, sink);
            }
            let kmax = exponents.iter().copied().max().unwrap_or(1);
            let reach = i128::from(kmax) * i128::from(*step) * *size as i128;
            window(sink, format!("{path}.M"), reach);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    const STAIRCASE: &str = r#"{
  "recipe": {"staircase": {"r_j": 3}},
  "depth": 3,
  "truncate_at": 3,
  "analyses": [{"kind": "correlate", "m": [0, 1], "pairs": {"family": "single", "stage": 1}}]
}"#;

    #[test]
    fn valid_config_has_no_diagnostics() {
        assert!(validate(&parse(STAIRCASE), STAIRCASE).is_empty());
    }

    #[test]
    fn truncation_beyond_depth_names_the_field() {
        let text = STAIRCASE.replace("\"truncate_at\": 3", "\"truncate_at\": 4");
        let d = validate(&parse(&text), &text);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "truncate_at");
        assert_eq!(d[0].line, Some(4));
    }

    #[test]
    fn lemma1_with_s_above_n_is_reported() {
        let text = r#"{"recipe": {"lemma1": {"N": 3, "s": 5, "L_j": 1, "H_j": 2, "epsilon": 0.5}}, "depth": 2, "truncate_at": 2}"#;
        let d = validate(&parse(text), text);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("1 <= s <= N"), "{}", d[0]);
    }

    #[test]
    fn negative_epsilon_is_reported() {
        let text = r#"{"recipe": {"lemma1": {"N": 3, "s": 2, "L_j": 1, "H_j": 2, "epsilon": -0.5}}, "depth": 2, "truncate_at": 2}"#;
        let d = validate(&parse(text), text);
        assert_eq!(d[0].path, "recipe.lemma1.epsilon");
    }

    #[test]
    fn out_of_window_shift_is_reported() {
        let text = STAIRCASE.replace("[0, 1]", "[0, 100000]");
        let d = validate(&parse(&text), &text);
        assert_eq!(d[0].path, "analyses[0].m");
        assert_eq!(d[0].line, Some(5));
    }

    #[test]
    fn marker_stages_must_exist() {
        let text = STAIRCASE.replace("\"m\": [0, 1]", "\"stages\": [1]");
        let d = validate(&parse(&text), &text);
        assert_eq!(d[0].path, "analyses[0].stages[0]");
    }

    #[test]
    fn nab_cut_counts_are_checked_per_stage() {
        let text = r#"{"recipe": {"nab": {"n": 2, "a": 0.3, "b": 0.3, "r_j": [4, 2], "staircase_r_j": 2}}, "depth": 4, "truncate_at": 4}"#;
        let d = validate(&parse(text), text);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "recipe.nab.r_j[1]");
    }
}
