//! End-to-end acceptance checks. Runs as a plain binary (`harness = false`)
//! so that every criterion prints its PASS/FAIL line; exits nonzero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankone::manifest::Manifest;
use rankone::{load_config, RunOptions};
use rankone_core::lab::{correlation, CorrelationQuery, TriangularKernel};
use rankone_core::oracle::{oracle_correlation, unroll};
use rankone_core::recipes::{ornstein_draws, OrnsteinParams};
use rankone_core::{LevelSet, SpacerSchedule};
use serde_json::Value;

const NAB_CONFIG: &str = "nab_n2.json";
const LEMMA1_CONFIG: &str = "lemma1_n5_s3.json";
const LEMMA1_S2_CONFIG: &str = "lemma1_n5_s2.json";

/// Smallest Gram eigenvalue of the probe on the nab schedule, as last recorded.
const PROBE_MIN_EIGENVALUE_BASELINE: f64 = 0.0132725440481;

#[derive(Default)]
struct Checks {
    lines: Vec<String>,
    failed: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed += 1;
        }
        self.lines.push(format!("{} {}", if ok { "ok  " } else { "FAIL" }, what.into()));
    }

    fn within(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.check((value - target).abs() <= tol, format!("{label} = {value:.6} (target {target} ± {tol})"));
    }

    fn budget(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            elapsed < limit,
            format!("runtime {:.3}s < {}s", elapsed.as_secs_f64(), limit.as_secs_f64()),
        );
    }
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_config(name: &str, out: &Path, threads: Option<usize>) -> Manifest {
    let loaded = load_config(&config_path(name)).expect("config loads");
    let opts = RunOptions {
        out: Some(out.to_path_buf()),
        seed: None,
        threads,
    };
    rankone::run(loaded, &opts).expect("run succeeds")
}

fn summary<'a>(manifest: &'a Manifest, name: &str) -> &'a Value {
    let i = manifest
        .config
        .analyses
        .iter()
        .position(|a| a.name() == Some(name))
        .unwrap_or_else(|| panic!("analysis {name} missing"));
    &manifest.analyses[i].summary
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

/// The last two marker stages whose special time is evaluated below `J`.
fn last_two_marker_stages(manifest: &Manifest) -> Vec<u64> {
    let mut stages: Vec<u64> = manifest
        .markers
        .iter()
        .map(|m| m.stage as u64)
        .filter(|&j| (j as usize) < manifest.truncation)
        .collect();
    stages.drain(..stages.len().saturating_sub(2));
    stages
}

fn fits_by_stage(s: &Value) -> BTreeMap<(u64, u64), &Value> {
    s["fits"]
        .as_array()
        .expect("fits")
        .iter()
        .map(|f| ((f["j"].as_u64().unwrap(), f["m"].as_u64().unwrap()), f))
        .collect()
}

fn random_schedule(rng: &mut ChaCha8Rng, max_cuts: usize, max_spacer: u64, max_depth: usize) -> SpacerSchedule {
    let depth = rng.random_range(1..=max_depth);
    let mut s = SpacerSchedule::new(rng.random_range(0..4));
    for _ in 0..depth {
        let cuts = rng.random_range(2..=max_cuts);
        let spacers = (0..cuts).map(|_| rng.random_range(0..=max_spacer)).collect();
        s.push_stage(cuts, spacers).expect("stage fits");
    }
    s
}

fn heights_follow_recursion() -> Checks {
    let mut c = Checks::default();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    for _ in 0..1000 {
        let s = random_schedule(&mut rng, 8, 20, 8);
        let mut h = s.initial_height();
        for (k, st) in s.stages().iter().enumerate() {
            h = (h + 1) * st.cuts() as u64 + st.spacers().iter().sum::<u64>() - 1;
            if s.height(k + 2) != Some(h) {
                bad += 1;
            }
        }
    }
    c.check(bad == 0, format!("1000 schedules, {bad} height mismatches"));
    c.budget(start.elapsed(), Duration::from_secs(5));
    c
}

fn random_set(rng: &mut ChaCha8Rng, s: &SpacerSchedule, stage: usize) -> LevelSet {
    let h = s.height(stage).unwrap();
    let n = rng.random_range(0..=(h + 1).min(8));
    LevelSet::new(stage, (0..n).map(|_| rng.random_range(0..=h)))
}

fn oracle_equivalence() -> Checks {
    let mut c = Checks::default();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut schedules, mut queries, mut mismatches) = (0, 0, 0);
    while schedules < 100 {
        let s = random_schedule(&mut rng, 6, 8, 6);
        let j = s.last_tower();
        if s.height(j).unwrap() > 10_000 {
            continue;
        }
        schedules += 1;
        let tracked: Vec<usize> = (1..=j).collect();
        let flat = unroll(&s, j, &tracked).unwrap();
        let hj = s.height(j).unwrap() as i64;
        for _ in 0..50 {
            let (sa, sb) = (rng.random_range(1..=j), rng.random_range(1..=j));
            let a = random_set(&mut rng, &s, sa);
            let b = random_set(&mut rng, &s, sb);
            let m = rng.random_range(-hj..=hj);
            let q = CorrelationQuery {
                m,
                a: a.clone(),
                b: b.clone(),
                truncation: j,
            };
            let exact = correlation(&s, &q).unwrap().value.ratio();
            let brute = oracle_correlation(&flat, m, &a, &b).unwrap().ratio();
            queries += 1;
            if exact != brute {
                mismatches += 1;
            }
        }
    }
    c.check(
        mismatches == 0,
        format!("{schedules} schedules, {queries} queries, {mismatches} mismatches"),
    );
    c.budget(start.elapsed(), Duration::from_secs(60));
    c
}

fn triangular_kernel() -> Checks {
    let mut c = Checks::default();
    let start = Instant::now();
    let (mut bad_total, mut asymmetric) = (0, 0);
    for h in 0..=1000u64 {
        let k = TriangularKernel::new(h);
        if k.total() != Ratio::from_integer(1) {
            bad_total += 1;
        }
        let h = h as i64;
        if (1..=h + 1).any(|n| k.weight(n) != k.weight(-n)) {
            asymmetric += 1;
        }
    }
    c.check(bad_total == 0, format!("sum of weights == 1 for H = 0..1000 ({bad_total} failures)"));
    c.check(asymmetric == 0, format!("c(n) == c(-n) ({asymmetric} failures)"));
    c.budget(start.elapsed(), Duration::from_secs(1));
    c
}

fn ornstein_statistics() -> Checks {
    let mut c = Checks::default();
    let (mean, cuts) = (50u64, 10_000usize);
    let d = ornstein_draws(&OrnsteinParams {
        mean,
        cuts,
        seed: 7,
        stream: 1,
    })
    .unwrap();
    let max = d.spacers.iter().copied().max().unwrap();
    c.check(max <= 2 * mean, format!("all spacers in [0, 100] (max {max})"));
    let total: u64 = d.spacers.iter().sum();
    let avg = total as f64 / cuts as f64;
    c.within("mean spacer", avg, mean as f64, 1.5);
    let lhs = total as i128 - (cuts as u64 * mean) as i128;
    let rhs = d.draws[0] as i128 - d.draws[cuts] as i128;
    c.check(lhs == rhs, format!("sum s - rH = {lhs}, a(1) - a(r+1) = {rhs}"));
    c
}

fn n_property() -> Checks {
    let mut c = Checks::default();
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let m = run_config(NAB_CONFIG, dir.path(), None);
    let elapsed = start.elapsed();
    let hj = m.heights[m.truncation - 1];
    c.check(m.config.depth >= 8, format!("depth {}", m.config.depth));
    c.check(hj <= 100_000_000, format!("h_J = {hj} <= 1e8"));
    let stages = last_two_marker_stages(&m);
    let once = fits_by_stage(summary(&m, "fit_m"));
    let twice = fits_by_stage(summary(&m, "fit_2m"));
    for &j in &stages {
        let mj = m.markers.iter().find(|k| k.stage as u64 == j).unwrap().m_j;
        match twice.get(&(j, 2 * mj)) {
            Some(f) => {
                let co = &f["coefficients"];
                c.within(&format!("j={j} m=2m_j I"), num(&co["T^0"]), 0.3, 0.05);
                c.within(&format!("j={j} m=2m_j T"), num(&co["T^1"]), 0.3, 0.05);
                c.within(&format!("j={j} m=2m_j Theta"), num(&co["Theta"]), 0.4, 0.05);
                let r = num(&f["relative_residual"]);
                c.check(r < 0.02, format!("j={j} m=2m_j relative residual {r:.6} < 0.02"));
            }
            None => c.check(false, format!("no fit at j={j} m=2m_j")),
        }
        match once.get(&(j, mj)) {
            Some(f) => {
                let co = &f["coefficients"];
                c.within(&format!("j={j} m=m_j I"), num(&co["T^0"]), 0.3, 0.05);
                c.within(&format!("j={j} m=m_j Theta"), num(&co["Theta"]), 0.7, 0.05);
                let t = num(&co["T^1"]);
                c.check(t.abs() < 0.05, format!("j={j} m=m_j |T| = {:.6} < 0.05", t.abs()));
            }
            None => c.check(false, format!("no fit at j={j} m=m_j")),
        }
    }
    c.budget(elapsed, Duration::from_secs(600));
    c
}

fn ns_property() -> Checks {
    let mut c = Checks::default();
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let m = run_config(LEMMA1_CONFIG, dir.path(), None);
    let elapsed = start.elapsed();
    let max_cuts = fs::read_to_string(dir.path().join("stages.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
        .max()
        .unwrap();
    c.check(max_cuts <= 500, format!("max r_j = {max_cuts} <= 500"));
    c.check(m.config.depth >= 6, format!("depth {}", m.config.depth));
    let stages = last_two_marker_stages(&m);
    let profile: BTreeMap<u64, f64> = summary(&m, "mixing")["profile"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["j"].as_u64().unwrap(), num(&r["sup_deviation"])))
        .collect();
    let devs: Vec<f64> = stages.iter().filter_map(|j| profile.get(j).copied()).collect();
    if devs.len() == 2 {
        c.check(
            devs[1] < devs[0],
            format!("sup-deviation at 3m_j decreases: j={} {:.6}, j={} {:.6}", stages[0], devs[0], stages[1], devs[1]),
        );
        c.check(devs[1] < 0.08, format!("last sup-deviation {:.6} < 0.08", devs[1]));
    } else {
        c.check(false, format!("mixing profile misses stages {stages:?}"));
    }
    let fits = fits_by_stage(summary(&m, "fit"));
    for &j in &stages {
        let mj = m.markers.iter().find(|k| k.stage as u64 == j).unwrap().m_j;
        for k in [1u64, 2, 4, 5] {
            match fits.get(&(j, k * mj)) {
                Some(f) => {
                    let a = num(&f["coefficients"]["T^0"]);
                    c.check(a > 0.01, format!("j={j} k={k} a_k = {a:.6} > 0.01"));
                }
                None => c.check(false, format!("no fit at j={j} m={k}m_j")),
            }
        }
    }
    c.budget(elapsed, Duration::from_secs(600));
    c
}

fn tensor_witnesses() -> Checks {
    let mut c = Checks::default();
    let dir = tempfile::tempdir().unwrap();
    let m = run_config(LEMMA1_S2_CONFIG, dir.path(), None);
    let stages = last_two_marker_stages(&m);
    let values = |name: &str| -> Vec<f64> {
        let s = summary(&m, name);
        stages
            .iter()
            .map(|&j| {
                s["values"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .find(|v| v["j"].as_u64() == Some(j))
                    .map_or(f64::NAN, |v| num(&v["value"]))
            })
            .collect()
    };
    let v = values("tensor_125");
    c.check(
        v[1].abs() < v[0].abs(),
        format!("(1,2,5) magnitude decreases: j={} {:.6e}, j={} {:.6e}", stages[0], v[0], stages[1], v[1]),
    );
    for (j, x) in stages.iter().zip(values("tensor_135")) {
        c.check(x.abs() > 1e-4, format!("(1,3,5) at j={j}: |{x:.6e}| > 1e-4"));
    }
    c
}

fn cyclicity_probe() -> Checks {
    let mut c = Checks::default();
    let dir = tempfile::tempdir().unwrap();
    let m = run_config(NAB_CONFIG, dir.path(), None);
    let s = summary(&m, "probe");
    let mut reader = csv::Reader::from_path(dir.path().join("probe.csv")).unwrap();
    let mut gram = BTreeMap::new();
    for row in reader.records() {
        let row = row.unwrap();
        let p: usize = row[1].parse().unwrap();
        let q: usize = row[2].parse().unwrap();
        gram.insert((p, q), row[3].to_string());
    }
    let n = num(&s["M"]) as usize;
    let symmetric = (0..n).all(|p| (0..n).all(|q| gram.get(&(p, q)).is_some() && gram.get(&(p, q)) == gram.get(&(q, p))));
    c.check(symmetric && gram.len() == n * n, format!("{n}x{n} Gram matrix symmetric"));
    let min = num(&s["min_eigenvalue"]);
    c.check(min >= -1e-10, format!("min eigenvalue {min:.12e} >= -1e-10"));
    let rank = s["rank"].as_u64().unwrap();
    c.check(rank == 6, format!("numerical rank {rank} == 6"));
    c.check(
        (min - PROBE_MIN_EIGENVALUE_BASELINE).abs() <= 1e-9 * PROBE_MIN_EIGENVALUE_BASELINE.abs(),
        format!("min eigenvalue matches baseline {PROBE_MIN_EIGENVALUE_BASELINE}"),
    );
    c
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Checks {
    let mut c = Checks::default();
    let dir = tempfile::tempdir().unwrap();
    for config in [NAB_CONFIG, LEMMA1_CONFIG] {
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            let out = dir.path().join(format!("{config}-{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_rankone"))
                .arg("run")
                .arg("--config")
                .arg(config_path(config))
                .arg("--out")
                .arg(&out)
                .args(["--threads", threads])
                .output()
                .unwrap()
                .status;
            c.check(status.success(), format!("{config} --threads {threads} exits 0"));
            outputs.push(csv_files(&out));
        }
        let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
        c.check(
            same,
            format!("{config}: {} CSV files byte-identical across 1 and 8 threads", outputs[0].len()),
        );
    }
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Checks); 9] = [
        ("height recursion", heights_follow_recursion),
        ("oracle equivalence", oracle_equivalence),
        ("triangular kernel", triangular_kernel),
        ("Ornstein statistics", ornstein_statistics),
        ("n-property coefficients", n_property),
        ("(N,s)-property mixing and identity part", ns_property),
        ("tensor witnesses", tensor_witnesses),
        ("cyclicity probe", cyclicity_probe),
        ("thread-count determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let checks = f();
        let ok = checks.failed == 0;
        failures += usize::from(!ok);
        println!(
            "{} criterion {}: {name} ({:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
        for line in checks.lines {
            println!("    {line}");
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
