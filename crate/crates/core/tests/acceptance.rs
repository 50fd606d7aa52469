//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gkmeans::bench::{run_benchmark, telemetry_csv, BenchConfig, DatasetSource};
use gkmeans::datagen::{generate_gaussian_mixture, MixtureSpec, Preset};
use gkmeans::kernels::{dist, he_test, midpoint, sq_dist, OpCounters};
use gkmeans::metrics::ari;
use gkmeans::solvers::{
    classify_point, run_gkmeans, run_gkmeans_observed, run_hamerly, run_lloyd, Algorithm, FilterView, InitMethod,
    IterationTelemetry, Solution, SolverParams,
};
use gkmeans::{CentroidSet, DataMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SYNTHETIC_MAX_ITERS: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn report(n: usize, name: &str, o: &Outcome) {
    println!(
        "criterion {n:>2} [{name}]: {} ({}; {:.1}s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        o.elapsed.as_secs_f64()
    );
}

fn timed(f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    Outcome {
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

#[derive(Debug, Clone)]
struct SuiteConfig {
    m: usize,
    d: usize,
    k: usize,
    init: InitMethod,
    preset: Preset,
    data_seed: u64,
    init_seed: u64,
}

struct SuiteRun {
    cfg: SuiteConfig,
    lloyd: Solution,
    gk: Solution,
    hamerly: Solution,
}

fn suite_configs() -> Vec<SuiteConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut out = Vec::new();
    for m in [1_000, 10_000] {
        for d in [2, 16, 50] {
            for k in [5, 20, 50] {
                for init in [InitMethod::Random, InitMethod::Kmeanspp] {
                    for preset in [Preset::Separated, Preset::Overlapped] {
                        out.push(SuiteConfig {
                            m,
                            d,
                            k,
                            init,
                            preset,
                            data_seed: rng.random(),
                            init_seed: rng.random(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn run_suite_config(cfg: SuiteConfig) -> SuiteRun {
    // as many mixture components as requested clusters
    let spec = cfg.preset.spec(cfg.k, cfg.m / cfg.k, cfg.d, cfg.data_seed);
    let (data, _) = generate_gaussian_mixture(&spec).expect("valid preset");
    let init = cfg
        .init
        .init(&data, cfg.k, cfg.init_seed, &mut OpCounters::new())
        .expect("valid init");
    let params = SolverParams {
        max_iters: SYNTHETIC_MAX_ITERS,
        seed: cfg.init_seed,
        record_history: true,
        ..Default::default()
    };
    SuiteRun {
        lloyd: run_lloyd(&data, &init, &params).expect("lloyd"),
        gk: run_gkmeans(&data, &init, &params).expect("gkmeans"),
        hamerly: run_hamerly(&data, &init, &params).expect("hamerly"),
        cfg,
    }
}

fn sse_monotone(series: &[f64]) -> bool {
    series.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12)
}

fn telemetry_ok(rows: &[IterationTelemetry], m: usize, k: usize) -> bool {
    rows.iter().all(|t| {
        t.he_count <= t.lhe_count
            && t.lhe_count <= m - t.le_count
            && t.pdc1 == ((m - t.le_count) * k) as u64
            && t.pdc2 == (t.lhe_count * k) as u64
            && t.neighbor_pairs <= k * (k - 1)
    })
}

fn describe(c: &SuiteConfig) -> String {
    format!(
        "m={} d={} k={} init={} preset={}",
        c.m,
        c.d,
        c.k,
        c.init.name(),
        c.preset.name()
    )
}

fn criterion_1(runs: &[SuiteRun]) -> (bool, String) {
    let bad: Vec<String> = runs
        .iter()
        .filter(|r| {
            let a = ari(&r.lloyd.assign, &r.gk.assign).unwrap_or(f64::NAN);
            r.gk.history != r.lloyd.history || a != 1.0 || (r.gk.sse - r.lloyd.sse) != 0.0
        })
        .map(|r| describe(&r.cfg))
        .collect();
    let iters: usize = runs.iter().map(|r| r.lloyd.iterations).sum();
    (
        runs.len() >= 50 && bad.is_empty(),
        format!(
            "{}/{} configs identical per iteration, ARI 1, SSE diff 0 over {iters} Lloyd iterations{}",
            runs.len() - bad.len(),
            runs.len(),
            if bad.is_empty() { String::new() } else { format!("; mismatches: {bad:?}") }
        ),
    )
}

fn criterion_2(runs: &[SuiteRun]) -> (bool, String) {
    let bad: Vec<String> = runs
        .iter()
        .filter(|r| r.hamerly.assign != r.lloyd.assign || ari(&r.lloyd.assign, &r.hamerly.assign).unwrap_or(0.0) != 1.0)
        .map(|r| describe(&r.cfg))
        .collect();
    (
        bad.is_empty(),
        format!(
            "{}/{} configs with identical final assignments and ARI 1{}",
            runs.len() - bad.len(),
            runs.len(),
            if bad.is_empty() { String::new() } else { format!("; mismatches: {bad:?}") }
        ),
    )
}

fn criterion_3(runs: &[SuiteRun]) -> (bool, String) {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for r in runs {
        for sol in [&r.lloyd, &r.gk, &r.hamerly] {
            checked += 1;
            if !sse_monotone(&sol.sse_series()) {
                bad.push(format!("{} {}", sol.algorithm, describe(&r.cfg)));
            }
        }
    }
    (
        bad.is_empty(),
        format!("{checked} solver runs non-increasing{}", if bad.is_empty() { String::new() } else { format!("; violations: {bad:?}") }),
    )
}

fn criterion_4() -> (bool, String) {
    let config = BenchConfig {
        datasets: vec![DatasetSource::Preset {
            name: None,
            preset: Preset::Separated,
            clusters: 50,
            per_cluster: 1_000,
            d: 16,
            seed: 2024,
        }],
        algorithms: vec![Algorithm::Lloyd, Algorithm::Gkmeans],
        k: vec![50],
        trials: 10,
        init: InitMethod::Random,
        max_iters: SYNTHETIC_MAX_ITERS,
        epsilon: 0.0,
        seed: 11,
        energy: false,
        powercap_root: None,
        parallel: true,
    };
    let report = match run_benchmark(&config) {
        Ok(r) => r,
        Err(e) => return (false, format!("benchmark failed: {e}")),
    };
    let cell = |a| report.cells.iter().find(|c| c.algorithm == a).expect("cell");
    let (lloyd, gk) = (cell(Algorithm::Lloyd), cell(Algorithm::Gkmeans));
    let lloyd_total: u64 = report.trials.iter().filter(|t| t.algorithm == Algorithm::Lloyd).map(|t| t.dc_total).sum();
    let gk_total: u64 = report.trials.iter().filter(|t| t.algorithm == Algorithm::Gkmeans).map(|t| t.dc_total).sum();
    let ratio = gk_total as f64 / lloyd_total as f64;
    let complete = lloyd.n_trials == 10 && gk.n_trials == 10;
    (
        complete && ratio <= 0.15,
        format!(
            "Gk-means/Lloyd total DC = {:.2}% (limit 15%); mean DC {:.3e} vs {:.3e}, DC(S) {:.2}%, mean iterations {:.1}",
            ratio * 100.0,
            gk.dc_mean,
            lloyd.dc_mean,
            gk.dc_savings_pct.unwrap_or(f64::NAN),
            lloyd.iters_mean
        ),
    )
}

fn criterion_5() -> (bool, String) {
    const TRIPLES: usize = 1_000_000;
    let dims = [1usize, 2, 8, 64];
    let per_dim = TRIPLES / dims.len();
    let results: Vec<(usize, usize)> = dims
        .par_iter()
        .enumerate()
        .map(|(s, &d)| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xfeed + s as u64);
            let mut counters = OpCounters::new();
            let (mut mismatches, mut decided) = (0, 0);
            let draw = |rng: &mut ChaCha8Rng, scale: f64| -> Vec<f64> {
                (0..d).map(|_| rng.random_range(-scale..scale)).collect()
            };
            for t in 0..per_dim {
                let scale = [1.0, 10.0, 1e3, 1e-3][t % 4];
                let ci = draw(&mut rng, scale);
                let cj = draw(&mut rng, scale);
                let mut x = draw(&mut rng, scale);
                if t % 2 == 1 {
                    // pull x onto the bisector, then push it off by a tiny amount
                    let mid = midpoint(&ci, &cj).unwrap();
                    let n: Vec<f64> = cj.iter().zip(&ci).map(|(b, a)| b - a).collect();
                    let nn: f64 = n.iter().map(|v| v * v).sum();
                    let along: f64 = x.iter().zip(&mid).zip(&n).map(|((x, m), n)| (x - m) * n).sum::<f64>() / nn;
                    let eps = rng.random_range(-1e-6..1e-6);
                    for ((xv, nv), _) in x.iter_mut().zip(&n).zip(&mid) {
                        *xv -= (along - eps) * nv;
                    }
                }
                let di = sq_dist(&x, &ci).unwrap();
                let dj = sq_dist(&x, &cj).unwrap();
                if (di - dj).abs() <= 1e-9 * (1.0 + di) {
                    continue;
                }
                decided += 1;
                let mid = midpoint(&ci, &cj).unwrap();
                let affine: Vec<f64> = cj.iter().zip(&mid).map(|(c, m)| c - m).collect();
                if he_test(&mid, &affine, &x, &mut counters).unwrap() != (dj < di) {
                    mismatches += 1;
                }
            }
            (mismatches, decided)
        })
        .collect();
    let mismatches: usize = results.iter().map(|r| r.0).sum();
    let decided: usize = results.iter().map(|r| r.1).sum();
    (
        mismatches == 0,
        format!("{mismatches} mismatches over {decided} decided of {TRIPLES} triples in d = {dims:?}"),
    )
}

/// Lloyd's choice for `x`: keep `current` unless another centroid is
/// strictly closer, lowest index among the others.
fn lloyd_choice(x: &[f64], centroids: &CentroidSet, current: usize) -> usize {
    let mut c = OpCounters::new();
    let mut best = current;
    let mut best_dist = dist(x, centroids.center(current), &mut c).unwrap();
    for j in 0..centroids.k() {
        if j == current {
            continue;
        }
        let dj = dist(x, centroids.center(j), &mut c).unwrap();
        if dj < best_dist {
            best = j;
            best_dist = dj;
        }
    }
    best
}

#[derive(Default)]
struct SmallSuite {
    instances: usize,
    views: usize,
    le_points: usize,
    le_violations: usize,
    pruned_pairs: usize,
    prune_violations: usize,
    telemetry_violations: usize,
    runs: Vec<(usize, usize, Vec<IterationTelemetry>)>,
}

fn small_instance(seed: u64) -> (DataMatrix, CentroidSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..=10usize);
    let d = rng.random_range(1..=6usize);
    let m = rng.random_range(k..=200usize);
    let data = match seed % 3 {
        0 => {
            let per = m.div_ceil(k);
            let spec = MixtureSpec {
                k,
                per_cluster: per,
                d,
                mean_separation: rng.random_range(0.5..4.0),
                cov_low: 1.0,
                cov_high: 5.0,
                seed,
            };
            generate_gaussian_mixture(&spec).unwrap().0
        }
        // small integer grid: many exact ties and duplicates
        1 => DataMatrix::from_flat((0..m * d).map(|_| rng.random_range(0..6) as f64).collect(), d).unwrap(),
        _ => DataMatrix::from_flat((0..m * d).map(|_| rng.random_range(-50.0..50.0)).collect(), d).unwrap(),
    };
    let init = if seed.is_multiple_of(2) { InitMethod::Random } else { InitMethod::Kmeanspp };
    let init = init.init(&data, k, seed, &mut OpCounters::new()).unwrap();
    (data, init)
}

fn small_suite() -> SmallSuite {
    let mut suite = SmallSuite::default();
    for seed in 0..1_000u64 {
        let (data, init) = small_instance(seed);
        let mut on_view = |v: &FilterView<'_>| {
            suite.views += 1;
            let mut c = OpCounters::new();
            for p in 0..v.data.m() {
                let x = v.data.row(p);
                let own = v.state.assign[p];
                let lloyd = lloyd_choice(x, v.centroids, own);
                if classify_point(p, v.data, v.centroids, v.tables, v.state, &mut c).is_le() {
                    suite.le_points += 1;
                    if lloyd != own {
                        suite.le_violations += 1;
                    }
                }
                for j in (0..v.centroids.k()).filter(|&j| j != own && !v.tables.is_neighbor(own, j)) {
                    suite.pruned_pairs += 1;
                    if lloyd == j {
                        suite.prune_violations += 1;
                    }
                }
            }
        };
        let params = SolverParams {
            max_iters: SYNTHETIC_MAX_ITERS,
            ..Default::default()
        };
        let sol = run_gkmeans_observed(&data, &init, &params, &mut on_view).unwrap();
        suite.instances += 1;
        if !telemetry_ok(&sol.telemetry, data.m(), init.k()) {
            suite.telemetry_violations += 1;
        }
        suite.runs.push((data.m(), init.k(), sol.telemetry));
    }
    suite
}

fn criterion_8(runs: &[SuiteRun], small: &SmallSuite) -> (bool, String) {
    let rows_large: usize = runs.iter().map(|r| r.gk.telemetry.len()).sum();
    let bad_large = runs
        .iter()
        .filter(|r| !telemetry_ok(&r.gk.telemetry, r.cfg.m, r.cfg.k))
        .count();
    let rows_small: usize = small.runs.iter().map(|r| r.2.len()).sum();
    (
        bad_large == 0 && small.telemetry_violations == 0,
        format!(
            "{} telemetry rows over {} Gk-means runs; {} runs with violations",
            rows_large + rows_small,
            runs.len() + small.instances,
            bad_large + small.telemetry_violations
        ),
    )
}

fn solution_bytes(sol: &Solution) -> (Vec<usize>, Vec<u8>, String) {
    (sol.assign.clone(), sol.centroids.to_bytes(), telemetry_csv(&sol.telemetry))
}

fn criterion_9() -> (bool, String) {
    let mut compared = 0;
    let mut bad = Vec::new();
    for cfg in suite_configs().into_iter().filter(|c| c.m == 1_000).step_by(5) {
        let a = run_suite_config(cfg.clone());
        let b = run_suite_config(cfg.clone());
        for (x, y) in [(&a.lloyd, &b.lloyd), (&a.gk, &b.gk), (&a.hamerly, &b.hamerly)] {
            compared += 1;
            if solution_bytes(x) != solution_bytes(y) || x.counters.dc_full != y.counters.dc_full {
                bad.push(format!("{} {}", x.algorithm, describe(&cfg)));
            }
        }
    }
    let config = BenchConfig {
        datasets: vec![DatasetSource::Preset {
            name: None,
            preset: Preset::Overlapped,
            clusters: 8,
            per_cluster: 250,
            d: 5,
            seed: 3,
        }],
        algorithms: Algorithm::ALL.to_vec(),
        k: vec![4, 8],
        trials: 3,
        init: InitMethod::Kmeanspp,
        max_iters: SYNTHETIC_MAX_ITERS,
        epsilon: 0.0,
        seed: 99,
        energy: false,
        powercap_root: None,
        parallel: true,
    };
    let columns = |r: &gkmeans::bench::BenchReport| {
        let trials: Vec<_> = r
            .trials
            .iter()
            .map(|t| (t.dataset.clone(), t.algorithm, t.k, t.trial, t.dc_total, t.dc_neighbor, t.iterations, t.sse.to_bits(), telemetry_csv(&t.telemetry)))
            .collect();
        let cells: Vec<_> = r
            .cells
            .iter()
            .map(|c| (c.algorithm, c.k, c.dc_mean.to_bits(), c.dc_sd.to_bits(), c.iters_mean.to_bits(), c.sse_mean.to_bits()))
            .collect();
        (trials, cells)
    };
    let (r1, r2) = (run_benchmark(&config).unwrap(), run_benchmark(&config).unwrap());
    let bench_same = columns(&r1) == columns(&r2);
    if !bench_same {
        bad.push("bench report DC/iteration/SSE columns".into());
    }
    (
        bad.is_empty(),
        format!(
            "{compared} solver runs repeated byte-identically; bench report columns {}{}",
            if bench_same { "identical" } else { "differ" },
            if bad.is_empty() { String::new() } else { format!("; differences: {bad:?}") }
        ),
    )
}

fn cli(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_gkmeans"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn criterion_10() -> (bool, String) {
    let dir = tempfile::tempdir().expect("tempdir");
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (data, gk, ll, verdict) = (p("data.csv"), p("gk"), p("ll"), p("verdict.json"));
    let start = Instant::now();
    let steps: [(&str, Vec<&str>); 4] = [
        ("generate", vec!["generate", "--preset", "separated", "--k", "10", "--per-cluster", "1000", "--d", "8", "--seed", "7", "--out", &data]),
        ("run gkmeans", vec!["run", "--input", &data, "--k", "10", "--algorithm", "gkmeans", "--seed", "1", "--out", &gk]),
        ("run lloyd", vec!["run", "--input", &data, "--k", "10", "--algorithm", "lloyd", "--seed", "1", "--out", &ll]),
        ("verify", vec!["verify", "--input", &data, "--k", "10", "--seed", "1", "--seeds", "20", "--hamerly", "--report", &verdict]),
    ];
    for (name, args) in &steps {
        match cli(args) {
            Ok(out) if out.status.success() => {}
            Ok(out) => {
                return (
                    false,
                    format!("{name} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr).trim()),
                )
            }
            Err(e) => return (false, format!("{name} did not start: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let read = |path: String| std::fs::read_to_string(Path::new(&path)).unwrap_or_default();
    let same_assign = read(format!("{gk}.assign.csv")) == read(format!("{ll}.assign.csv"));
    let v: serde_json::Value = match serde_json::from_str(&read(verdict)) {
        Ok(v) => v,
        Err(e) => return (false, format!("verdict JSON unreadable: {e}")),
    };
    let seeds = v["seeds"].as_array().cloned().unwrap_or_default();
    let aris: Vec<f64> = seeds
        .iter()
        .flat_map(|s| s["comparisons"].as_array().cloned().unwrap_or_default())
        .map(|c| c["ari"].as_f64().unwrap_or(f64::NAN))
        .collect();
    let all_one = !aris.is_empty() && aris.iter().all(|&a| a == 1.0);
    let m = read(data.clone()).lines().count();
    (
        m == 10_000 && same_assign && all_one && seeds.len() == 20 && v["passed"] == true && elapsed < Duration::from_secs(60),
        format!(
            "m={m}, assignment files identical: {same_assign}, {} seeds with ARI 1.0 in all {} comparisons: {all_one}, {:.1}s",
            seeds.len(),
            aris.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() {
    let mut all = true;
    let mut emit = |n: usize, name: &str, o: Outcome| {
        report(n, name, &o);
        all &= o.pass;
    };

    let start = Instant::now();
    let runs: Vec<SuiteRun> = suite_configs().into_par_iter().map(run_suite_config).collect();
    let suite_time = start.elapsed();
    let shared = |f: fn(&[SuiteRun]) -> (bool, String)| {
        let mut o = timed(|| f(&runs));
        o.elapsed += suite_time;
        o
    };
    emit(1, "Gk-means exactness vs Lloyd", shared(criterion_1));
    emit(2, "Hamerly exactness vs Lloyd", shared(criterion_2));
    emit(3, "SSE monotonicity", shared(criterion_3));
    emit(4, "DC reduction", timed(criterion_4));
    emit(5, "bisector predicate oracle", timed(criterion_5));

    let start = Instant::now();
    let small = small_suite();
    let small_time = start.elapsed();
    emit(
        6,
        "LE safety",
        Outcome {
            pass: small.le_violations == 0 && small.le_points > 0,
            detail: format!(
                "{} violations over {} LE points in {} filter passes of {} instances",
                small.le_violations, small.le_points, small.views, small.instances
            ),
            elapsed: small_time,
        },
    );
    emit(
        7,
        "neighbor pruning safety",
        Outcome {
            pass: small.prune_violations == 0 && small.pruned_pairs > 0,
            detail: format!(
                "{} violations over {} pruned (point, centroid) pairs",
                small.prune_violations, small.pruned_pairs
            ),
            elapsed: small_time,
        },
    );
    emit(8, "telemetry invariants", timed(|| criterion_8(&runs, &small)));
    emit(9, "determinism", timed(criterion_9));
    emit(10, "end-to-end CLI", timed(criterion_10));

    if !all {
        std::process::exit(1);
    }
}
