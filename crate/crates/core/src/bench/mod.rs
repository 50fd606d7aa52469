//! Trial matrices over datasets × algorithms × k, symmetry verification and
//! report serialization.
//!
//! Within a trial every algorithm starts from the same initial centroids.
//! Statistics per cell are the mean and sample standard deviation over the
//! successful trials; failed trials are counted, never dropped silently.

pub mod energy;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centroids::CentroidSet;
use crate::data::{read_csv, DataMatrix};
use crate::datagen::{generate_gaussian_mixture, Preset};
use crate::error::{Error, Result};
use crate::kernels::OpCounters;
use crate::metrics::ari;
use crate::solvers::{
    run_gkmeans, run_hamerly, run_lloyd, Algorithm, InitMethod, IterationTelemetry, Solution, SolverParams,
    TieBreak, DEFAULT_MAX_ITERS,
};
use energy::{EnergySample, EnergySampler, DEFAULT_POWERCAP_ROOT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    Csv {
        #[serde(default)]
        name: Option<String>,
        path: PathBuf,
        #[serde(default)]
        label_column: bool,
    },
    Preset {
        #[serde(default)]
        name: Option<String>,
        preset: Preset,
        clusters: usize,
        per_cluster: usize,
        d: usize,
        seed: u64,
    },
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Csv { name: Some(n), .. } | DatasetSource::Preset { name: Some(n), .. } => n.clone(),
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
            DatasetSource::Preset {
                preset,
                clusters,
                per_cluster,
                d,
                seed,
                ..
            } => format!("{}-c{clusters}-n{per_cluster}-d{d}-s{seed}", preset.name()),
        }
    }

    pub fn load(&self) -> Result<DataMatrix> {
        match self {
            DatasetSource::Csv { path, label_column, .. } => Ok(read_csv(path, *label_column)?.0),
            DatasetSource::Preset {
                preset,
                clusters,
                per_cluster,
                d,
                seed,
                ..
            } => Ok(generate_gaussian_mixture(&preset.spec(*clusters, *per_cluster, *d, *seed))?.0),
        }
    }
}

fn default_trials() -> usize {
    10
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetSource>,
    pub algorithms: Vec<Algorithm>,
    pub k: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub init: InitMethod,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub epsilon: f64,
    /// Base seed; trial `t` uses `seed + t`. Required.
    pub seed: u64,
    #[serde(default)]
    pub energy: bool,
    #[serde(default)]
    pub powercap_root: Option<PathBuf>,
    /// Run trials concurrently. Ignored when energy sampling is on.
    #[serde(default)]
    pub parallel: bool,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("at least one algorithm is required"));
        }
        if self.datasets.is_empty() || self.k.is_empty() {
            return Err(Error::config("datasets and k must be non-empty"));
        }
        SolverParams {
            max_iters: self.max_iters,
            epsilon: self.epsilon,
            ..Default::default()
        }
        .validate()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    /// FNV-1a of the little-endian bytes of the initial centroids.
    pub init_fingerprint: String,
    pub failed: Option<String>,
    pub dc_total: u64,
    pub dc_neighbor: u64,
    pub dc_le: u64,
    pub proj_count: u64,
    pub dc_init: u64,
    pub iterations: usize,
    pub converged: bool,
    pub sse: f64,
    pub rt_ms: f64,
    pub energy_cpu_j: Option<f64>,
    pub energy_mem_j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub telemetry_file: Option<String>,
    #[serde(skip)]
    pub telemetry: Vec<IterationTelemetry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub n_trials: usize,
    pub dc_mean: f64,
    pub dc_sd: f64,
    /// Mean DC excluding centroid-to-centroid distances.
    pub dc_point_mean: f64,
    pub rt_ms_mean: f64,
    pub rt_ms_sd: f64,
    pub iters_mean: f64,
    pub sse_mean: f64,
    pub dc_savings_pct: Option<f64>,
    pub rt_speedup_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_cpu_j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_mem_j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_total_j: Option<f64>,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub cells: Vec<Cell>,
    pub trials: Vec<TrialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_note: Option<String>,
}

pub fn fingerprint(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn savings(baseline: f64, value: f64) -> Option<f64> {
    (baseline.is_finite() && value.is_finite() && baseline > 0.0).then(|| (baseline - value) / baseline * 100.0)
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "solver panicked".into())
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    config: &BenchConfig,
    dataset: &str,
    data: &DataMatrix,
    k: usize,
    trial: usize,
    sampler: Option<&EnergySampler>,
) -> Vec<TrialRecord> {
    let seed = config.trial_seed(trial);
    let mut init_counters = OpCounters::new();
    let init = config.init.init(data, k, seed, &mut init_counters);
    let params = SolverParams {
        max_iters: config.max_iters,
        epsilon: config.epsilon,
        seed,
        ..Default::default()
    };
    config
        .algorithms
        .iter()
        .map(|&algorithm| {
            let mut rec = TrialRecord {
                dataset: dataset.to_string(),
                algorithm,
                k,
                trial,
                seed,
                init_fingerprint: String::new(),
                failed: None,
                dc_total: 0,
                dc_neighbor: 0,
                dc_le: 0,
                proj_count: 0,
                dc_init: init_counters.dc_full,
                iterations: 0,
                converged: false,
                sse: f64::NAN,
                rt_ms: f64::NAN,
                energy_cpu_j: None,
                energy_mem_j: None,
                telemetry_file: None,
                telemetry: Vec::new(),
            };
            let init = match &init {
                Ok(c) => c,
                Err(e) => {
                    rec.failed = Some(e.to_string());
                    return rec;
                }
            };
            rec.init_fingerprint = fingerprint(&init.to_bytes());
            let timed = || {
                let start = Instant::now();
                let out = catch_unwind(AssertUnwindSafe(|| algorithm.run(data, init, &params)));
                (out, start.elapsed())
            };
            let ((outcome, elapsed), sample) = match sampler {
                Some(s) => {
                    let (v, sample) = s.measure(timed);
                    (v, Some(sample))
                }
                None => (timed(), None),
            };
            match outcome {
                Ok(Ok(sol)) => {
                    rec.dc_total = sol.counters.dc_full;
                    rec.dc_neighbor = sol.counters.dc_neighbor;
                    rec.dc_le = sol.counters.dc_le;
                    rec.proj_count = sol.counters.proj_count;
                    rec.iterations = sol.iterations;
                    rec.converged = sol.converged;
                    rec.sse = sol.sse;
                    rec.rt_ms = elapsed.as_secs_f64() * 1e3;
                    rec.telemetry = sol.telemetry;
                    if let Some(r) = sample.as_ref().and_then(EnergySample::record) {
                        rec.energy_cpu_j = Some(r.cpu_j);
                        rec.energy_mem_j = Some(r.mem_j);
                    }
                }
                Ok(Err(e)) => rec.failed = Some(e.to_string()),
                Err(p) => rec.failed = Some(panic_message(p)),
            }
            rec
        })
        .collect()
}

/// Runs every (dataset, k, trial) and aggregates per (dataset, algorithm, k).
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let (sampler, energy_note) = if config.energy {
        let root = config
            .powercap_root
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_POWERCAP_ROOT));
        match EnergySampler::discover(&root) {
            Ok(s) => (Some(s), None),
            Err(reason) => (None, Some(format!("energy unsupported: {reason}"))),
        }
    } else {
        (None, None)
    };

    let mut cells = Vec::new();
    let mut trials = Vec::new();
    for source in &config.datasets {
        let name = source.name();
        let data = match source.load() {
            Ok(d) => d,
            Err(e) => {
                for &k in &config.k {
                    for &algorithm in &config.algorithms {
                        cells.push(error_cell(&name, algorithm, k, config.trials, e.to_string()));
                    }
                }
                continue;
            }
        };
        for &k in &config.k {
            let run = |t: usize| run_trial(config, &name, &data, k, t, sampler.as_ref());
            let records: Vec<TrialRecord> = if config.parallel && sampler.is_none() {
                (0..config.trials).into_par_iter().flat_map_iter(run).collect()
            } else {
                (0..config.trials).flat_map(run).collect()
            };
            cells.extend(aggregate(&name, k, &config.algorithms, &records));
            trials.extend(records);
        }
    }
    Ok(BenchReport {
        config: config.clone(),
        cells,
        trials,
        energy_note,
    })
}

fn error_cell(dataset: &str, algorithm: Algorithm, k: usize, trials: usize, error: String) -> Cell {
    Cell {
        dataset: dataset.to_string(),
        algorithm,
        k,
        n_trials: 0,
        dc_mean: f64::NAN,
        dc_sd: f64::NAN,
        dc_point_mean: f64::NAN,
        rt_ms_mean: f64::NAN,
        rt_ms_sd: f64::NAN,
        iters_mean: f64::NAN,
        sse_mean: f64::NAN,
        dc_savings_pct: None,
        rt_speedup_pct: None,
        energy_cpu_j: None,
        energy_mem_j: None,
        energy_total_j: None,
        failures: trials,
        error: Some(error),
    }
}

fn aggregate(dataset: &str, k: usize, algorithms: &[Algorithm], records: &[TrialRecord]) -> Vec<Cell> {
    let mut cells: Vec<Cell> = algorithms
        .iter()
        .map(|&algorithm| {
            let mine: Vec<&TrialRecord> = records.iter().filter(|r| r.algorithm == algorithm).collect();
            let ok: Vec<&TrialRecord> = mine.iter().copied().filter(|r| r.failed.is_none()).collect();
            let col = |f: fn(&TrialRecord) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (dc_mean, dc_sd) = mean_sd(&col(|r| r.dc_total as f64));
            let (rt_ms_mean, rt_ms_sd) = mean_sd(&col(|r| r.rt_ms));
            let energy = |f: fn(&TrialRecord) -> Option<f64>| {
                let xs: Option<Vec<f64>> = ok.iter().map(|r| f(r)).collect();
                xs.filter(|v| !v.is_empty()).map(|v| mean_sd(&v).0)
            };
            let energy_cpu_j = energy(|r| r.energy_cpu_j);
            let energy_mem_j = energy(|r| r.energy_mem_j);
            let failures = mine.len() - ok.len();
            Cell {
                dataset: dataset.to_string(),
                algorithm,
                k,
                n_trials: ok.len(),
                dc_mean,
                dc_sd,
                dc_point_mean: mean_sd(&col(|r| (r.dc_total - r.dc_neighbor) as f64)).0,
                rt_ms_mean,
                rt_ms_sd,
                iters_mean: mean_sd(&col(|r| r.iterations as f64)).0,
                sse_mean: mean_sd(&col(|r| r.sse)).0,
                dc_savings_pct: None,
                rt_speedup_pct: None,
                energy_cpu_j,
                energy_mem_j,
                energy_total_j: energy_cpu_j.zip(energy_mem_j).map(|(a, b)| a + b),
                failures,
                error: (ok.is_empty() && failures > 0)
                    .then(|| mine.iter().find_map(|r| r.failed.clone()))
                    .flatten(),
            }
        })
        .collect();
    if let Some(base) = cells.iter().find(|c| c.algorithm == Algorithm::Lloyd && c.n_trials > 0) {
        let (dc, rt) = (base.dc_mean, base.rt_ms_mean);
        for c in cells.iter_mut().filter(|c| c.n_trials > 0) {
            c.dc_savings_pct = savings(dc, c.dc_mean);
            c.rt_speedup_pct = savings(rt, c.rt_ms_mean);
        }
    }
    cells
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

pub fn cells_csv(cells: &[Cell]) -> String {
    let mut out = String::from(
        "dataset,algorithm,k,n_trials,dc_mean,dc_sd,dc_point_mean,rt_ms_mean,rt_ms_sd,iters_mean,sse_mean,dc_savings_pct,rt_speedup_pct,energy_cpu_j,energy_mem_j,energy_total_j,failures\n",
    );
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.dataset,
            c.algorithm,
            c.k,
            c.n_trials,
            c.dc_mean,
            c.dc_sd,
            c.dc_point_mean,
            c.rt_ms_mean,
            c.rt_ms_sd,
            c.iters_mean,
            c.sse_mean,
            opt(c.dc_savings_pct),
            opt(c.rt_speedup_pct),
            opt(c.energy_cpu_j),
            opt(c.energy_mem_j),
            opt(c.energy_total_j),
            c.failures
        );
    }
    out
}

pub const TELEMETRY_HEADER: &str = "iter,neighbor_pairs,le_count,lhe_count,he_count,reassigned,dc_this_iter,dc_neighbor_this_iter,proj_this_iter,pdc1,pdc2,sse_after_update";

pub fn telemetry_csv(rows: &[IterationTelemetry]) -> String {
    let mut out = String::from(TELEMETRY_HEADER);
    out.push('\n');
    for t in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            t.iter,
            t.neighbor_pairs,
            t.le_count,
            t.lhe_count,
            t.he_count,
            t.reassigned,
            t.dc_this_iter,
            t.dc_neighbor_this_iter,
            t.proj_this_iter,
            t.pdc1,
            t.pdc2,
            crate::data::fmt_f64(t.sse_after_update)
        );
    }
    out
}

/// Writes `report.json`, `report.csv` and one telemetry CSV per trial under
/// `dir`, filling each trial's `telemetry_file`.
pub fn write_report(report: &mut BenchReport, dir: &Path) -> Result<()> {
    let tdir = dir.join("telemetry");
    fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;
    for r in report.trials.iter_mut().filter(|r| r.failed.is_none()) {
        let safe: String = r
            .dataset
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let file = format!("{safe}_{}_k{}_t{}.csv", r.algorithm, r.k, r.trial);
        let path = tdir.join(&file);
        fs::write(&path, telemetry_csv(&r.telemetry)).map_err(|e| Error::io(&path, e))?;
        r.telemetry_file = Some(format!("telemetry/{file}"));
    }
    let json = dir.join("report.json");
    fs::write(&json, serde_json::to_string_pretty(report)?).map_err(|e| Error::io(&json, e))?;
    let csv = dir.join("report.csv");
    fs::write(&csv, cells_csv(&report.cells)).map_err(|e| Error::io(&csv, e))
}

/// Outcome of comparing one solver against Lloyd from one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub assignments_identical: bool,
    /// 1-based pass at which assignments first differ.
    pub first_divergent_iteration: Option<usize>,
    pub ari: f64,
    pub sse_diff: f64,
    pub centroids_identical: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedVerdict {
    pub seed: u64,
    pub lloyd_iterations: usize,
    pub lloyd_sse: f64,
    pub comparisons: Vec<Comparison>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryVerdict {
    pub k: usize,
    pub init: InitMethod,
    pub seeds: Vec<SeedVerdict>,
    pub passed: bool,
}

impl SymmetryVerdict {
    pub fn pass_count(&self) -> usize {
        self.seeds.iter().filter(|s| s.passed).count()
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub init: InitMethod,
    pub include_hamerly: bool,
    pub max_iters: usize,
    pub epsilon: f64,
    /// Tie rule handed to the Lloyd reference run.
    pub lloyd_tie_break: TieBreak,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            init: InitMethod::Random,
            include_hamerly: false,
            max_iters: DEFAULT_MAX_ITERS,
            epsilon: 0.0,
            lloyd_tie_break: TieBreak::KeepCurrent,
        }
    }
}

fn first_divergence(a: &[Vec<u32>], b: &[Vec<u32>]) -> Option<usize> {
    let common = a.len().min(b.len());
    (0..common)
        .find(|&i| a[i] != b[i])
        .or_else(|| (a.len() != b.len()).then_some(common))
        .map(|i| i + 1)
}

pub fn compare(reference: &Solution, other: &Solution) -> Result<Comparison> {
    let first = first_divergence(&reference.history, &other.history);
    let ari = ari(&reference.assign, &other.assign)?;
    let sse_diff = (reference.sse - other.sse).abs();
    let centroids_identical = reference.centroids.to_bytes() == other.centroids.to_bytes();
    let identical = first.is_none();
    Ok(Comparison {
        algorithm: other.algorithm,
        iterations: other.iterations,
        assignments_identical: identical,
        first_divergent_iteration: first,
        ari,
        sse_diff,
        centroids_identical,
        passed: identical && ari == 1.0 && sse_diff == 0.0,
    })
}

/// Runs Lloyd and the accelerated solvers from identical initial centroids
/// for every seed and checks that their assignment sequences coincide.
pub fn verify_symmetry(data: &DataMatrix, k: usize, seeds: &[u64], opts: &VerifyOptions) -> Result<SymmetryVerdict> {
    if k < 2 {
        return Err(Error::config(format!("symmetry verification needs k >= 2, got {k}")));
    }
    let verdicts = seeds
        .iter()
        .map(|&seed| -> Result<SeedVerdict> {
            let init: CentroidSet = opts.init.init(data, k, seed, &mut OpCounters::new())?;
            let params = SolverParams {
                max_iters: opts.max_iters,
                epsilon: opts.epsilon,
                seed,
                record_history: true,
                tie_break: TieBreak::KeepCurrent,
            };
            let lloyd = run_lloyd(
                data,
                &init,
                &SolverParams {
                    tie_break: opts.lloyd_tie_break,
                    ..params.clone()
                },
            )?;
            let mut comparisons = vec![compare(&lloyd, &run_gkmeans(data, &init, &params)?)?];
            if opts.include_hamerly {
                comparisons.push(compare(&lloyd, &run_hamerly(data, &init, &params)?)?);
            }
            let passed = comparisons.iter().all(|c| c.passed);
            Ok(SeedVerdict {
                seed,
                lloyd_iterations: lloyd.iterations,
                lloyd_sse: lloyd.sse,
                comparisons,
                passed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymmetryVerdict {
        k,
        init: opts.init,
        passed: verdicts.iter().all(|v| v.passed),
        seeds: verdicts,
    })
}

/// Groups cells by (dataset, k) for display.
pub fn cells_by_group(cells: &[Cell]) -> BTreeMap<(String, usize), Vec<&Cell>> {
    let mut map: BTreeMap<(String, usize), Vec<&Cell>> = BTreeMap::new();
    for c in cells {
        map.entry((c.dataset.clone(), c.k)).or_default().push(c);
    }
    map
}
