//! `gkmeans` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 I/O or parse error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{run_benchmark, telemetry_csv, verify_symmetry, write_report, BenchConfig, SymmetryVerdict, VerifyOptions};
use crate::data::{read_csv, write_csv, write_labels, DataMatrix};
use crate::datagen::{generate_gaussian_mixture, MixtureSpec, Preset};
use crate::error::{Error, Result};
use crate::kernels::OpCounters;
use crate::metrics::{savings_csv, savings_report};
use crate::solvers::{Algorithm, InitMethod, SolverParams, TieBreak, DEFAULT_MAX_ITERS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gkmeans", version, about = "Exact accelerated k-means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a balanced Gaussian mixture.
    Generate(GenerateArgs),
    /// Cluster a CSV file.
    Run(RunArgs),
    /// Run a benchmark described by a JSON config.
    Bench(BenchArgs),
    /// Check that accelerated solvers reproduce Lloyd's assignments.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LabelColumn {
    None,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Separated,
    Overlapped,
    HeavilyOverlapped,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Separated => Preset::Separated,
            PresetArg::Overlapped => Preset::Overlapped,
            PresetArg::HeavilyOverlapped => Preset::HeavilyOverlapped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Lloyd,
    Gkmeans,
    Hamerly,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Lloyd => Algorithm::Lloyd,
            AlgorithmArg::Gkmeans => Algorithm::Gkmeans,
            AlgorithmArg::Hamerly => Algorithm::Hamerly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Random,
    Kmeanspp,
}

impl From<InitArg> for InitMethod {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Random => InitMethod::Random,
            InitArg::Kmeanspp => InitMethod::Kmeanspp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TieBreakArg {
    KeepCurrent,
    LowestIndex,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    preset: PresetArg,
    /// Number of mixture components.
    #[arg(long)]
    k: usize,
    #[arg(long)]
    per_cluster: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    /// Data CSV path.
    #[arg(long, default_value = "data.csv")]
    out: PathBuf,
    /// Labels path; defaults to `<out stem>.labels.csv` beside the data.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Also append the generating label as a last column of the data CSV.
    #[arg(long)]
    append_labels: bool,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    cov_low: Option<f64>,
    #[arg(long)]
    cov_high: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "gkmeans")]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
    /// Defaults to a time-derived seed, which is printed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Output prefix; files are `<prefix>.assign.csv`, `.centroids.csv`,
    /// `.telemetry.csv`, `.summary.json` (and `.savings.csv` for gkmeans).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    label_column: LabelColumn,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides any seed in the config.
    #[arg(long)]
    seed: u64,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Base seed; seed `i` of the suite is `seed + i`.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
    #[arg(long)]
    hamerly: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "none")]
    label_column: LabelColumn,
    /// Write the JSON verdict here; printed to stdout otherwise.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Tie rule for the Lloyd reference. Detector self-test only.
    #[arg(long, value_enum, default_value = "keep-current", hide = true)]
    lloyd_tie_break: TieBreakArg,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse { .. } | Error::Data(_) => EXIT_IO,
        Error::Config(_) | Error::DimensionMismatch { .. } | Error::Degenerate(_) | Error::Json(_) => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a).map(|()| EXIT_OK),
        Command::Run(a) => cmd_run(a).map(|()| EXIT_OK),
        Command::Bench(a) => cmd_bench(a).map(|()| EXIT_OK),
        Command::Verify(a) => cmd_verify(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

fn load(input: &Path, label_column: LabelColumn) -> Result<DataMatrix> {
    Ok(read_csv(input, label_column == LabelColumn::Last)?.0)
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let preset: Preset = a.preset.into();
    let base = preset.spec(a.k, a.per_cluster, a.d, a.seed);
    let spec = MixtureSpec {
        mean_separation: a.separation.unwrap_or(base.mean_separation),
        cov_low: a.cov_low.unwrap_or(base.cov_low),
        cov_high: a.cov_high.unwrap_or(base.cov_high),
        ..base
    };
    let (data, labels) = generate_gaussian_mixture(&spec)?;
    let labels_path = a.labels.unwrap_or_else(|| {
        let stem = a.out.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
        a.out.with_file_name(format!("{stem}.labels.csv"))
    });
    write_csv(&a.out, data.as_flat(), data.d(), a.append_labels.then_some(&labels[..]))?;
    write_labels(&labels_path, &labels)?;
    println!(
        "m={} d={} k={} preset={} -> {} (labels {})",
        data.m(),
        data.d(),
        spec.k,
        preset.name(),
        a.out.display(),
        labels_path.display()
    );
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let seed = a.seed.unwrap_or_else(|| {
        let s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64);
        eprintln!("notice: no --seed given, using time-derived seed {s}");
        s
    });
    let algorithm: Algorithm = a.algorithm.into();
    let init_method: InitMethod = a.init.into();
    let data = load(&a.input, a.label_column)?;
    let mut init_counters = OpCounters::new();
    let init = init_method.init(&data, a.k, seed, &mut init_counters)?;
    let params = SolverParams {
        max_iters: a.max_iters,
        epsilon: a.epsilon,
        seed,
        ..Default::default()
    };
    let start = Instant::now();
    let sol = algorithm.run(&data, &init, &params)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    write_labels(&with_suffix(&a.out, ".assign.csv"), &sol.assign)?;
    write_csv(&with_suffix(&a.out, ".centroids.csv"), sol.centroids.as_flat(), data.d(), None)?;
    write_text(&with_suffix(&a.out, ".telemetry.csv"), &telemetry_csv(&sol.telemetry))?;
    if algorithm == Algorithm::Gkmeans {
        let rows = savings_report(&sol.telemetry, data.m(), a.k);
        write_text(&with_suffix(&a.out, ".savings.csv"), &savings_csv(&rows))?;
    }
    let c = sol.counters;
    let summary = json!({
        "algorithm": algorithm,
        "init": init_method,
        "seed": seed,
        "k": a.k,
        "m": data.m(),
        "d": data.d(),
        "iterations": sol.iterations,
        "converged": sol.converged,
        "sse": sol.sse,
        "dc_total": c.dc_full,
        "dc_breakdown": {
            "point_to_centroid": c.dc_full - c.dc_neighbor,
            "centroid_to_centroid": c.dc_neighbor,
            "own_centroid_refresh": c.dc_le,
            "projections": c.proj_count,
            "init": init_counters.dc_full,
        },
        "elapsed_ms": elapsed_ms,
    });
    write_text(&with_suffix(&a.out, ".summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    println!(
        "{algorithm}: {} iterations, sse {}, {} distance computations",
        sol.iterations, sol.sse, c.dc_full
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| Error::io(&a.config, e))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::config("bench config must be a JSON object"))?;
    obj.insert("seed".into(), json!(a.seed));
    let mut config: BenchConfig = serde_json::from_value(value)?;
    let dir = a.config.parent().unwrap_or(Path::new("."));
    for source in &mut config.datasets {
        if let crate::bench::DatasetSource::Csv { path, .. } = source {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }
    let mut report = run_benchmark(&config)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_report(&mut report, &a.out)?;
    if let Some(note) = &report.energy_note {
        eprintln!("{note}");
    }
    for c in &report.cells {
        let pct = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.2}%"));
        println!(
            "{:<24} {:<8} k={:<4} dc {:>14.1} ± {:<10.1} rt {:>10.2} ms  DC(S) {:>8}  RT(S) {:>8}  failures {}",
            c.dataset,
            c.algorithm,
            c.k,
            c.dc_mean,
            c.dc_sd,
            c.rt_ms_mean,
            pct(c.dc_savings_pct),
            pct(c.rt_speedup_pct),
            c.failures
        );
    }
    Ok(())
}

fn print_verdict(v: &SymmetryVerdict) {
    for s in &v.seeds {
        for c in &s.comparisons {
            let first = c
                .first_divergent_iteration
                .map_or_else(|| "-".to_string(), |i| i.to_string());
            println!(
                "seed {:>6}  {:<8} {}  iterations {:>4}  ARI {}  SSE diff {:e}  first divergent iteration {}",
                s.seed,
                c.algorithm,
                if c.passed { "PASS" } else { "FAIL" },
                c.iterations,
                c.ari,
                c.sse_diff,
                first
            );
        }
    }
    println!(
        "{}/{} seeds passed: {}",
        v.pass_count(),
        v.seeds.len(),
        if v.passed { "PASS" } else { "FAIL" }
    );
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    if a.k < 2 {
        return Err(Error::config(format!("verification needs k >= 2, got {}", a.k)));
    }
    if a.seeds == 0 {
        return Err(Error::config("--seeds must be at least 1"));
    }
    let data = load(&a.input, a.label_column)?;
    let seeds: Vec<u64> = (0..a.seeds).map(|i| a.seed.wrapping_add(i)).collect();
    let opts = VerifyOptions {
        init: a.init.into(),
        include_hamerly: a.hamerly,
        max_iters: a.max_iters,
        epsilon: a.epsilon,
        lloyd_tie_break: match a.lloyd_tie_break {
            TieBreakArg::KeepCurrent => TieBreak::KeepCurrent,
            TieBreakArg::LowestIndex => TieBreak::LowestIndex,
        },
    };
    let verdict = verify_symmetry(&data, a.k, &seeds, &opts)?;
    let json = serde_json::to_string_pretty(&verdict)?;
    match &a.report {
        Some(path) => {
            write_text(path, &json)?;
            print_verdict(&verdict);
        }
        None => {
            print_verdict(&verdict);
            println!("{json}");
        }
    }
    Ok(if verdict.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::config("x")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Data("no rows".into())), EXIT_IO);
        let io = Error::io("/x", std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(exit_code(&io), EXIT_IO);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["gkmeans"]), EXIT_USAGE);
        assert_eq!(run(["gkmeans", "generate", "--k", "3"]), EXIT_USAGE);
        assert_eq!(run(["gkmeans", "--help"]), EXIT_OK);
    }

    #[test]
    fn suffixes_append() {
        assert_eq!(with_suffix(Path::new("out/run"), ".assign.csv"), PathBuf::from("out/run.assign.csv"));
    }
}
