//! Exact k-means solvers sharing one initialization, one centroid update,
//! one tie-break rule and one convergence test, so that their assignment
//! sequences can be compared bit for bit.
//!
//! Iteration structure, common to all solvers:
//!
//! 1. a full assignment pass against the initial centroids (iteration 1);
//! 2. repeat: update centroids, record SSE, stop if the largest centroid
//!    displacement is `≤ epsilon` or `max_iters` assignment passes have run,
//!    otherwise run the next assignment pass.
//!
//! A point changes cluster only for a strictly smaller distance; ties with
//! other centroids resolve to the lowest index.

mod geometric;
mod hamerly;
mod init;
mod lloyd;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use geometric::{
    classify_point, run_gkmeans, run_gkmeans_observed, FilterView, GkObserver, NeighborCheck, PointClass,
};
pub use hamerly::run_hamerly;
pub use init::{init_kmeanspp, init_random};
pub use lloyd::run_lloyd;
pub use state::AssignState;

use crate::centroids::CentroidSet;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernels::{dist_raw, sq_dist_raw, OpCounters};

pub const DEFAULT_MAX_ITERS: usize = 500;

/// How a full scan resolves a tie between the current centroid and another.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Keep the current assignment unless a centroid is strictly closer.
    #[default]
    KeepCurrent,
    /// Ignore the current assignment and take the lowest-index argmin.
    /// Only Lloyd honors this; it exists so the symmetry verifier can be
    /// shown to catch a divergence.
    LowestIndex,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverParams {
    pub max_iters: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Keep every iteration's assignment vector in [`Solution::history`].
    #[serde(default)]
    pub record_history: bool,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            epsilon: 0.0,
            seed: 0,
            record_history: false,
            tie_break: TieBreak::KeepCurrent,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::config("epsilon must be finite and non-negative"));
        }
        Ok(())
    }
}

/// One row per assignment pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTelemetry {
    pub iter: usize,
    /// Σ|n(i)| over all centroids.
    pub neighbor_pairs: usize,
    pub le_count: usize,
    pub lhe_count: usize,
    pub he_count: usize,
    pub reassigned: usize,
    pub dc_this_iter: u64,
    pub dc_neighbor_this_iter: u64,
    pub proj_this_iter: u64,
    /// `(m − le_count)·k`
    pub pdc1: u64,
    /// `lhe_count·k`
    pub pdc2: u64,
    /// SSE of this pass's assignment against the centroids updated from it.
    pub sse_after_update: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lloyd,
    Gkmeans,
    Hamerly,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Lloyd, Algorithm::Gkmeans, Algorithm::Hamerly];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lloyd => "lloyd",
            Algorithm::Gkmeans => "gkmeans",
            Algorithm::Hamerly => "hamerly",
        }
    }

    pub fn run(self, data: &DataMatrix, init: &CentroidSet, params: &SolverParams) -> Result<Solution> {
        match self {
            Algorithm::Lloyd => run_lloyd(data, init, params),
            Algorithm::Gkmeans => run_gkmeans(data, init, params),
            Algorithm::Hamerly => run_hamerly(data, init, params),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lloyd" | "kmeans" => Ok(Algorithm::Lloyd),
            "gkmeans" | "geometric" => Ok(Algorithm::Gkmeans),
            "hamerly" => Ok(Algorithm::Hamerly),
            _ => Err(Error::config(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    #[default]
    Random,
    Kmeanspp,
}

impl InitMethod {
    pub fn name(self) -> &'static str {
        match self {
            InitMethod::Random => "random",
            InitMethod::Kmeanspp => "kmeanspp",
        }
    }

    pub fn init(self, data: &DataMatrix, k: usize, seed: u64, counters: &mut OpCounters) -> Result<CentroidSet> {
        match self {
            InitMethod::Random => init_random(data, k, seed),
            InitMethod::Kmeanspp => init_kmeanspp(data, k, seed, counters),
        }
    }
}

impl FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(InitMethod::Random),
            "kmeanspp" | "kmeans++" | "k-means++" => Ok(InitMethod::Kmeanspp),
            _ => Err(Error::config(format!("unknown init method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub algorithm: Algorithm,
    pub centroids: CentroidSet,
    pub assign: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub sse: f64,
    pub telemetry: Vec<IterationTelemetry>,
    pub counters: OpCounters,
    /// Assignment after every pass, when requested.
    pub history: Vec<Vec<u32>>,
}

impl Solution {
    pub fn sse_series(&self) -> Vec<f64> {
        self.telemetry.iter().map(|t| t.sse_after_update).collect()
    }
}

pub(crate) fn validate_run(data: &DataMatrix, init: &CentroidSet, params: &SolverParams, min_k: usize) -> Result<()> {
    params.validate()?;
    if init.d() != data.d() {
        return Err(Error::DimensionMismatch {
            expected: data.d(),
            actual: init.d(),
        });
    }
    if init.k() < min_k {
        return Err(Error::config(format!("k must be at least {min_k}, got {}", init.k())));
    }
    if init.k() > data.m() {
        return Err(Error::config(format!(
            "k = {} exceeds the number of points m = {}",
            init.k(),
            data.m()
        )));
    }
    Ok(())
}

/// Outcome of scanning every centroid for one point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scan {
    pub best: usize,
    pub best_dist: f64,
    /// Smallest distance to any centroid other than `best`.
    pub second_dist: f64,
}

/// Distances from `x` to all centroids (each counted), resolved with the
/// shared tie-break. `current` is the point's assignment and the already
/// computed distance to it, if any; that distance is not recomputed.
#[inline]
pub(crate) fn full_scan(
    x: &[f64],
    centroids: &CentroidSet,
    current: Option<(usize, f64)>,
    counters: &mut OpCounters,
) -> Scan {
    let k = centroids.k();
    let (skip, mut best, mut best_dist) = match current {
        Some((c, d)) => (c, c, d),
        None => (0, 0, dist_raw(x, centroids.center(0), counters)),
    };
    let mut second_dist = f64::INFINITY;
    for j in 0..k {
        if j == skip {
            continue;
        }
        let dj = dist_raw(x, centroids.center(j), counters);
        if dj < best_dist {
            second_dist = best_dist;
            best = j;
            best_dist = dj;
        } else if dj < second_dist {
            second_dist = dj;
        }
    }
    Scan {
        best,
        best_dist,
        second_dist,
    }
}

/// Lowest-index argmin over all centroids, ignoring the current assignment.
pub(crate) fn lowest_index_scan(x: &[f64], centroids: &CentroidSet, counters: &mut OpCounters) -> Scan {
    full_scan(x, centroids, None, counters)
}

/// New centers as member means accumulated in ascending point order. Empty
/// clusters keep their previous center. Drift is the Euclidean displacement
/// of each center and is not counted as a DC.
pub fn update_centroids(data: &DataMatrix, state: &mut AssignState, prev: &CentroidSet) -> CentroidSet {
    state.recount(data);
    let d = data.d();
    let k = prev.k();
    let mut centers = Vec::with_capacity(k * d);
    let mut drift = Vec::with_capacity(k);
    for j in 0..k {
        let old = prev.center(j);
        let n = state.counts[j];
        if n == 0 {
            centers.extend_from_slice(old);
            drift.push(0.0);
            continue;
        }
        let inv = n as f64;
        let start = centers.len();
        centers.extend(state.sum(j).iter().map(|s| s / inv));
        drift.push(sq_dist_raw(old, &centers[start..]).sqrt());
    }
    CentroidSet::with_drift(centers, drift, d)
}

/// Σ‖x_i − c_assign[i]‖² in ascending point order; uncounted.
pub(crate) fn sse_of(data: &DataMatrix, centroids: &CentroidSet, assign: &[usize]) -> f64 {
    data.rows()
        .zip(assign)
        .map(|(x, &a)| sq_dist_raw(x, centroids.center(a)))
        .sum()
}

/// Shared outer-loop bookkeeping: centroid update, SSE, stopping rule.
pub(crate) struct Driver<'a> {
    pub data: &'a DataMatrix,
    pub params: &'a SolverParams,
    pub centroids: CentroidSet,
    pub counters: OpCounters,
    pub telemetry: Vec<IterationTelemetry>,
    pub history: Vec<Vec<u32>>,
    pub converged: bool,
    mark: OpCounters,
}

impl<'a> Driver<'a> {
    pub fn new(data: &'a DataMatrix, init: &CentroidSet, params: &'a SolverParams) -> Self {
        Self {
            data,
            params,
            centroids: init.clone(),
            counters: OpCounters::new(),
            telemetry: Vec::new(),
            history: Vec::new(),
            converged: false,
            mark: OpCounters::new(),
        }
    }

    pub fn iterations(&self) -> usize {
        self.telemetry.len()
    }

    /// Closes an assignment pass: fills counters-derived fields of `row`.
    pub fn finish_pass(&mut self, state: &AssignState, mut row: IterationTelemetry) {
        let delta = self.counters.since(&self.mark);
        self.mark = self.counters;
        let m = self.data.m() as u64;
        let k = self.centroids.k() as u64;
        row.iter = self.telemetry.len() + 1;
        row.dc_this_iter = delta.dc_full;
        row.dc_neighbor_this_iter = delta.dc_neighbor;
        row.proj_this_iter = delta.proj_count;
        row.pdc1 = (m - row.le_count as u64) * k;
        row.pdc2 = row.lhe_count as u64 * k;
        self.telemetry.push(row);
        if self.params.record_history {
            self.history.push(state.assign.iter().map(|&a| a as u32).collect());
        }
    }

    /// Updates centroids from `state`. Returns true when another assignment
    /// pass should run.
    pub fn update(&mut self, state: &mut AssignState) -> bool {
        let next = update_centroids(self.data, state, &self.centroids);
        let sse = sse_of(self.data, &next, &state.assign);
        if let Some(last) = self.telemetry.last_mut() {
            last.sse_after_update = sse;
        }
        self.centroids = next;
        if self.centroids.max_drift() <= self.params.epsilon {
            self.converged = true;
            return false;
        }
        self.iterations() < self.params.max_iters
    }

    pub fn into_solution(self, algorithm: Algorithm, state: AssignState) -> Solution {
        let sse = self.telemetry.last().map_or(0.0, |t| t.sse_after_update);
        Solution {
            algorithm,
            centroids: self.centroids,
            assign: state.assign,
            iterations: self.telemetry.len(),
            converged: self.converged,
            sse,
            telemetry: self.telemetry,
            counters: self.counters,
            history: self.history,
        }
    }
}

/// Iteration 1 for every solver: full scan from no prior assignment.
pub(crate) fn initial_pass(driver: &mut Driver<'_>) -> (AssignState, Vec<f64>) {
    let data = driver.data;
    let mut assign = Vec::with_capacity(data.m());
    let mut own = Vec::with_capacity(data.m());
    let mut second = Vec::with_capacity(data.m());
    for x in data.rows() {
        let s = full_scan(x, &driver.centroids, None, &mut driver.counters);
        assign.push(s.best);
        own.push(s.best_dist);
        second.push(s.second_dist);
    }
    let state = AssignState::from_assignment(data, driver.centroids.k(), assign, own);
    (state, second)
}
