//! Geometric k-means: exact Lloyd iterations that skip most distance
//! computations by filtering points through three successively finer tests.
//!
//! For a point `x` in cluster `i` with `od = d(x, c_i)`:
//!
//! * **LE** (low expressive): `od ≤ s(c_i)`. No other centroid can be
//!   strictly closer, so the point is skipped outright.
//! * **LHE** (likely high expressive), per neighbor `l ∈ n(i)`:
//!   `od > ½·d(c_i, c_l)`. Otherwise `c_l` cannot be strictly closer.
//! * **HE** (high expressive): `(x − mid_il)·(c_l − mid_il) > 0`, i.e. `x`
//!   is strictly on `c_l`'s side of the bisecting hyperplane. Only then is
//!   `d(x, c_l)` computed.
//!
//! Centroids outside `n(i)` are never examined. Each pass after the first
//! refreshes `od` for every point (one DC each), derives exact cluster radii
//! from those distances, rebuilds the neighbor tables (`k(k−1)/2` DC) and
//! then filters.

use super::{initial_pass, validate_run, Algorithm, AssignState, Driver, IterationTelemetry, Solution, SolverParams};
use crate::centroids::CentroidSet;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernels::{dist_raw, he_test_raw, OpCounters};
use crate::neighbors::{compute_neighbor_tables, NeighborTables};

/// Outcome of one neighbor examination for a non-LE point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborCheck {
    pub neighbor: usize,
    pub lhe: bool,
    pub he: bool,
    /// `d(x, c_neighbor)`, present only when the HE test passed.
    pub candidate_dist: Option<f64>,
}

/// Filtering decision for a single point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointClass {
    Low,
    Examined {
        checks: Vec<NeighborCheck>,
        /// Resulting assignment and its distance.
        best: usize,
        best_dist: f64,
    },
}

impl PointClass {
    pub fn is_le(&self) -> bool {
        matches!(self, PointClass::Low)
    }

    pub fn is_lhe(&self) -> bool {
        matches!(self, PointClass::Examined { checks, .. } if checks.iter().any(|c| c.lhe))
    }

    pub fn is_he(&self) -> bool {
        matches!(self, PointClass::Examined { checks, .. } if checks.iter().any(|c| c.he))
    }
}

/// The filter for one point. Returns `None` for LE points, otherwise the
/// best centroid found. Neighbors are visited in ascending index order and a
/// candidate wins only if strictly closer than the best so far.
#[inline]
fn filter_point(
    x: &[f64],
    own: usize,
    own_dist: f64,
    centroids: &CentroidSet,
    tables: &NeighborTables,
    counters: &mut OpCounters,
    mut on_check: impl FnMut(NeighborCheck),
) -> Option<(usize, f64)> {
    if own_dist <= tables.nearest_half(own) {
        return None;
    }
    let mut best = own;
    let mut best_dist = own_dist;
    for (p, nb) in tables.neighbors(own).iter().enumerate() {
        if own_dist <= nb.half_dist {
            on_check(NeighborCheck {
                neighbor: nb.index,
                lhe: false,
                he: false,
                candidate_dist: None,
            });
            continue;
        }
        let (mid, affine) = tables.geometry(own, p);
        if !he_test_raw(mid, affine, x, counters) {
            on_check(NeighborCheck {
                neighbor: nb.index,
                lhe: true,
                he: false,
                candidate_dist: None,
            });
            continue;
        }
        let dl = dist_raw(x, centroids.center(nb.index), counters);
        on_check(NeighborCheck {
            neighbor: nb.index,
            lhe: true,
            he: true,
            candidate_dist: Some(dl),
        });
        if dl < best_dist {
            best = nb.index;
            best_dist = dl;
        }
    }
    Some((best, best_dist))
}

/// Classifies point `point_idx` exactly as the solver would in the current
/// pass. `state.own_dist[point_idx]` must be current w.r.t. `centroids`;
/// a stale value is not detected.
pub fn classify_point(
    point_idx: usize,
    data: &DataMatrix,
    centroids: &CentroidSet,
    tables: &NeighborTables,
    state: &AssignState,
    counters: &mut OpCounters,
) -> PointClass {
    let mut checks = Vec::new();
    let out = filter_point(
        data.row(point_idx),
        state.assign[point_idx],
        state.own_dist[point_idx],
        centroids,
        tables,
        counters,
        |c| checks.push(c),
    );
    match out {
        None => PointClass::Low,
        Some((best, best_dist)) => PointClass::Examined {
            checks,
            best,
            best_dist,
        },
    }
}

/// Read-only view handed to a [`GkObserver`] right before the filtering
/// loop of every pass after the first.
pub struct FilterView<'a> {
    /// 1-based index of the pass about to run.
    pub iteration: usize,
    pub data: &'a DataMatrix,
    pub centroids: &'a CentroidSet,
    pub tables: &'a NeighborTables,
    pub state: &'a AssignState,
}

pub trait GkObserver {
    fn before_filter(&mut self, view: &FilterView<'_>);
}

impl GkObserver for () {
    fn before_filter(&mut self, _: &FilterView<'_>) {}
}

impl<F: FnMut(&FilterView<'_>)> GkObserver for F {
    fn before_filter(&mut self, view: &FilterView<'_>) {
        self(view)
    }
}

pub fn run_gkmeans(data: &DataMatrix, init: &CentroidSet, params: &SolverParams) -> Result<Solution> {
    run_gkmeans_observed(data, init, params, &mut ())
}

pub fn run_gkmeans_observed<O: GkObserver + ?Sized>(
    data: &DataMatrix,
    init: &CentroidSet,
    params: &SolverParams,
    observer: &mut O,
) -> Result<Solution> {
    if init.k() < 2 {
        return Err(Error::config(format!(
            "geometric k-means needs k >= 2, got {}",
            init.k()
        )));
    }
    validate_run(data, init, params, 2)?;
    let k = init.k();
    let mut driver = Driver::new(data, init, params);
    let (mut state, _) = initial_pass(&mut driver);
    driver.finish_pass(&state, IterationTelemetry::default());

    let mut radii = vec![0.0; k];
    while driver.update(&mut state) {
        radii.iter_mut().for_each(|r| *r = 0.0);
        for (p, x) in data.rows().enumerate() {
            let a = state.assign[p];
            let od = dist_raw(x, driver.centroids.center(a), &mut driver.counters);
            driver.counters.dc_le += 1;
            state.own_dist[p] = od;
            if od > radii[a] {
                radii[a] = od;
            }
        }
        let tables = compute_neighbor_tables(&driver.centroids, &radii, &mut driver.counters)?;
        observer.before_filter(&FilterView {
            iteration: driver.iterations() + 1,
            data,
            centroids: &driver.centroids,
            tables: &tables,
            state: &state,
        });

        let mut row = IterationTelemetry {
            neighbor_pairs: tables.neighbor_pairs(),
            ..Default::default()
        };
        for (p, x) in data.rows().enumerate() {
            let own = state.assign[p];
            let mut lhe = false;
            let mut he = false;
            let out = filter_point(
                x,
                own,
                state.own_dist[p],
                &driver.centroids,
                &tables,
                &mut driver.counters,
                |c| {
                    lhe |= c.lhe;
                    he |= c.he;
                },
            );
            match out {
                None => row.le_count += 1,
                Some((best, best_dist)) => {
                    row.lhe_count += lhe as usize;
                    row.he_count += he as usize;
                    if best != own {
                        row.reassigned += 1;
                        state.reassign(data, p, best, best_dist);
                    }
                }
            }
        }
        driver.finish_pass(&state, row);
    }
    Ok(driver.into_solution(Algorithm::Gkmeans, state))
}
