use super::{full_scan, initial_pass, validate_run, Algorithm, Driver, IterationTelemetry, Solution, SolverParams};
use crate::centroids::CentroidSet;
use crate::data::DataMatrix;
use crate::error::Result;
use crate::kernels::dist_raw;

/// Hamerly's algorithm: one upper bound on the distance to the assigned
/// centroid and one lower bound on the distance to every other centroid per
/// point. Bounds are loosened by centroid drift after each update; a point
/// is rescanned only when its upper bound exceeds
/// `max(lower bound, s(c_own))`, and then only after tightening the upper
/// bound fails to settle it.
pub fn run_hamerly(data: &DataMatrix, init: &CentroidSet, params: &SolverParams) -> Result<Solution> {
    validate_run(data, init, params, 1)?;
    let k = init.k();
    let mut driver = Driver::new(data, init, params);
    let (mut state, mut lower) = initial_pass(&mut driver);
    let mut upper = state.own_dist.clone();
    driver.finish_pass(&state, IterationTelemetry::default());

    let mut half_nearest = vec![f64::INFINITY; k];
    while driver.update(&mut state) {
        let drift = driver.centroids.drift();
        // largest and second-largest drift, for the shared lower bound
        let (mut top, mut top_idx, mut runner) = (0.0f64, usize::MAX, 0.0f64);
        for (j, &dj) in drift.iter().enumerate() {
            if dj > top {
                runner = top;
                top = dj;
                top_idx = j;
            } else if dj > runner {
                runner = dj;
            }
        }
        for (p, &a) in state.assign.iter().enumerate() {
            upper[p] += drift[a];
            lower[p] -= if a == top_idx { runner } else { top };
        }

        half_nearest.iter_mut().for_each(|s| *s = f64::INFINITY);
        for i in 0..k {
            for j in i + 1..k {
                let h = 0.5 * dist_raw(driver.centroids.center(i), driver.centroids.center(j), &mut driver.counters);
                driver.counters.dc_neighbor += 1;
                half_nearest[i] = half_nearest[i].min(h);
                half_nearest[j] = half_nearest[j].min(h);
            }
        }

        let mut row = IterationTelemetry::default();
        for (p, x) in data.rows().enumerate() {
            let a = state.assign[p];
            let bound = half_nearest[a].max(lower[p]);
            if upper[p] <= bound {
                continue;
            }
            let tight = dist_raw(x, driver.centroids.center(a), &mut driver.counters);
            driver.counters.dc_le += 1;
            upper[p] = tight;
            state.own_dist[p] = tight;
            if tight <= bound {
                continue;
            }
            let scan = full_scan(x, &driver.centroids, Some((a, tight)), &mut driver.counters);
            upper[p] = scan.best_dist;
            lower[p] = scan.second_dist;
            if scan.best != a {
                row.reassigned += 1;
                state.reassign(data, p, scan.best, scan.best_dist);
            }
        }
        driver.finish_pass(&state, row);
    }
    Ok(driver.into_solution(Algorithm::Hamerly, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::run_lloyd;

    fn tiny() -> DataMatrix {
        DataMatrix::from_flat(vec![0.0, 1.0, 9.0, 10.0], 1).unwrap()
    }

    #[test]
    fn tiny_fixture_matches_lloyd() {
        let init = CentroidSet::from_flat(vec![0.0, 10.0], 1).unwrap();
        let params = SolverParams { record_history: true, ..Default::default() };
        let h = run_hamerly(&tiny(), &init, &params).unwrap();
        let l = run_lloyd(&tiny(), &init, &params).unwrap();
        assert_eq!(h.history, l.history);
        assert_eq!(h.centroids, l.centroids);
        assert_eq!(h.sse.to_bits(), l.sse.to_bits());
        assert!(h.counters.dc_full <= 8 * h.iterations as u64);
    }

    #[test]
    fn fixed_point_single_iteration() {
        let data = DataMatrix::from_flat(vec![1.0, 5.0, 20.0], 1).unwrap();
        let init = CentroidSet::from_flat(vec![1.0, 5.0, 20.0], 1).unwrap();
        let sol = run_hamerly(&data, &init, &SolverParams::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.sse, 0.0);
    }

    #[test]
    fn pruning_engages_after_second_pass() {
        // init {0, 1}: pass 1 puts 1, 9, 10 in cluster 1; the centers then
        // move to {0, 20/3}, pass 2 moves 1 across, pass 3 settles everything.
        let init = CentroidSet::from_flat(vec![0.0, 1.0], 1).unwrap();
        let sol = run_hamerly(&tiny(), &init, &SolverParams::default()).unwrap();
        let lloyd = run_lloyd(&tiny(), &init, &SolverParams::default()).unwrap();
        assert_eq!(sol.assign, lloyd.assign);
        assert!(sol.iterations >= 3);
        for t in &sol.telemetry[2..] {
            // k(k-1)/2 = 1 centroid distance plus fewer than m·k point distances
            assert!(t.dc_this_iter - t.dc_neighbor_this_iter < 8, "{t:?}");
        }
    }
}
