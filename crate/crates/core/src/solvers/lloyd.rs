use super::{full_scan, initial_pass, lowest_index_scan, validate_run, Algorithm, Driver, IterationTelemetry, Solution, SolverParams, TieBreak};
use crate::centroids::CentroidSet;
use crate::data::DataMatrix;
use crate::error::Result;
use crate::kernels::dist_raw;

/// Lloyd's algorithm: every pass evaluates all `m·k` point-centroid
/// distances. This is the reference every accelerated solver must match.
pub fn run_lloyd(data: &DataMatrix, init: &CentroidSet, params: &SolverParams) -> Result<Solution> {
    validate_run(data, init, params, 1)?;
    let mut driver = Driver::new(data, init, params);
    let (mut state, _) = initial_pass(&mut driver);
    driver.finish_pass(&state, IterationTelemetry::default());

    while driver.update(&mut state) {
        let mut reassigned = 0;
        for (p, x) in data.rows().enumerate() {
            let scan = match params.tie_break {
                TieBreak::KeepCurrent => {
                    let cur = state.assign[p];
                    let d = dist_raw(x, driver.centroids.center(cur), &mut driver.counters);
                    full_scan(x, &driver.centroids, Some((cur, d)), &mut driver.counters)
                }
                TieBreak::LowestIndex => lowest_index_scan(x, &driver.centroids, &mut driver.counters),
            };
            if scan.best != state.assign[p] {
                reassigned += 1;
            }
            state.reassign(data, p, scan.best, scan.best_dist);
        }
        driver.finish_pass(
            &state,
            IterationTelemetry {
                reassigned,
                ..Default::default()
            },
        );
    }
    Ok(driver.into_solution(Algorithm::Lloyd, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> DataMatrix {
        DataMatrix::from_flat(vec![0.0, 1.0, 9.0, 10.0], 1).unwrap()
    }

    #[test]
    fn tiny_fixture_converges_to_optimum() {
        let init = CentroidSet::from_flat(vec![0.0, 10.0], 1).unwrap();
        let sol = run_lloyd(&tiny(), &init, &SolverParams::default()).unwrap();
        assert_eq!(sol.centroids.as_flat(), &[0.5, 9.5]);
        assert_eq!(sol.assign, vec![0, 0, 1, 1]);
        assert_eq!(sol.sse, 1.0);
        assert!(sol.converged);
        for t in &sol.telemetry {
            assert_eq!(t.dc_this_iter, 8);
        }
        assert_eq!(sol.counters.dc_full, 8 * sol.iterations as u64);
    }

    #[test]
    fn fixed_point_converges_in_one_iteration() {
        let data = DataMatrix::from_rows(&[[0.0, 0.0], [4.0, 1.0], [-3.0, 7.0]]).unwrap();
        let init = CentroidSet::from_flat(data.as_flat().to_vec(), 2).unwrap();
        let sol = run_lloyd(&data, &init, &SolverParams::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.sse, 0.0);
        assert_eq!(sol.assign, vec![0, 1, 2]);
    }

    #[test]
    fn max_iters_caps_passes() {
        let data = DataMatrix::from_flat((0..40).map(|i| ((i * 37) % 17) as f64).collect(), 1).unwrap();
        let init = CentroidSet::from_flat(vec![0.0, 1.0, 2.0], 1).unwrap();
        let params = SolverParams { max_iters: 2, ..Default::default() };
        let sol = run_lloyd(&data, &init, &params).unwrap();
        assert!(sol.iterations <= 2);
        assert_eq!(sol.telemetry.len(), sol.iterations);
    }
}
