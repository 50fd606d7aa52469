//! Distance, midpoint and projection kernels plus the operation counters
//! every solver reports through.
//!
//! One "distance computation" (DC) is a single full d-dimensional Euclidean
//! distance between two vectors. Squared distances used purely for
//! comparisons are free; [`dist`] is the counted wrapper. Sign tests against
//! a bisecting hyperplane ([`he_test`]) are tallied separately in
//! `proj_count` and never touch `dc_full`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tallies of the work performed during one run.
///
/// `dc_le` and `dc_neighbor` are subsets of `dc_full`: own-centroid distance
/// refreshes and centroid-to-centroid distances respectively.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub dc_full: u64,
    pub dc_le: u64,
    pub dc_neighbor: u64,
    pub proj_count: u64,
}

impl OpCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Distance computations that were neither own-centroid refreshes nor
    /// centroid-to-centroid evaluations.
    pub fn dc_candidate(&self) -> u64 {
        self.dc_full - self.dc_le - self.dc_neighbor
    }

    /// Total excluding centroid-to-centroid distances.
    pub fn dc_point_only(&self) -> u64 {
        self.dc_full - self.dc_neighbor
    }

    pub fn since(&self, earlier: &OpCounters) -> OpCounters {
        OpCounters {
            dc_full: self.dc_full - earlier.dc_full,
            dc_le: self.dc_le - earlier.dc_le,
            dc_neighbor: self.dc_neighbor - earlier.dc_neighbor,
            proj_count: self.proj_count - earlier.proj_count,
        }
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Squared Euclidean distance. Not counted as a DC.
pub fn sq_dist(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(sq_dist_raw(a, b))
}

/// Euclidean distance; increments `dc_full` by one.
pub fn dist(a: &[f64], b: &[f64], counters: &mut OpCounters) -> Result<f64> {
    check_dims(a, b)?;
    Ok(dist_raw(a, b, counters))
}

pub fn midpoint(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_dims(a, b)?;
    Ok(midpoint_raw(a, b))
}

/// Returns true iff `x` lies strictly on the `affine` side of the hyperplane
/// through `mid` orthogonal to `affine`, i.e. `(x - mid) . affine > 0`.
///
/// With `mid` the midpoint of `c_i, c_j` and `affine = c_j - mid` this is
/// exactly "x is strictly closer to `c_j` than to `c_i`". Increments
/// `proj_count`; never touches `dc_full`.
pub fn he_test(mid: &[f64], affine: &[f64], x: &[f64], counters: &mut OpCounters) -> Result<bool> {
    check_dims(mid, affine)?;
    check_dims(mid, x)?;
    Ok(he_test_raw(mid, affine, x, counters))
}

// Unchecked variants for the solver inner loops. Callers guarantee equal
// lengths; debug builds still assert it.

#[inline]
pub(crate) fn sq_dist_raw(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            let t = x[l] - y[l];
            acc[l] += t * t;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        let t = x - y;
        tail += t * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn dist_raw(a: &[f64], b: &[f64], counters: &mut OpCounters) -> f64 {
    counters.dc_full += 1;
    sq_dist_raw(a, b).sqrt()
}

#[inline]
pub(crate) fn midpoint_raw(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

#[inline]
pub(crate) fn he_test_raw(mid: &[f64], affine: &[f64], x: &[f64], counters: &mut OpCounters) -> bool {
    debug_assert_eq!(mid.len(), x.len());
    debug_assert_eq!(affine.len(), x.len());
    counters.proj_count += 1;
    let mut acc = [0.0f64; 4];
    let mut cm = mid.chunks_exact(4);
    let mut ca = affine.chunks_exact(4);
    let mut cx = x.chunks_exact(4);
    for ((m, a), v) in (&mut cm).zip(&mut ca).zip(&mut cx) {
        for l in 0..4 {
            acc[l] += (v[l] - m[l]) * a[l];
        }
    }
    let mut tail = 0.0;
    for ((m, a), v) in cm.remainder().iter().zip(ca.remainder()).zip(cx.remainder()) {
        tail += (v - m) * a;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sq_dist_examples() {
        assert_eq!(sq_dist(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(sq_dist(&[7.0, 7.0], &[7.0, 7.0]).unwrap(), 0.0);
        assert_eq!(sq_dist(&[1.0], &[4.0]).unwrap(), 9.0);
    }

    #[test]
    fn sq_dist_does_not_count() {
        let c = OpCounters::new();
        let _ = sq_dist(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(c, OpCounters::default());
    }

    #[test]
    fn dist_examples_count_once() {
        let mut c = OpCounters::new();
        assert_eq!(dist(&[0.0, 0.0], &[3.0, 4.0], &mut c).unwrap(), 5.0);
        assert_eq!(c.dc_full, 1);
        assert_eq!(dist(&[2.0, 2.0], &[2.0, 2.0], &mut c).unwrap(), 0.0);
        assert_eq!(c.dc_full, 2);
        assert_eq!(dist(&[0.0], &[10.0], &mut c).unwrap(), 10.0);
        assert_eq!(c.dc_full, 3);
        assert_eq!(c.proj_count, 0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut c = OpCounters::new();
        assert!(matches!(
            sq_dist(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, actual: 2 })
        ));
        assert!(dist(&[1.0, 2.0], &[1.0], &mut c).is_err());
        assert!(midpoint(&[1.0, 2.0], &[1.0]).is_err());
        assert!(he_test(&[0.0, 0.0], &[1.0], &[0.0, 0.0], &mut c).is_err());
        assert!(he_test(&[0.0, 0.0], &[1.0, 1.0], &[0.0], &mut c).is_err());
        assert_eq!(c, OpCounters::default());
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(midpoint(&[0.0, 0.0], &[10.0, 0.0]).unwrap(), vec![5.0, 0.0]);
        assert_eq!(midpoint(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), vec![1.5, -2.0]);
        assert_eq!(midpoint(&[-2.0], &[2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn he_test_examples() {
        let mut c = OpCounters::new();
        assert!(he_test(&[5.0, 0.0], &[5.0, 0.0], &[7.0, 2.0], &mut c).unwrap());
        assert!(!he_test(&[5.0, 0.0], &[5.0, 0.0], &[5.0, 0.0], &mut c).unwrap());
        assert!(!he_test(&[5.0, 0.0], &[5.0, 0.0], &[1.0, 1.0], &mut c).unwrap());
        assert_eq!(c.proj_count, 3);
        assert_eq!(c.dc_full, 0);
    }

    #[test]
    fn counters_since() {
        let a = OpCounters { dc_full: 10, dc_le: 2, dc_neighbor: 3, proj_count: 4 };
        let b = OpCounters { dc_full: 25, dc_le: 5, dc_neighbor: 6, proj_count: 9 };
        let d = b.since(&a);
        assert_eq!(d, OpCounters { dc_full: 15, dc_le: 3, dc_neighbor: 3, proj_count: 5 });
        assert_eq!(b.dc_candidate(), 14);
        assert_eq!(b.dc_point_only(), 19);
    }

    fn vec_pair(max_d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1..=max_d).prop_flat_map(|d| {
            (
                prop::collection::vec(-1e3..1e3f64, d),
                prop::collection::vec(-1e3..1e3f64, d),
            )
        })
    }

    proptest! {
        #[test]
        fn dist_squared_matches_sq_dist((a, b) in vec_pair(70)) {
            let mut c = OpCounters::new();
            let d = dist(&a, &b, &mut c).unwrap();
            let s = sq_dist(&a, &b).unwrap();
            prop_assert!((d * d - s).abs() <= 1e-9 * s.max(1e-300));
        }

        #[test]
        fn sq_dist_matches_naive_sum((a, b) in vec_pair(70)) {
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            let s = sq_dist(&a, &b).unwrap();
            prop_assert!((naive - s).abs() <= 1e-12 * (1.0 + naive));
        }

        #[test]
        fn he_test_agrees_with_bisector(
            (ci, cj) in vec_pair(16),
            seed in prop::collection::vec(-1e3..1e3f64, 16),
        ) {
            let x = &seed[..ci.len()];
            let mid = midpoint(&ci, &cj).unwrap();
            let affine: Vec<f64> = cj.iter().zip(&mid).map(|(c, m)| c - m).collect();
            let di = sq_dist(x, &ci).unwrap();
            let dj = sq_dist(x, &cj).unwrap();
            prop_assume!((di - dj).abs() > 1e-9 * (1.0 + di));
            let mut c = OpCounters::new();
            prop_assert_eq!(he_test(&mid, &affine, x, &mut c).unwrap(), dj < di);
            prop_assert_eq!(c.dc_full, 0);
        }
    }
}
