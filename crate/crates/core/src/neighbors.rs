//! Neighbor-centroid discovery.
//!
//! Centroid `j` is a neighbor of centroid `i` when
//! `½·d(c_i, c_j) ≤ r_i + s_i`, where `r_i` is the radius of cluster `i` and
//! `s_i` is half the distance from `c_i` to its nearest other centroid. A
//! point of cluster `i` can only ever be strictly closer to a neighbor of `i`
//! than to `c_i`, so all other centroids are skipped. The relation is
//! directional because it depends on `r_i`.
//!
//! Only the nearest other centroid is tracked per row; nothing is sorted.

use crate::centroids::CentroidSet;
use crate::error::{Error, Result};
use crate::kernels::{dist_raw, midpoint_raw, OpCounters};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEntry {
    pub index: usize,
    /// `½·d(c_i, c_index)`.
    pub half_dist: f64,
}

/// Half inter-centroid distances, nearest-half-distances, radii, directional
/// neighbor lists and, for every admitted ordered pair `(i, j)`, the pair
/// midpoint and the affine vector `c_j − mid`.
#[derive(Debug, Clone)]
pub struct NeighborTables {
    k: usize,
    d: usize,
    half: Vec<f64>,
    nearest_half: Vec<f64>,
    radii: Vec<f64>,
    offsets: Vec<usize>,
    entries: Vec<NeighborEntry>,
    mids: Vec<f64>,
    affines: Vec<f64>,
}

/// Builds the neighbor tables for `centroids` given per-cluster `radii`.
///
/// Performs exactly `k(k−1)/2` centroid-pair distance evaluations, each
/// counted in both `dc_full` and `dc_neighbor`.
pub fn compute_neighbor_tables(
    centroids: &CentroidSet,
    radii: &[f64],
    counters: &mut OpCounters,
) -> Result<NeighborTables> {
    let k = centroids.k();
    let d = centroids.d();
    if k < 2 {
        return Err(Error::config(format!("neighbor tables need k >= 2, got {k}")));
    }
    if radii.len() != k {
        return Err(Error::config(format!("expected {k} radii, got {}", radii.len())));
    }
    if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::config("radii must be finite and non-negative"));
    }
    if centroids.as_flat().iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite centroid component".into()));
    }

    let mut half = vec![0.0; k * k];
    let mut nearest_half = vec![f64::INFINITY; k];
    for i in 0..k {
        half[i * k + i] = f64::INFINITY;
        for j in i + 1..k {
            let h = 0.5 * dist_raw(centroids.center(i), centroids.center(j), counters);
            counters.dc_neighbor += 1;
            half[i * k + j] = h;
            half[j * k + i] = h;
            if h < nearest_half[i] {
                nearest_half[i] = h;
            }
            if h < nearest_half[j] {
                nearest_half[j] = h;
            }
        }
    }

    let mut offsets = Vec::with_capacity(k + 1);
    let mut entries = Vec::new();
    let mut mids = Vec::new();
    let mut affines = Vec::new();
    offsets.push(0);
    for i in 0..k {
        let bound = radii[i] + nearest_half[i];
        let ci = centroids.center(i);
        for j in 0..k {
            let h = half[i * k + j];
            if i != j && h <= bound {
                let cj = centroids.center(j);
                let mid = midpoint_raw(ci, cj);
                affines.extend(cj.iter().zip(&mid).map(|(c, m)| c - m));
                mids.extend_from_slice(&mid);
                entries.push(NeighborEntry { index: j, half_dist: h });
            }
        }
        offsets.push(entries.len());
    }

    Ok(NeighborTables {
        k,
        d,
        half,
        nearest_half,
        radii: radii.to_vec(),
        offsets,
        entries,
        mids,
        affines,
    })
}

impl NeighborTables {
    pub fn k(&self) -> usize {
        self.k
    }

    /// `½·d(c_i, c_j)`; `+∞` on the diagonal.
    #[inline]
    pub fn half(&self, i: usize, j: usize) -> f64 {
        self.half[i * self.k + j]
    }

    /// `s(c_i)`: half the distance to the nearest other centroid.
    #[inline]
    pub fn nearest_half(&self, i: usize) -> f64 {
        self.nearest_half[i]
    }

    pub fn nearest_halves(&self) -> &[f64] {
        &self.nearest_half
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Neighbors of centroid `i` in ascending index order.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[NeighborEntry] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn neighbor_indices(&self, i: usize) -> Vec<usize> {
        self.neighbors(i).iter().map(|e| e.index).collect()
    }

    pub fn is_neighbor(&self, i: usize, j: usize) -> bool {
        self.position(i, j).is_some()
    }

    /// Sum of neighbor-list lengths.
    pub fn neighbor_pairs(&self) -> usize {
        self.entries.len()
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let base = self.offsets[i];
        self.neighbors(i)
            .binary_search_by_key(&j, |e| e.index)
            .ok()
            .map(|p| base + p)
    }

    /// Midpoint and affine vector for the `p`-th neighbor of `i`.
    #[inline]
    pub(crate) fn geometry(&self, i: usize, p: usize) -> (&[f64], &[f64]) {
        let e = self.offsets[i] + p;
        let r = e * self.d..(e + 1) * self.d;
        (&self.mids[r.clone()], &self.affines[r])
    }

    /// Midpoint of `c_i, c_j` if either orientation is an admitted pair.
    pub fn midpoint(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.position(i, j)
            .or_else(|| self.position(j, i))
            .map(|e| &self.mids[e * self.d..(e + 1) * self.d])
    }

    /// `c_j − mid(c_i, c_j)` if `j` is a neighbor of `i`.
    pub fn affine(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.position(i, j)
            .map(|e| &self.affines[e * self.d..(e + 1) * self.d])
    }
}
