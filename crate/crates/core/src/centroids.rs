use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `k` centers in `d` dimensions plus how far each moved in the latest update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidSet {
    centers: Vec<f64>,
    drift: Vec<f64>,
    k: usize,
    d: usize,
}

impl CentroidSet {
    pub fn from_flat(centers: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 || centers.is_empty() || !centers.len().is_multiple_of(d) {
            return Err(Error::Data(format!(
                "centroid buffer of length {} does not hold whole rows of dimension {d}",
                centers.len()
            )));
        }
        if centers.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite centroid component".into()));
        }
        let k = centers.len() / d;
        Ok(Self {
            centers,
            drift: vec![0.0; k],
            k,
            d,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.as_ref().len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: r.as_ref().len(),
                });
            }
            flat.extend_from_slice(r.as_ref());
        }
        Self::from_flat(flat, d)
    }

    pub(crate) fn with_drift(centers: Vec<f64>, drift: Vec<f64>, d: usize) -> Self {
        let k = centers.len() / d;
        debug_assert_eq!(drift.len(), k);
        Self { centers, drift, k, d }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.d..(j + 1) * self.d]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.centers.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.centers
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }

    /// Little-endian bytes of every center component, for equality checks
    /// across algorithms.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.centers.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}
