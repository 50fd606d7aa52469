//! Balanced Gaussian-mixture generator.
//!
//! Cluster `j` has mean `j·mean_separation` on every axis and a diagonal
//! covariance whose per-axis variances are drawn uniformly from
//! `[cov_low, cov_high]`, one draw per (cluster, axis). Every cluster
//! contributes exactly `per_cluster` rows, emitted cluster by cluster.
//!
//! Randomness: each cluster reads its own ChaCha8 stream (`seed`, stream
//! `j`). The `d` variances come first, then the samples row by row, each
//! component `mean + σ·z` with `z` drawn by the ziggurat standard-normal
//! sampler of `rand_distr`. Output is reproducible for a fixed build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub k: usize,
    pub per_cluster: usize,
    pub d: usize,
    pub mean_separation: f64,
    pub cov_low: f64,
    pub cov_high: f64,
    pub seed: u64,
}

/// Overlap presets. Separation starts at 3 with variances in `[1, 5]`; the
/// overlapped variants shrink separation by 1.5 and then by a further 0.5
/// with variances in `[8, 15]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Separated,
    Overlapped,
    HeavilyOverlapped,
}

impl Preset {
    pub fn params(self) -> (f64, f64, f64) {
        match self {
            Preset::Separated => (3.0, 1.0, 5.0),
            Preset::Overlapped => (1.5, 8.0, 15.0),
            Preset::HeavilyOverlapped => (1.0, 8.0, 15.0),
        }
    }

    pub fn spec(self, k: usize, per_cluster: usize, d: usize, seed: u64) -> MixtureSpec {
        let (mean_separation, cov_low, cov_high) = self.params();
        MixtureSpec {
            k,
            per_cluster,
            d,
            mean_separation,
            cov_low,
            cov_high,
            seed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Separated => "separated",
            Preset::Overlapped => "overlapped",
            Preset::HeavilyOverlapped => "heavily-overlapped",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separated" => Ok(Preset::Separated),
            "overlapped" => Ok(Preset::Overlapped),
            "heavily-overlapped" => Ok(Preset::HeavilyOverlapped),
            _ => Err(Error::config(format!("unknown preset {s:?}"))),
        }
    }
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.per_cluster == 0 || self.d == 0 {
            return Err(Error::config("k, per_cluster and d must all be at least 1"));
        }
        let finite = [self.mean_separation, self.cov_low, self.cov_high]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.mean_separation < 0.0 || self.cov_low < 0.0 || self.cov_low > self.cov_high {
            return Err(Error::config(
                "need 0 <= mean_separation and 0 <= cov_low <= cov_high, all finite",
            ));
        }
        Ok(())
    }

    pub fn mean(&self, cluster: usize) -> f64 {
        cluster as f64 * self.mean_separation
    }
}

/// Returns the data and the generating cluster of every row.
pub fn generate_gaussian_mixture(spec: &MixtureSpec) -> Result<(DataMatrix, Vec<usize>)> {
    spec.validate()?;
    let m = spec.k * spec.per_cluster;
    let mut values = Vec::with_capacity(m * spec.d);
    let mut labels = Vec::with_capacity(m);
    for j in 0..spec.k {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(j as u64);
        let sigma: Vec<f64> = (0..spec.d)
            .map(|_| rng.random_range(spec.cov_low..=spec.cov_high).sqrt())
            .collect();
        let mean = spec.mean(j);
        for _ in 0..spec.per_cluster {
            for s in &sigma {
                let z: f64 = rng.sample(StandardNormal);
                values.push(mean + s * z);
            }
            labels.push(j);
        }
    }
    Ok((DataMatrix::from_flat(values, spec.d)?, labels))
}
