//! Clustering-quality and analysis metrics.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::centroids::CentroidSet;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernels::sq_dist_raw;
use crate::solvers::IterationTelemetry;

/// Sum of squared distances from each point to its assigned centroid.
/// Diagnostic only; no DC is counted.
pub fn sse(data: &DataMatrix, centroids: &CentroidSet, assign: &[usize]) -> Result<f64> {
    if assign.len() != data.m() {
        return Err(Error::DimensionMismatch {
            expected: data.m(),
            actual: assign.len(),
        });
    }
    if centroids.d() != data.d() {
        return Err(Error::DimensionMismatch {
            expected: data.d(),
            actual: centroids.d(),
        });
    }
    if let Some(&bad) = assign.iter().find(|&&a| a >= centroids.k()) {
        return Err(Error::Data(format!(
            "label {bad} out of range for k = {}",
            centroids.k()
        )));
    }
    Ok(data
        .rows()
        .zip(assign)
        .map(|(x, &a)| sq_dist_raw(x, centroids.center(a)))
        .sum())
}

fn pairs(n: u64) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Adjusted Rand index from exact integer pair counts.
///
/// Returns 1.0 when both partitions are trivially identical (both a single
/// cluster, or both all singletons), where the chance-corrected ratio is 0/0.
pub fn ari<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::Degenerate("ARI needs at least two labels".into()));
    }
    let mut cells: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: u128 = cells.values().map(|&n| pairs(n)).sum();
    let sum_a: u128 = rows.values().map(|&n| pairs(n)).sum();
    let sum_b: u128 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(a.len() as u64);

    let expected = sum_a as f64 * sum_b as f64 / total as f64;
    let max = 0.5 * (sum_a as f64 + sum_b as f64);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index as f64 - expected) / (max - expected))
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Degenerate("pearson needs at least two samples".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// One row of the LE/LHE/HE savings table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsRow {
    pub iter: usize,
    pub neighbor_pairs: usize,
    /// `100·Σ|n(i)| / k²`
    pub neighborhood_pct: f64,
    pub le_count: usize,
    /// `le_count / m`
    pub le_fraction: f64,
    pub pdc1: u64,
    pub lhe_count: usize,
    /// `(PDC1 − |LHE|)/PDC1·100`; `None` when PDC1 = 0.
    pub pdc1_savings_pct: Option<f64>,
    pub pdc2: u64,
    pub he_count: usize,
    /// `(PDC2 − |HE|)/PDC2·100`; `None` when PDC2 = 0.
    pub pdc2_savings_pct: Option<f64>,
}

pub fn savings_report(telemetry: &[IterationTelemetry], m: usize, k: usize) -> Vec<SavingsRow> {
    let pct = |base: u64, used: usize| (base > 0).then(|| (base as f64 - used as f64) / base as f64 * 100.0);
    telemetry
        .iter()
        .map(|t| {
            let pdc1 = (m - t.le_count) as u64 * k as u64;
            let pdc2 = t.lhe_count as u64 * k as u64;
            SavingsRow {
                iter: t.iter,
                neighbor_pairs: t.neighbor_pairs,
                neighborhood_pct: 100.0 * t.neighbor_pairs as f64 / (k * k) as f64,
                le_count: t.le_count,
                le_fraction: t.le_count as f64 / m as f64,
                pdc1,
                lhe_count: t.lhe_count,
                pdc1_savings_pct: pct(pdc1, t.lhe_count),
                pdc2,
                he_count: t.he_count,
                pdc2_savings_pct: pct(pdc2, t.he_count),
            }
        })
        .collect()
}

pub fn savings_csv(rows: &[SavingsRow]) -> String {
    let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
    let mut out = String::from(
        "iter,neighbor_pairs,neighborhood_pct,le_count,le_fraction,pdc1,lhe_count,pdc1_savings_pct,pdc2,he_count,pdc2_savings_pct\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{},{:.6},{},{},{},{},{},{}\n",
            r.iter,
            r.neighbor_pairs,
            r.neighborhood_pct,
            r.le_count,
            r.le_fraction,
            r.pdc1,
            r.lhe_count,
            na(r.pdc1_savings_pct),
            r.pdc2,
            r.he_count,
            na(r.pdc2_savings_pct),
        ));
    }
    out
}
