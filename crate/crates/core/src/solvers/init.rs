use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::centroids::CentroidSet;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernels::{sq_dist_raw, OpCounters};

fn check_k(data: &DataMatrix, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::config(format!("k must be at least 2, got {k}")));
    }
    if k > data.m() {
        return Err(Error::config(format!(
            "k = {k} exceeds the number of points m = {}",
            data.m()
        )));
    }
    Ok(())
}

fn gather(data: &DataMatrix, rows: &[usize]) -> CentroidSet {
    let mut flat = Vec::with_capacity(rows.len() * data.d());
    for &r in rows {
        flat.extend_from_slice(data.row(r));
    }
    CentroidSet::from_flat(flat, data.d()).expect("rows of a valid matrix")
}

/// `k` distinct rows sampled without replacement (ChaCha8 seeded by `seed`).
pub fn init_random(data: &DataMatrix, k: usize, seed: u64) -> Result<CentroidSet> {
    check_k(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = index::sample(&mut rng, data.m(), k).into_vec();
    Ok(gather(data, &rows))
}

/// D² seeding. Each squared distance evaluated against a chosen center is
/// counted as a DC. When every remaining weight is zero the next center is
/// drawn uniformly from the rows not yet chosen.
pub fn init_kmeanspp(data: &DataMatrix, k: usize, seed: u64, counters: &mut OpCounters) -> Result<CentroidSet> {
    check_k(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..data.m());
    let rows = kmeanspp_rows(data, k, first, &mut rng, counters);
    Ok(gather(data, &rows))
}

pub(crate) fn kmeanspp_rows<R: Rng>(
    data: &DataMatrix,
    k: usize,
    first: usize,
    rng: &mut R,
    counters: &mut OpCounters,
) -> Vec<usize> {
    let m = data.m();
    let mut chosen = vec![first];
    let mut taken = vec![false; m];
    taken[first] = true;
    let mut weight: Vec<f64> = data
        .rows()
        .map(|x| {
            counters.dc_full += 1;
            sq_dist_raw(x, data.row(first))
        })
        .collect();

    while chosen.len() < k {
        let total: f64 = weight.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (p, &w) in weight.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(p);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            let free: Vec<usize> = (0..m).filter(|&p| !taken[p]).collect();
            free[rng.random_range(0..free.len())]
        };
        taken[next] = true;
        chosen.push(next);
        if chosen.len() < k {
            let c = data.row(next);
            for (p, w) in weight.iter_mut().enumerate() {
                counters.dc_full += 1;
                let dd = sq_dist_raw(data.row(p), c);
                if dd < *w {
                    *w = dd;
                }
            }
        }
    }
    chosen
}
