use crate::data::DataMatrix;

/// Per-point assignment, cached own-centroid distance and per-cluster
/// membership tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignState {
    pub assign: Vec<usize>,
    /// `d(x_i, c_assign[i])` w.r.t. the centroids the solver last refreshed
    /// against.
    pub own_dist: Vec<f64>,
    pub counts: Vec<usize>,
    /// Row-major `k × d` componentwise member sums.
    pub sums: Vec<f64>,
    k: usize,
    d: usize,
}

impl AssignState {
    /// Builds state from a complete assignment, accumulating sums in
    /// ascending point order.
    pub fn from_assignment(data: &DataMatrix, k: usize, assign: Vec<usize>, own_dist: Vec<f64>) -> Self {
        debug_assert_eq!(assign.len(), data.m());
        debug_assert_eq!(own_dist.len(), data.m());
        let d = data.d();
        let mut s = Self {
            assign,
            own_dist,
            counts: vec![0; k],
            sums: vec![0.0; k * d],
            k,
            d,
        };
        s.recount(data);
        s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.assign.len()
    }

    /// Moves point `p` to cluster `to`, updating tallies incrementally.
    pub fn reassign(&mut self, data: &DataMatrix, p: usize, to: usize, dist: f64) {
        let from = self.assign[p];
        self.own_dist[p] = dist;
        if from == to {
            return;
        }
        let x = data.row(p);
        let d = self.d;
        self.counts[from] -= 1;
        self.counts[to] += 1;
        for (s, v) in self.sums[from * d..(from + 1) * d].iter_mut().zip(x) {
            *s -= v;
        }
        for (s, v) in self.sums[to * d..(to + 1) * d].iter_mut().zip(x) {
            *s += v;
        }
        self.assign[p] = to;
    }

    /// Recomputes counts and sums from scratch in ascending point order.
    pub fn recount(&mut self, data: &DataMatrix) {
        let d = self.d;
        #[cfg(debug_assertions)]
        let before = self.counts.clone();
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        for (p, &a) in self.assign.iter().enumerate() {
            self.counts[a] += 1;
            for (s, v) in self.sums[a * d..(a + 1) * d].iter_mut().zip(data.row(p)) {
                *s += v;
            }
        }
        #[cfg(debug_assertions)]
        if before.iter().sum::<usize>() == self.m() {
            debug_assert_eq!(before, self.counts, "incremental membership counts drifted");
        }
    }

    pub fn sum(&self, j: usize) -> &[f64] {
        &self.sums[j * self.d..(j + 1) * self.d]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reassign_keeps_tallies_consistent() {
        let data = DataMatrix::from_rows(&[[1.0, 1.0], [3.0, 3.0], [5.0, 5.0], [10.0, 0.0]]).unwrap();
        let mut s = AssignState::from_assignment(&data, 2, vec![0, 0, 0, 1], vec![0.0; 4]);
        assert_eq!(s.counts, vec![3, 1]);
        assert_eq!(s.sum(0), &[9.0, 9.0]);
        s.reassign(&data, 2, 1, 1.5);
        assert_eq!(s.counts, vec![2, 2]);
        assert_eq!(s.sum(0), &[4.0, 4.0]);
        assert_eq!(s.sum(1), &[15.0, 5.0]);
        assert_eq!(s.own_dist[2], 1.5);
        let snapshot = s.clone();
        s.recount(&data);
        assert_eq!(s, snapshot);
    }
}
