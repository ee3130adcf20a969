use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{check_tau, Adjacency};

/// Default cap on placements tried by the grid search.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Gap {
    Edge,
    NonEdge,
    Tie,
}

/// Whether some `z` on the grid `{0, 1/m, ..., (m-1)/m}^n` realizes `x` with
/// every pair strictly inside or strictly outside distance `tau/2`.
///
/// Needs `grid_m >= 4n`. Fails with a resource error once more than
/// [`DEFAULT_NODE_BUDGET`] placements have been tried.
pub fn is_realizable(x: &Adjacency, tau: f64, grid_m: usize) -> Result<bool> {
    is_realizable_with_budget(x, tau, grid_m, DEFAULT_NODE_BUDGET)
}

pub fn is_realizable_with_budget(
    x: &Adjacency,
    tau: f64,
    grid_m: usize,
    budget: u64,
) -> Result<bool> {
    Ok(grid_witness(x, tau, grid_m, budget)?.is_some())
}

/// A grid witness for `x`: integer positions in `0..grid_m`, or `None`.
pub fn grid_witness(
    x: &Adjacency,
    tau: f64,
    grid_m: usize,
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    check_tau(tau)?;
    let n = x.n();
    if grid_m < 4 * n.max(1) {
        return Err(Error::InvalidParams(format!(
            "grid_m = {grid_m} must be at least 4n = {}",
            4 * n
        )));
    }
    if n <= 1 {
        return Ok(Some(vec![0; n]));
    }
    let thr = grid_m as f64 * tau;
    let gap: Vec<Gap> = (0..=grid_m / 2)
        .map(|d| {
            let s = 2.0 * d as f64;
            if (s - thr).abs() < 1e-9 {
                Gap::Tie
            } else if s < thr {
                Gap::Edge
            } else {
                Gap::NonEdge
            }
        })
        .collect();
    let order = bfs_order(x);
    let mut search = Search {
        x,
        m: grid_m,
        gap,
        order,
        pos: vec![0; n],
        nodes: 0,
        budget,
        reach: (thr / 2.0).floor() as isize,
    };
    if search.place(1)? {
        Ok(Some(search.pos))
    } else {
        Ok(None)
    }
}

// vertices in BFS order so that each one is usually adjacent to a placed one
fn bfs_order(x: &Adjacency) -> Vec<usize> {
    let n = x.n();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for v in 0..n {
                if !seen[v] && v != u && x.get(u, v) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

struct Search<'a> {
    x: &'a Adjacency,
    m: usize,
    gap: Vec<Gap>,
    order: Vec<usize>,
    pos: Vec<usize>,
    nodes: u64,
    budget: u64,
    reach: isize,
}

impl Search<'_> {
    fn consistent(&self, depth: usize, v: usize, a: usize) -> bool {
        self.order[..depth].iter().all(|&u| {
            let diff = a.abs_diff(self.pos[u]);
            let d = diff.min(self.m - diff);
            match self.gap[d] {
                Gap::Tie => false,
                Gap::Edge => self.x.get(u, v),
                Gap::NonEdge => !self.x.get(u, v),
            }
        })
    }

    fn candidates(&self, depth: usize, v: usize) -> Vec<usize> {
        let m = self.m;
        if depth == 1 {
            // reflection symmetry about the anchored vertex
            return (0..=m / 2).collect();
        }
        match self.order[..depth].iter().find(|&&u| self.x.get(u, v)) {
            Some(&u) => (-self.reach..=self.reach)
                .map(|o| (self.pos[u] as isize + o).rem_euclid(m as isize) as usize)
                .collect(),
            None => (0..m).collect(),
        }
    }

    fn place(&mut self, depth: usize) -> Result<bool> {
        if depth == self.order.len() {
            return Ok(true);
        }
        let v = self.order[depth];
        for a in self.candidates(depth, v) {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::Resource(format!(
                    "grid search exceeded {} placements",
                    self.budget
                )));
            }
            if self.consistent(depth, v, a) {
                self.pos[v] = a;
                if self.place(depth + 1)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_cycle, LatentPositions};

    #[test]
    fn trivial_graphs() {
        for n in 0..7 {
            assert!(is_realizable(&Adjacency::empty(n), 0.25, 8 * n.max(1)).unwrap());
            assert!(is_realizable(&Adjacency::complete(n), 0.25, 8 * n.max(1)).unwrap());
        }
    }

    #[test]
    fn witness_reproduces_graph() {
        let x = Adjacency::from_bitstring(5, "1000100010").unwrap();
        let m = 120;
        let w = grid_witness(&x, 0.25, m, DEFAULT_NODE_BUDGET)
            .unwrap()
            .unwrap();
        let z = LatentPositions::new(w.iter().map(|&a| a as f64 / m as f64).collect()).unwrap();
        assert_eq!(build_cycle(&z, 0.25).unwrap(), x);
    }

    #[test]
    fn claw_is_not_realizable() {
        // a vertex adjacent to three pairwise non-adjacent vertices cannot be
        // drawn: two of the leaves land on the same side within tau/2 of each other
        let x = Adjacency::from_fn(4, |i, _| i == 0);
        assert!(!is_realizable(&x, 0.3, 120).unwrap());
    }

    #[test]
    fn small_grid_rejected_and_budget_enforced() {
        assert!(is_realizable(&Adjacency::empty(5), 0.25, 19).is_err());
        let x = Adjacency::from_fn(4, |i, _| i == 0);
        let err = is_realizable_with_budget(&x, 0.3, 120, 10).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn witness_avoids_ties() {
        // m * tau = 10, so a gap of 5 sits exactly on tau/2
        let m = 40;
        let tau = 0.25;
        let x = Adjacency::from_fn(2, |_, _| true);
        let w = grid_witness(&x, tau, m, DEFAULT_NODE_BUDGET)
            .unwrap()
            .unwrap();
        let d = w[0].abs_diff(w[1]).min(m - w[0].abs_diff(w[1]));
        assert!(2 * d < 10);
    }
}
