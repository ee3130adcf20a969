use rand::Rng;

use crate::error::{check_same_size, Result};
use crate::feasible::size_band_width;
use crate::model::{arc_dist, build_cycle, choose2, wrap01, Adjacency, LatentPositions, Params};

use super::{SearchMode, SearchResult};

/// Proposals tried per restart, per vertex.
pub const PROPOSALS_PER_VERTEX: usize = 10;
/// Proposals added to every restart regardless of `n`.
pub const PROPOSALS_BASE: usize = 200;

// Positions bucketed into cells of width >= tau/2 so that all points within
// tau/2 of a location lie in three consecutive cells.
struct State<'a> {
    a: &'a Adjacency,
    half: f64,
    z: Vec<f64>,
    cells: Vec<Vec<usize>>,
    width: f64,
    objective: i64,
    edges: i64,
}

impl<'a> State<'a> {
    fn new(a: &'a Adjacency, tau: f64, z: Vec<f64>) -> Self {
        let half = tau / 2.0;
        let count = ((1.0 / half).floor() as usize).max(3);
        let width = 1.0 / count as f64;
        let mut cells = vec![Vec::new(); count];
        for (v, &p) in z.iter().enumerate() {
            cells[Self::cell_of(p, width, count)].push(v);
        }
        let x = build_cycle(
            &LatentPositions::new(z.clone()).expect("positions in [0,1)"),
            tau,
        )
        .expect("tau validated by caller");
        State {
            a,
            half,
            objective: x.inner(a) as i64,
            edges: x.edge_count() as i64,
            z,
            cells,
            width,
        }
    }

    fn cell_of(p: f64, width: f64, count: usize) -> usize {
        ((p / width) as usize).min(count - 1)
    }

    // (sum of A over neighbours of v at position p, number of neighbours)
    fn score(&self, v: usize, p: f64) -> (i64, i64) {
        let count = self.cells.len();
        let c = Self::cell_of(p, self.width, count);
        let mut s = 0;
        let mut k = 0;
        for off in [count - 1, 0, 1] {
            for &u in &self.cells[(c + off) % count] {
                if u != v && arc_dist(self.z[u], p) <= self.half {
                    k += 1;
                    s += i64::from(self.a.get(u, v));
                }
            }
        }
        (s, k)
    }

    // moves v to p; returns (change in objective, change in edge count)
    fn relocate(&mut self, v: usize, p: f64) -> (i64, i64) {
        let (s0, k0) = self.score(v, self.z[v]);
        let count = self.cells.len();
        let old = Self::cell_of(self.z[v], self.width, count);
        let new = Self::cell_of(p, self.width, count);
        if old != new {
            let at = self.cells[old]
                .iter()
                .position(|&u| u == v)
                .expect("vertex in its cell");
            self.cells[old].swap_remove(at);
            self.cells[new].push(v);
        }
        self.z[v] = p;
        let (s1, k1) = self.score(v, p);
        self.objective += s1 - s0;
        self.edges += k1 - k0;
        (s1 - s0, k1 - k0)
    }
}

/// Hill climbing over latent positions for `max <build_cycle(z), a>` with the
/// edge count kept in the band `|C(n,2) tau - |X|| <= n sqrt(tau) ln n`.
///
/// Moves are single-vertex jitters, jumps next to an `a`-neighbour, swaps of
/// two vertices, and shifts of all vertices in a short arc. Only strict
/// improvements are accepted. Each restart runs
/// `PROPOSALS_BASE + PROPOSALS_PER_VERTEX * n` proposals from a uniform start. A start outside the band first moves
/// towards it. If `truth` is given, one extra restart starts there with the
/// band widened to contain it, so the result is at least
/// `<build_cycle(truth), a>`.
pub fn local_search<R: Rng + ?Sized>(
    a: &Adjacency,
    params: &Params,
    restarts: usize,
    truth: Option<&LatentPositions>,
    rng: &mut R,
) -> Result<SearchResult> {
    let n = a.n();
    check_same_size(params.n(), n)?;
    if let Some(t) = truth {
        check_same_size(n, t.len())?;
    }
    let tau = params.tau();
    crate::model::check_tau(tau)?;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(t) = truth {
        starts.push(t.as_slice().to_vec());
    }
    let restarts = restarts.max(1);
    let mut best: Option<((bool, i64), Vec<f64>)> = None;
    for r in 0..restarts + starts.len() {
        let z0 = if r < starts.len() {
            starts[r].clone()
        } else {
            (0..n).map(|_| rng.random::<f64>()).collect()
        };
        let (obj, z, in_band) = climb(a, tau, z0, r < starts.len(), rng);
        // out-of-band finishes only count if nothing else is available
        let key = (in_band, obj);
        if best.as_ref().is_none_or(|(b, _)| key > *b) {
            best = Some((key, z));
        }
    }
    let (_, z) = best.expect("at least one restart");
    let z = LatentPositions::new(z)?;
    let x_hat = build_cycle(&z, tau)?;
    Ok(SearchResult {
        l_hat: x_hat.inner(a) as f64,
        x_hat,
        z_hat: Some(z),
        mode: SearchMode::Local,
    })
}

// Returns the final objective, positions, and whether the edge count ended in
// the band. With `widen`, the band is stretched to contain the start.
fn climb<R: Rng + ?Sized>(
    a: &Adjacency,
    tau: f64,
    z0: Vec<f64>,
    widen: bool,
    rng: &mut R,
) -> (i64, Vec<f64>, bool) {
    let n = a.n();
    let mut st = State::new(a, tau, z0);
    let center = choose2(n) as f64 * tau;
    let w = size_band_width(n, tau);
    let start = st.edges as f64;
    let (lo, hi) = if widen {
        ((center - w).min(start), (center + w).max(start))
    } else {
        (center - w, center + w)
    };
    let violation = |e: i64| (lo - e as f64).max(e as f64 - hi).max(0.0);
    if n < 2 {
        return (st.objective, st.z, violation(st.edges) == 0.0);
    }
    let half = tau / 2.0;
    let mut moved: Vec<(usize, f64)> = Vec::new();
    for _ in 0..PROPOSALS_BASE + PROPOSALS_PER_VERTEX * n {
        moved.clear();
        let (obj0, e0) = (st.objective, st.edges);
        match rng.random_range(0..4u8) {
            0 => {
                let v = rng.random_range(0..n);
                let p = wrap01(st.z[v] + (rng.random::<f64>() - 0.5) * tau);
                moved.push((v, st.z[v]));
                st.relocate(v, p);
            }
            1 => {
                let v = rng.random_range(0..n);
                let u = rng.random_range(0..n);
                if u == v || !a.get(u, v) {
                    continue;
                }
                let p = wrap01(st.z[u] + (rng.random::<f64>() - 0.5) * half);
                moved.push((v, st.z[v]));
                st.relocate(v, p);
            }
            2 => {
                let v = rng.random_range(0..n);
                let u = rng.random_range(0..n);
                if u == v {
                    continue;
                }
                let (pv, pu) = (st.z[v], st.z[u]);
                moved.push((v, pv));
                st.relocate(v, pu);
                moved.push((u, pu));
                st.relocate(u, pv);
            }
            _ => {
                let c = rng.random::<f64>();
                let len = rng.random::<f64>() * tau;
                let shift = (rng.random::<f64>() - 0.5) * tau;
                let members: Vec<usize> = (0..n).filter(|&v| wrap01(st.z[v] - c) < len).collect();
                if members.is_empty() {
                    continue;
                }
                for v in members {
                    moved.push((v, st.z[v]));
                    st.relocate(v, wrap01(st.z[v] + shift));
                }
            }
        }
        let (v0, v1) = (violation(e0), violation(st.edges));
        let keep = v1 < v0 || (v1 == 0.0 && v0 == 0.0 && st.objective > obj0);
        if !keep {
            for &(v, p) in moved.iter().rev() {
                st.relocate(v, p);
            }
            debug_assert_eq!((st.objective, st.edges), (obj0, e0));
        }
    }
    let in_band = violation(st.edges) == 0.0;
    (st.objective, st.z, in_band)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_planted;
    use crate::rng::Streams;

    #[test]
    fn incremental_state_matches_rebuild() {
        let s = Streams::new(1);
        let mut rng = s.rng(&[0]);
        let params = Params::from_density(40, 0.2, 0.6, 0.3).unwrap();
        let a = sample_planted(&params, &mut rng).unwrap().a;
        let mut st = State::new(&a, 0.2, LatentPositions::uniform(40, &mut rng).into_inner());
        for _ in 0..500 {
            let v = rng.random_range(0..40);
            st.relocate(v, rng.random());
        }
        let x = build_cycle(&LatentPositions::new(st.z.clone()).unwrap(), 0.2).unwrap();
        assert_eq!(st.objective, x.inner(&a) as i64);
        assert_eq!(st.edges, x.edge_count() as i64);
    }
}
