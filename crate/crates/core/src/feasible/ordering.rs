use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::model::Adjacency;

// Path weight `w` plus a count of strict constraints on the path (as a
// negative number), compared lexicographically. A cycle of weight (0, -k) with
// k > 0 means a chain of strict inequalities summing to `0 < 0`.
#[derive(Clone, Copy, PartialEq)]
struct W {
    w: f64,
    s: i32,
}

const TOL: f64 = 1e-12;
const INF: W = W {
    w: f64::INFINITY,
    s: 0,
};

impl W {
    fn add(self, o: W) -> W {
        W {
            w: self.w + o.w,
            s: self.s + o.s,
        }
    }

    fn lt(self, o: W) -> bool {
        if self.w.is_infinite() || o.w.is_infinite() {
            return self.w < o.w;
        }
        self.w < o.w - TOL || ((self.w - o.w).abs() <= TOL && self.s < o.s)
    }

    fn negative(self) -> bool {
        self.lt(W { w: 0.0, s: 0 })
    }
}

/// Shortest-path closure of a system of difference constraints
/// `y_b - y_a <= w` (or `<`), kept consistent edge by edge.
#[derive(Clone)]
struct Closure {
    n: usize,
    d: Vec<W>,
}

impl Closure {
    fn new(n: usize) -> Self {
        let mut d = vec![INF; n * n];
        for i in 0..n {
            d[i * n + i] = W { w: 0.0, s: 0 };
        }
        Closure { n, d }
    }

    /// Adds `y_b - y_a <= w` (strict if `strict`); false if the system becomes
    /// infeasible.
    fn add(&mut self, a: usize, b: usize, w: f64, strict: bool) -> bool {
        let n = self.n;
        let e = W {
            w,
            s: -i32::from(strict),
        };
        if self.d[b * n + a].add(e).negative() {
            return false;
        }
        for i in 0..n {
            let ia = self.d[i * n + a];
            if ia.w.is_infinite() {
                continue;
            }
            let via = ia.add(e);
            for j in 0..n {
                let bj = self.d[b * n + j];
                if bj.w.is_infinite() {
                    continue;
                }
                let cand = via.add(bj);
                if cand.lt(self.d[i * n + j]) {
                    self.d[i * n + j] = cand;
                }
            }
        }
        true
    }
}

/// All graphs realizable by points whose clockwise order is `ord`.
///
/// Position `t` in the order gets coordinate `y_t` with
/// `0 = y_0 <= y_1 <= ... <= y_{n-1} <= 1`. Each point's neighbours form a
/// clockwise run of `f_t` successors; a run is kept only if the strict
/// distance constraints it implies are jointly satisfiable.
fn graphs_for_ordering(ord: &[usize], tau: f64, out: &mut BTreeSet<Adjacency>) {
    let n = ord.len();
    let mut base = Closure::new(n);
    for t in 0..n - 1 {
        base.add(t + 1, t, 0.0, false);
    }
    base.add(0, n - 1, 1.0, false);
    let mut runs = vec![0usize; n];
    extend(ord, tau, 0, &base, &mut runs, out);
}

fn extend(
    ord: &[usize],
    tau: f64,
    t: usize,
    sys: &Closure,
    runs: &mut [usize],
    out: &mut BTreeSet<Adjacency>,
) {
    let n = ord.len();
    if t == n {
        let mut x = Adjacency::empty(n);
        for (s, &f) in runs.iter().enumerate() {
            for step in 1..=f {
                x.set(ord[s], ord[(s + step) % n], true);
            }
        }
        out.insert(x);
        return;
    }
    let half = tau / 2.0;
    let lo = if t == 0 {
        0
    } else {
        runs[t - 1].saturating_sub(1)
    };
    for f in lo..n {
        let mut next = sys.clone();
        let mut ok = true;
        if f > 0 {
            // farthest run member strictly within tau/2 clockwise
            let j = t + f;
            ok = if j < n {
                next.add(t, j, half, true)
            } else {
                next.add(t, j - n, half - 1.0, true)
            };
        }
        if ok && f + 1 < n {
            // first point past the run strictly beyond tau/2 clockwise
            let j = t + f + 1;
            ok = if j < n {
                next.add(j, t, -half, true)
            } else {
                next.add(j - n, t, 1.0 - half, true)
            };
        }
        if ok {
            runs[t] = f;
            extend(ord, tau, t + 1, &next, runs, out);
        }
    }
}

fn orderings(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            cur.push(v);
            rec(cur, rest, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![0], &mut (1..n).collect(), &mut out);
    out
}

/// Every graph on `n` vertices realizable with all pair distances strictly
/// away from `tau/2`, found by enumerating circular orders and neighbour runs.
pub(crate) fn enumerate_by_ordering(n: usize, tau: f64) -> BTreeSet<Adjacency> {
    if n <= 1 {
        return BTreeSet::from([Adjacency::empty(n)]);
    }
    orderings(n)
        .par_iter()
        .fold(BTreeSet::new, |mut acc, ord| {
            graphs_for_ordering(ord, tau, &mut acc);
            acc
        })
        .reduce(BTreeSet::new, |mut a, mut b| {
            a.append(&mut b);
            a
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_count() {
        assert_eq!(orderings(4).len(), 6);
        assert!(orderings(5).iter().all(|o| o[0] == 0));
    }

    #[test]
    fn closure_detects_strict_cycle() {
        let mut c = Closure::new(2);
        assert!(c.add(0, 1, 0.1, false));
        assert!(c.add(1, 0, -0.1, false));
        let mut c2 = Closure::new(2);
        assert!(c2.add(0, 1, 0.1, true));
        assert!(!c2.add(1, 0, -0.1, false));
    }

    #[test]
    fn tiny_sets() {
        assert_eq!(enumerate_by_ordering(2, 0.3).len(), 2);
        // every graph on 3 vertices is realizable
        assert_eq!(enumerate_by_ordering(3, 0.25).len(), 8);
    }
}
