use crate::error::{check_same_size, Error, Result};
use crate::model::{build_cycle, check_tau, Adjacency, LatentPositions};

/// Largest even integer `k <= 1/tau`. Requires `0 < tau < 1/2`.
pub fn block_count(tau: f64) -> Result<usize> {
    check_tau(tau)?;
    let mut m = (1.0 / tau).floor() as usize;
    // correct rounding of 1/tau at exact multiples
    if (m + 1) as f64 * tau <= 1.0 {
        m += 1;
    }
    while m as f64 * tau > 1.0 {
        m -= 1;
    }
    Ok(m - m % 2)
}

/// 0-based block of `v`: block `l < k-1` is `[l tau, (l+1) tau)` and the last
/// block is `[(k-1) tau, 1)`. A point on a boundary belongs to the block on its
/// right.
pub fn block_index(v: f64, tau: f64, k: usize) -> usize {
    let mut b = (v / tau).floor() as usize;
    if (b + 1) as f64 * tau <= v {
        b += 1;
    }
    if b > 0 && b as f64 * tau > v {
        b -= 1;
    }
    b.min(k - 1)
}

/// The three pair families the overlap statistic splits into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Both endpoints in block `l`.
    Within = 0,
    /// Endpoints in blocks `l` and `l+1` for 1-based odd `l` (0-based even).
    OddAdjacent = 1,
    /// Endpoints in blocks `l` and `l+1` (cyclically) for 1-based even `l`.
    EvenAdjacent = 2,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Within, Family::OddAdjacent, Family::EvenAdjacent];
}

/// Block structure induced by `z_prime`.
///
/// `members[l]` is the index set of block `l`. `j_sets` holds, per family and
/// block, the pairs of that family that are edges of the cycle of `z_prime`;
/// only nonempty sets are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub k: usize,
    pub tau: f64,
    /// Lower endpoints of the `k` blocks; block `l` is `[bounds[l], bounds[l+1])`
    /// with `bounds[k] = 1`.
    pub block_bounds: Vec<f64>,
    pub members: Vec<Vec<usize>>,
    pub j_sets: Vec<(Family, usize, Vec<(usize, usize)>)>,
}

impl BlockDecomposition {
    /// Vertices that a given `(family, block)` term depends on.
    pub fn support_vertices(&self, family: Family, l: usize) -> Vec<usize> {
        let mut v = self.members[l].clone();
        if family != Family::Within {
            v.extend_from_slice(&self.members[(l + 1) % self.k]);
        }
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The full family set `J` (every pair of the right block pattern, edges of
    /// the support cycle or not).
    pub fn full_j_set(&self, family: Family, l: usize) -> Vec<(usize, usize)> {
        let ord = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut out = Vec::new();
        match family {
            Family::Within => {
                let m = &self.members[l];
                for (s, &a) in m.iter().enumerate() {
                    for &b in &m[s + 1..] {
                        out.push(ord(a, b));
                    }
                }
            }
            _ if !self.has_family(family, l) => {}
            _ => {
                for &a in &self.members[l] {
                    for &b in &self.members[(l + 1) % self.k] {
                        out.push(ord(a, b));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether the family's `J` set at block `l` is defined to be nonempty.
    pub fn has_family(&self, family: Family, l: usize) -> bool {
        match family {
            Family::Within => true,
            Family::OddAdjacent => l % 2 == 0,
            // with two blocks the wrap pair (2, 1) is the same as (1, 2)
            Family::EvenAdjacent => l % 2 == 1 && self.k > 2,
        }
    }
}

/// Output of [`decompose`]: the blocks, the nonzero `U` table, and the family
/// sums `S_1, S_2, S_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub blocks: BlockDecomposition,
    /// `(family, block, U)` for every nonempty support-restricted `J` set.
    pub u: Vec<(Family, usize, f64)>,
    pub s: [f64; 3],
}

impl Decomposition {
    pub fn u_value(&self, family: Family, l: usize) -> f64 {
        self.u
            .iter()
            .find(|(f, b, _)| *f == family && *b == l)
            .map_or(0.0, |e| e.2)
    }

    pub fn total(&self) -> f64 {
        self.s.iter().sum()
    }
}

fn classify(la: usize, lb: usize, k: usize) -> Option<(Family, usize)> {
    if la == lb {
        return Some((Family::Within, la));
    }
    let lo = if lb == la + 1 {
        la
    } else if la == lb + 1 {
        lb
    } else if (la + 1) % k == lb {
        la
    } else if (lb + 1) % k == la {
        lb
    } else {
        return None;
    };
    if lo % 2 == 0 {
        Some((Family::OddAdjacent, lo))
    } else {
        Some((Family::EvenAdjacent, lo))
    }
}

/// Splits `S = sum X'_ij (X_ij - tau)` into `S_1 + S_2 + S_3`, where
/// `S_f = sum_l U_l^(f)` and each `U_l^(f)` only involves the positions of the
/// vertices in its blocks.
pub fn decompose(
    z: &LatentPositions,
    z_prime: &LatentPositions,
    tau: f64,
) -> Result<Decomposition> {
    check_same_size(z_prime.len(), z.len())?;
    let k = block_count(tau)?;
    let x = build_cycle(z, tau)?;
    let xp = build_cycle(z_prime, tau)?;
    let zp = z_prime.as_slice();
    let block_of: Vec<usize> = zp.iter().map(|&v| block_index(v, tau, k)).collect();
    let mut members = vec![Vec::new(); k];
    for (i, &b) in block_of.iter().enumerate() {
        members[b].push(i);
    }
    let mut table: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 3 * k];
    for (i, j) in xp.edges() {
        let (fam, l) = classify(block_of[i], block_of[j], k).ok_or_else(|| {
            Error::Degenerate(format!(
                "support pair ({i}, {j}) spans non-adjacent blocks {} and {}",
                block_of[i], block_of[j]
            ))
        })?;
        table[fam as usize * k + l].push((i, j));
    }
    let mut j_sets = Vec::new();
    let mut u = Vec::new();
    let mut s = [0.0; 3];
    for fam in Family::ALL {
        for l in 0..k {
            let pairs = std::mem::take(&mut table[fam as usize * k + l]);
            if pairs.is_empty() {
                continue;
            }
            let val = u_sum(&x, &pairs, tau);
            s[fam as usize] += val;
            u.push((fam, l, val));
            j_sets.push((fam, l, pairs));
        }
    }
    let block_bounds = (0..k).map(|l| l as f64 * tau).collect();
    Ok(Decomposition {
        blocks: BlockDecomposition {
            k,
            tau,
            block_bounds,
            members,
            j_sets,
        },
        u,
        s,
    })
}

fn u_sum(x: &Adjacency, pairs: &[(usize, usize)], tau: f64) -> f64 {
    let hits = pairs.iter().filter(|&&(i, j)| x.get(i, j)).count();
    hits as f64 - tau * pairs.len() as f64
}
