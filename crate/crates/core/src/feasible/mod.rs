//! Sets of graphs realizable as noiseless cycles, for exhaustive search at
//! tiny `n`.

mod grid;
mod ordering;

pub use grid::{grid_witness, is_realizable, is_realizable_with_budget, DEFAULT_NODE_BUDGET};

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{check_tau, choose2, Adjacency};

/// Largest `n` accepted by [`enumerate_feasible`].
pub const MAX_ORDERING_N: usize = 8;
/// Largest `n` accepted by [`enumerate_by_grid`].
pub const MAX_GRID_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    GridOracle,
    OrderingEnumeration,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::GridOracle => "grid-oracle",
            Provenance::OrderingEnumeration => "ordering-enumeration",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid-oracle" => Ok(Provenance::GridOracle),
            "ordering-enumeration" => Ok(Provenance::OrderingEnumeration),
            _ => Err(Error::Parse(format!("unknown provenance {s:?}"))),
        }
    }
}

/// A sorted, duplicate-free list of graphs on `n` labeled vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    n: usize,
    tau: f64,
    grid_m: usize,
    provenance: Provenance,
    members: Vec<Adjacency>,
}

impl FeasibleSet {
    pub fn new(
        n: usize,
        tau: f64,
        grid_m: usize,
        provenance: Provenance,
        mut members: Vec<Adjacency>,
    ) -> Result<Self> {
        if let Some(bad) = members.iter().find(|m| m.n() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                got: bad.n(),
            });
        }
        members.sort_unstable();
        members.dedup();
        Ok(FeasibleSet {
            n,
            tau,
            grid_m,
            provenance,
            members,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid_m(&self) -> usize {
        self.grid_m
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Members in increasing bitstring order.
    pub fn members(&self) -> &[Adjacency] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: &Adjacency) -> bool {
        self.members.binary_search(x).is_ok()
    }

    /// Same members, compared regardless of provenance and grid.
    pub fn same_members(&self, other: &FeasibleSet) -> bool {
        self.n == other.n && self.members == other.members
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# dense-cycle feasible set\nn={}\ntau={}\ngrid_m={}\nprovenance={}\n",
            self.n, self.tau, self.grid_m, self.provenance
        );
        for m in &self.members {
            s.push_str(&m.to_bitstring());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut tau = None;
        let mut grid_m = None;
        let mut prov = None;
        let mut bits = Vec::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            match line.split_once('=') {
                Some(("n", v)) => n = Some(parse(v)?),
                Some(("tau", v)) => tau = Some(parse(v)?),
                Some(("grid_m", v)) => grid_m = Some(parse(v)?),
                Some(("provenance", v)) => prov = Some(v.parse()?),
                Some((k, _)) => return Err(Error::Parse(format!("unknown header key {k:?}"))),
                None => bits.push(line),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing header field {k}"));
        let n: usize = n.ok_or_else(|| missing("n"))?;
        let members = bits
            .into_iter()
            .map(|b| Adjacency::from_bitstring(n, b))
            .collect::<Result<_>>()?;
        FeasibleSet::new(
            n,
            tau.ok_or_else(|| missing("tau"))?,
            grid_m.ok_or_else(|| missing("grid_m"))?,
            prov.ok_or_else(|| missing("provenance"))?,
            members,
        )
    }

    /// Writes the set atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(self.to_text().as_bytes())?;
        tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        FeasibleSet::from_text(&std::fs::read_to_string(path)?)
    }
}

fn parse<T: FromStr>(v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad header value {v:?}")))
}

/// `n^(3n)`, the counting bound on the number of realizable graphs.
pub fn counting_bound(n: usize) -> f64 {
    (n as f64).powf(3.0 * n as f64)
}

/// Half-width of the edge-count band: `n sqrt(tau) ln n`.
pub fn size_band_width(n: usize, tau: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    n as f64 * tau.sqrt() * (n as f64).ln()
}

/// Whether `||x| - C(n,2) tau| <= n sqrt(tau) ln n`.
pub fn in_size_band(x: &Adjacency, tau: f64) -> bool {
    let center = choose2(x.n()) as f64 * tau;
    (x.edge_count() as f64 - center).abs() <= size_band_width(x.n(), tau)
}

/// Members of `set` inside the edge-count band.
pub fn size_band_filter(set: &FeasibleSet) -> FeasibleSet {
    FeasibleSet {
        members: set
            .members
            .iter()
            .filter(|x| in_size_band(x, set.tau))
            .cloned()
            .collect(),
        ..set.clone()
    }
}

/// All realizable graphs on `n <= 8` vertices, enumerated over circular
/// orders and clockwise neighbour runs. Each candidate is accepted when its
/// strict distance constraints are satisfiable; `grid_m` is recorded for
/// later cross-checks with [`is_realizable`].
pub fn enumerate_feasible(n: usize, tau: f64, grid_m: usize) -> Result<FeasibleSet> {
    check_tau(tau)?;
    if n > MAX_ORDERING_N {
        return Err(Error::Resource(format!(
            "enumeration limited to n <= {MAX_ORDERING_N}, got {n}"
        )));
    }
    let members = ordering::enumerate_by_ordering(n, tau)
        .into_iter()
        .collect();
    FeasibleSet::new(n, tau, grid_m, Provenance::OrderingEnumeration, members)
}

/// All realizable graphs on `n <= 6` vertices, by running the grid oracle on
/// one representative of each isomorphism class.
pub fn enumerate_by_grid(n: usize, tau: f64, grid_m: usize) -> Result<FeasibleSet> {
    check_tau(tau)?;
    if n > MAX_GRID_N {
        return Err(Error::Resource(format!(
            "grid enumeration limited to n <= {MAX_GRID_N}, got {n}"
        )));
    }
    let pairs = choose2(n);
    let perms = pair_permutations(n);
    let canon: Vec<u64> = (0..1u64 << pairs)
        .into_par_iter()
        .map(|mask| {
            perms
                .iter()
                .map(|p| permute_mask(mask, p))
                .min()
                .unwrap_or(mask)
        })
        .collect();
    let mut reps: Vec<u64> = canon.clone();
    reps.sort_unstable();
    reps.dedup();
    let verdicts: HashMap<u64, bool> = reps
        .par_iter()
        .map(|&c| is_realizable(&Adjacency::from_mask(n, c), tau, grid_m).map(|ok| (c, ok)))
        .collect::<Result<_>>()?;
    let members = (0..1u64 << pairs)
        .filter(|&mask| verdicts[&canon[mask as usize]])
        .map(|mask| Adjacency::from_mask(n, mask))
        .collect();
    FeasibleSet::new(n, tau, grid_m, Provenance::GridOracle, members)
}

// for each vertex permutation, where each pair index is sent
fn pair_permutations(n: usize) -> Vec<Vec<usize>> {
    let base = Adjacency::empty(n);
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p| {
        out.push(
            (0..base.pairs())
                .map(|idx| {
                    let (i, j) = base.pair_at(idx);
                    let (a, b) = (p[i].min(p[j]), p[i].max(p[j]));
                    base.pair_index(a, b)
                })
                .collect(),
        );
    });
    out
}

fn permutations(v: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

fn permute_mask(mask: u64, to: &[usize]) -> u64 {
    let mut out = 0;
    for (idx, &t) in to.iter().enumerate() {
        out |= ((mask >> idx) & 1) << t;
    }
    out
}

/// Loads `set` from `cache_dir` if present, else computes and stores it.
pub fn cached(
    cache_dir: &Path,
    n: usize,
    tau: f64,
    grid_m: usize,
    provenance: Provenance,
) -> Result<FeasibleSet> {
    let path = cache_path(cache_dir, n, tau, grid_m, provenance);
    if path.exists() {
        let set = FeasibleSet::load(&path)?;
        if set.n == n && set.tau == tau && set.grid_m == grid_m && set.provenance == provenance {
            return Ok(set);
        }
    }
    let set = match provenance {
        Provenance::GridOracle => enumerate_by_grid(n, tau, grid_m)?,
        Provenance::OrderingEnumeration => enumerate_feasible(n, tau, grid_m)?,
    };
    std::fs::create_dir_all(cache_dir)?;
    set.save(&path)?;
    Ok(set)
}

pub fn cache_path(
    cache_dir: &Path,
    n: usize,
    tau: f64,
    grid_m: usize,
    provenance: Provenance,
) -> PathBuf {
    cache_dir.join(format!("feasible_n{n}_tau{tau}_m{grid_m}_{provenance}.txt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_cycle, sample_planted, LatentPositions, Params};
    use crate::rng::Streams;
    use rand::seq::SliceRandom;

    #[test]
    fn two_vertices() {
        let s = enumerate_feasible(2, 0.3, 8).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(&Adjacency::empty(2)) && s.contains(&Adjacency::complete(2)));
    }

    #[test]
    fn oracles_agree_up_to_five() {
        for tau in [0.15, 0.25, 0.35] {
            for n in 1..=5 {
                let a = enumerate_feasible(n, tau, 120).unwrap();
                let b = enumerate_by_grid(n, tau, 120).unwrap();
                assert!(
                    a.same_members(&b),
                    "n = {n}, tau = {tau}: {} vs {}",
                    a.len(),
                    b.len()
                );
                assert!((a.len() as f64) <= counting_bound(n));
            }
        }
    }

    #[test]
    fn closed_under_relabeling() {
        let set = enumerate_feasible(6, 0.2, 144).unwrap();
        let mut rng = Streams::new(3).rng(&[0]);
        let mut perm: Vec<usize> = (0..6).collect();
        for x in set.members().iter().step_by(7) {
            perm.shuffle(&mut rng);
            assert!(set.contains(&x.permuted(&perm)));
        }
    }

    #[test]
    fn members_of_random_cycles() {
        let s = Streams::new(9);
        for n in [4usize, 6, 7] {
            let set = enumerate_feasible(n, 0.3, 8 * n * n).unwrap();
            for t in 0..200u64 {
                let z = LatentPositions::uniform(n, &mut s.rng(&[n as u64, t]));
                assert!(set.contains(&build_cycle(&z, 0.3).unwrap()));
            }
        }
    }

    #[test]
    fn planted_graphs_pass_grid_oracle() {
        let s = Streams::new(11);
        for n in [5usize, 6, 7, 8] {
            let params = Params::from_density(n, 0.2, 0.5, 0.3).unwrap();
            for t in 0..20u64 {
                let x = sample_planted(&params, &mut s.rng(&[n as u64, t]))
                    .unwrap()
                    .x;
                assert!(
                    is_realizable(&x, 0.2, 8 * n * n).unwrap(),
                    "grid-resolution incident at n = {n}"
                );
            }
        }
    }

    #[test]
    fn size_band() {
        // n = 4: band 4 * 0.5 * ln 4 = 2.77 around 1.5 keeps 0..=4 edges
        let set = enumerate_feasible(4, 0.25, 64).unwrap();
        let kept = size_band_filter(&set);
        assert!(kept.members().iter().all(|x| x.edge_count() <= 4));
        assert!(!kept.contains(&Adjacency::complete(4)));
        // vacuous band at n = 3, tau = 0.4: width 2.08 exceeds every deviation from 1.2
        let set3 = enumerate_feasible(3, 0.4, 64).unwrap();
        assert_eq!(size_band_filter(&set3), set3);
    }

    #[test]
    fn planted_inside_band() {
        let params = Params::from_density(400, 0.05, 0.3, 0.2).unwrap();
        let s = Streams::new(13);
        let hits = (0..500u64)
            .filter(|&t| in_size_band(&sample_planted(&params, &mut s.rng(&[t])).unwrap().x, 0.05))
            .count();
        assert!(hits as f64 / 500.0 >= 0.99);
    }

    #[test]
    fn text_roundtrip_and_cache() {
        let set = enumerate_feasible(4, 0.3, 64).unwrap();
        let back = FeasibleSet::from_text(&set.to_text()).unwrap();
        assert_eq!(back, set);
        assert!(FeasibleSet::from_text("n=3\ntau=0.2\n").is_err());
        let dir = tempfile::tempdir().unwrap();
        let a = cached(dir.path(), 4, 0.3, 64, Provenance::OrderingEnumeration).unwrap();
        assert!(cache_path(dir.path(), 4, 0.3, 64, Provenance::OrderingEnumeration).exists());
        let b = cached(dir.path(), 4, 0.3, 64, Provenance::OrderingEnumeration).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn limits() {
        assert!(matches!(
            enumerate_feasible(9, 0.2, 100),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            enumerate_by_grid(7, 0.2, 100),
            Err(Error::Resource(_))
        ));
    }
}
