//! Exact computations at tiny `n` with the latent positions restricted to a
//! finite grid: marginal likelihoods, posterior means, MMSE along the
//! interpolation path, divergences, mutual information, and a Monte Carlo
//! estimate of the conditional second moment.

mod chi2;
mod report;

pub use chi2::{conditional_chi2_mc, Chi2Estimate};
pub use report::{divergence_report, DivergenceReport};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{check_same_size, Error, Result};
use crate::model::{check_tau, choose2, Adjacency, Params};

/// Largest `n` for exact enumeration.
pub const MAX_N: usize = 5;
/// Largest grid resolution for exact enumeration.
pub const MAX_M: usize = 64;

/// Uniform prior on `{0, 1/m, ..., (m-1)/m}^n`, each vector with weight
/// `m^-n`.
///
/// Enumeration fixes the first coordinate at `0` and multiplies by `m`; the
/// grid edge relation depends only on integer offsets, so this is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentGrid {
    m: usize,
    n: usize,
}

impl LatentGrid {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParams(format!(
                "grid resolution m = {m} must be at least 2"
            )));
        }
        if n > MAX_N || m > MAX_M {
            return Err(Error::Resource(format!(
                "exact enumeration limited to n <= {MAX_N}, m <= {MAX_M}; got n = {n}, m = {m}"
            )));
        }
        Ok(LatentGrid { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid vectors, `m^n`.
    pub fn len(&self) -> u64 {
        (self.m as u64).pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }
}

/// Whether grid points at integer offset `d` (`0 <= d < m`) are within
/// `tau/2` of each other.
pub fn grid_edge(d: usize, m: usize, tau: f64) -> bool {
    let d = d.min(m - d);
    d as f64 / m as f64 <= tau / 2.0
}

/// The prior on cycle patterns induced by the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPrior {
    pub n: usize,
    pub m: usize,
    pub tau: f64,
    /// `(pattern bits in pair order, probability)`, sorted by bits.
    pub patterns: Vec<(u64, f64)>,
    /// Prior probability that a given pair is an edge.
    pub edge_prob: f64,
}

impl GridPrior {
    pub fn new(grid: &LatentGrid, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let (n, m) = (grid.n, grid.m);
        let near: Vec<bool> = (0..m).map(|d| grid_edge(d, m, tau)).collect();
        let edge_prob = near.iter().filter(|&&b| b).count() as f64 / m as f64;
        if n < 2 {
            return Ok(GridPrior {
                n,
                m,
                tau,
                patterns: vec![(0, 1.0)],
                edge_prob,
            });
        }
        let base = Adjacency::empty(n);
        let pair_bits: Vec<(usize, usize)> = (0..base.pairs()).map(|i| base.pair_at(i)).collect();
        // first coordinate fixed at 0; enumerate the rest in parallel over the
        // second coordinate
        let free = n - 1;
        let counts = (0..m)
            .into_par_iter()
            .map(|first| {
                let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
                let mut z = vec![0usize; n];
                z[1] = first;
                let rest = (m as u64).pow(free as u32 - 1);
                for code in 0..rest {
                    let mut c = code;
                    for slot in z.iter_mut().skip(2) {
                        *slot = (c % m as u64) as usize;
                        c /= m as u64;
                    }
                    let mut mask = 0u64;
                    for (bit, &(i, j)) in pair_bits.iter().enumerate() {
                        if near[(z[i] + m - z[j]) % m] {
                            mask |= 1 << bit;
                        }
                    }
                    *counts.entry(mask).or_insert(0) += 1;
                }
                counts
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        let total = (m as f64).powi(free as i32);
        let patterns = counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total))
            .collect();
        Ok(GridPrior {
            n,
            m,
            tau,
            patterns,
            edge_prob,
        })
    }

    pub fn pairs(&self) -> usize {
        choose2(self.n)
    }

    /// `-sum pi log pi` over patterns.
    pub fn entropy(&self) -> f64 {
        -self.patterns.iter().map(|&(_, w)| w * w.ln()).sum::<f64>()
    }
}

fn check_n(params: &Params, grid: &LatentGrid) -> Result<()> {
    check_same_size(grid.n, params.n())
}

// P(A | X) for bit masks over `pairs` pairs
fn cond_prob(a: u64, x: u64, pairs: usize, p: f64, q: f64) -> f64 {
    let n11 = (a & x).count_ones() as i32;
    let na = a.count_ones() as i32;
    let nx = x.count_ones() as i32;
    let n10 = na - n11;
    let n01 = nx - n11;
    let n00 = pairs as i32 - n11 - n10 - n01;
    p.powi(n11) * (1.0 - p).powi(n01) * q.powi(n10) * (1.0 - q).powi(n00)
}

fn null_prob(a: u64, pairs: usize, r: f64) -> f64 {
    let na = a.count_ones() as i32;
    r.powi(na) * (1.0 - r).powi(pairs as i32 - na)
}

fn all_graphs(pairs: usize) -> impl IndexedParallelIterator<Item = u64> {
    // indexed so that collect keeps graph order
    (0..1usize << pairs).into_par_iter().map(|a| a as u64)
}

/// `(1/m^n) sum_z P(A | z)`.
pub fn marginal_likelihood(a: &Adjacency, params: &Params, grid: &LatentGrid) -> Result<f64> {
    check_n(params, grid)?;
    check_same_size(grid.n, a.n())?;
    let prior = GridPrior::new(grid, params.tau())?;
    Ok(marginal_from_prior(a.mask(), params, &prior))
}

fn marginal_from_prior(a: u64, params: &Params, prior: &GridPrior) -> f64 {
    let pairs = prior.pairs();
    prior
        .patterns
        .iter()
        .map(|&(x, w)| w * cond_prob(a, x, pairs, params.p(), params.q()))
        .sum()
}

/// Posterior edge probabilities `E[X_e | A]`, one per pair in pair order.
pub fn posterior_mean(a: &Adjacency, params: &Params, grid: &LatentGrid) -> Result<Vec<f64>> {
    check_n(params, grid)?;
    check_same_size(grid.n, a.n())?;
    let prior = GridPrior::new(grid, params.tau())?;
    posterior_from_prior(a.mask(), params, &prior)
}

fn posterior_from_prior(a: u64, params: &Params, prior: &GridPrior) -> Result<Vec<f64>> {
    let pairs = prior.pairs();
    let (p, q) = (params.p(), params.q());
    let mut num = vec![0.0; pairs];
    let mut den = 0.0;
    for &(x, w) in &prior.patterns {
        let wt = w * cond_prob(a, x, pairs, p, q);
        den += wt;
        for (e, v) in num.iter_mut().enumerate() {
            if x >> e & 1 == 1 {
                *v += wt;
            }
        }
    }
    if den > 0.0 && den.is_normal() {
        return Ok(num.into_iter().map(|v| v / den).collect());
    }
    // log-space fallback
    let logs: Vec<(u64, f64)> = prior
        .patterns
        .iter()
        .map(|&(x, w)| (x, w.ln() + log_cond_prob(a, x, pairs, p, q)))
        .collect();
    let top = logs.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::Degenerate(
            "observation has zero probability under every pattern".into(),
        ));
    }
    let mut num = vec![0.0; pairs];
    let mut den = 0.0;
    for (x, l) in logs {
        let wt = (l - top).exp();
        den += wt;
        for (e, v) in num.iter_mut().enumerate() {
            if x >> e & 1 == 1 {
                *v += wt;
            }
        }
    }
    Ok(num.into_iter().map(|v| v / den).collect())
}

fn log_cond_prob(a: u64, x: u64, pairs: usize, p: f64, q: f64) -> f64 {
    let n11 = (a & x).count_ones() as f64;
    let na = a.count_ones() as f64;
    let nx = x.count_ones() as f64;
    let (n10, n01) = (na - n11, nx - n11);
    let n00 = pairs as f64 - n11 - n10 - n01;
    let t = |c: f64, v: f64| if c == 0.0 { 0.0 } else { c * v.ln() };
    t(n11, p) + t(n01, 1.0 - p) + t(n10, q) + t(n00, 1.0 - q)
}

/// Bayes risk of the posterior mean under `params` itself.
pub fn mmse_for_params(params: &Params, grid: &LatentGrid) -> Result<f64> {
    check_n(params, grid)?;
    let prior = GridPrior::new(grid, params.tau())?;
    mmse_from_prior(params, &prior)
}

fn mmse_from_prior(params: &Params, prior: &GridPrior) -> Result<f64> {
    let pairs = prior.pairs();
    let terms: Vec<f64> = all_graphs(pairs)
        .map(|a| {
            let pa = marginal_from_prior(a, params, prior);
            if pa == 0.0 {
                return Ok(0.0);
            }
            let post = posterior_from_prior(a, params, prior)?;
            Ok(pa * post.iter().map(|v| v - v * v).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum())
}

/// MMSE of the interpolated model at on-cycle density `theta`.
pub fn mmse_exact(params: &Params, theta: f64, grid: &LatentGrid) -> Result<f64> {
    mmse_for_params(&params.interpolate(theta)?, grid)
}

/// `mmse(theta)` on a list of `theta` values, sharing one prior.
pub fn mmse_curve(params: &Params, thetas: &[f64], grid: &LatentGrid) -> Result<Vec<f64>> {
    check_n(params, grid)?;
    let prior = GridPrior::new(grid, params.tau())?;
    thetas
        .iter()
        .map(|&t| mmse_from_prior(&params.interpolate(t)?, &prior))
        .collect()
}

/// Exact divergences between the planted marginal of `A` and `G(n, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergences {
    /// `sum_A |P(A) - Q(A)|`.
    pub tv_sum: f64,
    /// `tv_sum / 2`.
    pub tv_half: f64,
    pub chi2: f64,
    pub kl: f64,
}

pub fn divergences_exact(params: &Params, grid: &LatentGrid) -> Result<Divergences> {
    check_n(params, grid)?;
    let prior = GridPrior::new(grid, params.tau())?;
    Ok(divergences_from_prior(params, &prior))
}

fn divergences_from_prior(params: &Params, prior: &GridPrior) -> Divergences {
    let pairs = prior.pairs();
    let rows: Vec<(f64, f64, f64)> = all_graphs(pairs)
        .map(|a| {
            let pa = marginal_from_prior(a, params, prior);
            let qa = null_prob(a, pairs, params.r());
            let kl = if pa > 0.0 { pa * (pa / qa).ln() } else { 0.0 };
            ((pa - qa).abs(), pa * pa / qa, kl)
        })
        .collect();
    let tv_sum: f64 = rows.iter().map(|r| r.0).sum();
    Divergences {
        tv_sum,
        tv_half: tv_sum / 2.0,
        chi2: rows.iter().map(|r| r.1).sum::<f64>() - 1.0,
        kl: rows.iter().map(|r| r.2).sum(),
    }
}

/// Bernoulli KL `KL(Bern(a) || Bern(b))`.
fn bern_kl(a: f64, b: f64) -> f64 {
    let t = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    t(a, b) + t(1.0 - a, 1.0 - b)
}

/// Mutual information `I(A, X)` computed two ways: directly from the joint
/// law, and as `E_X KL(P_{A|X} || Q) - KL(P_A || Q)` with the first term in
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInformation {
    pub direct: f64,
    pub via_kl: f64,
}

pub fn mutual_information_exact(params: &Params, grid: &LatentGrid) -> Result<MutualInformation> {
    check_n(params, grid)?;
    let prior = GridPrior::new(grid, params.tau())?;
    Ok(mutual_information_from_prior(params, &prior))
}

fn mutual_information_from_prior(params: &Params, prior: &GridPrior) -> MutualInformation {
    let pairs = prior.pairs();
    let (p, q, r) = (params.p(), params.q(), params.r());
    let direct: f64 = all_graphs(pairs)
        .map(|a| {
            let pa = marginal_from_prior(a, params, prior);
            prior
                .patterns
                .iter()
                .map(|&(x, w)| {
                    let c = cond_prob(a, x, pairs, p, q);
                    if c > 0.0 {
                        w * c * (c / pa).ln()
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let expected_kl: f64 = prior
        .patterns
        .iter()
        .map(|&(x, w)| {
            let on = x.count_ones() as f64;
            w * (on * bern_kl(p, r) + (pairs as f64 - on) * bern_kl(q, r))
        })
        .sum();
    let kl = divergences_from_prior(params, prior).kl;
    MutualInformation {
        direct,
        via_kl: expected_kl - kl,
    }
}

/// `H(X | A)` under `params`.
pub fn conditional_entropy(params: &Params, grid: &LatentGrid) -> Result<f64> {
    check_n(params, grid)?;
    let prior = GridPrior::new(grid, params.tau())?;
    Ok(conditional_entropy_from_prior(params, &prior))
}

fn conditional_entropy_from_prior(params: &Params, prior: &GridPrior) -> f64 {
    let pairs = prior.pairs();
    let (p, q) = (params.p(), params.q());
    all_graphs(pairs)
        .map(|a| {
            let pa = marginal_from_prior(a, params, prior);
            if pa == 0.0 {
                return 0.0;
            }
            -prior
                .patterns
                .iter()
                .map(|&(x, w)| {
                    let joint = w * cond_prob(a, x, pairs, p, q);
                    if joint > 0.0 {
                        joint * (joint / pa).ln()
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// Both sides of the derivative identity for `H_theta(X | A)` at `theta`:
/// a central difference with step `h`, and
/// `sum_e (d/dtheta H_theta(A_e | X_e) + r1_e)` evaluated exactly, where
/// `r1_e = sum_{x,y} (d/dtheta p_theta(y|x)) E[P(X_e = x | A_-e) log sum_x' p_theta(y|x') P(X_e = x' | A_-e)]`.
pub fn entropy_derivative_check(
    params: &Params,
    theta: f64,
    h: f64,
    grid: &LatentGrid,
) -> Result<(f64, f64)> {
    check_n(params, grid)?;
    let prior = GridPrior::new(grid, params.tau())?;
    let hi = conditional_entropy_from_prior(&params.interpolate(theta + h)?, &prior);
    let lo = conditional_entropy_from_prior(&params.interpolate(theta - h)?, &prior);
    let numeric = (hi - lo) / (2.0 * h);

    let at = params.interpolate(theta)?;
    let (p, q, tau) = (at.p(), at.q(), at.tau());
    let pairs = prior.pairs();
    let dq = -tau / (1.0 - tau);
    // d p_theta(y | x) / d theta, indexed [x][y]
    let dp = [[-dq, dq], [-1.0, 1.0]];
    let py = |y: usize, x: usize| {
        let on = if x == 1 { p } else { q };
        if y == 1 {
            on
        } else {
            1.0 - on
        }
    };
    let dlog = |v: f64| ((1.0 - v) / v).ln();
    let mut total = 0.0;
    for e in 0..pairs {
        let pi1: f64 = prior
            .patterns
            .iter()
            .filter(|(x, _)| x >> e & 1 == 1)
            .map(|(_, w)| w)
            .sum();
        let dh = pi1 * dlog(p) + (1.0 - pi1) * dlog(q) * dq;
        // enumerate A_-e: graphs with bit e cleared
        let mut r1 = 0.0;
        for a in (0..1u64 << pairs).filter(|a| a >> e & 1 == 0) {
            // joint weight of (A_-e, X_e = x), summing A_e out
            let mut joint = [0.0; 2];
            for &(x, w) in &prior.patterns {
                let xe = (x >> e & 1) as usize;
                let rest = cond_prob(a, x & !(1 << e), pairs, p, q);
                // drop the factor of pair e, which is p(0|0) in `rest`
                joint[xe] += w * rest / (1.0 - q);
            }
            let pa = joint[0] + joint[1];
            if pa == 0.0 {
                continue;
            }
            let post = [joint[0] / pa, joint[1] / pa];
            for (x, row) in dp.iter().enumerate() {
                for (y, &d) in row.iter().enumerate() {
                    let mix = py(y, 0) * post[0] + py(y, 1) * post[1];
                    if post[x] > 0.0 && mix > 0.0 {
                        r1 += d * pa * post[x] * mix.ln();
                    }
                }
            }
        }
        total += dh + r1;
    }
    Ok((numeric, total))
}
