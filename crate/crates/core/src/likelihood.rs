//! Likelihood ratios between the planted and null models and the per-pair
//! factors of the conditional second moment.

use crate::error::{check_same_size, Result};
use crate::model::{build_cycle, Adjacency, LatentPositions, Params};

/// `count * ln(num / den)` with `0 * ln(anything) = 0` and equal
/// numerator/denominator contributing exactly zero.
fn log_term(count: usize, num: f64, den: f64) -> f64 {
    if count == 0 || num == den {
        0.0
    } else {
        count as f64 * (num / den).ln()
    }
}

/// `ln P(A | X) / Q(A)`.
///
/// Returns `f64::NEG_INFINITY` when `A` has probability zero under the planted
/// model given `X` (for instance `p = 1` and a non-edge of `A` on the cycle).
pub fn log_likelihood_ratio(a: &Adjacency, x: &Adjacency, params: &Params) -> Result<f64> {
    check_same_size(x.n(), a.n())?;
    let (p, q, r) = (params.p(), params.q(), params.r());
    let n11 = a.inner(x);
    let n10 = a.edge_count() - n11;
    let n01 = x.edge_count() - n11;
    let n00 = a.pairs() - n11 - n10 - n01;
    Ok(log_term(n11, p, r)
        + log_term(n10, q, r)
        + log_term(n01, 1.0 - p, 1.0 - r)
        + log_term(n00, 1.0 - q, 1.0 - r))
}

/// `E_{A ~ Q}` of the product of two single-pair likelihood ratios with cycle
/// bits `x` and `x_prime`.
pub fn pair_second_moment_factor(x: bool, x_prime: bool, params: &Params) -> f64 {
    let (p, q, r) = (params.p(), params.q(), params.r());
    let (a, b) = (if x { p } else { q }, if x_prime { p } else { q });
    a * b / r + (1.0 - a) * (1.0 - b) / (1.0 - r)
}

/// Conditional second moment for fixed latent vectors and its exponential
/// upper bound, both also available in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoment {
    pub log_product: f64,
    pub log_bound: f64,
}

impl SecondMoment {
    pub fn product(&self) -> f64 {
        self.log_product.exp()
    }

    pub fn exponent_bound(&self) -> f64 {
        self.log_bound.exp()
    }
}

/// Pair-type counts `(both on, both off, mixed)` for two cycles.
pub(crate) fn overlap_counts(x: &Adjacency, x_prime: &Adjacency) -> (usize, usize, usize) {
    let n11 = x.inner(x_prime);
    let (nx, nxp) = (x.edge_count(), x_prime.edge_count());
    let mixed = nx + nxp - 2 * n11;
    (n11, x.pairs() - n11 - mixed, mixed)
}

pub(crate) fn log_second_moment_from_counts(
    (n11, n00, mixed): (usize, usize, usize),
    params: &Params,
) -> f64 {
    let f = |a, b| pair_second_moment_factor(a, b, params).ln();
    let part = |count: usize, lf: f64| if count == 0 { 0.0 } else { count as f64 * lf };
    part(n11, f(true, true)) + part(n00, f(false, false)) + part(mixed, f(true, false))
}

/// Second moment given the two cycles directly.
pub fn second_moment_for_cycles(
    x: &Adjacency,
    x_prime: &Adjacency,
    params: &Params,
) -> Result<SecondMoment> {
    check_same_size(x.n(), x_prime.n())?;
    let counts = overlap_counts(x, x_prime);
    let tau = params.tau();
    let overlap = counts.0 as f64 - tau * x_prime.edge_count() as f64;
    let centered = x.edge_count() as f64 - tau * x.pairs() as f64;
    Ok(SecondMoment {
        log_product: log_second_moment_from_counts(counts, params),
        log_bound: params.lambda() * (overlap - tau * centered),
    })
}

/// Product of per-pair factors over the cycles of `z` and `z_prime`, with
/// the bound `exp(lambda (sum X'(X - tau) - tau sum (X - tau)))`.
pub fn second_moment_conditional(
    z: &LatentPositions,
    z_prime: &LatentPositions,
    params: &Params,
) -> Result<SecondMoment> {
    check_same_size(z.len(), z_prime.len())?;
    let x = build_cycle(z, params.tau())?;
    let xp = build_cycle(z_prime, params.tau())?;
    second_moment_for_cycles(&x, &xp, params)
}

/// Largest absolute residual over the three pair-factor identities, each
/// checked as `factor = 1 + d/(r(1-r))` and `d/(r(1-r)) = lambda * c`.
pub fn verify_elementary_identities(params: &Params) -> f64 {
    let (p, q, r, tau, lam) = (
        params.p(),
        params.q(),
        params.r(),
        params.tau(),
        params.lambda(),
    );
    let v = r * (1.0 - r);
    let rows = [
        (
            pair_second_moment_factor(true, true, params),
            (p - r) * (p - r) / v,
            lam * (1.0 - tau) * (1.0 - tau),
        ),
        (
            pair_second_moment_factor(false, false, params),
            (q - r) * (q - r) / v,
            lam * tau * tau,
        ),
        (
            pair_second_moment_factor(true, false, params),
            (p - r) * (q - r) / v,
            -lam * tau * (1.0 - tau),
        ),
    ];
    rows.iter()
        .flat_map(|&(lhs, mid, rhs)| [(lhs - (1.0 + mid)).abs(), (mid - rhs).abs()])
        .fold(0.0, f64::max)
}
