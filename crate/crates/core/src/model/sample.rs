use rand::Rng;

use super::adjacency::Adjacency;
use super::geometry::{build_cycle, check_tau, LatentPositions};
use super::params::Params;
use crate::error::{Error, Result};

/// One draw `(A, X, z)` from the planted model.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSample {
    pub a: Adjacency,
    pub x: Adjacency,
    pub z: LatentPositions,
}

#[inline]
fn bern<R: Rng + ?Sized>(rng: &mut R, prob: f64) -> bool {
    rng.random::<f64>() < prob
}

/// Observation given the cycle: `A_ij ~ Bern(p)` on edges of `x`, `Bern(q)` off them.
pub fn sample_observation<R: Rng + ?Sized>(
    x: &Adjacency,
    p: f64,
    q: f64,
    rng: &mut R,
) -> Adjacency {
    let mut a = Adjacency::empty(x.n());
    for k in 0..x.pairs() {
        let prob = if x.get_index(k) { p } else { q };
        if bern(rng, prob) {
            a.set_index(k, true);
        }
    }
    a
}

/// Planted dense cycle: uniform latent positions, cycle `X`, then `A | X`.
pub fn sample_planted<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Result<PlantedSample> {
    check_tau(params.tau())?;
    let z = LatentPositions::uniform(params.n(), rng);
    let x = build_cycle(&z, params.tau())?;
    let a = sample_observation(&x, params.p(), params.q(), rng);
    Ok(PlantedSample { a, x, z })
}

/// Erdős–Rényi `G(n, r)`.
pub fn sample_null<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Adjacency {
    let mut a = Adjacency::empty(params.n());
    let r = params.r();
    for k in 0..a.pairs() {
        if bern(rng, r) {
            a.set_index(k, true);
        }
    }
    a
}

/// Planted model at interpolation level `theta` (on-cycle density `theta`,
/// off-cycle density chosen to keep the marginal at `r`).
pub fn sample_interpolated<R: Rng + ?Sized>(
    params: &Params,
    theta: f64,
    rng: &mut R,
) -> Result<PlantedSample> {
    sample_planted(&params.interpolate(theta)?, rng)
}

/// Per-entry relabelling channel taking level `theta_prime` to level `theta`:
/// keep a 1 with probability `x`, turn a 0 into a 1 with probability `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradeChannel {
    pub x: f64,
    pub y: f64,
}

impl DegradeChannel {
    /// Requires `r <= theta < theta_prime <= 1`.
    pub fn new(theta_prime: f64, theta: f64, r: f64) -> Result<Self> {
        if !(theta_prime > theta) {
            return Err(Error::Domain(format!(
                "degradation needs theta' > theta, got {theta_prime} <= {theta}"
            )));
        }
        if !(r <= theta && theta_prime <= 1.0 && r > 0.0) {
            return Err(Error::Domain(format!(
                "need 0 < r <= theta < theta' <= 1, got r = {r}, theta = {theta}, theta' = {theta_prime}"
            )));
        }
        let ch = Self::unchecked(theta_prime, theta, r);
        if !(0.0..=1.0).contains(&ch.x) || !(0.0..=1.0).contains(&ch.y) {
            return Err(Error::Domain(format!(
                "channel probabilities out of range: x = {}, y = {}",
                ch.x, ch.y
            )));
        }
        Ok(ch)
    }

    /// Closed form without range checks; `theta_prime == theta > r` gives the
    /// identity channel.
    pub fn unchecked(theta_prime: f64, theta: f64, r: f64) -> Self {
        let den = theta_prime - r;
        Self {
            x: (theta - r + r * (theta_prime - theta)) / den,
            y: r * (theta_prime - theta) / den,
        }
    }

    /// Output edge probability when the input entry is `Bern(prob)`.
    pub fn push_forward(&self, prob: f64) -> f64 {
        self.x * prob + self.y * (1.0 - prob)
    }

    pub fn apply<R: Rng + ?Sized>(&self, a_prime: &Adjacency, rng: &mut R) -> Adjacency {
        let mut out = Adjacency::empty(a_prime.n());
        for k in 0..a_prime.pairs() {
            let prob = if a_prime.get_index(k) { self.x } else { self.y };
            if bern(rng, prob) {
                out.set_index(k, true);
            }
        }
        out
    }
}

/// Resamples `a_prime ~ P_{theta'}` into a draw of `P_theta`.
pub fn degrade<R: Rng + ?Sized>(
    a_prime: &Adjacency,
    theta_prime: f64,
    theta: f64,
    r: f64,
    rng: &mut R,
) -> Result<Adjacency> {
    Ok(DegradeChannel::new(theta_prime, theta, r)?.apply(a_prime, rng))
}
