use rand::Rng;

use super::adjacency::Adjacency;
use crate::error::{Error, Result};

/// Latent circle positions, each in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPositions(Vec<f64>);

impl LatentPositions {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if let Some(bad) = z.iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
            return Err(Error::Domain(format!(
                "latent position {bad} outside [0, 1)"
            )));
        }
        Ok(Self(z))
    }

    /// `n` i.i.d. uniform draws on `[0, 1)`.
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| rng.random::<f64>()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Rotation by `c` modulo 1.
    pub fn rotated(&self, c: f64) -> Self {
        Self(self.0.iter().map(|&v| wrap01(v + c)).collect())
    }

    /// Reflection `z -> 1 - z` modulo 1.
    pub fn reflected(&self) -> Self {
        Self(self.0.iter().map(|&v| wrap01(1.0 - v)).collect())
    }
}

/// Maps any finite real onto `[0, 1)`.
#[inline]
pub fn wrap01(v: f64) -> f64 {
    let w = v - v.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Circular distance without range checks.
#[inline]
pub fn arc_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Distance between `a` and `b` on the unit circle `[0, 1)`.
pub fn circ_dist(a: f64, b: f64) -> Result<f64> {
    for v in [a, b] {
        if !(v >= 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("{v} outside [0, 1)")));
        }
    }
    Ok(arc_dist(a, b))
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("tau = {tau} not in (0, 1/2)")))
    }
}

/// Cycle adjacency: `X_ij = 1` iff `circ_dist(z_i, z_j) <= tau / 2`.
pub fn build_cycle(z: &LatentPositions, tau: f64) -> Result<Adjacency> {
    check_tau(tau)?;
    Ok(cycle_from_slice(z.as_slice(), tau))
}

/// Sort-and-sweep construction; visits only pairs within reach plus one
/// stopping pair per vertex.
fn cycle_from_slice(z: &[f64], tau: f64) -> Adjacency {
    let n = z.len();
    let half = tau / 2.0;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    let mut x = Adjacency::empty(n);
    for pos in 0..n {
        let i = order[pos];
        for step in 1..n {
            let j = order[(pos + step) % n];
            if arc_dist(z[i], z[j]) <= half {
                x.set(i, j, true);
            } else {
                break;
            }
        }
    }
    x
}
