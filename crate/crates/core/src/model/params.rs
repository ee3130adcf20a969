use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-12;

/// Model parameters `(n, tau, p, q, r)` with the derived signal-to-noise ratio.
///
/// `r` is the ambient edge density `tau * p + (1 - tau) * q` and `lambda` is
/// `(p - q)^2 / (r (1 - r))`. Values built with [`Params::new`] satisfy
/// `0 < q < r < p <= 1` and `0 < tau < 1/2`; [`Params::unchecked`] skips those
/// checks for degenerate fixtures (`p = q`, `r` in `{0, 1}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    n: usize,
    tau: f64,
    p: f64,
    q: f64,
    r: f64,
    lambda: f64,
    checked: bool,
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub(crate) fn snr(p: f64, q: f64, r: f64) -> f64 {
    let d = p - q;
    if d == 0.0 {
        return 0.0;
    }
    let den = r * (1.0 - r);
    if den <= 0.0 {
        f64::INFINITY
    } else {
        d * d / den
    }
}

impl Params {
    /// Validated constructor. When `r` is `None` it is derived from
    /// `(tau, p, q)`; otherwise it must agree with the derived value.
    pub fn new(n: usize, tau: f64, p: f64, q: f64, r: Option<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if !(tau > 0.0 && tau < 0.5) {
            return Err(Error::InvalidParams(format!("tau = {tau} not in (0, 1/2)")));
        }
        let derived = tau * p + (1.0 - tau) * q;
        let r = match r {
            Some(r) if !rel_close(r, derived) => {
                return Err(Error::InvalidParams(format!(
                    "r = {r} inconsistent with tau*p + (1-tau)*q = {derived}"
                )))
            }
            Some(r) => r,
            None => derived,
        };
        if !(q > 0.0 && q < r && r < p && p <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "need 0 < q < r < p <= 1, got q = {q}, r = {r}, p = {p}"
            )));
        }
        Ok(Self {
            n,
            tau,
            p,
            q,
            r,
            lambda: snr(p, q, r),
            checked: true,
        })
    }

    /// Parameters from `(n, tau, p, r)`, solving `q = (r - tau p) / (1 - tau)`.
    pub fn from_density(n: usize, tau: f64, p: f64, r: f64) -> Result<Self> {
        let q = (r - tau * p) / (1.0 - tau);
        Self::new(n, tau, p, q, None)
    }

    /// No range checks; `r` is taken as given and `lambda` derived from it.
    pub fn unchecked(n: usize, tau: f64, p: f64, q: f64, r: f64) -> Self {
        Self {
            n,
            tau,
            p,
            q,
            r,
            lambda: snr(p, q, r),
            checked: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    /// Whether this value passed the strict constructor.
    pub fn is_checked(&self) -> bool {
        self.checked
    }

    /// Number of vertex pairs, `n choose 2`.
    pub fn pairs(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    /// Same parameters on a different vertex count.
    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    /// Interpolated model at on-cycle density `theta`: `p <- theta`,
    /// `q <- (r - tau theta) / (1 - tau)`, with `n`, `tau`, `r` unchanged.
    pub fn interpolate(&self, theta: f64) -> Result<Self> {
        let (tau, r) = (self.tau, self.r);
        if !(theta >= r && theta <= 1.0) {
            return Err(Error::Domain(format!(
                "theta = {theta} outside [r, 1] = [{r}, 1]"
            )));
        }
        if r <= tau * theta {
            return Err(Error::Domain(format!(
                "interpolation needs r > tau * theta, got r = {r}, tau * theta = {}",
                tau * theta
            )));
        }
        let q = (r - tau * theta) / (1.0 - tau);
        Ok(Self::unchecked(self.n, tau, theta, q, r))
    }
}
