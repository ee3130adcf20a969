use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::likelihood::{log_second_moment_from_counts, overlap_counts};
use crate::model::{build_cycle, LatentPositions, Params};
use crate::rng::Streams;
use crate::ustat::{event_e0_for_cycle, event_e1};

/// Monte Carlo estimate of `E[prod_e f(X_e, X'_e) 1{z in E} 1{z' in E}]` for
/// independent `z, z'`, where `E` is the intersection of the centered-edge
/// event and the balanced-block event, plus the same average without the
/// indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2Estimate {
    pub estimate: f64,
    pub se: f64,
    pub unconditioned: f64,
    pub unconditioned_se: f64,
    /// Fraction of samples with both vectors in the event.
    pub event_rate: f64,
    pub samples: usize,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let m = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    (m, (var / k).sqrt())
}

/// Requires `samples >= 10^4` and `t0 > 0`.
pub fn conditional_chi2_mc(
    params: &Params,
    samples: usize,
    t0: f64,
    streams: &Streams,
) -> Result<Chi2Estimate> {
    if samples < 10_000 {
        return Err(Error::InvalidParams(format!(
            "samples = {samples} must be at least 10^4"
        )));
    }
    if !(t0 > 0.0) {
        return Err(Error::Domain(format!(
            "threshold t0 = {t0} must be positive"
        )));
    }
    let (n, tau) = (params.n(), params.tau());
    let draws: Vec<(f64, bool)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.rng(&[i]);
            let z = LatentPositions::uniform(n, &mut rng);
            let zp = LatentPositions::uniform(n, &mut rng);
            let x = build_cycle(&z, tau)?;
            let xp = build_cycle(&zp, tau)?;
            let prod = log_second_moment_from_counts(overlap_counts(&x, &xp), params).exp();
            let good = |z: &LatentPositions, x| -> Result<bool> {
                Ok(event_e0_for_cycle(x, params, t0) && event_e1(z, tau)?)
            };
            Ok((prod, good(&z, &x)? && good(&zp, &xp)?))
        })
        .collect::<Result<_>>()?;
    let cond: Vec<f64> = draws
        .iter()
        .map(|&(v, g)| if g { v } else { 0.0 })
        .collect();
    let all: Vec<f64> = draws.iter().map(|&(v, _)| v).collect();
    let (estimate, se) = mean_se(&cond);
    let (unconditioned, unconditioned_se) = mean_se(&all);
    Ok(Chi2Estimate {
        estimate,
        se,
        unconditioned,
        unconditioned_se,
        event_rate: draws.iter().filter(|d| d.1).count() as f64 / samples as f64,
        samples,
    })
}
