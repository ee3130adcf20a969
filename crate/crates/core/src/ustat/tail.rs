use std::fmt::Write as _;

use rayon::prelude::*;

use super::{centered_edge_sum, decoupled_overlap, event_e1};
use crate::error::{Error, Result};
use crate::model::{build_cycle, LatentPositions, Params};
use crate::rng::Streams;

/// Which statistic a tail row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailStatistic {
    /// `|T|`, the centered edge count of a uniform cycle.
    CenteredEdges,
    /// `|S~|`, the decoupled overlap against a fixed support drawn from the
    /// balanced-block event.
    DecoupledOverlap,
}

impl TailStatistic {
    pub fn name(self) -> &'static str {
        match self {
            TailStatistic::CenteredEdges => "T",
            TailStatistic::DecoupledOverlap => "S_decoupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    pub empirical_tail: f64,
    pub envelope: f64,
    pub statistic: TailStatistic,
}

/// Empirical survival curves with a fitted envelope `K exp(-min(...))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub n: usize,
    pub tau: f64,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    /// Envelope multiplier per statistic, in the order of [`Self::statistics`].
    pub k: Vec<f64>,
    pub statistics: Vec<TailStatistic>,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn k_for(&self, stat: TailStatistic) -> Option<f64> {
        self.statistics
            .iter()
            .position(|&s| s == stat)
            .map(|i| self.k[i])
    }

    pub fn rows_for(&self, stat: TailStatistic) -> impl Iterator<Item = &TailRow> {
        self.rows.iter().filter(move |r| r.statistic == stat)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,empirical_tail,envelope,n,tau,lambda,trials,seed,statistic\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.t,
                r.empirical_tail,
                r.envelope,
                self.n,
                self.tau,
                self.lambda,
                self.trials,
                self.seed,
                r.statistic.name()
            );
        }
        out
    }
}

/// `exp(-min(t / C, (t / B)^(2/3), (t / A)^(1/2)))` with `A = 1`,
/// `B = sqrt(n tau)`, `C = n sqrt(tau)`.
pub fn tail_envelope(t: f64, n: usize, tau: f64) -> f64 {
    let n = n as f64;
    let b = (n * tau).sqrt();
    let c = n * tau.sqrt();
    (-(t / c).min((t / b).powf(2.0 / 3.0)).min(t.sqrt())).exp()
}

/// Grid of `0` followed by 25 log-spaced points between `0.01 C` and `10 C`.
pub fn tail_grid(n: usize, tau: f64) -> Vec<f64> {
    let c = n as f64 * tau.sqrt();
    let (lo, hi) = ((0.01 * c).ln(), (10.0 * c).ln());
    std::iter::once(0.0)
        .chain((0..25).map(|i| (lo + (hi - lo) * i as f64 / 24.0).exp()))
        .collect()
}

/// Monte Carlo survival of `|T|` and `|S~|` on [`tail_grid`], each with the
/// smallest `K` for which `K * tail_envelope` dominates it on the grid.
///
/// Requires at least 1000 trials.
pub fn tail_envelope_compare(
    params: &Params,
    trials: usize,
    streams: &Streams,
) -> Result<TailReport> {
    if trials < 1000 {
        return Err(Error::InvalidParams(format!(
            "trials = {trials} must be at least 1000"
        )));
    }
    let (n, tau) = (params.n(), params.tau());
    let t_abs: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let z = LatentPositions::uniform(n, &mut streams.rng(&[0, i]));
            build_cycle(&z, tau).map(|x| centered_edge_sum(&x, tau).abs())
        })
        .collect::<Result<_>>()?;

    // a typical support: first draw whose blocks are balanced
    let mut attempt = 0u64;
    let z_prime = loop {
        let zp = LatentPositions::uniform(n, &mut streams.rng(&[1, attempt]));
        if event_e1(&zp, tau)? {
            break zp;
        }
        attempt += 1;
        if attempt == 10_000 {
            return Err(Error::Degenerate("no balanced support found".into()));
        }
    };
    let x_prime = build_cycle(&z_prime, tau)?;
    let s_abs: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.rng(&[2, i]);
            let z = LatentPositions::uniform(n, &mut rng);
            let zz = LatentPositions::uniform(n, &mut rng);
            decoupled_overlap(&z, &zz, &x_prime, tau).map(f64::abs)
        })
        .collect::<Result<_>>()?;

    let grid = tail_grid(n, tau);
    let mut rows = Vec::new();
    let mut ks = Vec::new();
    let statistics = vec![
        TailStatistic::CenteredEdges,
        TailStatistic::DecoupledOverlap,
    ];
    for (stat, mut vals) in statistics.iter().copied().zip([t_abs, s_abs]) {
        vals.sort_unstable_by(f64::total_cmp);
        let surv: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let above = vals.len() - vals.partition_point(|&v| v <= t);
                above as f64 / vals.len() as f64
            })
            .collect();
        let k = grid
            .iter()
            .zip(&surv)
            .map(|(&t, &s)| s / tail_envelope(t, n, tau))
            .fold(0.0, f64::max);
        rows.extend(grid.iter().zip(&surv).map(|(&t, &s)| TailRow {
            t,
            empirical_tail: s,
            envelope: k * tail_envelope(t, n, tau),
            statistic: stat,
        }));
        ks.push(k);
    }
    Ok(TailReport {
        n,
        tau,
        lambda: params.lambda(),
        trials,
        seed: streams.seed(),
        k: ks,
        statistics,
        rows,
    })
}
