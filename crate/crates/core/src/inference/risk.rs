use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{detect, exact_search, local_search, recovery_metrics, SearchMode, SearchResult};
use crate::error::{Error, Result};
use crate::feasible::{enumerate_feasible, size_band_filter, FeasibleSet};
use crate::model::{sample_null, sample_planted, Adjacency, LatentPositions, Params};
use crate::rng::{StreamRng, Streams};

/// One parameter point of a sweep. `a` and `b` are the exponents of
/// `p = n^-a`, `tau = n^-b` when the cell comes from a phase grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub tau: f64,
    pub p: f64,
    pub q: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl Cell {
    pub fn from_params(params: &Params) -> Self {
        Cell {
            n: params.n(),
            tau: params.tau(),
            p: params.p(),
            q: params.q(),
            a: None,
            b: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskConfig {
    pub trials: usize,
    pub mode: SearchMode,
    pub restarts: usize,
    /// Start one local-search restart at the planted positions (and, under
    /// the null, at independent uniform positions).
    pub truth_init: bool,
    /// Grid resolution recorded with exact-mode feasible sets.
    pub grid_m: usize,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig {
            trials: 100,
            mode: SearchMode::Local,
            restarts: 10,
            truth_init: false,
            grid_m: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub tau: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub lambda: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub detect_risk: f64,
    pub detect_se: f64,
    pub recovery_ratio: f64,
    pub recovery_se: f64,
    pub search_mode: SearchMode,
    pub truth_init: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<char>,
}

// Strictly valid parameters, or the boundary cases q = p and q = 0 that the
// strict constructor rejects but sampling handles.
fn cell_params(c: &Cell) -> Option<Params> {
    if let Ok(p) = Params::new(c.n, c.tau, c.p, c.q, None) {
        return Some(p);
    }
    let loose = c.n >= 2 && c.tau > 0.0 && c.tau < 0.5 && 0.0 <= c.q && c.q <= c.p && c.p <= 1.0;
    loose.then(|| Params::unchecked(c.n, c.tau, c.p, c.q, c.tau * c.p + (1.0 - c.tau) * c.q))
}

struct Outcome {
    type_one: bool,
    type_two: bool,
    ratio: f64,
}

fn search(
    a: &Adjacency,
    params: &Params,
    cfg: &RiskConfig,
    set: Option<&FeasibleSet>,
    init: Option<&LatentPositions>,
    rng: &mut StreamRng,
) -> Result<SearchResult> {
    match (cfg.mode, set) {
        (SearchMode::Exact, Some(s)) => exact_search(a, s),
        _ => local_search(
            a,
            params,
            cfg.restarts,
            if cfg.truth_init { init } else { None },
            rng,
        ),
    }
}

fn trial(
    params: &Params,
    cfg: &RiskConfig,
    set: Option<&FeasibleSet>,
    streams: &Streams,
    cell: u64,
    t: u64,
) -> Result<Outcome> {
    let mut rng = streams.rng(&[cell, t, 0]);
    let planted = sample_planted(params, &mut rng)?;
    let mut srng = streams.rng(&[cell, t, 1]);
    let alt = search(&planted.a, params, cfg, set, Some(&planted.z), &mut srng)?;
    let (_, ratio) = recovery_metrics(&alt.x_hat, &planted.x, params)?;

    let mut rng = streams.rng(&[cell, t, 2]);
    let null = sample_null(params, &mut rng);
    let decoy = LatentPositions::uniform(params.n(), &mut rng);
    let mut srng = streams.rng(&[cell, t, 3]);
    let nul = search(&null, params, cfg, set, Some(&decoy), &mut srng)?;
    Ok(Outcome {
        type_one: detect(&nul, params),
        type_two: !detect(&alt, params),
        ratio,
    })
}

/// Monte Carlo detection risk (type I plus type II error of the threshold
/// test) and mean recovery ratio per cell, with standard errors.
///
/// Cells whose parameters are invalid produce a record with `trials = 0` and
/// NaN statistics. Trials run in parallel on keyed substreams, so output does
/// not depend on the thread count.
pub fn risk_curve(cells: &[Cell], cfg: &RiskConfig, streams: &Streams) -> Result<Vec<SweepRecord>> {
    if cfg.trials < 1 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let params: Vec<Option<Params>> = cells.iter().map(cell_params).collect();
    let sets: Vec<Option<FeasibleSet>> = cells
        .iter()
        .zip(&params)
        .map(|(c, p)| match (cfg.mode, p) {
            (SearchMode::Exact, Some(_)) => {
                enumerate_feasible(c.n, c.tau, cfg.grid_m).map(|s| Some(size_band_filter(&s)))
            }
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u64)> = params
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_some())
        .flat_map(|(i, _)| (0..cfg.trials as u64).map(move |t| (i, t)))
        .collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let p = params[i].as_ref().expect("filtered");
            trial(p, cfg, sets[i].as_ref(), streams, i as u64, t)
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(cells.len());
    let mut at = 0;
    for (i, c) in cells.iter().enumerate() {
        let r = c.tau * c.p + (1.0 - c.tau) * c.q;
        let mut rec = SweepRecord {
            n: c.n,
            tau: c.tau,
            p: c.p,
            q: c.q,
            r,
            lambda: crate::model::snr(c.p, c.q, r),
            a: c.a,
            b: c.b,
            trials: 0,
            seed: streams.seed(),
            detect_risk: f64::NAN,
            detect_se: f64::NAN,
            recovery_ratio: f64::NAN,
            recovery_se: f64::NAN,
            search_mode: cfg.mode,
            truth_init: cfg.truth_init,
            region: None,
        };
        if params[i].is_some() {
            let outs = &outcomes[at..at + cfg.trials];
            at += cfg.trials;
            let t = cfg.trials as f64;
            let e1 = outs.iter().filter(|o| o.type_one).count() as f64 / t;
            let e2 = outs.iter().filter(|o| o.type_two).count() as f64 / t;
            let mean = outs.iter().map(|o| o.ratio).sum::<f64>() / t;
            let var = if cfg.trials > 1 {
                outs.iter().map(|o| (o.ratio - mean).powi(2)).sum::<f64>() / (t - 1.0)
            } else {
                0.0
            };
            rec.trials = cfg.trials;
            rec.detect_risk = e1 + e2;
            rec.detect_se = (e1 * (1.0 - e1) / t + e2 * (1.0 - e2) / t).sqrt();
            rec.recovery_ratio = mean;
            rec.recovery_se = (var / t).sqrt();
        }
        records.push(rec);
    }
    Ok(records)
}

/// Writes records as CSV (a `region` column is added when any record has
/// one). `header` lines are written first, each prefixed with `# `.
pub fn write_sweep_csv<W: Write>(out: W, records: &[SweepRecord], header: &[String]) -> Result<()> {
    let mut out = out;
    for h in header {
        writeln!(out, "# {h}")?;
    }
    let with_region = records.iter().any(|r| r.region.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut cols = vec![
        "n",
        "tau",
        "p",
        "q",
        "r",
        "lambda",
        "a",
        "b",
        "trials",
        "seed",
        "detect_risk",
        "detect_se",
        "recovery_ratio",
        "recovery_se",
        "search_mode",
        "truth_init",
    ];
    if with_region {
        cols.push("region");
    }
    w.write_record(&cols).map_err(csv_err)?;
    for r in records {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut row = vec![
            r.n.to_string(),
            r.tau.to_string(),
            r.p.to_string(),
            r.q.to_string(),
            r.r.to_string(),
            r.lambda.to_string(),
            opt(r.a),
            opt(r.b),
            r.trials.to_string(),
            r.seed.to_string(),
            r.detect_risk.to_string(),
            r.detect_se.to_string(),
            r.recovery_ratio.to_string(),
            r.recovery_se.to_string(),
            r.search_mode.to_string(),
            r.truth_init.to_string(),
        ];
        if with_region {
            row.push(r.region.map(String::from).unwrap_or_default());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses CSV written by [`write_sweep_csv`], skipping `#` comment lines.
pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    rd.deserialize::<SweepRecord>()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
