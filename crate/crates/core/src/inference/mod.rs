//! The scan test and the scan estimator: exact search over an enumerated
//! feasible set, a local-search surrogate, the threshold test, and risk
//! metrics.

mod local;
mod risk;

pub use local::{local_search, PROPOSALS_BASE, PROPOSALS_PER_VERTEX};
pub use risk::{read_sweep_csv, risk_curve, write_sweep_csv, Cell, RiskConfig, SweepRecord};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_size, Error, Result};
use crate::feasible::FeasibleSet;
use crate::model::{choose2, Adjacency, LatentPositions, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exact,
    Local,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Exact => "exact",
            SearchMode::Local => "local",
        })
    }
}

impl FromStr for SearchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SearchMode::Exact),
            "local" => Ok(SearchMode::Local),
            _ => Err(Error::Parse(format!("unknown search mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x_hat: Adjacency,
    /// `<x_hat, a>`.
    pub l_hat: f64,
    pub z_hat: Option<LatentPositions>,
    pub mode: SearchMode,
}

/// Maximizer of `<x, a>` over `set`; ties go to the smallest bitstring.
pub fn exact_search(a: &Adjacency, set: &FeasibleSet) -> Result<SearchResult> {
    check_same_size(set.n(), a.n())?;
    // members are sorted, so keeping the first strict maximum breaks ties
    let mut best: Option<(&Adjacency, usize)> = None;
    for x in set.members() {
        let v = x.inner(a);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((x, v));
        }
    }
    let (x, v) = best.ok_or(Error::EmptySet)?;
    Ok(SearchResult {
        x_hat: x.clone(),
        l_hat: v as f64,
        z_hat: None,
        mode: SearchMode::Exact,
    })
}

/// `C(n,2) tau (p + r) / 2`.
pub fn kappa(params: &Params) -> f64 {
    choose2(params.n()) as f64 * params.tau() * (params.p() + params.r()) / 2.0
}

/// Whether `l_hat > kappa`.
pub fn detect(result: &SearchResult, params: &Params) -> bool {
    result.l_hat > kappa(params)
}

/// Squared error `sum (x_hat - x)^2` and its ratio to `C(n,2) tau (1 - tau)`.
pub fn recovery_metrics(x_hat: &Adjacency, x: &Adjacency, params: &Params) -> Result<(f64, f64)> {
    check_same_size(x.n(), x_hat.n())?;
    check_same_size(params.n(), x.n())?;
    let mse = x_hat.hamming(x) as f64;
    let tau = params.tau();
    let scale = choose2(x.n()) as f64 * tau * (1.0 - tau);
    Ok((mse, if scale > 0.0 { mse / scale } else { f64::NAN }))
}

/// Probability that a positive score exceeds a negative one, ties counting
/// one half.
pub fn auc(positive: &[f64], negative: &[f64]) -> f64 {
    let mut neg = negative.to_vec();
    neg.sort_unstable_by(f64::total_cmp);
    let mut wins = 0.0;
    for &s in positive {
        let below = neg.partition_point(|&v| v < s);
        let ties = neg.partition_point(|&v| v <= s) - below;
        wins += below as f64 + 0.5 * ties as f64;
    }
    wins / (positive.len() * neg.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::{enumerate_feasible, size_band_filter};
    use crate::model::{build_cycle, sample_null, sample_planted};
    use crate::rng::Streams;
    use rand::Rng;

    #[test]
    fn kappa_example() {
        let params = Params::unchecked(4, 0.25, 0.8, 0.4, 0.5);
        assert!((kappa(&params) - 0.975).abs() < 1e-12);
        let at = SearchResult {
            x_hat: Adjacency::empty(4),
            l_hat: kappa(&params),
            z_hat: None,
            mode: SearchMode::Exact,
        };
        assert!(!detect(&at, &params));
        assert!(detect(&SearchResult { l_hat: 1.0, ..at }, &params));
    }

    #[test]
    fn exact_search_zero_observation() {
        let set = enumerate_feasible(4, 0.25, 64).unwrap();
        let r = exact_search(&Adjacency::empty(4), &set).unwrap();
        assert_eq!(r.x_hat, Adjacency::empty(4));
        assert_eq!(r.l_hat, 0.0);
        let none = FeasibleSet::new(4, 0.25, 64, set.provenance(), vec![]).unwrap();
        assert_eq!(
            exact_search(&Adjacency::empty(4), &none),
            Err(Error::EmptySet)
        );
    }

    #[test]
    fn exact_search_matches_rescan() {
        let s = Streams::new(3);
        let params = Params::from_density(5, 0.3, 0.7, 0.4).unwrap();
        let set = size_band_filter(&enumerate_feasible(5, 0.3, 120).unwrap());
        for t in 0..200u64 {
            let a = sample_null(&params, &mut s.rng(&[t]));
            let r = exact_search(&a, &set).unwrap();
            let best = set.members().iter().map(|x| x.inner(&a)).max().unwrap();
            assert_eq!(r.l_hat, best as f64);
            let first = set.members().iter().find(|x| x.inner(&a) == best).unwrap();
            assert_eq!(&r.x_hat, first);
            assert!(set.contains(&r.x_hat));
        }
    }

    #[test]
    fn perfect_signal() {
        let params = Params::unchecked(5, 0.3, 1.0, 0.0, 0.3);
        let set = enumerate_feasible(5, 0.3, 120).unwrap();
        let s = Streams::new(4);
        for t in 0..50u64 {
            let smp = sample_planted(&params, &mut s.rng(&[t])).unwrap();
            let r = exact_search(&smp.a, &set).unwrap();
            assert_eq!(r.l_hat, smp.x.edge_count() as f64);
        }
    }

    #[test]
    fn detection_invariant_under_relabeling() {
        let params = Params::from_density(5, 0.3, 0.7, 0.4).unwrap();
        let set = size_band_filter(&enumerate_feasible(5, 0.3, 120).unwrap());
        let s = Streams::new(5);
        for t in 0..100u64 {
            let mut rng = s.rng(&[t]);
            let a = sample_planted(&params, &mut rng).unwrap().a;
            let mut perm: Vec<usize> = (0..5).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            let r1 = exact_search(&a, &set).unwrap();
            let r2 = exact_search(&a.permuted(&perm), &set).unwrap();
            assert_eq!(r1.l_hat, r2.l_hat);
            assert_eq!(detect(&r1, &params), detect(&r2, &params));
        }
    }

    #[test]
    fn local_with_truth_never_below_truth() {
        let s = Streams::new(6);
        for t in 0..30u64 {
            let mut rng = s.rng(&[t]);
            let n = rng.random_range(5..60);
            let params = Params::from_density(n, 0.1, 0.4, 0.2).unwrap();
            let smp = sample_planted(&params, &mut rng).unwrap();
            let r = local_search(&smp.a, &params, 2, Some(&smp.z), &mut rng).unwrap();
            assert!(r.l_hat >= smp.x.inner(&smp.a) as f64);
            assert_eq!(r.l_hat, r.x_hat.inner(&smp.a) as f64);
            assert_eq!(
                build_cycle(r.z_hat.as_ref().unwrap(), 0.1).unwrap(),
                r.x_hat
            );
        }
    }

    #[test]
    fn local_perfect_signal() {
        let params = Params::unchecked(60, 0.1, 1.0, 0.0, 0.1);
        let s = Streams::new(7);
        let mut rng = s.rng(&[0]);
        let smp = sample_planted(&params, &mut rng).unwrap();
        let r = local_search(&smp.a, &params, 3, Some(&smp.z), &mut rng).unwrap();
        assert_eq!(r.l_hat, smp.x.edge_count() as f64);
    }

    #[test]
    fn local_matches_exact_at_six() {
        let params = Params::from_density(6, 0.3, 0.7, 0.4).unwrap();
        let set = size_band_filter(&enumerate_feasible(6, 0.3, 288).unwrap());
        let s = Streams::new(8);
        let trials = 500u64;
        let agree = (0..trials)
            .filter(|&t| {
                let mut rng = s.rng(&[t]);
                let a = sample_planted(&params, &mut rng).unwrap().a;
                let ex = exact_search(&a, &set).unwrap();
                let lo = local_search(&a, &params, 50, None, &mut rng).unwrap();
                assert!(lo.l_hat <= ex.l_hat);
                lo.l_hat == ex.l_hat
            })
            .count();
        assert!(
            agree as f64 >= 0.95 * trials as f64,
            "agreement {agree}/{trials}"
        );
    }

    #[test]
    fn recovery_examples() {
        let params = Params::from_density(30, 0.2, 0.5, 0.3).unwrap();
        let smp = sample_planted(&params, &mut Streams::new(9).rng(&[0])).unwrap();
        assert_eq!(
            recovery_metrics(&smp.x, &smp.x, &params).unwrap(),
            (0.0, 0.0)
        );
        let (mse, ratio) = recovery_metrics(&Adjacency::empty(30), &smp.x, &params).unwrap();
        assert_eq!(mse, smp.x.edge_count() as f64);
        let typical = 435.0 * 0.2;
        assert!((ratio - mse / typical / 0.8).abs() < 1e-12);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[3.0, 4.0], &[1.0, 2.0]), 1.0);
        assert_eq!(auc(&[1.0], &[1.0]), 0.5);
        assert_eq!(auc(&[0.0, 5.0], &[1.0, 2.0]), 0.5);
    }
}
