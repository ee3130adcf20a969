//! Centered edge counts, the overlap U-statistic, its block decomposition into
//! independent sums, the conditioning events, and tail-envelope diagnostics.

mod decompose;
mod tail;

pub use decompose::{
    block_count, block_index, decompose, BlockDecomposition, Decomposition, Family,
};
pub use tail::{tail_envelope, tail_envelope_compare, TailReport, TailRow, TailStatistic};

use crate::error::{check_same_size, Error, Result};
use crate::model::{arc_dist, build_cycle, check_tau, Adjacency, LatentPositions, Params};

/// `T = sum_{i<j} (X_ij - tau)`.
pub fn centered_edge_sum(x: &Adjacency, tau: f64) -> f64 {
    x.edge_count() as f64 - tau * x.pairs() as f64
}

/// `S = sum_{i<j} X'_ij (X_ij - tau)`.
pub fn overlap_stat(x: &Adjacency, x_prime: &Adjacency, tau: f64) -> Result<f64> {
    check_same_size(x_prime.n(), x.n())?;
    Ok(x.inner(x_prime) as f64 - tau * x_prime.edge_count() as f64)
}

/// Default threshold for the centered-edge event:
/// `20 * max(n lambda tau^1.5, sqrt(n) lambda tau^1.5, lambda tau) * ln n`.
pub fn default_e0_threshold(params: &Params) -> f64 {
    let (n, tau, lam) = (params.n() as f64, params.tau(), params.lambda());
    let t32 = tau.powf(1.5);
    let branch = (n * lam * t32).max(n.sqrt() * lam * t32).max(lam * tau);
    20.0 * branch * n.ln()
}

/// Whether `lambda * tau * |T| <= t` for the cycle of `z`.
pub fn event_e0(z: &LatentPositions, params: &Params, t: f64) -> Result<bool> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("threshold t = {t} must be positive")));
    }
    let x = build_cycle(z, params.tau())?;
    Ok(event_e0_for_cycle(&x, params, t))
}

pub(crate) fn event_e0_for_cycle(x: &Adjacency, params: &Params, t: f64) -> bool {
    let scale = params.lambda() * params.tau();
    scale == 0.0 || scale * centered_edge_sum(x, params.tau()).abs() <= t
}

/// Whether every block holds at most `4 n tau` of the points `z_prime`.
pub fn event_e1(z_prime: &LatentPositions, tau: f64) -> Result<bool> {
    check_tau(tau)?;
    let k = block_count(tau)?;
    let mut counts = vec![0usize; k];
    for &v in z_prime.as_slice() {
        counts[block_index(v, tau, k)] += 1;
    }
    let cap = 4.0 * z_prime.len() as f64 * tau;
    Ok(counts.iter().all(|&c| c as f64 <= cap))
}

/// Decoupled overlap `sum_{i<j} X'_ij (1{dist(z_i, z''_j) <= tau/2} - tau)`.
///
/// The indicator pairs the first coordinate from `z` with the second from
/// `z_double`, so the statistic is not symmetric in the two vectors.
pub fn decoupled_overlap(
    z: &LatentPositions,
    z_double: &LatentPositions,
    x_prime: &Adjacency,
    tau: f64,
) -> Result<f64> {
    check_tau(tau)?;
    check_same_size(z.len(), z_double.len())?;
    check_same_size(z.len(), x_prime.n())?;
    let (a, b) = (z.as_slice(), z_double.as_slice());
    let half = tau / 2.0;
    Ok(x_prime
        .edges()
        .map(|(i, j)| f64::from(u8::from(arc_dist(a[i], b[j]) <= half)) - tau)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    #[test]
    fn centered_sum_examples() {
        assert_eq!(centered_edge_sum(&Adjacency::empty(4), 0.25), -1.5);
        assert_eq!(centered_edge_sum(&Adjacency::complete(4), 0.25), 4.5);
    }

    #[test]
    fn centered_sum_has_zero_mean() {
        let s = Streams::new(17);
        let trials = 100_000;
        let vals: Vec<f64> = (0..trials)
            .map(|t| {
                let z = LatentPositions::uniform(12, &mut s.rng(&[t]));
                centered_edge_sum(&build_cycle(&z, 0.2).unwrap(), 0.2)
            })
            .collect();
        let m = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (trials - 1) as f64;
        assert!(m.abs() < 3.0 * (var / trials as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn overlap_examples() {
        let x = Adjacency::from_bitstring(4, "101001").unwrap();
        assert_eq!(overlap_stat(&x, &Adjacency::empty(4), 0.3).unwrap(), 0.0);
        let c = Adjacency::complete(7);
        assert!((overlap_stat(&c, &c, 0.3).unwrap() - 21.0 * 0.7).abs() < 1e-12);
        assert!(overlap_stat(&c, &x, 0.3).is_err());
    }

    #[test]
    fn overlap_has_zero_mean_for_fixed_support() {
        let s = Streams::new(19);
        let zp = LatentPositions::uniform(15, &mut s.rng(&[0]));
        let xp = build_cycle(&zp, 0.25).unwrap();
        let trials = 100_000;
        let vals: Vec<f64> = (0..trials)
            .map(|t| {
                let z = LatentPositions::uniform(15, &mut s.rng(&[1, t]));
                overlap_stat(&build_cycle(&z, 0.25).unwrap(), &xp, 0.25).unwrap()
            })
            .collect();
        let m = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (trials - 1) as f64;
        assert!(m.abs() < 3.0 * (var / trials as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn e0_examples() {
        let params = Params::new(50, 0.1, 0.9, 0.1, None).unwrap();
        let z = LatentPositions::new(vec![0.0; 50]).unwrap();
        assert!(event_e0(&z, &params, f64::INFINITY).unwrap());
        assert!(!event_e0(&z, &params, 1e-3).unwrap());
        let flat = Params::unchecked(50, 0.1, 0.3, 0.3, 0.3);
        assert!(event_e0(&z, &flat, 1e-9).unwrap());
        assert!(event_e0(&z, &flat, 0.0).is_err());
    }

    #[test]
    fn e0_likely_with_default_threshold() {
        // n tau lambda well below one
        let params = Params::from_density(200, 0.05, 0.25, 0.2).unwrap();
        let t = default_e0_threshold(&params);
        let s = Streams::new(23);
        let hits = (0..10_000u64)
            .filter(|&i| {
                event_e0(&LatentPositions::uniform(200, &mut s.rng(&[i])), &params, t).unwrap()
            })
            .count();
        assert!(hits as f64 / 10_000.0 >= 0.99);
    }

    #[test]
    fn e1_examples() {
        let clustered = LatentPositions::new(vec![0.05; 10]).unwrap();
        assert!(!event_e1(&clustered, 0.2).unwrap());
        let even: Vec<f64> = (0..40).map(|i| i as f64 / 40.0).collect();
        assert!(event_e1(&LatentPositions::new(even).unwrap(), 0.1).unwrap());
    }

    #[test]
    fn e1_likely_when_blocks_are_large() {
        let (n, tau) = (400usize, 0.1);
        let s = Streams::new(29);
        let hits = (0..10_000u64)
            .filter(|&i| event_e1(&LatentPositions::uniform(n, &mut s.rng(&[i])), tau).unwrap())
            .count();
        assert!(hits as f64 / 10_000.0 >= 1.0 - 10.0 / n as f64);
    }

    #[test]
    fn decoupled_reduces_on_diagonal_and_is_asymmetric() {
        // three vertices, hand computed
        let z = LatentPositions::new(vec![0.0, 0.1, 0.5]).unwrap();
        let zz = LatentPositions::new(vec![0.45, 0.9, 0.05]).unwrap();
        let xp = Adjacency::complete(3);
        let tau = 0.25;
        // (0,1): d(0.0, 0.9) = 0.1 -> 1; (0,2): d(0.0, 0.05) -> 1; (1,2): d(0.1, 0.05) -> 1
        let fwd = decoupled_overlap(&z, &zz, &xp, tau).unwrap();
        assert!((fwd - 3.0 * 0.75).abs() < 1e-12);
        // (0,1): d(0.45, 0.1) = 0.35 -> 0; (0,2): d(0.45, 0.5) -> 1; (1,2): d(0.9, 0.5) -> 0
        let back = decoupled_overlap(&zz, &z, &xp, tau).unwrap();
        assert!((back - (1.0 - 3.0 * 0.25)).abs() < 1e-12);
        // with z'' = z the indicator is X_ij itself
        let x = build_cycle(&z, tau).unwrap();
        assert_eq!(
            decoupled_overlap(&z, &z, &xp, tau).unwrap(),
            overlap_stat(&x, &xp, tau).unwrap()
        );
        assert_eq!(
            decoupled_overlap(&z, &zz, &Adjacency::empty(3), tau).unwrap(),
            0.0
        );
    }

    #[test]
    fn decoupled_has_zero_mean() {
        let s = Streams::new(31);
        let xp = build_cycle(&LatentPositions::uniform(20, &mut s.rng(&[0])), 0.2).unwrap();
        let trials = 50_000u64;
        let vals: Vec<f64> = (0..trials)
            .map(|t| {
                let mut rng = s.rng(&[1, t]);
                let z = LatentPositions::uniform(20, &mut rng);
                let zz = LatentPositions::uniform(20, &mut rng);
                decoupled_overlap(&z, &zz, &xp, 0.2).unwrap()
            })
            .collect();
        let m = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (trials - 1) as f64;
        assert!(m.abs() < 3.0 * (var / trials as f64).sqrt());
    }
}
