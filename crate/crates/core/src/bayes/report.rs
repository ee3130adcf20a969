use serde::{Deserialize, Serialize};

use super::{
    divergences_from_prior, mmse_from_prior, mutual_information_from_prior, GridPrior, LatentGrid,
};
use crate::error::Result;
use crate::model::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsePoint {
    pub theta: f64,
    pub mmse: f64,
}

/// JSON-serializable summary of the exact tiny-`n` quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub params: Params,
    pub grid_m: usize,
    pub tv_sum: f64,
    pub tv_half: f64,
    pub chi2: f64,
    pub kl: f64,
    pub mi_direct: f64,
    pub mi_via_kl: f64,
    pub mmse_by_theta: Vec<MmsePoint>,
}

/// Builds a report, evaluating `mmse` at every `theta` in `thetas`.
pub fn divergence_report(
    params: &Params,
    grid: &LatentGrid,
    thetas: &[f64],
) -> Result<DivergenceReport> {
    super::check_n(params, grid)?;
    let prior = GridPrior::new(grid, params.tau())?;
    let d = divergences_from_prior(params, &prior);
    let mi = mutual_information_from_prior(params, &prior);
    let mmse_by_theta = thetas
        .iter()
        .map(|&theta| {
            Ok(MmsePoint {
                theta,
                mmse: mmse_from_prior(&params.interpolate(theta)?, &prior)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DivergenceReport {
        params: *params,
        grid_m: grid.m(),
        tv_sum: d.tv_sum,
        tv_half: d.tv_half,
        chi2: d.chi2,
        kl: d.kl,
        mi_direct: mi.direct,
        mi_via_kl: mi.via_kl,
        mmse_by_theta,
    })
}
