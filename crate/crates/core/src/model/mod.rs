//! Parameters, latent geometry, and samplers for the planted, null, and
//! interpolated models.

mod adjacency;
mod geometry;
mod params;
mod sample;

pub use adjacency::{choose2, Adjacency, FORMAT_VERSION};
pub(crate) use geometry::check_tau;
pub use geometry::{arc_dist, build_cycle, circ_dist, wrap01, LatentPositions};
pub(crate) use params::snr;
pub use params::Params;
pub use sample::{
    degrade, sample_interpolated, sample_null, sample_observation, sample_planted, DegradeChannel,
    PlantedSample,
};
