//! Multi-cell TDD downlink simulation under uplink pilot contamination.
//!
//! The crate covers the full link: large-scale gains and pilot layouts
//! ([`model`]), Rayleigh fading and uplink training ([`channel`]), MMSE
//! channel estimation ([`estimation`]), linear precoding ([`precoding`]) and
//! achievable-rate evaluation by simulation or in closed form ([`rates`]).

pub mod channel;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod precoding;
pub mod rates;
pub mod rng;
pub mod stats;

pub use channel::{draw_channels, synth_training, ChannelSet, TrainingNoise, TrainingObservation};
pub use error::{Error, Result};
pub use estimation::{error_cov_scalars, mmse_estimate, ChannelEstimateSet, ErrorCovScalars, MmseEstimator};
pub use linalg::CMatrix;
pub use model::{build_scenario, db_to_linear, ConfigFile, GainTensor, PilotBook, ScenarioSpec, SystemConfig};
pub use precoding::{
    gps_precoder, mcmmse_precoder, objective_value, zf_precoder, Precoder, PrecoderKind, PrecoderParams,
};
pub use rates::{
    asymptotic_rate, closed_form_moments, closed_form_rate, monte_carlo_rates, theta_moments, AsymptoticRate,
    CsiMode, MonteCarlo, RateReport, ThetaMoments, UserMoments,
};
