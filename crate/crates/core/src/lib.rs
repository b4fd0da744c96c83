//! Secure task offloading for NOMA-assisted mobile edge computing in vehicular
//! networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: configuration, unit conversion and derived constants.
//! - [`scenario`]: road scenarios, grouping and the GPM / RPM pairing rules.
//! - [`channel`]: Rayleigh channel draws, path loss and gain distributions.
//! - [`beamforming`]: null-steering artificial-noise weights.
//! - [`link`]: SINRs, secure rates and the delay model.
//! - [`secrecy`]: analytic secrecy outage probabilities (special functions,
//!   Gauss-Legendre quadrature, closed forms and semi-analytic integrals).
//! - [`montecarlo`]: empirical estimates used as the arbiter for the analytics.
//! - [`optimizer`]: GA-PATS, exhaustive grid search and the OMA baseline.
//! - [`experiments`]: parameter sweeps, analytic validation and SVG plots.
//!
//! Data-parallel loops (Monte Carlo trials, sweep cells, GA fitness) go
//! through [`par`], which uses rayon when the `parallel` feature is enabled
//! and falls back to a sequential loop otherwise. Results never depend on the
//! execution mode.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod link;
pub mod montecarlo;
pub mod optimizer;
pub mod par;
pub mod params;
pub mod rng;
pub mod scenario;
pub mod secrecy;

pub use error::{Error, Result};
pub use params::SystemParams;
