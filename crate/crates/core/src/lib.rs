//! Range model for quantum-illumination (QI) and classical-illumination (CI)
//! target detection.
//!
//! The crate chains together:
//!
//! * [`quantum_states`]: covariance matrices of the two-mode squeezed vacuum
//!   and correlated coherent transmitters, with a truncated Fock-space oracle.
//! * [`radiometry`]: photons per mode, transmit power, thermal noise power and
//!   background occupancy.
//! * [`atmosphere`]: tabulated gaseous absorption and the one-way form factor.
//! * [`link_budget`]: antenna gain, channel transmissivity, SNR chain and the
//!   Albersheim threshold estimator.
//! * [`range_solver`]: closed-form and attenuation-coupled maximum range, plus
//!   the sweeps behind the ratio and range figures.
//! * [`detection_mc`]: Monte Carlo sampling of quadratures and an empirical
//!   correlation-detector experiment.
//! * [`cli`]: the `qi-rangekit` command-line front end.

pub mod atmosphere;
pub mod cli;
pub mod detection_mc;
mod error;
pub mod link_budget;
pub mod quantum_states;
pub mod radiometry;
pub mod range_solver;

pub use error::{Error, Result};
