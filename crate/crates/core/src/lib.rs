//! Dependence structure of the fractional Poisson process, its negative
//! binomial time change, and their increment (noise) processes.
//!
//! * [`specfun`] — log-gamma, beta, incomplete beta, quadrature.
//! * [`analytic`] — exact and large-`t` moments, covariances, correlations.
//! * [`sim`] — seeded path simulation through subordination.
//! * [`estimate`] — Monte Carlo estimates, power-law fits, classification.

pub mod analytic;
pub mod error;
pub mod estimate;
pub mod sim;
pub mod specfun;

pub use error::{Error, Result};
