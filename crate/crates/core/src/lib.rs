//! Pricing and hedging of European claims under jump-diffusion dynamics.
//!
//! The library covers four pricing frameworks on a common representation
//! (risk-adjusted jump intensities plus a compensating drift): jump-risk
//! diversification, marginal-utility pricing for power and exponential
//! investors, and minimal-variance pricing. On top sit the optimal
//! investment solvers (including the implied-drift inversion), a PIDE
//! solver, an analytic series pricer for a single jump size, hedge-curve
//! extraction, and two independent verification oracles (a dynamic
//! programming lattice and a weighted Monte Carlo estimator).

pub mod cli;
pub mod config;
pub mod error;
pub mod figures;
pub mod hedging;
pub mod invest;
pub mod measure;
pub mod model;
mod numerics;
pub mod oracle;
pub mod pricing;

pub use error::{Error, Result};
