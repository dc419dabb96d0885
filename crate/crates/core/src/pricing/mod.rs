//! Pricing: the unified PIDE solver on a log-price grid, the analytic
//! Poisson-mixture series pricer for a fixed jump size, Black-Scholes with
//! dividend yield, and implied-volatility inversion.

mod black_scholes;
mod implied;
mod pide;
mod series;

pub use black_scholes::{black_scholes, VanillaKind};
pub use implied::implied_vol;
pub use pide::{convergence_check, solve_pide, GridSpec, PIDESolution};
pub use series::price_series_fixed_jump;
