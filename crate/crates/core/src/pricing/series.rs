use super::black_scholes::{black_scholes, VanillaKind};
use crate::error::{Error, Result};
use crate::model::{ClaimKind, ClaimSpec, MarketParams};

const TAIL_TOLERANCE: f64 = 1e-12;
const MAX_TERMS: usize = 200;

/// Analytic pricer for a single fixed jump size: a Poisson mixture of
/// Black-Scholes prices with dividend yield `q = lambda_bar * (e^J - 1)`.
///
/// Signed measures are rejected here and must be routed to the PIDE.
pub fn price_series_fixed_jump(
    lambda_bar: f64,
    j: f64,
    market: &MarketParams,
    claim: &ClaimSpec,
    s: f64,
    t: f64,
) -> Result<f64> {
    if lambda_bar < 0.0 {
        return Err(Error::NegativeIntensity(lambda_bar));
    }
    let kind = match claim.kind {
        ClaimKind::Put { .. } => VanillaKind::Put,
        ClaimKind::Call { .. } => VanillaKind::Call,
        ClaimKind::Custom { .. } => {
            return Err(Error::Domain("series pricer handles vanilla claims only".into()))
        }
    };
    let strike = claim.strike().expect("vanilla");
    let tau = claim.maturity - t;
    if tau < 0.0 {
        return Err(Error::Domain(format!("t={t} past maturity {}", claim.maturity)));
    }
    if tau == 0.0 {
        return Ok(claim.payoff(s));
    }
    let q = lambda_bar * (j.exp() - 1.0);
    let mean = lambda_bar * tau;
    let mut weight = (-mean).exp(); // Poisson(0)
    let mut cumulative = 0.0;
    let mut total = 0.0;
    for k in 0..MAX_TERMS {
        total += weight
            * black_scholes((k as f64 * j).exp() * s, strike, market.rate, q, market.sigma, tau, kind);
        cumulative += weight;
        if 1.0 - cumulative < TAIL_TOLERANCE {
            break;
        }
        weight *= mean / (k as f64 + 1.0);
    }
    Ok(total)
}
