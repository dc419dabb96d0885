//! Optimal-investment first-order conditions for power/log and exponential
//! utility, and the implied-drift inversion.

use crate::error::{Error, Result};
use crate::model::{JumpMeasure, MarketParams, UtilitySpec};
use crate::numerics::solve_bracketed;

/// Optimal investment expressed either as a wealth fraction (power utility)
/// or as a risk-aversion-scaled amount (exponential utility).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimalInvestment {
    /// Wealth fraction for power utility. Must keep post-jump wealth
    /// positive: `1 + pi_tilde (e^z - 1) > 0` for every atom.
    Fraction { pi_tilde: f64 },
    /// Scaled amount for exponential utility, `pi_bar = alpha * pi_star`.
    Amount { pi_bar: f64, alpha: f64 },
}

impl OptimalInvestment {
    pub fn fraction(pi_tilde: f64) -> Self {
        OptimalInvestment::Fraction { pi_tilde }
    }

    pub fn amount(pi_bar: f64, alpha: f64) -> Self {
        OptimalInvestment::Amount { pi_bar, alpha }
    }
}

fn residual_tolerance(market: &MarketParams) -> f64 {
    1e-14 * (1.0 + market.mu.abs() + market.sigma * market.sigma)
}

/// First-order-condition residual for power utility at fraction `pi`.
pub fn power_residual(market: &MarketParams, beta: f64, pi: f64) -> f64 {
    let mut jump_term = 0.0;
    for atom in market.jumps.atoms() {
        let j = atom.relative_size();
        let base = 1.0 + pi * j;
        let weight = if base > 0.0 { (-beta * base.ln()).exp() } else { f64::INFINITY };
        jump_term += j * weight * atom.intensity;
    }
    market.mu - pi * beta * market.sigma * market.sigma + jump_term
}

fn power_residual_derivative(market: &MarketParams, beta: f64, pi: f64) -> f64 {
    let mut jump_term = 0.0;
    for atom in market.jumps.atoms() {
        let j = atom.relative_size();
        let base = 1.0 + pi * j;
        if base > 0.0 {
            jump_term += j * j * (-(beta + 1.0) * base.ln()).exp() * atom.intensity;
        }
    }
    -beta * market.sigma * market.sigma - beta * jump_term
}

/// First-order-condition residual for exponential utility written in the
/// scaled variable `pi_bar`.
pub fn exponential_residual(market: &MarketParams, pi_bar: f64) -> f64 {
    let mut jump_term = 0.0;
    for atom in market.jumps.atoms() {
        let j = atom.relative_size();
        jump_term += j * (-pi_bar * j).exp() * atom.intensity;
    }
    market.mu - pi_bar * market.sigma * market.sigma + jump_term
}

fn exponential_residual_derivative(market: &MarketParams, pi_bar: f64) -> f64 {
    let mut jump_term = 0.0;
    for atom in market.jumps.atoms() {
        let j = atom.relative_size();
        jump_term += j * j * (-pi_bar * j).exp() * atom.intensity;
    }
    -market.sigma * market.sigma - jump_term
}

/// Interval on which every post-jump wealth factor `1 + pi (e^z - 1)` stays
/// positive. Sides without a constraining atom are unbounded.
fn admissible_interval(jumps: &JumpMeasure) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for atom in jumps.atoms() {
        let j = atom.relative_size();
        if j > 0.0 {
            lo = lo.max(-1.0 / j);
        } else {
            hi = hi.min(-1.0 / j);
        }
    }
    (lo, hi)
}

fn expansion_bound(market: &MarketParams, beta: f64) -> f64 {
    let abs_jump: f64 =
        market.jumps.atoms().iter().map(|a| a.relative_size().abs() * a.intensity).sum();
    (market.mu.abs() + abs_jump) / (beta * market.sigma * market.sigma) + 1.0
}

/// Solves the power-utility first-order condition for the optimal wealth
/// fraction. The residual is strictly decreasing on the admissible interval,
/// so the bracketed root is unique.
pub fn optimal_fraction_power(market: &MarketParams, beta: f64) -> Result<OptimalInvestment> {
    if !(beta >= 1.0) {
        return Err(Error::Domain(format!("beta {beta} must be >= 1")));
    }
    let sig2 = market.sigma * market.sigma;
    if market.jumps.is_empty() {
        return Ok(OptimalInvestment::fraction(market.mu / (beta * sig2)));
    }
    let (sing_lo, sing_hi) = admissible_interval(&market.jumps);
    let shrink = |end: f64| 1e-9 * (1.0 + end.abs());
    let b0 = expansion_bound(market, beta);
    let f = |pi: f64| power_residual(market, beta, pi);

    // Bounded ends start just inside the singularity where the residual
    // diverges with a known sign; unbounded ends expand by doubling.
    let mut lo = if sing_lo.is_finite() { sing_lo + shrink(sing_lo) } else { -b0 };
    let mut hi = if sing_hi.is_finite() { sing_hi - shrink(sing_hi) } else { b0 };
    if sing_lo.is_infinite() {
        let mut tries = 0;
        while f(lo) <= 0.0 && tries < 60 {
            lo *= 2.0;
            tries += 1;
        }
    }
    if sing_hi.is_infinite() {
        let mut tries = 0;
        while f(hi) >= 0.0 && tries < 60 {
            hi *= 2.0;
            tries += 1;
        }
    }
    let ftol = residual_tolerance(market);
    let root = solve_bracketed(
        f,
        Some(|pi: f64| power_residual_derivative(market, beta, pi)),
        lo,
        hi,
        1e-16,
        ftol,
    )
    .ok_or_else(|| {
        Error::NoSolution(format!(
            "power-utility residual has no sign change on [{lo}, {hi}] for beta={beta}"
        ))
    })?;
    Ok(OptimalInvestment::fraction(root))
}

/// Discriminant of the closed-form log-utility solution for a single fixed
/// jump size. Strictly positive for all admissible inputs.
pub fn log_fixed_jump_discriminant(market: &MarketParams) -> Result<f64> {
    let atoms = market.jumps.atoms();
    if atoms.len() != 1 {
        return Err(Error::WrongMeasure(format!(
            "fixed-jump closed form needs exactly one atom, got {}",
            atoms.len()
        )));
    }
    let j = atoms[0].relative_size();
    let lambda = atoms[0].intensity;
    let sig2 = market.sigma * market.sigma;
    let a = 1.0 - market.mu / sig2 * j;
    Ok(a * a + 4.0 * (market.mu + lambda * j) / sig2 * j)
}

/// Closed-form optimal fraction for logarithmic utility and a single jump
/// atom.
pub fn optimal_fraction_log_fixed_jump(market: &MarketParams) -> Result<OptimalInvestment> {
    let disc = log_fixed_jump_discriminant(market)?;
    if disc <= 0.0 {
        return Err(Error::Numerical(format!("nonpositive discriminant {disc}")));
    }
    let atom = market.jumps.atoms()[0];
    let j = atom.relative_size();
    let sig2 = market.sigma * market.sigma;
    let a = 1.0 - market.mu / sig2 * j;
    let pi = -(a - disc.sqrt()) / (2.0 * j);
    Ok(OptimalInvestment::fraction(pi))
}

/// Solves the exponential-utility first-order condition for the scaled
/// amount `pi_bar`; the unscaled amount is `pi_bar / alpha`.
pub fn optimal_amount_exponential(market: &MarketParams, alpha: f64) -> Result<OptimalInvestment> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha {alpha} must be positive")));
    }
    let sig2 = market.sigma * market.sigma;
    if market.jumps.is_empty() {
        return Ok(OptimalInvestment::amount(market.mu / sig2, alpha));
    }
    let abs_jump: f64 =
        market.jumps.atoms().iter().map(|a| a.relative_size().abs() * a.intensity).sum();
    let mut b = (market.mu.abs() + abs_jump) / sig2 + 1.0;
    let f = |pi: f64| exponential_residual(market, pi);
    let mut tries = 0;
    while (f(-b) <= 0.0 || f(b) >= 0.0) && tries < 60 {
        b *= 2.0;
        tries += 1;
    }
    let ftol = residual_tolerance(market);
    let root = solve_bracketed(
        f,
        Some(|pi: f64| exponential_residual_derivative(market, pi)),
        -b,
        b,
        1e-16,
        ftol,
    )
    .ok_or_else(|| {
        Error::NoSolution(format!("exponential-utility residual has no sign change on [-{b}, {b}]"))
    })?;
    Ok(OptimalInvestment::amount(root, alpha))
}

/// Inverts the first-order condition: the drift under which the given
/// strategy is optimal. Closed form in both cases.
pub fn implied_drift(
    target: &OptimalInvestment,
    market_sans_mu: &MarketParams,
    utility: &UtilitySpec,
) -> Result<f64> {
    let sig2 = market_sans_mu.sigma * market_sans_mu.sigma;
    match (target, utility) {
        (OptimalInvestment::Fraction { pi_tilde }, UtilitySpec::Power { beta }) => {
            let mut jump_term = 0.0;
            for atom in market_sans_mu.jumps.atoms() {
                let j = atom.relative_size();
                let base = 1.0 + pi_tilde * j;
                if base <= 0.0 {
                    return Err(Error::Domain(format!(
                        "fraction {pi_tilde} violates positivity for atom z={}",
                        atom.z
                    )));
                }
                jump_term += j * (-beta * base.ln()).exp() * atom.intensity;
            }
            Ok(beta * sig2 * pi_tilde - jump_term)
        }
        (OptimalInvestment::Amount { pi_bar, .. }, UtilitySpec::Exponential { .. }) => {
            let mut jump_term = 0.0;
            for atom in market_sans_mu.jumps.atoms() {
                let j = atom.relative_size();
                jump_term += j * (-pi_bar * j).exp() * atom.intensity;
            }
            Ok(sig2 * pi_bar - jump_term)
        }
        _ => Err(Error::Domain(
            "implied drift requires Fraction with Power utility or Amount with Exponential".into(),
        )),
    }
}
