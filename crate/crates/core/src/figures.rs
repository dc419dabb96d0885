//! One-shot reproduction of the benchmark figure data sets on the reference
//! single-atom market (sigma = 0.2, r = 0, one downward jump of -25% at
//! intensity 0.25, T = 1, strike grid 50..200).

use std::io::Write;

use crate::error::{Error, Result};
use crate::hedging::{
    delta_hedge, derivative_of_price_hedge, marginal_optimal_hedge, minimal_variance_hedge,
};
use crate::invest::{optimal_amount_exponential, optimal_fraction_power, OptimalInvestment};
use crate::measure::{hedge_weights, pricing_measure, PricingMethod};
use crate::model::{ClaimSpec, JumpAtom, JumpMeasure, MarketParams, UtilitySpec};
use crate::pricing::{implied_vol, price_series_fixed_jump, solve_pide, GridSpec, VanillaKind};

const SPOT: f64 = 100.0;
const MATURITY: f64 = 1.0;
const INTENSITY: f64 = 0.25;

pub const FIGURE_NAMES: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"];

fn jump_z() -> f64 {
    0.75f64.ln()
}

/// Reference market with the given average drift.
fn base_market(mu_tilde: f64) -> MarketParams {
    let atom = JumpAtom::new(jump_z(), INTENSITY).expect("valid atom");
    let jumps = JumpMeasure::new(vec![atom]).expect("valid measure");
    let mu = mu_tilde - crate::model::jump_moment(&jumps, 1, None).expect("unit weights");
    MarketParams::new(mu, 0.2, 0.0, jumps).expect("valid market")
}

fn strikes() -> Vec<f64> {
    (0..=30).map(|i| 50.0 + 5.0 * i as f64).collect()
}

/// Implied volatility of the put priced under a single adjusted intensity.
fn iv_for_lambda(market: &MarketParams, lambda_bar: f64, strike: f64) -> Result<f64> {
    let claim = ClaimSpec::put(strike, MATURITY)?;
    let price = price_series_fixed_jump(lambda_bar, jump_z(), market, &claim, SPOT, 0.0)?;
    implied_vol(price, SPOT, strike, market.rate, MATURITY, VanillaKind::Put)
}

fn log_utility_lambda(market: &MarketParams) -> Result<f64> {
    let investment = optimal_fraction_power(market, 1.0)?;
    let method = PricingMethod::MarginalUtility {
        utility: UtilitySpec::Power { beta: 1.0 },
        investment,
    };
    Ok(pricing_measure(market, &method)?.adjusted_intensities[0])
}

/// Implied-volatility smiles under the three frameworks, plus the
/// square-root-of-annualized-variance reference line.
fn smile_figure<W: Write>(w: &mut W, mu_tilde: f64) -> Result<()> {
    let market = base_market(mu_tilde);
    let lambda_merton = INTENSITY;
    let lambda_utility = log_utility_lambda(&market)?;
    let lambda_minvar =
        pricing_measure(&market, &PricingMethod::MinimalVariance)?.adjusted_intensities[0];
    if lambda_minvar < 0.0 {
        return Err(Error::NegativeIntensity(lambda_minvar));
    }
    let reference = (market.sigma * market.sigma + INTENSITY * jump_z() * jump_z()).sqrt();
    writeln!(
        w,
        "moneyness_k_over_s,moneyness_s_over_k,iv_merton,iv_utility_log,iv_minvar,iv_reference"
    )?;
    for k in strikes() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            k / SPOT,
            SPOT / k,
            iv_for_lambda(&market, lambda_merton, k)?,
            iv_for_lambda(&market, lambda_utility, k)?,
            iv_for_lambda(&market, lambda_minvar, k)?,
            reference
        )?;
    }
    Ok(())
}

/// Smiles across risk aversions, power betas next to the exponential limit.
fn risk_aversion_figure<W: Write>(w: &mut W) -> Result<()> {
    let market = base_market(0.05);
    let betas = [1.0, 2.0, 5.0, 1000.0];
    let mut lambdas = Vec::new();
    for &beta in &betas {
        let investment = optimal_fraction_power(&market, beta)?;
        let method = PricingMethod::MarginalUtility {
            utility: UtilitySpec::Power { beta },
            investment,
        };
        lambdas.push(pricing_measure(&market, &method)?.adjusted_intensities[0]);
    }
    let exp_investment = optimal_amount_exponential(&market, 1.0)?;
    let exp_method = PricingMethod::MarginalUtility {
        utility: UtilitySpec::Exponential { alpha: 1.0 },
        investment: exp_investment,
    };
    let lambda_exp = pricing_measure(&market, &exp_method)?.adjusted_intensities[0];
    writeln!(
        w,
        "moneyness_k_over_s,moneyness_s_over_k,iv_beta_1,iv_beta_2,iv_beta_5,iv_beta_1000,iv_exponential"
    )?;
    for k in strikes() {
        write!(w, "{},{}", k / SPOT, SPOT / k)?;
        for &lb in &lambdas {
            write!(w, ",{}", iv_for_lambda(&market, lb, k)?)?;
        }
        writeln!(w, ",{}", iv_for_lambda(&market, lambda_exp, k)?)?;
    }
    Ok(())
}

/// Implied-drift smiles: the strategy (fraction 0.5, or scaled amount 0.5)
/// is taken as given and the price depends on risk aversion only.
fn implied_drift_figure<W: Write>(w: &mut W) -> Result<()> {
    let market = base_market(0.05); // drift irrelevant: only the weights enter
    let pi = 0.5;
    let betas = [1.0, 2.0, 5.0];
    let mut lambdas = Vec::new();
    for &beta in &betas {
        let method = PricingMethod::MarginalUtility {
            utility: UtilitySpec::Power { beta },
            investment: OptimalInvestment::fraction(pi),
        };
        lambdas.push(pricing_measure(&market, &method)?.adjusted_intensities[0]);
    }
    let exp_method = PricingMethod::MarginalUtility {
        utility: UtilitySpec::Exponential { alpha: 1.0 },
        investment: OptimalInvestment::amount(pi, 1.0),
    };
    let lambda_exp = pricing_measure(&market, &exp_method)?.adjusted_intensities[0];
    writeln!(
        w,
        "moneyness_k_over_s,moneyness_s_over_k,iv_beta_1,iv_beta_2,iv_beta_5,iv_exponential,iv_black_scholes"
    )?;
    for k in strikes() {
        write!(w, "{},{}", k / SPOT, SPOT / k)?;
        for &lb in &lambdas {
            write!(w, ",{}", iv_for_lambda(&market, lb, k)?)?;
        }
        writeln!(w, ",{},{}", iv_for_lambda(&market, lambda_exp, k)?, market.sigma)?;
    }
    Ok(())
}

/// Hedge curves for the K = 100 put. `with_naive` adds the
/// derivative-of-price curve instead of the minimal-variance one.
fn hedge_figure<W: Write>(w: &mut W, with_naive: bool) -> Result<()> {
    let market = base_market(0.05);
    let claim = ClaimSpec::put(100.0, MATURITY)?;
    let grid = GridSpec::default_for(&claim, &market);

    let merton = pricing_measure(&market, &PricingMethod::Merton)?;
    let sol_merton = solve_pide(&merton, &claim, &market, &grid)?;
    let delta = delta_hedge(&sol_merton, 0.0)?;

    let investment = optimal_fraction_power(&market, 1.0)?;
    let method = PricingMethod::MarginalUtility {
        utility: UtilitySpec::Power { beta: 1.0 },
        investment,
    };
    let utility_measure = pricing_measure(&market, &method)?;
    let sol_utility = solve_pide(&utility_measure, &claim, &market, &grid)?;
    let weights = hedge_weights(&market, &method)?;
    let marginal = marginal_optimal_hedge(&sol_utility, &market, &weights, 0.0)?;

    delta.to_csv(w, true)?;
    marginal.to_csv(w, false)?;
    if with_naive {
        let naive = derivative_of_price_hedge(&sol_utility, 0.0)?;
        naive.to_csv(w, false)?;
    } else {
        let mv_measure = pricing_measure(&market, &PricingMethod::MinimalVariance)?;
        let sol_mv = solve_pide(&mv_measure, &claim, &market, &grid)?;
        let mv = minimal_variance_hedge(&sol_mv, &market, 0.0)?;
        mv.to_csv(w, false)?;
    }
    Ok(())
}

/// Writes the named figure's underlying data as CSV.
pub fn reproduce_figure<W: Write>(name: &str, w: &mut W) -> Result<()> {
    match name {
        "fig1" => smile_figure(w, 0.05),
        "fig2" => smile_figure(w, -0.05),
        "fig3" => risk_aversion_figure(w),
        "fig4" => implied_drift_figure(w),
        "fig5" => hedge_figure(w, false),
        "fig6" => hedge_figure(w, true),
        other => Err(Error::UnknownFigure(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(name: &str) -> Vec<String> {
        let mut buf = Vec::new();
        reproduce_figure(name, &mut buf).unwrap();
        String::from_utf8(buf).unwrap().lines().map(str::to_string).collect()
    }

    fn parse_row(line: &str) -> Vec<f64> {
        line.split(',').map(|v| v.parse().unwrap()).collect()
    }

    #[test]
    fn unknown_name_rejected() {
        let mut buf = Vec::new();
        assert!(matches!(
            reproduce_figure("fig9", &mut buf),
            Err(Error::UnknownFigure(_))
        ));
    }

    #[test]
    fn smile_shape_and_ordering_positive_drift() {
        let lines = rows("fig1");
        assert_eq!(
            lines[0],
            "moneyness_k_over_s,moneyness_s_over_k,iv_merton,iv_utility_log,iv_minvar,iv_reference"
        );
        assert_eq!(lines.len(), 32);
        for line in &lines[1..] {
            let v = parse_row(line);
            // utility and minimal-variance smiles sit above Merton's
            assert!(v[3] >= v[2] - 1e-10, "{line}");
            assert!(v[4] >= v[2] - 1e-10, "{line}");
        }
    }

    #[test]
    fn smile_ordering_negative_drift() {
        let lines = rows("fig2");
        for line in &lines[1..] {
            let v = parse_row(line);
            assert!(v[3] <= v[2] + 1e-10, "{line}");
            assert!(v[4] <= v[2] + 1e-10, "{line}");
        }
    }

    #[test]
    fn price_gap_at_half_moneyness() {
        // the Merton vs log-utility put price gap at strike/spot = 0.5
        let market = base_market(0.05);
        let claim = ClaimSpec::put(50.0, MATURITY).unwrap();
        let pm = price_series_fixed_jump(0.25, jump_z(), &market, &claim, SPOT, 0.0).unwrap();
        let lu = log_utility_lambda(&market).unwrap();
        let pu = price_series_fixed_jump(lu, jump_z(), &market, &claim, SPOT, 0.0).unwrap();
        let rel = (pu - pm) / pm;
        assert!((rel - 0.4).abs() < 0.1, "relative gap {rel}");
    }

    #[test]
    fn implied_drift_smiles_increase_with_beta() {
        let lines = rows("fig4");
        for line in &lines[1..] {
            let v = parse_row(line);
            let (b1, b2, b5, bs) = (v[2], v[3], v[4], v[6]);
            assert!(b1 < b2 && b2 < b5, "{line}");
            assert!(b1 > bs, "{line}");
            assert_eq!(bs, 0.2);
        }
    }

    #[test]
    fn risk_aversion_flattens_toward_exponential() {
        let lines = rows("fig3");
        let atm = parse_row(&lines[11]); // strike 100
        let (b1000, exp) = (atm[5], atm[6]);
        assert!((b1000 - exp).abs() < 1e-3, "beta=1000 {b1000} vs exponential {exp}");
    }

    #[test]
    fn hedge_figures_have_three_labeled_blocks() {
        for (name, third) in [("fig5", "minimal_variance"), ("fig6", "derivative_of_price")] {
            let lines = rows(name);
            assert_eq!(lines[0], "s,units_of_asset,wealth_in_asset,label");
            let labels: std::collections::BTreeSet<&str> =
                lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
            assert!(labels.contains("merton_delta"), "{name}");
            assert!(labels.contains("marginal_optimal"), "{name}");
            assert!(labels.contains(third), "{name}");
            assert_eq!(labels.len(), 3);
        }
    }

    #[test]
    fn deterministic_output() {
        let a = rows("fig1");
        let b = rows("fig1");
        assert_eq!(a, b);
    }
}
