//! Pricing measures (risk-adjusted jump intensities plus compensating
//! drift) and hedge weights for the four frameworks.

use crate::error::{Error, Result};
use crate::invest::OptimalInvestment;
use crate::model::{MarketParams, UtilitySpec};

/// Which framework drives the measure change.
#[derive(Debug, Clone, PartialEq)]
pub enum PricingMethod {
    /// Diversify jump risk, price with unadjusted intensities.
    Merton,
    /// Marginal utility weights; Power pairs with Fraction, Exponential
    /// with Amount.
    MarginalUtility { utility: UtilitySpec, investment: OptimalInvestment },
    /// Quadratic criterion; the measure can be signed.
    MinimalVariance,
}

/// Risk-adjusted per-atom intensities and the compensating drift.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingMeasure {
    pub adjusted_intensities: Vec<f64>,
    pub drift_q: f64,
    /// True iff some adjusted intensity is negative. Only the
    /// minimal-variance measure can be signed.
    pub signed: bool,
}

impl PricingMeasure {
    fn from_weights(market: &MarketParams, weights: &[f64]) -> Self {
        let adjusted: Vec<f64> = market
            .jumps
            .atoms()
            .iter()
            .zip(weights)
            .map(|(a, w)| a.intensity * w)
            .collect();
        let drift_q: f64 = -market
            .jumps
            .atoms()
            .iter()
            .zip(&adjusted)
            .map(|(a, lb)| a.relative_size() * lb)
            .sum::<f64>();
        let signed = adjusted.iter().any(|&lb| lb < 0.0);
        PricingMeasure { adjusted_intensities: adjusted, drift_q, signed }
    }

    /// Total adjusted intensity (may be meaningless for signed measures).
    pub fn total_intensity(&self) -> f64 {
        self.adjusted_intensities.iter().sum()
    }
}

/// Per-atom weights entering the hedge formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeWeights {
    pub weights: Vec<f64>,
}

fn check_pairing(method: &PricingMethod) -> Result<()> {
    if let PricingMethod::MarginalUtility { utility, investment } = method {
        match (utility, investment) {
            (UtilitySpec::Power { .. }, OptimalInvestment::Fraction { .. }) => {}
            (UtilitySpec::Exponential { .. }, OptimalInvestment::Amount { .. }) => {}
            _ => {
                return Err(Error::Domain(
                    "MarginalUtility pairs Power with Fraction and Exponential with Amount".into(),
                ))
            }
        }
    }
    Ok(())
}

fn pricing_weights(market: &MarketParams, method: &PricingMethod) -> Result<Vec<f64>> {
    check_pairing(method)?;
    let atoms = market.jumps.atoms();
    match method {
        PricingMethod::Merton => Ok(vec![1.0; atoms.len()]),
        PricingMethod::MarginalUtility { utility, investment } => match (utility, investment) {
            (UtilitySpec::Power { beta }, OptimalInvestment::Fraction { pi_tilde }) => atoms
                .iter()
                .map(|a| {
                    let base = 1.0 + pi_tilde * a.relative_size();
                    if base <= 0.0 {
                        Err(Error::Domain(format!(
                            "power weight base {base} nonpositive for atom z={}",
                            a.z
                        )))
                    } else {
                        Ok((-beta * base.ln()).exp())
                    }
                })
                .collect(),
            (UtilitySpec::Exponential { .. }, OptimalInvestment::Amount { pi_bar, .. }) => {
                Ok(atoms.iter().map(|a| (-pi_bar * a.relative_size()).exp()).collect())
            }
            _ => unreachable!("pairing checked above"),
        },
        PricingMethod::MinimalVariance => {
            let alpha = market_price_of_risk_alpha(market);
            Ok(atoms.iter().map(|a| 1.0 - alpha * a.relative_size()).collect())
        }
    }
}

/// Builds the pricing measure for the given framework.
pub fn pricing_measure(market: &MarketParams, method: &PricingMethod) -> Result<PricingMeasure> {
    let weights = pricing_weights(market, method)?;
    Ok(PricingMeasure::from_weights(market, &weights))
}

/// Generalized market price of risk entering the minimal-variance measure.
pub fn market_price_of_risk_alpha(market: &MarketParams) -> f64 {
    let num = market.average_drift();
    let den = market.sigma * market.sigma
        + crate::model::jump_moment(&market.jumps, 2, None).expect("unit weights");
    num / den
}

/// Per-atom hedge weights. The power exponent is one lower than the pricing
/// exponent; exponential hedge weights equal the pricing weights; minimal
/// variance uses unit weights. Merton's hedge is a pure delta and has no
/// weights.
pub fn hedge_weights(market: &MarketParams, method: &PricingMethod) -> Result<HedgeWeights> {
    check_pairing(method)?;
    let atoms = market.jumps.atoms();
    let weights = match method {
        PricingMethod::Merton => {
            return Err(Error::UnsupportedMethod("Merton has no hedge weights".into()))
        }
        PricingMethod::MarginalUtility { utility, investment } => match (utility, investment) {
            (UtilitySpec::Power { beta }, OptimalInvestment::Fraction { pi_tilde }) => atoms
                .iter()
                .map(|a| {
                    let base = 1.0 + pi_tilde * a.relative_size();
                    if base <= 0.0 {
                        Err(Error::Domain(format!(
                            "power weight base {base} nonpositive for atom z={}",
                            a.z
                        )))
                    } else {
                        Ok((-(beta + 1.0) * base.ln()).exp())
                    }
                })
                .collect::<Result<Vec<f64>>>()?,
            (UtilitySpec::Exponential { .. }, OptimalInvestment::Amount { pi_bar, .. }) => {
                atoms.iter().map(|a| (-pi_bar * a.relative_size()).exp()).collect()
            }
            _ => unreachable!("pairing checked above"),
        },
        PricingMethod::MinimalVariance => vec![1.0; atoms.len()],
    };
    Ok(HedgeWeights { weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpAtom, JumpMeasure};
    use approx::assert_relative_eq;

    fn fig1() -> MarketParams {
        let atom = JumpAtom::new(0.75f64.ln(), 0.25).unwrap();
        MarketParams::new(0.1125, 0.2, 0.0, JumpMeasure::new(vec![atom]).unwrap()).unwrap()
    }

    const PI_TILDE_LOG: f64 = 0.8367093674160353;

    fn log_method() -> PricingMethod {
        PricingMethod::MarginalUtility {
            utility: UtilitySpec::Power { beta: 1.0 },
            investment: OptimalInvestment::fraction(PI_TILDE_LOG),
        }
    }

    #[test]
    fn merton_measure_is_unadjusted() {
        let m = fig1();
        let q = pricing_measure(&m, &PricingMethod::Merton).unwrap();
        assert_relative_eq!(q.adjusted_intensities[0], 0.25, max_relative = 1e-14);
        assert_relative_eq!(q.drift_q, 0.0625, max_relative = 1e-14);
        assert!(!q.signed);
    }

    #[test]
    fn log_utility_measure_fig1() {
        let m = fig1();
        let q = pricing_measure(&m, &log_method()).unwrap();
        assert_relative_eq!(q.adjusted_intensities[0], 0.3161265012134343, epsilon = 1e-12);
        // downward jumps become more frequent
        assert!(q.adjusted_intensities[0] > 0.25);
    }

    #[test]
    fn alpha_fig1() {
        let m = fig1();
        assert_relative_eq!(market_price_of_risk_alpha(&m), 0.898876404494382, epsilon = 1e-12);
        // independent recomputation of both moments
        let num = 0.1125 + 0.25 * (0.75 - 1.0);
        let den = 0.04 + 0.25 * 0.0625;
        assert_relative_eq!(market_price_of_risk_alpha(&m), num / den, max_relative = 1e-14);
    }

    #[test]
    fn alpha_pure_diffusion() {
        let m = MarketParams::new(0.1, 0.2, 0.0, JumpMeasure::empty()).unwrap();
        assert_relative_eq!(market_price_of_risk_alpha(&m), 0.1 / 0.04, max_relative = 1e-14);
    }

    #[test]
    fn alpha_zero_average_drift() {
        let atom = JumpAtom::new(0.75f64.ln(), 0.25).unwrap();
        let m = MarketParams::new(0.0625, 0.2, 0.0, JumpMeasure::new(vec![atom]).unwrap()).unwrap();
        assert!(market_price_of_risk_alpha(&m).abs() < 1e-14);
    }

    #[test]
    fn minimal_variance_can_be_signed() {
        // alpha*(e^z - 1) > 1 for a large upward atom
        let atom = JumpAtom::new(3f64.ln(), 0.05).unwrap();
        let m = MarketParams::new(0.3, 0.2, 0.0, JumpMeasure::new(vec![atom]).unwrap()).unwrap();
        let q = pricing_measure(&m, &PricingMethod::MinimalVariance).unwrap();
        assert!(q.signed);
        assert!(q.adjusted_intensities[0] < 0.0);
    }

    #[test]
    fn martingale_compensation_holds_for_all_frameworks() {
        let m = fig1();
        let methods = [
            PricingMethod::Merton,
            log_method(),
            PricingMethod::MarginalUtility {
                utility: UtilitySpec::Exponential { alpha: 2.0 },
                investment: OptimalInvestment::amount(0.8702467212833361, 2.0),
            },
            PricingMethod::MinimalVariance,
        ];
        for method in methods {
            let q = pricing_measure(&m, &method).unwrap();
            let comp: f64 = m
                .jumps
                .atoms()
                .iter()
                .zip(&q.adjusted_intensities)
                .map(|(a, lb)| a.relative_size() * lb)
                .sum();
            assert!((q.drift_q + comp).abs() < 1e-15, "{method:?}");
        }
    }

    #[test]
    fn zero_investment_recovers_merton() {
        let m = fig1();
        let method = PricingMethod::MarginalUtility {
            utility: UtilitySpec::Power { beta: 3.0 },
            investment: OptimalInvestment::fraction(0.0),
        };
        let q = pricing_measure(&m, &method).unwrap();
        let merton = pricing_measure(&m, &PricingMethod::Merton).unwrap();
        assert_eq!(q, merton);
    }

    #[test]
    fn intensity_shift_direction() {
        // pi > 0: downward atoms gain intensity, upward atoms lose it
        let atoms = vec![
            JumpAtom::new(-0.3, 0.2).unwrap(),
            JumpAtom::new(0.3, 0.1).unwrap(),
        ];
        let m = MarketParams::new(0.1, 0.2, 0.0, JumpMeasure::new(atoms).unwrap()).unwrap();
        let method = PricingMethod::MarginalUtility {
            utility: UtilitySpec::Power { beta: 2.0 },
            investment: OptimalInvestment::fraction(0.5),
        };
        let q = pricing_measure(&m, &method).unwrap();
        assert!(q.adjusted_intensities[0] > 0.2);
        assert!(q.adjusted_intensities[1] < 0.1);
    }

    #[test]
    fn power_weights_converge_to_exponential() {
        let m = fig1();
        let pi_bar = 0.8702467212833361;
        let beta = 1000.0;
        let power = pricing_measure(
            &m,
            &PricingMethod::MarginalUtility {
                utility: UtilitySpec::Power { beta },
                investment: OptimalInvestment::fraction(pi_bar / beta),
            },
        )
        .unwrap();
        let exp = pricing_measure(
            &m,
            &PricingMethod::MarginalUtility {
                utility: UtilitySpec::Exponential { alpha: 1.0 },
                investment: OptimalInvestment::amount(pi_bar, 1.0),
            },
        )
        .unwrap();
        for (p, e) in power.adjusted_intensities.iter().zip(&exp.adjusted_intensities) {
            assert!((p - e).abs() / e.abs() <= 0.01);
        }
    }

    #[test]
    fn hedge_weight_values() {
        let m = fig1();
        let mv = hedge_weights(&m, &PricingMethod::MinimalVariance).unwrap();
        assert_eq!(mv.weights, vec![1.0]);

        let w = hedge_weights(&m, &log_method()).unwrap();
        assert_relative_eq!(w.weights[0], 1.5989754363111595, epsilon = 1e-12);
        // hedge weight = (pricing weight)^{(beta+1)/beta} for beta = 1
        let q = pricing_weights(&m, &log_method()).unwrap();
        assert_relative_eq!(w.weights[0], q[0] * q[0], max_relative = 1e-12);

        assert!(matches!(
            hedge_weights(&m, &PricingMethod::Merton),
            Err(Error::UnsupportedMethod(_))
        ));
    }

    #[test]
    fn exponential_hedge_weights_equal_pricing_weights() {
        let m = fig1();
        let method = PricingMethod::MarginalUtility {
            utility: UtilitySpec::Exponential { alpha: 1.5 },
            investment: OptimalInvestment::amount(0.87, 1.5),
        };
        let h = hedge_weights(&m, &method).unwrap();
        let p = pricing_weights(&m, &method).unwrap();
        assert_eq!(h.weights, p);
    }

    #[test]
    fn inconsistent_pairing_rejected() {
        let m = fig1();
        let method = PricingMethod::MarginalUtility {
            utility: UtilitySpec::Power { beta: 2.0 },
            investment: OptimalInvestment::amount(0.5, 2.0),
        };
        assert!(pricing_measure(&m, &method).is_err());
        assert!(hedge_weights(&m, &method).is_err());
    }
}
