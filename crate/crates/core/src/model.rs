//! Market model, jump measure, utility and claim definitions shared by all
//! other modules.

use crate::error::{Error, Result};

/// A single jump atom of the jump measure: log jump size `z` with an arrival
/// intensity per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpAtom {
    pub z: f64,
    pub intensity: f64,
}

impl JumpAtom {
    pub fn new(z: f64, intensity: f64) -> Result<Self> {
        let atom = JumpAtom { z, intensity };
        atom.validate()?;
        Ok(atom)
    }

    fn validate(&self) -> Result<()> {
        if !self.z.is_finite() {
            return Err(Error::Validation(format!("jump atom z={} not finite", self.z)));
        }
        if self.z == 0.0 {
            return Err(Error::Validation("jump atom z=0 is a no-op jump".into()));
        }
        if !(self.intensity > 0.0) || !self.intensity.is_finite() {
            return Err(Error::Validation(format!(
                "jump atom intensity {} must be strictly positive",
                self.intensity
            )));
        }
        Ok(())
    }

    /// Relative jump size `e^z - 1`.
    pub fn relative_size(&self) -> f64 {
        self.z.exp() - 1.0
    }
}

/// A finite list of jump atoms representing the jump frequency measure.
/// An empty list is a pure diffusion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpMeasure {
    atoms: Vec<JumpAtom>,
}

impl JumpMeasure {
    pub fn new(atoms: Vec<JumpAtom>) -> Result<Self> {
        for atom in &atoms {
            atom.validate()?;
        }
        Ok(JumpMeasure { atoms })
    }

    pub fn empty() -> Self {
        JumpMeasure { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[JumpAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total jump intensity per year.
    pub fn total_intensity(&self) -> f64 {
        self.atoms.iter().map(|a| a.intensity).sum()
    }
}

/// Real-world market parameters: drift, volatility, risk-free rate and the
/// jump measure. Rates are per year, volatility per square-root year.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    pub mu: f64,
    pub sigma: f64,
    pub rate: f64,
    pub jumps: JumpMeasure,
}

impl MarketParams {
    pub fn new(mu: f64, sigma: f64, rate: f64, jumps: JumpMeasure) -> Result<Self> {
        validate_market(MarketParams { mu, sigma, rate, jumps })
    }

    /// Average drift including the jump contribution.
    pub fn average_drift(&self) -> f64 {
        self.mu + jump_moment(&self.jumps, 1, None).expect("unit weights")
    }
}

/// Checks all market invariants and returns the parameters unchanged.
pub fn validate_market(params: MarketParams) -> Result<MarketParams> {
    if !(params.sigma > 0.0) || !params.sigma.is_finite() {
        return Err(Error::Validation(format!("sigma {} must be strictly positive", params.sigma)));
    }
    if !params.mu.is_finite() {
        return Err(Error::Validation(format!("mu {} not finite", params.mu)));
    }
    if !params.rate.is_finite() {
        return Err(Error::Validation(format!("rate {} not finite", params.rate)));
    }
    let jumps = JumpMeasure::new(params.jumps.atoms.clone())?;
    Ok(MarketParams { jumps, ..params })
}

/// The weighted jump moment `sum_i w_i (e^{z_i}-1)^k intensity_i`.
///
/// With unit weights and `k = 1` this is the drift correction of the Merton
/// PIDE; `k = 2` appears in the hedge denominators and the market price of
/// risk.
pub fn jump_moment(jumps: &JumpMeasure, k: u32, weights: Option<&[f64]>) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("jump_moment requires k >= 1".into()));
    }
    if let Some(w) = weights {
        if w.len() != jumps.atoms.len() {
            return Err(Error::Domain(format!(
                "weights length {} != atom count {}",
                w.len(),
                jumps.atoms.len()
            )));
        }
    }
    let mut total = 0.0;
    for (i, atom) in jumps.atoms.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        total += w * atom.relative_size().powi(k as i32) * atom.intensity;
    }
    Ok(total)
}

/// Risk preference: power utility (beta = 1 is logarithmic) or exponential
/// utility with absolute risk aversion alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilitySpec {
    Power { beta: f64 },
    Exponential { alpha: f64 },
}

impl UtilitySpec {
    pub fn power(beta: f64) -> Result<Self> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::Validation(format!("power utility requires beta >= 1, got {beta}")));
        }
        Ok(UtilitySpec::Power { beta })
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Validation(format!(
                "exponential utility requires alpha > 0, got {alpha}"
            )));
        }
        Ok(UtilitySpec::Exponential { alpha })
    }

    /// Utility value at wealth `x`. For power utility `x` must be positive.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            UtilitySpec::Power { beta } => {
                if (beta - 1.0).abs() < 1e-12 {
                    x.ln()
                } else {
                    x.powf(1.0 - beta) / (1.0 - beta)
                }
            }
            UtilitySpec::Exponential { alpha } => -(-alpha * x).exp(),
        }
    }

    /// Marginal utility, up to the multiplicative constant that cancels in
    /// all ratio formulas.
    pub fn marginal(&self, x: f64) -> f64 {
        match *self {
            UtilitySpec::Power { beta } => x.powf(-beta),
            UtilitySpec::Exponential { alpha } => (-alpha * x).exp(),
        }
    }
}

/// European claim kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ClaimKind {
    Put { strike: f64 },
    Call { strike: f64 },
    /// Tabulated payoff, linearly interpolated (and extrapolated from the
    /// end segments) in `s`.
    Custom { points: Vec<(f64, f64)> },
}

/// European claim with maturity in years.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimSpec {
    pub kind: ClaimKind,
    pub maturity: f64,
}

impl ClaimSpec {
    pub fn put(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(ClaimKind::Put { strike }, maturity)
    }

    pub fn call(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(ClaimKind::Call { strike }, maturity)
    }

    pub fn custom(points: Vec<(f64, f64)>, maturity: f64) -> Result<Self> {
        Self::new(ClaimKind::Custom { points }, maturity)
    }

    pub fn new(kind: ClaimKind, maturity: f64) -> Result<Self> {
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(Error::Validation(format!("maturity {maturity} must be positive")));
        }
        match &kind {
            ClaimKind::Put { strike } | ClaimKind::Call { strike } => {
                if !(*strike > 0.0) || !strike.is_finite() {
                    return Err(Error::Validation(format!("strike {strike} must be positive")));
                }
            }
            ClaimKind::Custom { points } => {
                if points.is_empty() {
                    return Err(Error::Validation("custom payoff needs at least one point".into()));
                }
                let mut prev = f64::NEG_INFINITY;
                for &(s, p) in points {
                    if !s.is_finite() || !p.is_finite() {
                        return Err(Error::Validation("custom payoff contains non-finite entry".into()));
                    }
                    if s <= prev {
                        return Err(Error::Validation(
                            "custom payoff abscissas must be strictly increasing".into(),
                        ));
                    }
                    prev = s;
                }
            }
        }
        Ok(ClaimSpec { kind, maturity })
    }

    /// Strike of a vanilla claim, if any.
    pub fn strike(&self) -> Option<f64> {
        match self.kind {
            ClaimKind::Put { strike } | ClaimKind::Call { strike } => Some(strike),
            ClaimKind::Custom { .. } => None,
        }
    }

    /// Payoff at asset price `s`.
    pub fn payoff(&self, s: f64) -> f64 {
        match &self.kind {
            ClaimKind::Put { strike } => (strike - s).max(0.0),
            ClaimKind::Call { strike } => (s - strike).max(0.0),
            ClaimKind::Custom { points } => interp_extrap(points, s),
        }
    }
}

/// Piecewise-linear interpolation with linear extrapolation from the end
/// segments. A single point is treated as a constant payoff.
fn interp_extrap(points: &[(f64, f64)], s: f64) -> f64 {
    if points.len() == 1 {
        return points[0].1;
    }
    let n = points.len();
    let seg = if s <= points[0].0 {
        (points[0], points[1])
    } else if s >= points[n - 1].0 {
        (points[n - 2], points[n - 1])
    } else {
        let idx = points.partition_point(|&(x, _)| x < s);
        (points[idx - 1], points[idx])
    };
    let ((x0, y0), (x1, y1)) = seg;
    y0 + (y1 - y0) * (s - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig1_market() -> MarketParams {
        let atom = JumpAtom::new(0.75f64.ln(), 0.25).unwrap();
        MarketParams::new(0.1125, 0.2, 0.0, JumpMeasure::new(vec![atom]).unwrap()).unwrap()
    }

    #[test]
    fn fig1_market_accepted() {
        let m = fig1_market();
        assert_relative_eq!(m.average_drift(), 0.05, max_relative = 1e-12);
    }

    #[test]
    fn zero_sigma_rejected() {
        let r = MarketParams::new(0.1, 0.0, 0.0, JumpMeasure::empty());
        let msg = format!("{}", r.unwrap_err());
        assert!(msg.contains("sigma"), "{msg}");
    }

    #[test]
    fn zero_jump_rejected() {
        let r = JumpAtom::new(0.0, 0.1);
        let msg = format!("{}", r.unwrap_err());
        assert!(msg.contains("z=0"), "{msg}");
    }

    #[test]
    fn validate_is_idempotent() {
        let m = fig1_market();
        let again = validate_market(m.clone()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn jump_moment_values() {
        assert_eq!(jump_moment(&JumpMeasure::empty(), 1, None).unwrap(), 0.0);
        let jm = fig1_market().jumps;
        assert_relative_eq!(jump_moment(&jm, 1, None).unwrap(), -0.0625, max_relative = 1e-12);
        assert_relative_eq!(jump_moment(&jm, 2, None).unwrap(), 0.015625, max_relative = 1e-12);
    }

    #[test]
    fn jump_moment_weight_length_checked() {
        let jm = fig1_market().jumps;
        assert!(jump_moment(&jm, 1, Some(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn custom_payoff_interpolates_and_extrapolates() {
        let c = ClaimSpec::custom(vec![(50.0, 50.0), (100.0, 100.0)], 1.0).unwrap();
        assert_relative_eq!(c.payoff(75.0), 75.0);
        assert_relative_eq!(c.payoff(200.0), 200.0);
        assert_relative_eq!(c.payoff(10.0), 10.0);
    }

    #[test]
    fn utility_bounds_checked() {
        assert!(UtilitySpec::power(0.5).is_err());
        assert!(UtilitySpec::exponential(-1.0).is_err());
        assert!(UtilitySpec::power(1.0).is_ok());
    }

    proptest! {
        #[test]
        fn jump_moment_linear_in_intensities(
            zs in proptest::collection::vec(-1.0f64..1.0, 1..5),
            ints in proptest::collection::vec(0.01f64..2.0, 5),
            k in 1u32..4,
        ) {
            let atoms: Vec<JumpAtom> = zs.iter().zip(&ints)
                .filter(|(z, _)| z.abs() > 1e-6)
                .map(|(&z, &l)| JumpAtom::new(z, l).unwrap())
                .collect();
            let doubled: Vec<JumpAtom> = atoms.iter()
                .map(|a| JumpAtom::new(a.z, 2.0 * a.intensity).unwrap())
                .collect();
            let m1 = jump_moment(&JumpMeasure::new(atoms).unwrap(), k, None).unwrap();
            let m2 = jump_moment(&JumpMeasure::new(doubled).unwrap(), k, None).unwrap();
            prop_assert!((m2 - 2.0 * m1).abs() <= 1e-12 * (1.0 + m1.abs()));
        }
    }
}
