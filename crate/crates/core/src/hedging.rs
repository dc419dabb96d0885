//! Hedging strategies read off a PIDE solution: Merton's delta, the
//! marginal optimal hedge, the minimal-variance hedge, and the naive
//! derivative-of-price hedge.

use crate::error::{Error, Result};
use crate::measure::HedgeWeights;
use crate::model::MarketParams;
use crate::pricing::PIDESolution;

/// A hedge along the grid, in both wealth and units-of-asset terms.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeCurve {
    pub s: Vec<f64>,
    pub wealth_in_asset: Vec<f64>,
    pub units_of_asset: Vec<f64>,
    pub label: String,
}

impl HedgeCurve {
    fn from_units(s: Vec<f64>, units: Vec<f64>, label: &str) -> Self {
        let wealth = s.iter().zip(&units).map(|(s, u)| s * u).collect();
        HedgeCurve { s, wealth_in_asset: wealth, units_of_asset: units, label: label.into() }
    }

    /// Units of asset at an arbitrary price, linear in log-price.
    pub fn units_at(&self, s: f64) -> f64 {
        let x = s.ln();
        let n = self.s.len();
        if x <= self.s[0].ln() {
            return self.units_of_asset[0];
        }
        if x >= self.s[n - 1].ln() {
            return self.units_of_asset[n - 1];
        }
        let h = self.s[1].ln() - self.s[0].ln();
        let idx = (((x - self.s[0].ln()) / h) as usize).min(n - 2);
        let frac = (x - self.s[idx].ln()) / h;
        self.units_of_asset[idx] * (1.0 - frac) + self.units_of_asset[idx + 1] * frac
    }

    /// CSV export: `s,units_of_asset,wealth_in_asset,label`, one block per
    /// curve when chained.
    pub fn to_csv<W: std::io::Write>(&self, w: &mut W, header: bool) -> Result<()> {
        if header {
            writeln!(w, "s,units_of_asset,wealth_in_asset,label")?;
        }
        for i in 0..self.s.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.s[i], self.units_of_asset[i], self.wealth_in_asset[i], self.label
            )?;
        }
        Ok(())
    }
}

fn check_time(solution: &PIDESolution, t: f64) -> Result<usize> {
    let last = *solution.times.last().unwrap();
    if t < -1e-12 || t > last + 1e-12 {
        return Err(Error::Grid(format!("t={t} outside solution range [0, {last}]")));
    }
    Ok(solution.time_index(t))
}

/// Second-order log-grid derivative `d v / d s = (1/s) dv/dxi`, one-sided at
/// the boundaries.
fn price_derivative(solution: &PIDESolution, ti: usize) -> Vec<f64> {
    let row = &solution.values[ti];
    let s = solution.s_nodes();
    let h = solution.xi_step();
    let n = row.len();
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h) / s[0];
    for i in 1..n - 1 {
        out[i] = (row[i + 1] - row[i - 1]) / (2.0 * h) / s[i];
    }
    out[n - 1] = (3.0 * row[n - 1] - 4.0 * row[n - 2] + row[n - 3]) / (2.0 * h) / s[n - 1];
    out
}

/// Merton's hedge: diffusion delta only.
pub fn delta_hedge(solution: &PIDESolution, t: f64) -> Result<HedgeCurve> {
    let ti = check_time(solution, t)?;
    let units = price_derivative(solution, ti);
    Ok(HedgeCurve::from_units(solution.s_nodes().to_vec(), units, "merton_delta"))
}

fn weighted_hedge_units(
    solution: &PIDESolution,
    market: &MarketParams,
    weights: &[f64],
    ti: usize,
) -> Result<Vec<f64>> {
    let atoms = market.jumps.atoms();
    if weights.len() != atoms.len() {
        return Err(Error::Grid(format!(
            "{} hedge weights for {} atoms",
            weights.len(),
            atoms.len()
        )));
    }
    let sig2 = market.sigma * market.sigma;
    let deriv = price_derivative(solution, ti);
    let s_nodes = solution.s_nodes();
    let row = &solution.values[ti];
    let mut den = sig2;
    for (atom, w) in atoms.iter().zip(weights) {
        let j = atom.relative_size();
        den += j * j * w * atom.intensity;
    }
    let mut units = Vec::with_capacity(s_nodes.len());
    for (i, &s) in s_nodes.iter().enumerate() {
        let mut num = sig2 * deriv[i];
        for (atom, w) in atoms.iter().zip(weights) {
            let j = atom.relative_size();
            let image = solution.value(ti, atom.z.exp() * s);
            num += (image - row[i]) / (j * s) * j * j * w * atom.intensity;
        }
        units.push(num / den);
    }
    Ok(units)
}

/// Marginal optimal hedge; the solution must have been produced under the
/// matching marginal-utility measure.
pub fn marginal_optimal_hedge(
    solution: &PIDESolution,
    market: &MarketParams,
    weights: &HedgeWeights,
    t: f64,
) -> Result<HedgeCurve> {
    let ti = check_time(solution, t)?;
    let units = weighted_hedge_units(solution, market, &weights.weights, ti)?;
    Ok(HedgeCurve::from_units(solution.s_nodes().to_vec(), units, "marginal_optimal"))
}

/// Minimal-variance hedge: the weighted formula with unit weights.
pub fn minimal_variance_hedge(
    solution: &PIDESolution,
    market: &MarketParams,
    t: f64,
) -> Result<HedgeCurve> {
    let ti = check_time(solution, t)?;
    let weights = vec![1.0; market.jumps.len()];
    let units = weighted_hedge_units(solution, market, &weights, ti)?;
    Ok(HedgeCurve::from_units(solution.s_nodes().to_vec(), units, "minimal_variance"))
}

/// Derivative of the marginal indifference price with respect to the asset,
/// the naive hedge.
pub fn derivative_of_price_hedge(solution: &PIDESolution, t: f64) -> Result<HedgeCurve> {
    let ti = check_time(solution, t)?;
    let units = price_derivative(solution, ti);
    Ok(HedgeCurve::from_units(solution.s_nodes().to_vec(), units, "derivative_of_price"))
}
