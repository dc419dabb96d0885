use crate::error::{Error, Result};
use crate::model::{ClaimSpec, MarketParams, UtilitySpec};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const JUMP_PROB_CAP: f64 = 0.9;
const POSITIVITY_MARGIN: f64 = 1e-9;

/// Discretization of the dynamic-programming recursion: time steps, wealth
/// and asset grids, initial point, and the per-node policy search bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub n_steps: usize,
    pub wealth_min: f64,
    pub wealth_max: f64,
    pub n_wealth: usize,
    pub asset_min: f64,
    pub asset_max: f64,
    pub n_asset: usize,
    pub initial_wealth: f64,
    pub spot: f64,
    /// Strategy bracket: wealth fraction for power utility, amount for
    /// exponential.
    pub policy_lo: f64,
    pub policy_hi: f64,
    pub policy_tol: f64,
}

impl LatticeSpec {
    pub fn validate(&self, utility: &UtilitySpec) -> Result<()> {
        if self.n_steps < 1 || self.n_steps > 64 {
            return Err(Error::Lattice(format!("n_steps {} out of range", self.n_steps)));
        }
        if self.n_wealth < 2 || self.n_asset < 1 {
            return Err(Error::Lattice("need at least 2 wealth and 1 asset node".into()));
        }
        if !(self.wealth_min < self.wealth_max) || !(self.asset_min < self.asset_max) {
            return Err(Error::Lattice("grid bounds must be increasing".into()));
        }
        if matches!(utility, UtilitySpec::Power { .. }) && self.wealth_min <= 0.0 {
            return Err(Error::Lattice("power utility requires positive wealth bounds".into()));
        }
        if self.policy_lo > self.policy_hi || !(self.policy_tol > 0.0) {
            return Err(Error::Lattice("bad policy bracket".into()));
        }
        Ok(())
    }

    /// A workable default around an initial wealth and spot.
    pub fn default_for(initial_wealth: f64, spot: f64, n_steps: usize) -> Self {
        LatticeSpec {
            n_steps,
            wealth_min: initial_wealth * 0.25,
            wealth_max: initial_wealth * 4.0,
            n_wealth: 80,
            asset_min: spot / 8.0,
            asset_max: spot * 8.0,
            n_asset: 96,
            initial_wealth,
            spot,
            policy_lo: -3.0,
            policy_hi: 3.0,
            policy_tol: 1e-6,
        }
    }
}

/// Value surface at t = 0 plus the optimizing first-step policy per node.
#[derive(Debug, Clone)]
pub struct LatticeSurface {
    pub wealth_nodes: Vec<f64>,
    pub asset_nodes: Vec<f64>,
    /// `n_wealth x n_asset`.
    pub values: Vec<Vec<f64>>,
    pub policy: Vec<Vec<f64>>,
    utility: UtilitySpec,
    /// Wealth transform of the nodes, the interpolation variable.
    wealth_transformed: Vec<f64>,
}

impl LatticeSurface {
    /// Interpolated value at `(x, s)`: linear in the utility transform of
    /// wealth (extrapolated from the end segments) and in log asset price
    /// (clamped at the ends).
    pub fn value_at(&self, x: f64, s: f64) -> f64 {
        let col = |j: usize| -> f64 { interp_wealth(&self.wealth_transformed, &self.values, j, self.utility, x) };
        if self.asset_nodes.len() == 1 {
            return col(0);
        }
        let ls = s.ln();
        let l0 = self.asset_nodes[0].ln();
        let h = self.asset_nodes[1].ln() - l0;
        let pos = (ls - l0) / h;
        if pos <= 0.0 {
            return col(0);
        }
        let n = self.asset_nodes.len();
        if pos >= (n - 1) as f64 {
            return col(n - 1);
        }
        let j = pos as usize;
        let frac = pos - j as f64;
        col(j) * (1.0 - frac) + col(j + 1) * frac
    }

    pub fn policy_at(&self, x: f64, s: f64) -> f64 {
        // nearest node, good enough for diagnostics
        let i = nearest(&self.wealth_nodes, x);
        let j = if self.asset_nodes.len() == 1 { 0 } else { nearest(&self.asset_nodes, s) };
        self.policy[i][j]
    }
}

fn nearest(nodes: &[f64], x: f64) -> usize {
    nodes
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (**a - x).abs().partial_cmp(&(**b - x).abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

fn transform(utility: UtilitySpec, x: f64) -> f64 {
    utility.value(x)
}

fn interp_wealth(
    transformed: &[f64],
    values: &[Vec<f64>],
    col: usize,
    utility: UtilitySpec,
    x: f64,
) -> f64 {
    let g = transform(utility, x);
    let n = transformed.len();
    // transformed is strictly increasing
    let idx = if g <= transformed[0] {
        0
    } else if g >= transformed[n - 1] {
        n - 2
    } else {
        transformed.partition_point(|&t| t < g).saturating_sub(1)
    };
    let g0 = transformed[idx];
    let g1 = transformed[idx + 1];
    let v0 = values[idx][col];
    let v1 = values[idx + 1][col];
    v0 + (v1 - v0) * (g - g0) / (g1 - g0)
}

struct Branch {
    prob: f64,
    /// Wealth exposure factor: relative log-return proxy `u` so that wealth
    /// moves by `pi * u` (amount) or factor `1 + pi_tilde * u` (fraction).
    exposure: f64,
    /// Multiplicative asset factor.
    asset_factor: f64,
}

fn branches(market: &MarketParams, dt: f64) -> Vec<Branch> {
    let mut out = Vec::new();
    let mut total_jump_prob = 0.0;
    let raw: Vec<f64> = market.jumps.atoms().iter().map(|a| a.intensity * dt).collect();
    let raw_total: f64 = raw.iter().sum();
    let cap = if raw_total > JUMP_PROB_CAP { JUMP_PROB_CAP / raw_total } else { 1.0 };
    for (atom, p) in market.jumps.atoms().iter().zip(&raw) {
        let prob = p * cap;
        total_jump_prob += prob;
        out.push(Branch { prob, exposure: atom.relative_size(), asset_factor: atom.z.exp() });
    }
    let vol = market.sigma * dt.sqrt();
    for sign in [1.0, -1.0] {
        let u = market.mu * dt + sign * vol;
        out.push(Branch {
            prob: 0.5 * (1.0 - total_jump_prob),
            exposure: u,
            asset_factor: 1.0 + u,
        });
    }
    out
}

/// Per-node admissible policy interval for power utility: every branch must
/// keep the wealth factor positive.
fn fraction_bracket(branches: &[Branch], lo: f64, hi: f64) -> (f64, f64) {
    let mut lo = lo;
    let mut hi = hi;
    for b in branches {
        let u = b.exposure;
        if u > 0.0 {
            lo = lo.max((POSITIVITY_MARGIN - 1.0) / u);
        } else if u < 0.0 {
            hi = hi.min((POSITIVITY_MARGIN - 1.0) / u);
        }
    }
    (lo, hi)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    if hi - lo <= tol {
        let x = 0.5 * (lo + hi);
        return (x, f(x));
    }
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Backward induction for the maximal expected utility, optionally with a
/// short position of `epsilon` claims entering the terminal condition.
pub fn lattice_expected_utility(
    market: &MarketParams,
    utility: &UtilitySpec,
    lattice: &LatticeSpec,
    claim: Option<(&ClaimSpec, f64)>,
) -> Result<LatticeSurface> {
    lattice.validate(utility)?;
    let n_s = if claim.is_some() { lattice.n_asset } else { 1 };
    let n_x = lattice.n_wealth;
    let power = matches!(utility, UtilitySpec::Power { .. });

    let wealth_nodes: Vec<f64> = if power {
        let l0 = lattice.wealth_min.ln();
        let l1 = lattice.wealth_max.ln();
        (0..n_x).map(|i| (l0 + (l1 - l0) * i as f64 / (n_x - 1) as f64).exp()).collect()
    } else {
        (0..n_x)
            .map(|i| {
                lattice.wealth_min
                    + (lattice.wealth_max - lattice.wealth_min) * i as f64 / (n_x - 1) as f64
            })
            .collect()
    };
    let asset_nodes: Vec<f64> = if n_s == 1 {
        vec![lattice.spot]
    } else {
        let l0 = lattice.asset_min.ln();
        let l1 = lattice.asset_max.ln();
        (0..n_s).map(|j| (l0 + (l1 - l0) * j as f64 / (n_s - 1) as f64).exp()).collect()
    };
    let transformed: Vec<f64> = wealth_nodes.iter().map(|&x| transform(*utility, x)).collect();

    // terminal condition
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(n_x);
    for &x in &wealth_nodes {
        let mut row = Vec::with_capacity(n_s);
        for &s in &asset_nodes {
            let wealth = match claim {
                Some((c, eps)) => x - eps * c.payoff(s),
                None => x,
            };
            if power && wealth <= 0.0 {
                return Err(Error::Lattice(format!(
                    "terminal wealth {wealth} nonpositive at x={x}, s={s}; raise wealth_min"
                )));
            }
            row.push(utility.value(wealth));
        }
        values.push(row);
    }

    let maturity = claim.map_or(1.0, |(c, _)| c.maturity);
    let dt = maturity / lattice.n_steps as f64;
    let branch_set = branches(market, dt);
    let (frac_lo, frac_hi) = fraction_bracket(&branch_set, lattice.policy_lo, lattice.policy_hi);

    let mut policy = vec![vec![0.0; n_s]; n_x];
    let surface_view = |values: &Vec<Vec<f64>>, x: f64, s_idx_lo: usize, frac: f64| -> f64 {
        let a = interp_wealth(&transformed, values, s_idx_lo, *utility, x);
        if frac == 0.0 {
            a
        } else {
            let b = interp_wealth(&transformed, values, s_idx_lo + 1, *utility, x);
            a * (1.0 - frac) + b * frac
        }
    };
    // precompute destination columns for every (asset node, branch)
    let locate_s = |s: f64| -> (usize, f64) {
        if n_s == 1 {
            return (0, 0.0);
        }
        let l0 = asset_nodes[0].ln();
        let h = asset_nodes[1].ln() - l0;
        let pos = (s.ln() - l0) / h;
        if pos <= 0.0 {
            (0, 0.0)
        } else if pos >= (n_s - 1) as f64 {
            (n_s - 2, 1.0)
        } else {
            let j = pos as usize;
            (j.min(n_s - 2), pos - j as f64)
        }
    };
    let mut destinations: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n_s);
    for &s in &asset_nodes {
        destinations.push(branch_set.iter().map(|b| locate_s(s * b.asset_factor)).collect());
    }

    for _step in 0..lattice.n_steps {
        let prev = values.clone();
        for (i, &x) in wealth_nodes.iter().enumerate() {
            for j in 0..n_s {
                let dest = &destinations[j];
                let objective = |pi: f64| -> f64 {
                    let mut acc = 0.0;
                    for (b, &(jj, frac)) in branch_set.iter().zip(dest) {
                        let x_next = if power { x * (1.0 + pi * b.exposure) } else { x + pi * b.exposure };
                        acc += b.prob * surface_view(&prev, x_next, jj, frac);
                    }
                    acc
                };
                let (lo, hi) = if power {
                    (frac_lo, frac_hi)
                } else {
                    (lattice.policy_lo, lattice.policy_hi)
                };
                let (best_pi, best_val) = golden_max(objective, lo, hi, lattice.policy_tol);
                values[i][j] = best_val;
                policy[i][j] = best_pi;
            }
        }
    }

    Ok(LatticeSurface {
        wealth_nodes,
        asset_nodes,
        values,
        policy,
        utility: *utility,
        wealth_transformed: transformed,
    })
}

/// Solves the indifference definition for the per-claim compensation at the
/// lattice's initial point, by bisection on the price.
pub fn lattice_indifference_price(
    market: &MarketParams,
    utility: &UtilitySpec,
    claim: &ClaimSpec,
    epsilon: f64,
    lattice: &LatticeSpec,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} must be positive")));
    }
    let base = lattice_expected_utility(market, utility, lattice, None)?;
    let with_claim = lattice_expected_utility(market, utility, lattice, Some((claim, epsilon)))?;
    let x0 = lattice.initial_wealth;
    let s0 = lattice.spot;
    let target = base.value_at(x0, s0);
    let scale = claim.strike().unwrap_or_else(|| {
        (0..=16)
            .map(|i| {
                let s = lattice.asset_min
                    + (lattice.asset_max - lattice.asset_min) * i as f64 / 16.0;
                claim.payoff(s).abs()
            })
            .fold(1.0, f64::max)
    });
    let mut lo = -2.0 * scale;
    let mut hi = 2.0 * scale;
    if matches!(utility, UtilitySpec::Power { .. }) {
        lo = lo.max((1e-9 - x0) / epsilon);
    }
    let f = |v: f64| with_claim.value_at(x0 + epsilon * v, s0) - target;
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!(
            "utility surfaces do not cross on [{lo}, {hi}] (f: {flo}, {fhi})"
        )));
    }
    let tol = 1e-6 * scale;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Indifference prices on the decreasing epsilon ladder
/// `{0.2, 0.1, 0.05} * x / strike-scale`.
pub fn lattice_indifference_ladder(
    market: &MarketParams,
    utility: &UtilitySpec,
    claim: &ClaimSpec,
    lattice: &LatticeSpec,
) -> Result<Vec<(f64, f64)>> {
    let scale = claim.strike().unwrap_or(lattice.spot);
    let mut out = Vec::new();
    for mult in [0.2, 0.1, 0.05] {
        let eps = mult * lattice.initial_wealth / scale;
        let v = lattice_indifference_price(market, utility, claim, eps, lattice)?;
        out.push((eps, v));
    }
    Ok(out)
}

/// Linear-in-epsilon Richardson extrapolation from the two smallest ladder
/// entries.
pub fn richardson_extrapolate(ladder: &[(f64, f64)]) -> f64 {
    assert!(ladder.len() >= 2);
    let (e1, v1) = ladder[ladder.len() - 2];
    let (e2, v2) = ladder[ladder.len() - 1];
    v2 + (v2 - v1) * e2 / (e1 - e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpAtom, JumpMeasure};

    fn fig1() -> MarketParams {
        let atom = JumpAtom::new(0.75f64.ln(), 0.25).unwrap();
        MarketParams::new(0.1125, 0.2, 0.0, JumpMeasure::new(vec![atom]).unwrap()).unwrap()
    }

    fn diffusion() -> MarketParams {
        MarketParams::new(0.1125, 0.2, 0.0, JumpMeasure::empty()).unwrap()
    }

    #[test]
    fn forced_zero_policy_is_identity() {
        let m = diffusion();
        let u = UtilitySpec::Power { beta: 1.0 };
        let mut spec = LatticeSpec::default_for(100.0, 100.0, 1);
        spec.policy_lo = 0.0;
        spec.policy_hi = 0.0;
        spec.policy_tol = 1e-12;
        let surf = lattice_expected_utility(&m, &u, &spec, None).unwrap();
        for (i, &x) in surf.wealth_nodes.iter().enumerate() {
            assert!((surf.values[i][0] - x.ln()).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn pure_diffusion_policy_near_merton_fraction() {
        let m = diffusion();
        let u = UtilitySpec::Power { beta: 1.0 };
        let spec = LatticeSpec::default_for(100.0, 100.0, 8);
        let surf = lattice_expected_utility(&m, &u, &spec, None).unwrap();
        let merton = 0.1125 / 0.04;
        let pol = surf.policy_at(100.0, 100.0);
        assert!((pol - merton).abs() / merton < 0.05, "policy {pol} vs {merton}");
    }

    #[test]
    fn fig1_policy_matches_continuous_solver() {
        let m = fig1();
        let u = UtilitySpec::Power { beta: 1.0 };
        let spec = LatticeSpec::default_for(100.0, 100.0, 10);
        let surf = lattice_expected_utility(&m, &u, &spec, None).unwrap();
        let pol = surf.policy_at(100.0, 100.0);
        let expect = 0.8367093674160353;
        assert!((pol - expect).abs() / expect < 0.05, "policy {pol} vs {expect}");
    }

    #[test]
    fn constant_payoff_prices_at_par() {
        let m = fig1();
        let u = UtilitySpec::Power { beta: 1.0 };
        let claim = ClaimSpec::custom(vec![(1.0, 25.0), (1000.0, 25.0)], 1.0).unwrap();
        let spec = LatticeSpec::default_for(100.0, 100.0, 6);
        let v = lattice_indifference_price(&m, &u, &claim, 0.2, &spec).unwrap();
        assert!((v - 25.0).abs() < 0.3, "v = {v}");
    }

    #[test]
    fn marginal_utility_derivative_consistency() {
        // du/dx from the no-claim surface against the analytic log-utility
        // form u = A + ln x, i.e. x * du/dx = 1 at interior nodes.
        let m = fig1();
        let u = UtilitySpec::Power { beta: 1.0 };
        let spec = LatticeSpec::default_for(100.0, 100.0, 6);
        let surf = lattice_expected_utility(&m, &u, &spec, None).unwrap();
        let n = surf.wealth_nodes.len();
        for i in (n / 3)..(2 * n / 3) {
            let x0 = surf.wealth_nodes[i - 1];
            let x1 = surf.wealth_nodes[i + 1];
            let du = (surf.values[i + 1][0] - surf.values[i - 1][0]) / (x1 - x0);
            let x = surf.wealth_nodes[i];
            assert!((x * du - 1.0).abs() < 0.01, "x={x}: x*du/dx = {}", x * du);
        }
    }

    #[test]
    fn exponential_lattice_runs() {
        let m = fig1();
        let u = UtilitySpec::Exponential { alpha: 0.02 };
        let mut spec = LatticeSpec::default_for(100.0, 100.0, 6);
        spec.wealth_min = -100.0;
        spec.wealth_max = 400.0;
        spec.policy_lo = -200.0;
        spec.policy_hi = 200.0;
        spec.policy_tol = 1e-3;
        let claim = ClaimSpec::put(100.0, 1.0).unwrap();
        let v = lattice_indifference_price(&m, &u, &claim, 0.05, &spec).unwrap();
        assert!(v > 0.0 && v < 100.0, "v = {v}");
    }

    #[test]
    fn underflowing_wealth_grid_rejected() {
        let m = fig1();
        let u = UtilitySpec::Power { beta: 1.0 };
        let claim = ClaimSpec::put(100.0, 1.0).unwrap();
        let mut spec = LatticeSpec::default_for(100.0, 100.0, 4);
        spec.wealth_min = 1.0; // 1 - 0.5*payoff can go negative
        let r = lattice_expected_utility(&m, &u, &spec, Some((&claim, 0.5)));
        assert!(matches!(r, Err(Error::Lattice(_))));
    }
}
