use std::io::Write;

use crate::error::{Error, Result};
use crate::measure::PricingMeasure;
use crate::model::{ClaimKind, ClaimSpec, MarketParams};
use crate::numerics::solve_tridiagonal;

/// Log-uniform price grid and time-stepping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub n_space: usize,
    pub n_time: usize,
    /// Fully implicit start-up steps smoothing the nonsmooth payoff before
    /// switching to the second-order step.
    pub rannacher_steps: usize,
}

impl GridSpec {
    pub fn new(s_min: f64, s_max: f64, n_space: usize, n_time: usize) -> Result<Self> {
        let grid = GridSpec { s_min, s_max, n_space, n_time, rannacher_steps: 2 };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0 && self.s_max > self.s_min) {
            return Err(Error::Grid(format!(
                "need 0 < s_min < s_max, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.n_space < 16 {
            return Err(Error::Grid(format!("n_space {} < 16", self.n_space)));
        }
        if self.n_time < 8 {
            return Err(Error::Grid(format!("n_time {} < 8", self.n_time)));
        }
        Ok(())
    }

    /// Default grid for a claim: six strikes (or payoff scales) either
    /// side, extended so one jump image from the original bounds stays on
    /// the grid.
    pub fn default_for(claim: &ClaimSpec, market: &MarketParams) -> Self {
        let center = match &claim.kind {
            ClaimKind::Put { strike } | ClaimKind::Call { strike } => *strike,
            ClaimKind::Custom { points } => {
                let lo = points.first().unwrap().0.max(1e-6);
                let hi = points.last().unwrap().0;
                (lo * hi).sqrt().max(1e-6)
            }
        };
        let mut s_min = center / 6.0;
        let mut s_max = center * 6.0;
        for atom in market.jumps.atoms() {
            if atom.z < 0.0 {
                s_min = s_min.min(center / 6.0 * atom.z.exp());
            } else {
                s_max = s_max.max(center * 6.0 * atom.z.exp());
            }
        }
        let n_time = ((320.0 * claim.maturity).ceil() as usize).max(8);
        GridSpec { s_min, s_max, n_space: 1600, n_time, rannacher_steps: 2 }
    }

    pub fn refined(&self) -> Self {
        GridSpec {
            n_space: self.n_space * 2,
            n_time: self.n_time * 2,
            ..self.clone()
        }
    }
}

/// Backward-in-time value surface on the log-price grid.
#[derive(Debug, Clone)]
pub struct PIDESolution {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    /// One row per time, `times.len() x n_space`, row `i` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub measure: PricingMeasure,
    pub claim: ClaimSpec,
    pub rate: f64,
    xi: Vec<f64>,
    s_nodes: Vec<f64>,
}

impl PIDESolution {
    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn xi_step(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }

    /// Index of the stored time closest to `t`.
    pub fn time_index(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (**a - t).abs().partial_cmp(&(**b - t).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    }

    /// Value at time index `ti` and arbitrary price `s`: linear in log-price
    /// on the grid, boundary asymptote outside.
    pub fn value(&self, ti: usize, s: f64) -> f64 {
        let tau = self.claim.maturity - self.times[ti];
        interp_or_asymptote(&self.xi, &self.values[ti], &self.claim, self.rate, tau, s.ln())
    }

    /// Value at the time closest to `t`.
    pub fn price(&self, t: f64, s: f64) -> f64 {
        self.value(self.time_index(t), s)
    }

    /// CSV export: `t,s,value`, row-major by time then space.
    pub fn to_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,s,value")?;
        for (ti, t) in self.times.iter().enumerate() {
            for (si, s) in self.s_nodes.iter().enumerate() {
                writeln!(w, "{t},{s},{}", self.values[ti][si])?;
            }
        }
        Ok(())
    }
}

/// Discounted asymptotic value of a bounded-payoff claim far outside the
/// grid, used for Dirichlet boundaries and far jump images.
pub(crate) fn asymptote(claim: &ClaimSpec, rate: f64, tau: f64, s: f64) -> f64 {
    let df = (-rate * tau).exp();
    match &claim.kind {
        ClaimKind::Put { strike } => (strike * df - s).max(0.0),
        ClaimKind::Call { strike } => (s - strike * df).max(0.0),
        ClaimKind::Custom { .. } => df * claim.payoff(s),
    }
}

pub(crate) fn interp_or_asymptote(
    xi: &[f64],
    row: &[f64],
    claim: &ClaimSpec,
    rate: f64,
    tau: f64,
    x: f64,
) -> f64 {
    let n = xi.len();
    if x < xi[0] || x > xi[n - 1] {
        return asymptote(claim, rate, tau, x.exp());
    }
    let h = xi[1] - xi[0];
    let idx = (((x - xi[0]) / h) as usize).min(n - 2);
    let frac = (x - xi[idx]) / h;
    if idx == 0 || idx >= n - 2 {
        return row[idx] * (1.0 - frac) + row[idx + 1] * frac;
    }
    // cubic through the four surrounding nodes, in units of h
    let t = frac;
    let (a, b, c, d) = (row[idx - 1], row[idx], row[idx + 1], row[idx + 2]);
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    a * w0 + b * w1 + c * w2 + d * w3
}

/// Solves the unified pricing PIDE backward from the payoff.
///
/// Drift/diffusion/discount are treated implicitly (theta-scheme with a
/// Rannacher start, tridiagonal solve); the jump sum is explicit with one
/// corrector pass and sub-step capping so `dt * sum|lambda_bar| <= 0.5`.
pub fn solve_pide(
    measure: &PricingMeasure,
    claim: &ClaimSpec,
    market: &MarketParams,
    grid: &GridSpec,
) -> Result<PIDESolution> {
    grid.validate()?;
    let atoms = market.jumps.atoms();
    if measure.adjusted_intensities.len() != atoms.len() {
        return Err(Error::Grid(format!(
            "measure has {} intensities for {} atoms",
            measure.adjusted_intensities.len(),
            atoms.len()
        )));
    }
    let n = grid.n_space;
    let xi0 = grid.s_min.ln();
    let xi1 = grid.s_max.ln();
    let h = (xi1 - xi0) / (n - 1) as f64;
    let xi: Vec<f64> = (0..n).map(|i| xi0 + i as f64 * h).collect();
    let s_nodes: Vec<f64> = xi.iter().map(|x| x.exp()).collect();

    let maturity = claim.maturity;
    let abs_intensity: f64 = measure.adjusted_intensities.iter().map(|l| l.abs()).sum();
    let mut n_steps = grid.n_time;
    if maturity / n_steps as f64 * abs_intensity > 0.5 {
        n_steps = (2.0 * maturity * abs_intensity).ceil() as usize;
    }
    let dt = maturity / n_steps as f64;

    let sig2 = market.sigma * market.sigma;
    let rate = market.rate;
    let conv = rate + measure.drift_q - 0.5 * sig2; // log-price convection
    let diff = 0.5 * sig2;

    let zs: Vec<f64> = atoms.iter().map(|a| a.z).collect();
    let lambdas = &measure.adjusted_intensities;

    let jump_sum = |row: &[f64], tau: f64, i: usize| -> f64 {
        let mut acc = 0.0;
        for (z, lb) in zs.iter().zip(lambdas) {
            let image = interp_or_asymptote(&xi, row, claim, rate, tau, xi[i] + z);
            acc += lb * (image - row[i]);
        }
        acc
    };

    let spatial = |row: &[f64], i: usize| -> f64 {
        conv * (row[i + 1] - row[i - 1]) / (2.0 * h)
            + diff * (row[i + 1] - 2.0 * row[i] + row[i - 1]) / (h * h)
            - rate * row[i]
    };

    let terminal: Vec<f64> = s_nodes.iter().map(|&s| claim.payoff(s)).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_steps + 1);
    rows.push(terminal);

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];

    for step in 0..n_steps {
        let t_next = maturity - step as f64 * dt;
        let t_now = t_next - dt;
        let tau_next = maturity - t_next;
        let tau_now = maturity - t_now;
        let tau_mid = 0.5 * (tau_next + tau_now);
        let theta = if step < grid.rannacher_steps { 1.0 } else { 0.5 };
        let v_next = rows.last().unwrap().clone();

        // implicit operator bands
        let lower = -conv / (2.0 * h) + diff / (h * h);
        let upper = conv / (2.0 * h) + diff / (h * h);
        let center = -2.0 * diff / (h * h) - rate;
        for i in 1..n - 1 {
            sub[i] = -theta * dt * lower;
            diag[i] = 1.0 - theta * dt * center;
            sup[i] = -theta * dt * upper;
        }
        diag[0] = 1.0;
        sup[0] = 0.0;
        sub[0] = 0.0;
        diag[n - 1] = 1.0;
        sub[n - 1] = 0.0;
        sup[n - 1] = 0.0;

        let boundary_lo = asymptote(claim, rate, tau_now, s_nodes[0]);
        let boundary_hi = asymptote(claim, rate, tau_now, s_nodes[n - 1]);

        let assemble = |jump_row: &[f64], jump_tau: f64| -> Vec<f64> {
            let mut rhs = vec![0.0; n];
            rhs[0] = boundary_lo;
            rhs[n - 1] = boundary_hi;
            for i in 1..n - 1 {
                rhs[i] = v_next[i]
                    + (1.0 - theta) * dt * spatial(&v_next, i)
                    + dt * jump_sum(jump_row, jump_tau, i);
            }
            rhs
        };

        // predictor with the jump term at the later level
        let mut pred = assemble(&v_next, tau_next);
        solve_tridiagonal(&sub, &diag, &sup, &mut pred);

        // corrector: jump term at the midpoint average
        let mid: Vec<f64> =
            v_next.iter().zip(&pred).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut v_now = assemble(&mid, tau_mid);
        solve_tridiagonal(&sub, &diag, &sup, &mut v_now);

        if v_now.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite value at t={t_now}")));
        }
        rows.push(v_now);
    }

    rows.reverse(); // stored from t = 0 to t = maturity
    let times: Vec<f64> = (0..=n_steps).map(|i| i as f64 * dt).collect();
    Ok(PIDESolution {
        grid: grid.clone(),
        times,
        values: rows,
        measure: measure.clone(),
        claim: claim.clone(),
        rate,
        xi,
        s_nodes,
    })
}

/// Convergence self-check: maximal relative change of the t = 0 values over
/// the interior third of the grid when refining 2x in both dimensions.
pub fn convergence_check(
    measure: &PricingMeasure,
    claim: &ClaimSpec,
    market: &MarketParams,
    grid: &GridSpec,
) -> Result<f64> {
    let coarse = solve_pide(measure, claim, market, grid)?;
    let fine = solve_pide(measure, claim, market, &grid.refined())?;
    let n = coarse.s_nodes.len();
    let mut worst: f64 = 0.0;
    for i in n / 3..2 * n / 3 {
        let s = coarse.s_nodes[i];
        let a = coarse.values[0][i];
        let b = fine.value(0, s);
        let scale = a.abs().max(b.abs()).max(1e-8);
        worst = worst.max((a - b).abs() / scale);
    }
    Ok(worst)
}
