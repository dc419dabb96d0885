use crate::error::{Error, Result};
use crate::invest::{optimal_amount_exponential, optimal_fraction_power, OptimalInvestment};
use crate::model::{ClaimSpec, MarketParams, UtilitySpec};
use rand::distributions::Distribution;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::Normal;

/// Monte Carlo configuration. Paths are generated in antithetic pairs on
/// per-pair random substreams, so an estimate is reproducible path by path
/// regardless of how a run is batched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSpec {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub spot: f64,
}

impl McSpec {
    fn validate(&self, market: &MarketParams, maturity: f64) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::Validation("n_paths and n_steps must be positive".into()));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::Validation("antithetic runs need an even n_paths".into()));
        }
        if !(self.spot > 0.0) {
            return Err(Error::Validation(format!("spot {} must be positive", self.spot)));
        }
        let dt = maturity / self.n_steps as f64;
        for atom in market.jumps.atoms() {
            if atom.intensity * dt > 1.0 {
                return Err(Error::Validation(format!(
                    "intensity {} * dt {dt} exceeds 1; raise n_steps",
                    atom.intensity
                )));
            }
        }
        Ok(())
    }
}

/// Constant optimal strategy together with the marginal-utility weighting it
/// induces at maturity. The initial wealth level cancels in the ratio and is
/// never needed.
enum Strategy {
    /// Power utility: wealth is multiplicative in the per-step factors and
    /// the weight is `X_rel^{-beta}`.
    Fraction { pi_tilde: f64, beta: f64 },
    /// Exponential utility: wealth is the initial level plus the amount times
    /// the cumulative relative asset return, and the weight is
    /// `exp(-pi_bar * return)`.
    Amount { pi_bar: f64 },
}

fn strategy_for(market: &MarketParams, utility: &UtilitySpec) -> Result<Strategy> {
    match *utility {
        UtilitySpec::Power { beta } => match optimal_fraction_power(market, beta)? {
            OptimalInvestment::Fraction { pi_tilde } => Ok(Strategy::Fraction { pi_tilde, beta }),
            _ => unreachable!(),
        },
        UtilitySpec::Exponential { alpha } => match optimal_amount_exponential(market, alpha)? {
            OptimalInvestment::Amount { pi_bar, .. } => Ok(Strategy::Amount { pi_bar }),
            _ => unreachable!(),
        },
    }
}

struct PairSample {
    weighted_payoff: f64,
    weight: f64,
    blowups: usize,
}

/// Simulates one pair (or one path when `antithetic` is off) on its own
/// substream and returns the pair-averaged weighted payoff and weight.
fn simulate_pair(
    market: &MarketParams,
    strategy: &Strategy,
    claim: &ClaimSpec,
    mc: &McSpec,
    pair: u64,
) -> PairSample {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream(pair);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let dt = claim.maturity / mc.n_steps as f64;
    let vol = market.sigma * dt.sqrt();
    let n_atoms = market.jumps.len();

    // draw everything first so both antithetic legs share the jump uniforms
    let mut gaussians = Vec::with_capacity(mc.n_steps);
    let mut jump_hits: Vec<Vec<bool>> = Vec::with_capacity(mc.n_steps);
    for _ in 0..mc.n_steps {
        gaussians.push(normal.sample(&mut rng));
        let mut hits = Vec::with_capacity(n_atoms);
        for atom in market.jumps.atoms() {
            hits.push(rng.gen::<f64>() < atom.intensity * dt);
        }
        jump_hits.push(hits);
    }

    let legs: &[f64] = if mc.antithetic { &[1.0, -1.0] } else { &[1.0] };
    let mut weighted_payoff = 0.0;
    let mut weight = 0.0;
    let mut blowups = 0;
    for &sign in legs {
        let mut log_s = mc.spot.ln();
        let mut log_x_rel = 0.0; // power wealth
        let mut x_return = 0.0; // cumulative relative asset return, exponential wealth
        let mut dead = false;
        for (step, hits) in jump_hits.iter().enumerate() {
            let zeta = sign * gaussians[step];
            log_s += (market.mu - 0.5 * market.sigma * market.sigma) * dt + vol * zeta;
            let diffusion_return = market.mu * dt + vol * zeta;
            match strategy {
                Strategy::Fraction { pi_tilde, .. } => {
                    log_x_rel += pi_tilde * market.mu * dt
                        - 0.5 * pi_tilde * pi_tilde * market.sigma * market.sigma * dt
                        + pi_tilde * vol * zeta;
                }
                Strategy::Amount { .. } => x_return += diffusion_return,
            }
            for (atom, &hit) in market.jumps.atoms().iter().zip(hits) {
                if !hit {
                    continue;
                }
                log_s += atom.z;
                let j = atom.relative_size();
                match strategy {
                    Strategy::Fraction { pi_tilde, .. } => {
                        let factor = 1.0 + pi_tilde * j;
                        if factor <= 0.0 {
                            dead = true;
                        } else {
                            log_x_rel += factor.ln();
                        }
                    }
                    Strategy::Amount { .. } => x_return += j,
                }
            }
        }
        if dead {
            blowups += 1;
            continue;
        }
        let w = match strategy {
            Strategy::Fraction { beta, .. } => (-beta * log_x_rel).exp(),
            Strategy::Amount { pi_bar } => (-pi_bar * x_return).exp(),
        };
        weighted_payoff += w * claim.payoff(log_s.exp());
        weight += w;
    }
    let n = legs.len() as f64;
    PairSample { weighted_payoff: weighted_payoff / n, weight: weight / n, blowups }
}

/// Ratio of means with a first-order (delta method) standard error.
fn ratio_estimate(samples: &[(f64, f64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let a_bar: f64 = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let b_bar: f64 = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let ratio = a_bar / b_bar;
    if samples.len() < 2 {
        return (ratio, f64::INFINITY);
    }
    let resid_var: f64 = samples
        .iter()
        .map(|&(a, b)| {
            let e = a - ratio * b;
            e * e
        })
        .sum::<f64>()
        / (n - 1.0);
    (ratio, resid_var.sqrt() / (n.sqrt() * b_bar))
}

/// Marginal price of `claim` under the investor's optimal strategy, estimated
/// as the ratio of marginal-utility-weighted payoff to marginal-utility mass.
/// Returns `(price, standard_error)`.
pub fn mc_marginal_price(
    market: &MarketParams,
    utility: &UtilitySpec,
    claim: &ClaimSpec,
    mc: &McSpec,
) -> Result<(f64, f64)> {
    mc.validate(market, claim.maturity)?;
    let strategy = strategy_for(market, utility)?;
    let n_pairs = if mc.antithetic { mc.n_paths / 2 } else { mc.n_paths };
    let mut samples = Vec::with_capacity(n_pairs);
    let mut blowups = 0;
    for pair in 0..n_pairs {
        let s = simulate_pair(market, &strategy, claim, mc, pair as u64);
        blowups += s.blowups;
        samples.push((s.weighted_payoff, s.weight));
    }
    if blowups > 0 {
        return Err(Error::PathBlowup { count: blowups, total: mc.n_paths });
    }
    Ok(ratio_estimate(&samples))
}
