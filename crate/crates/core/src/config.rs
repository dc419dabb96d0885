//! Run configuration: a flat `[section]` / `key = value` text format and its
//! mapping onto market, utility, claim and grid objects.
//!
//! ```text
//! [market]
//! mu_tilde = 0.05        # or mu = ...; exactly one in drift-given mode
//! sigma = 0.2
//! rate = 0.0
//! atoms = -0.287682072451781:0.25   # z:intensity, comma separated
//!
//! [utility]
//! kind = power           # or exponential
//! beta = 1.0             # alpha = ... for exponential
//!
//! [claim]
//! kind = put             # put | call | custom
//! strike = 100
//! maturity = 1.0
//! # points = 50:50,100:0   (custom payoffs)
//!
//! [run]
//! method = merton        # merton | utility | minvar
//! mode = drift-given     # or implied-drift (requires pi_star, forbids mu)
//! seed = 7
//!
//! [grid]                 # optional solver overrides
//! n_space = 400
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::invest::{implied_drift, OptimalInvestment};
use crate::model::{ClaimSpec, JumpAtom, JumpMeasure, MarketParams, UtilitySpec};
use crate::pricing::GridSpec;

/// Pricing framework selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Merton,
    Utility,
    MinVar,
}

impl MethodChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "merton" => Ok(MethodChoice::Merton),
            "utility" => Ok(MethodChoice::Utility),
            "minvar" => Ok(MethodChoice::MinVar),
            other => Err(Error::Config(format!(
                "method must be merton, utility or minvar, got {other}"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodChoice::Merton => "merton",
            MethodChoice::Utility => "utility",
            MethodChoice::MinVar => "minvar",
        }
    }
}

/// Whether the drift is given directly or implied from a target strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftMode {
    DriftGiven,
    ImpliedDrift,
}

impl DriftMode {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "drift-given" => Ok(DriftMode::DriftGiven),
            "implied-drift" => Ok(DriftMode::ImpliedDrift),
            other => Err(Error::Config(format!(
                "mode must be drift-given or implied-drift, got {other}"
            ))),
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            DriftMode::DriftGiven => "drift-given",
            DriftMode::ImpliedDrift => "implied-drift",
        }
    }
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mu: Option<f64>,
    pub mu_tilde: Option<f64>,
    pub sigma: f64,
    pub rate: f64,
    /// `(z, intensity)` pairs; empty means pure diffusion.
    pub atoms: Vec<(f64, f64)>,
    pub utility: Option<UtilitySpec>,
    pub claim: Option<ClaimSpec>,
    pub method: MethodChoice,
    pub mode: DriftMode,
    pub pi_star: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub grid_s_min: Option<f64>,
    pub grid_s_max: Option<f64>,
    pub grid_n_space: Option<usize>,
    pub grid_n_time: Option<usize>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| Error::Config(format!("{key}: not a number: {v}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::Config(format!("{key}: not an integer: {v}")))
}

fn parse_atoms(v: &str) -> Result<Vec<(f64, f64)>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|pair| {
            let (z, l) = pair
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("atoms entry '{pair}' is not z:intensity")))?;
            Ok((parse_f64("atoms z", z.trim())?, parse_f64("atoms intensity", l.trim())?))
        })
        .collect()
}

fn parse_points(v: &str) -> Result<Vec<(f64, f64)>> {
    v.split(',')
        .map(|pair| {
            let (s, p) = pair
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("points entry '{pair}' is not s:payoff")))?;
            Ok((parse_f64("points s", s.trim())?, parse_f64("points payoff", p.trim())?))
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut section = String::new();
        // raw fields, assembled at the end
        let mut mu = None;
        let mut mu_tilde = None;
        let mut sigma = None;
        let mut rate = 0.0;
        let mut atoms = Vec::new();
        let mut utility_kind: Option<String> = None;
        let mut beta = None;
        let mut alpha = None;
        let mut claim_kind: Option<String> = None;
        let mut strike = None;
        let mut maturity = None;
        let mut points: Option<Vec<(f64, f64)>> = None;
        let mut method = MethodChoice::Merton;
        let mut mode = DriftMode::DriftGiven;
        let mut pi_star = None;
        let mut seed = None;
        let mut output = None;
        let mut grid = [None::<f64>, None::<f64>];
        let mut grid_n = [None::<usize>, None::<usize>];

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["market", "utility", "claim", "run", "grid"].contains(&section.as_str()) {
                    return Err(Error::Config(format!(
                        "line {}: unknown section [{section}]",
                        lineno + 1
                    )));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            match (section.as_str(), key) {
                ("market", "mu") => mu = Some(parse_f64(key, value)?),
                ("market", "mu_tilde") => mu_tilde = Some(parse_f64(key, value)?),
                ("market", "sigma") => sigma = Some(parse_f64(key, value)?),
                ("market", "rate") => rate = parse_f64(key, value)?,
                ("market", "atoms") => atoms = parse_atoms(value)?,
                ("utility", "kind") => utility_kind = Some(value.to_string()),
                ("utility", "beta") => beta = Some(parse_f64(key, value)?),
                ("utility", "alpha") => alpha = Some(parse_f64(key, value)?),
                ("claim", "kind") => claim_kind = Some(value.to_string()),
                ("claim", "strike") => strike = Some(parse_f64(key, value)?),
                ("claim", "maturity") => maturity = Some(parse_f64(key, value)?),
                ("claim", "points") => points = Some(parse_points(value)?),
                ("run", "method") => method = MethodChoice::parse(value)?,
                ("run", "mode") => mode = DriftMode::parse(value)?,
                ("run", "pi_star") => pi_star = Some(parse_f64(key, value)?),
                ("run", "seed") => {
                    seed = Some(
                        value
                            .parse()
                            .map_err(|_| Error::Config(format!("seed: not an integer: {value}")))?,
                    )
                }
                ("run", "output") => output = Some(value.to_string()),
                ("grid", "s_min") => grid[0] = Some(parse_f64(key, value)?),
                ("grid", "s_max") => grid[1] = Some(parse_f64(key, value)?),
                ("grid", "n_space") => grid_n[0] = Some(parse_usize(key, value)?),
                ("grid", "n_time") => grid_n[1] = Some(parse_usize(key, value)?),
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{key}' in section [{section}]",
                        lineno + 1
                    )))
                }
            }
        }

        let sigma = sigma.ok_or_else(|| Error::Config("[market] sigma is required".into()))?;
        let utility = match utility_kind.as_deref() {
            None => {
                if beta.is_some() || alpha.is_some() {
                    return Err(Error::Config("[utility] kind is required".into()));
                }
                None
            }
            Some("power") => {
                let beta =
                    beta.ok_or_else(|| Error::Config("power utility requires beta".into()))?;
                if alpha.is_some() {
                    return Err(Error::Config("power utility takes beta, not alpha".into()));
                }
                Some(UtilitySpec::power(beta).map_err(|e| Error::Config(e.to_string()))?)
            }
            Some("exponential") => {
                let alpha = alpha
                    .ok_or_else(|| Error::Config("exponential utility requires alpha".into()))?;
                if beta.is_some() {
                    return Err(Error::Config("exponential utility takes alpha, not beta".into()));
                }
                Some(UtilitySpec::exponential(alpha).map_err(|e| Error::Config(e.to_string()))?)
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "utility kind must be power or exponential, got {other}"
                )))
            }
        };
        let claim = match claim_kind.as_deref() {
            None => None,
            Some(kind @ ("put" | "call")) => {
                let strike =
                    strike.ok_or_else(|| Error::Config(format!("{kind} requires strike")))?;
                let maturity =
                    maturity.ok_or_else(|| Error::Config(format!("{kind} requires maturity")))?;
                let claim = if kind == "put" {
                    ClaimSpec::put(strike, maturity)
                } else {
                    ClaimSpec::call(strike, maturity)
                };
                Some(claim.map_err(|e| Error::Config(e.to_string()))?)
            }
            Some("custom") => {
                let points =
                    points.ok_or_else(|| Error::Config("custom claim requires points".into()))?;
                let maturity =
                    maturity.ok_or_else(|| Error::Config("custom claim requires maturity".into()))?;
                Some(ClaimSpec::custom(points, maturity).map_err(|e| Error::Config(e.to_string()))?)
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "claim kind must be put, call or custom, got {other}"
                )))
            }
        };

        let config = RunConfig {
            mu,
            mu_tilde,
            sigma,
            rate,
            atoms,
            utility,
            claim,
            method,
            mode,
            pi_star,
            seed,
            output,
            grid_s_min: grid[0],
            grid_s_max: grid[1],
            grid_n_space: grid_n[0],
            grid_n_time: grid_n[1],
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        match self.mode {
            DriftMode::DriftGiven => {
                if self.mu.is_some() == self.mu_tilde.is_some() {
                    return Err(Error::Config(
                        "drift-given mode needs exactly one of mu / mu_tilde".into(),
                    ));
                }
            }
            DriftMode::ImpliedDrift => {
                if self.mu.is_some() || self.mu_tilde.is_some() {
                    return Err(Error::Config("implied-drift mode forbids mu and mu_tilde".into()));
                }
                if self.pi_star.is_none() {
                    return Err(Error::Config("implied-drift mode requires pi_star".into()));
                }
                if self.utility.is_none() {
                    return Err(Error::Config("implied-drift mode requires a utility".into()));
                }
            }
        }
        Ok(())
    }

    fn jump_measure(&self) -> Result<JumpMeasure> {
        let atoms: Result<Vec<JumpAtom>> =
            self.atoms.iter().map(|&(z, l)| JumpAtom::new(z, l)).collect();
        JumpMeasure::new(atoms?)
    }

    /// Market parameters with the drift resolved: directly, from the average
    /// drift `mu_tilde`, or by the implied-drift inversion from `pi_star`.
    pub fn market(&self) -> Result<MarketParams> {
        let jumps = self.jump_measure()?;
        let mu = match self.mode {
            DriftMode::DriftGiven => match (self.mu, self.mu_tilde) {
                (Some(mu), None) => mu,
                (None, Some(mu_tilde)) => {
                    mu_tilde - crate::model::jump_moment(&jumps, 1, None)?
                }
                _ => unreachable!("validated"),
            },
            DriftMode::ImpliedDrift => {
                let pi = self.pi_star.expect("validated");
                let utility = self.utility.expect("validated");
                let investment = match utility {
                    UtilitySpec::Power { .. } => OptimalInvestment::fraction(pi),
                    UtilitySpec::Exponential { alpha } => {
                        OptimalInvestment::amount(alpha * pi, alpha)
                    }
                };
                let sans_mu = MarketParams::new(0.0, self.sigma, self.rate, jumps.clone())?;
                implied_drift(&investment, &sans_mu, &utility)?
            }
        };
        MarketParams::new(mu, self.sigma, self.rate, jumps)
    }

    /// Solver grid for the configured claim, with any overrides applied.
    pub fn grid(&self, claim: &ClaimSpec, market: &MarketParams) -> Result<GridSpec> {
        let mut grid = GridSpec::default_for(claim, market);
        if let Some(v) = self.grid_s_min {
            grid.s_min = v;
        }
        if let Some(v) = self.grid_s_max {
            grid.s_max = v;
        }
        if let Some(v) = self.grid_n_space {
            grid.n_space = v;
        }
        if let Some(v) = self.grid_n_time {
            grid.n_time = v;
        }
        grid.validate()?;
        Ok(grid)
    }

    /// Writes the configuration back out; parsing the result reproduces the
    /// configuration field by field.
    pub fn serialize(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        out.push_str("[market]\n");
        if let Some(mu) = self.mu {
            writeln!(out, "mu = {mu}").unwrap();
        }
        if let Some(mu_tilde) = self.mu_tilde {
            writeln!(out, "mu_tilde = {mu_tilde}").unwrap();
        }
        writeln!(out, "sigma = {}", self.sigma).unwrap();
        writeln!(out, "rate = {}", self.rate).unwrap();
        if !self.atoms.is_empty() {
            let atoms: Vec<String> =
                self.atoms.iter().map(|(z, l)| format!("{z}:{l}")).collect();
            writeln!(out, "atoms = {}", atoms.join(",")).unwrap();
        }
        match self.utility {
            Some(UtilitySpec::Power { beta }) => {
                out.push_str("\n[utility]\nkind = power\n");
                writeln!(out, "beta = {beta}").unwrap();
            }
            Some(UtilitySpec::Exponential { alpha }) => {
                out.push_str("\n[utility]\nkind = exponential\n");
                writeln!(out, "alpha = {alpha}").unwrap();
            }
            None => {}
        }
        if let Some(claim) = &self.claim {
            out.push_str("\n[claim]\n");
            match &claim.kind {
                crate::model::ClaimKind::Put { strike } => {
                    writeln!(out, "kind = put\nstrike = {strike}").unwrap();
                }
                crate::model::ClaimKind::Call { strike } => {
                    writeln!(out, "kind = call\nstrike = {strike}").unwrap();
                }
                crate::model::ClaimKind::Custom { points } => {
                    let points: Vec<String> =
                        points.iter().map(|(s, p)| format!("{s}:{p}")).collect();
                    writeln!(out, "kind = custom\npoints = {}", points.join(",")).unwrap();
                }
            }
            writeln!(out, "maturity = {}", claim.maturity).unwrap();
        }
        out.push_str("\n[run]\n");
        writeln!(out, "method = {}", self.method.as_str()).unwrap();
        writeln!(out, "mode = {}", self.mode.as_str()).unwrap();
        if let Some(pi) = self.pi_star {
            writeln!(out, "pi_star = {pi}").unwrap();
        }
        if let Some(seed) = self.seed {
            writeln!(out, "seed = {seed}").unwrap();
        }
        if let Some(output) = &self.output {
            writeln!(out, "output = {output}").unwrap();
        }
        let any_grid = self.grid_s_min.is_some()
            || self.grid_s_max.is_some()
            || self.grid_n_space.is_some()
            || self.grid_n_time.is_some();
        if any_grid {
            out.push_str("\n[grid]\n");
            if let Some(v) = self.grid_s_min {
                writeln!(out, "s_min = {v}").unwrap();
            }
            if let Some(v) = self.grid_s_max {
                writeln!(out, "s_max = {v}").unwrap();
            }
            if let Some(v) = self.grid_n_space {
                writeln!(out, "n_space = {v}").unwrap();
            }
            if let Some(v) = self.grid_n_time {
                writeln!(out, "n_time = {v}").unwrap();
            }
        }
        out
    }
}
