//! Command-line surface: argument parsing, configuration-driven dispatch and
//! CSV emission.
//!
//! Exit codes: 0 success, 2 validation or computation errors (one diagnostic
//! line on stderr), 64 usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{MethodChoice, RunConfig};
use crate::error::{Error, Result};
use crate::figures::reproduce_figure;
use crate::hedging::{delta_hedge, marginal_optimal_hedge, minimal_variance_hedge, HedgeCurve};
use crate::invest::{
    optimal_amount_exponential, optimal_fraction_power, OptimalInvestment,
};
use crate::measure::{hedge_weights, pricing_measure, PricingMeasure, PricingMethod};
use crate::model::{ClaimKind, ClaimSpec, MarketParams, UtilitySpec};
use crate::oracle::VerificationReport;
use crate::pricing::{
    implied_vol, price_series_fixed_jump, solve_pide, GridSpec, VanillaKind,
};

/// Environment variable naming the default directory for output files.
pub const OUT_DIR_ENV: &str = "JUMPHEDGE_OUT_DIR";

const EXIT_OK: i32 = 0;
const EXIT_ERROR: i32 = 2;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "jumphedge",
    about = "Pricing and hedging of European claims under jump-diffusion dynamics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the optimal investment strategy of the configured investor.
    Invest {
        #[arg(long)]
        config: PathBuf,
    },
    /// Price the configured claim (or a strike sweep) and write a CSV.
    Price {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured method: merton | utility | minvar.
        #[arg(long)]
        method: Option<String>,
        /// Strike sweep lo:hi:step replacing the configured strike.
        #[arg(long)]
        strikes: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a hedge curve for the configured claim and write a CSV.
    Hedge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        method: Option<String>,
        /// Evaluation time in years.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the implied volatility of the configured claim (or of --price).
    ImpliedVol {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        method: Option<String>,
        /// Invert this price instead of the model price.
        #[arg(long)]
        price: Option<f64>,
        /// Spot price for the inversion.
        #[arg(long, default_value_t = 100.0)]
        spot: f64,
    },
    /// Run the internal cross-checks and write a pass/fail report CSV.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data underlying one of the benchmark figures.
    Figures {
        /// fig1 | fig2 | fig3 | fig4 | fig5 | fig6
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                EXIT_OK
            } else {
                EXIT_USAGE
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Invest { config } => cmd_invest(&config),
        Command::Price { config, method, strikes, out } => {
            cmd_price(&config, method.as_deref(), strikes.as_deref(), out)
        }
        Command::Hedge { config, method, time, out } => {
            cmd_hedge(&config, method.as_deref(), time, out)
        }
        Command::ImpliedVol { config, method, price, spot } => {
            cmd_implied_vol(&config, method.as_deref(), price, spot)
        }
        Command::Verify { out } => cmd_verify(out),
        Command::Figures { name, out } => cmd_figures(&name, out),
    }
}

/// Resolves an output path: explicit flag, then the config `output` entry,
/// then the default name; relative paths land in `$JUMPHEDGE_OUT_DIR` when
/// it is set.
fn resolve_out(flag: Option<PathBuf>, config_output: Option<&str>, default_name: &str) -> PathBuf {
    let path = flag
        .or_else(|| config_output.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(default_name));
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return Path::new(&dir).join(path);
            }
        }
    }
    path
}

fn required_utility(cfg: &RunConfig) -> Result<UtilitySpec> {
    cfg.utility
        .ok_or_else(|| Error::Config("this command requires a [utility] section".into()))
}

fn required_claim(cfg: &RunConfig) -> Result<ClaimSpec> {
    cfg.claim
        .clone()
        .ok_or_else(|| Error::Config("this command requires a [claim] section".into()))
}

fn optimal_investment(market: &MarketParams, utility: &UtilitySpec) -> Result<OptimalInvestment> {
    match *utility {
        UtilitySpec::Power { beta } => optimal_fraction_power(market, beta),
        UtilitySpec::Exponential { alpha } => optimal_amount_exponential(market, alpha),
    }
}

fn resolve_method(
    cfg: &RunConfig,
    flag: Option<&str>,
    market: &MarketParams,
) -> Result<PricingMethod> {
    let choice = match flag {
        Some(s) => MethodChoice::parse(s)?,
        None => cfg.method,
    };
    Ok(match choice {
        MethodChoice::Merton => PricingMethod::Merton,
        MethodChoice::Utility => {
            let utility = required_utility(cfg)?;
            let investment = match (cfg.pi_star, utility) {
                // implied-drift mode: the given strategy is optimal by construction
                (Some(pi), UtilitySpec::Power { .. }) => OptimalInvestment::fraction(pi),
                (Some(pi), UtilitySpec::Exponential { alpha }) => {
                    OptimalInvestment::amount(alpha * pi, alpha)
                }
                (None, _) => optimal_investment(market, &utility)?,
            };
            PricingMethod::MarginalUtility { utility, investment }
        }
        MethodChoice::MinVar => PricingMethod::MinimalVariance,
    })
}

fn warn_if_signed(measure: &PricingMeasure) {
    if measure.signed {
        eprintln!(
            "warning: pricing measure is signed (a negative adjusted intensity); \
             positive claims can have negative prices"
        );
    }
}

/// Prices a claim under a measure: the analytic series when there is at most
/// one atom and the measure is unsigned, the PIDE otherwise.
fn price_claim(
    market: &MarketParams,
    measure: &PricingMeasure,
    claim: &ClaimSpec,
    grid: &GridSpec,
    s: f64,
) -> Result<f64> {
    let vanilla = !matches!(claim.kind, ClaimKind::Custom { .. });
    if vanilla && !measure.signed && market.jumps.len() <= 1 {
        let (lambda_bar, z) = match market.jumps.atoms().first() {
            Some(atom) => (measure.adjusted_intensities[0], atom.z),
            None => (0.0, 1.0),
        };
        return price_series_fixed_jump(lambda_bar, z, market, claim, s, 0.0);
    }
    let solution = solve_pide(measure, claim, market, grid)?;
    Ok(solution.value(0, s))
}

fn cmd_invest(config: &Path) -> Result<()> {
    let cfg = RunConfig::from_file(config)?;
    let market = cfg.market()?;
    let utility = required_utility(&cfg)?;
    match optimal_investment(&market, &utility)? {
        OptimalInvestment::Fraction { pi_tilde } => println!("pi_tilde = {pi_tilde}"),
        OptimalInvestment::Amount { pi_bar, alpha } => {
            println!("pi_bar = {pi_bar}");
            println!("pi_star = {}", pi_bar / alpha);
        }
    }
    Ok(())
}

fn parse_strike_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("strikes must be lo:hi:step, got {spec}")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| Error::Config(format!("bad strike {spec}")))?;
    let hi: f64 = parts[1].parse().map_err(|_| Error::Config(format!("bad strike {spec}")))?;
    let step: f64 = parts[2].parse().map_err(|_| Error::Config(format!("bad strike {spec}")))?;
    if !(lo > 0.0 && hi >= lo && step > 0.0) {
        return Err(Error::Config(format!("empty or invalid strike sweep {spec}")));
    }
    let mut strikes = Vec::new();
    let mut k = lo;
    while k <= hi + 1e-9 {
        strikes.push(k);
        k += step;
    }
    Ok(strikes)
}

fn cmd_price(
    config: &Path,
    method: Option<&str>,
    strikes: Option<&str>,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = RunConfig::from_file(config)?;
    let market = cfg.market()?;
    let claim = required_claim(&cfg)?;
    let method = resolve_method(&cfg, method, &market)?;
    let measure = pricing_measure(&market, &method)?;
    warn_if_signed(&measure);
    let spot = 100.0;
    let path = resolve_out(out, cfg.output.as_deref(), "price.csv");
    let mut file = File::create(&path)?;

    let strike_list = match strikes {
        Some(spec) => parse_strike_sweep(spec)?,
        None => match claim.strike() {
            Some(k) => vec![k],
            None => {
                // custom claim: single price, no strike sweep
                let grid = cfg.grid(&claim, &market)?;
                let price = price_claim(&market, &measure, &claim, &grid, spot)?;
                writeln!(file, "s,price")?;
                writeln!(file, "{spot},{price}")?;
                println!("wrote {}", path.display());
                return Ok(());
            }
        },
    };
    writeln!(file, "strike,moneyness_k_over_s,moneyness_s_over_k,price,implied_vol")?;
    for k in strike_list {
        let swept = match claim.kind {
            ClaimKind::Call { .. } => ClaimSpec::call(k, claim.maturity)?,
            _ => ClaimSpec::put(k, claim.maturity)?,
        };
        let kind = match swept.kind {
            ClaimKind::Call { .. } => VanillaKind::Call,
            _ => VanillaKind::Put,
        };
        let grid = cfg.grid(&swept, &market)?;
        let price = price_claim(&market, &measure, &swept, &grid, spot)?;
        let iv = match implied_vol(price, spot, k, market.rate, swept.maturity, kind) {
            Ok(iv) => iv.to_string(),
            Err(_) => String::new(), // signed measures can leave the BS range
        };
        writeln!(file, "{k},{},{},{price},{iv}", k / spot, spot / k)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_hedge(
    config: &Path,
    method: Option<&str>,
    time: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = RunConfig::from_file(config)?;
    let market = cfg.market()?;
    let claim = required_claim(&cfg)?;
    let method = resolve_method(&cfg, method, &market)?;
    let measure = pricing_measure(&market, &method)?;
    warn_if_signed(&measure);
    let grid = cfg.grid(&claim, &market)?;
    let solution = solve_pide(&measure, &claim, &market, &grid)?;
    let curve: HedgeCurve = match &method {
        PricingMethod::Merton => delta_hedge(&solution, time)?,
        PricingMethod::MarginalUtility { .. } => {
            let weights = hedge_weights(&market, &method)?;
            marginal_optimal_hedge(&solution, &market, &weights, time)?
        }
        PricingMethod::MinimalVariance => minimal_variance_hedge(&solution, &market, time)?,
    };
    let path = resolve_out(out, cfg.output.as_deref(), "hedge.csv");
    let mut file = File::create(&path)?;
    curve.to_csv(&mut file, true)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_implied_vol(
    config: &Path,
    method: Option<&str>,
    price: Option<f64>,
    spot: f64,
) -> Result<()> {
    let cfg = RunConfig::from_file(config)?;
    let market = cfg.market()?;
    let claim = required_claim(&cfg)?;
    let strike = claim
        .strike()
        .ok_or_else(|| Error::Config("implied-vol requires a vanilla claim".into()))?;
    let kind = match claim.kind {
        ClaimKind::Call { .. } => VanillaKind::Call,
        _ => VanillaKind::Put,
    };
    let price = match price {
        Some(p) => p,
        None => {
            let method = resolve_method(&cfg, method, &market)?;
            let measure = pricing_measure(&market, &method)?;
            warn_if_signed(&measure);
            let grid = cfg.grid(&claim, &market)?;
            price_claim(&market, &measure, &claim, &grid, spot)?
        }
    };
    let iv = implied_vol(price, spot, strike, market.rate, claim.maturity, kind)?;
    println!("implied_vol = {iv}");
    Ok(())
}

fn cmd_verify(out: Option<PathBuf>) -> Result<()> {
    let report = build_verification_report()?;
    for row in &report.rows {
        println!(
            "{}: expected {} actual {} (tol {}) ... {}",
            row.check,
            row.expected,
            row.actual,
            row.tolerance,
            if row.pass() { "pass" } else { "FAIL" }
        );
    }
    let path = resolve_out(out, None, "verify.csv");
    let mut file = File::create(&path)?;
    report.to_csv(&mut file)?;
    println!("wrote {}", path.display());
    if !report.all_pass() {
        return Err(Error::Numerical("verification checks failed".into()));
    }
    Ok(())
}

/// Fast internal cross-checks between the independent implementations.
pub fn build_verification_report() -> Result<VerificationReport> {
    use crate::model::{JumpAtom, JumpMeasure};

    let mut report = VerificationReport::default();
    let atom = JumpAtom::new(0.75f64.ln(), 0.25)?;
    let market = MarketParams::new(0.1125, 0.2, 0.0, JumpMeasure::new(vec![atom])?)?;
    let claim = ClaimSpec::put(100.0, 1.0)?;

    // closed-form log-utility strategy against the residual root
    let closed = match crate::invest::optimal_fraction_log_fixed_jump(&market)? {
        OptimalInvestment::Fraction { pi_tilde } => pi_tilde,
        _ => unreachable!(),
    };
    let numeric = match optimal_fraction_power(&market, 1.0)? {
        OptimalInvestment::Fraction { pi_tilde } => pi_tilde,
        _ => unreachable!(),
    };
    report.add("log_closed_form_vs_root", closed, numeric, 1e-10);

    // large-beta scaling limit of the power strategy
    let pi_bar = match optimal_amount_exponential(&market, 1.0)? {
        OptimalInvestment::Amount { pi_bar, .. } => pi_bar,
        _ => unreachable!(),
    };
    let beta = 1000.0;
    let scaled = match optimal_fraction_power(&market, beta)? {
        OptimalInvestment::Fraction { pi_tilde } => beta * pi_tilde,
        _ => unreachable!(),
    };
    report.add("beta_limit_scaled_fraction", pi_bar, scaled, 0.01 * pi_bar.abs());

    // PIDE against the analytic series under the unadjusted measure
    let merton = pricing_measure(&market, &PricingMethod::Merton)?;
    let grid = GridSpec::default_for(&claim, &market);
    let solution = solve_pide(&merton, &claim, &market, &grid)?;
    let series = price_series_fixed_jump(0.25, 0.75f64.ln(), &market, &claim, 100.0, 0.0)?;
    report.add("pide_vs_series_atm_put", series, solution.value(0, 100.0), 1e-3 * series);

    // martingale property of the linear payoff
    let linear = ClaimSpec::custom(vec![(1.0, 1.0), (2000.0, 2000.0)], 1.0)?;
    let mut linear_grid = GridSpec::default_for(&linear, &market);
    linear_grid.s_min = 12.5;
    linear_grid.s_max = 800.0;
    let linear_solution = solve_pide(&merton, &linear, &market, &linear_grid)?;
    report.add("linear_payoff_martingale", 100.0, linear_solution.value(0, 100.0), 0.1);

    // pure-diffusion reduction to Black-Scholes
    let diffusion = MarketParams::new(0.05, 0.2, 0.0, JumpMeasure::empty())?;
    let bs_measure = pricing_measure(&diffusion, &PricingMethod::Merton)?;
    let bs_solution =
        solve_pide(&bs_measure, &claim, &diffusion, &GridSpec::default_for(&claim, &diffusion))?;
    let bs = crate::pricing::black_scholes(100.0, 100.0, 0.0, 0.0, 0.2, 1.0, VanillaKind::Put);
    report.add("pide_vs_black_scholes", bs, bs_solution.value(0, 100.0), 2e-3 * bs);

    Ok(report)
}

fn cmd_figures(name: &str, out: Option<PathBuf>) -> Result<()> {
    let path = resolve_out(out, None, &format!("{name}.csv"));
    let mut buf = Vec::new();
    reproduce_figure(name, &mut buf)?;
    std::fs::write(&path, buf)?;
    println!("wrote {}", path.display());
    Ok(())
}
