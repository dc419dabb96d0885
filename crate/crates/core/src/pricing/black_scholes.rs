use statrs::function::erf::erfc;

/// Vanilla option side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VanillaKind {
    Put,
    Call,
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Black-Scholes price with risk-free rate `r` and dividend yield `q`.
/// `tau = 0` returns the payoff.
pub fn black_scholes(
    s: f64,
    strike: f64,
    r: f64,
    q: f64,
    sigma: f64,
    tau: f64,
    kind: VanillaKind,
) -> f64 {
    debug_assert!(s > 0.0 && strike > 0.0 && sigma > 0.0 && tau >= 0.0);
    if tau == 0.0 {
        return match kind {
            VanillaKind::Put => (strike - s).max(0.0),
            VanillaKind::Call => (s - strike).max(0.0),
        };
    }
    let vol = sigma * tau.sqrt();
    let d1 = ((s / strike).ln() + (r - q + 0.5 * sigma * sigma) * tau) / vol;
    let d2 = d1 - vol;
    let df_r = (-r * tau).exp();
    let df_q = (-q * tau).exp();
    match kind {
        VanillaKind::Put => strike * df_r * norm_cdf(-d2) - s * df_q * norm_cdf(-d1),
        VanillaKind::Call => s * df_q * norm_cdf(d1) - strike * df_r * norm_cdf(d2),
    }
}

/// Black-Scholes vega (with respect to sigma), q = 0 convention used by the
/// implied-vol solver.
pub(crate) fn vega(s: f64, strike: f64, r: f64, q: f64, sigma: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let vol = sigma * tau.sqrt();
    let d1 = ((s / strike).ln() + (r - q + 0.5 * sigma * sigma) * tau) / vol;
    let pdf = (-0.5 * d1 * d1).exp() / (2.0 * std::f64::consts::PI).sqrt();
    s * (-q * tau).exp() * pdf * tau.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_tau_is_payoff() {
        assert_eq!(black_scholes(80.0, 100.0, 0.05, 0.0, 0.2, 0.0, VanillaKind::Put), 20.0);
        assert_eq!(black_scholes(120.0, 100.0, 0.05, 0.0, 0.2, 0.0, VanillaKind::Call), 20.0);
    }

    #[test]
    fn degenerate_diffusion_is_intrinsic() {
        let v = black_scholes(80.0, 100.0, 0.0, 0.0, 1e-12, 1.0, VanillaKind::Put);
        assert_relative_eq!(v, 20.0, epsilon = 1e-9);
        let v = black_scholes(120.0, 100.0, 0.0, 0.0, 1e-12, 1.0, VanillaKind::Put);
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn atm_put_value() {
        // Independent oracles: the ATM approximation 0.4*s*sigma*sqrt(tau) = 8.0
        // and a trapezoid integration of the lognormal payoff.
        let v = black_scholes(100.0, 100.0, 0.0, 0.0, 0.2, 1.0, VanillaKind::Put);
        assert!(v > 7.9 && v < 8.0, "{v}");

        let sigma: f64 = 0.2;
        let n = 40_000;
        let mut quad = 0.0;
        let (lo, hi) = (-8.0 * sigma, 8.0 * sigma);
        let dz = (hi - lo) / n as f64;
        for i in 0..=n {
            let z = lo + i as f64 * dz;
            let s_t = 100.0 * (z - 0.5 * sigma * sigma).exp();
            let payoff = (100.0 - s_t).max(0.0);
            let density = (-0.5 * (z / sigma) * (z / sigma)).exp()
                / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            quad += w * payoff * density * dz;
        }
        assert_relative_eq!(v, quad, max_relative = 1e-6);
    }

    #[test]
    fn put_call_parity_with_dividends() {
        let (s, k, r, q, sigma, tau) = (110.0, 95.0, 0.03, 0.01, 0.25, 0.7);
        let c = black_scholes(s, k, r, q, sigma, tau, VanillaKind::Call);
        let p = black_scholes(s, k, r, q, sigma, tau, VanillaKind::Put);
        let parity = s * (-q * tau).exp() - k * (-r * tau).exp();
        assert_relative_eq!(c - p, parity, max_relative = 1e-12);
    }
}
