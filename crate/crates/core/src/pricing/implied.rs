use super::black_scholes::{black_scholes, vega, VanillaKind};
use crate::error::{Error, Result};
use crate::numerics::solve_bracketed;

const SIGMA_MIN: f64 = 1e-4;
const SIGMA_MAX: f64 = 5.0;

/// Inverts Black-Scholes (q = 0) for the volatility reproducing `price`.
/// Bracketed on `[1e-4, 5]`; converged to `|BS(sigma) - price| < 1e-10 * s`.
pub fn implied_vol(
    price: f64,
    s: f64,
    strike: f64,
    r: f64,
    tau: f64,
    kind: VanillaKind,
) -> Result<f64> {
    if !(s > 0.0 && strike > 0.0 && tau > 0.0) {
        return Err(Error::Domain(format!("invalid inputs s={s} strike={strike} tau={tau}")));
    }
    let f = |sigma: f64| black_scholes(s, strike, r, 0.0, sigma, tau, kind) - price;
    // price must lie between the values at the bracket ends (monotone in sigma)
    if f(SIGMA_MIN) > 0.0 || f(SIGMA_MAX) < 0.0 {
        return Err(Error::OutOfBounds(price));
    }
    let ftol = 1e-10 * s;
    solve_bracketed(
        f,
        Some(|sigma: f64| vega(s, strike, r, 0.0, sigma, tau)),
        SIGMA_MIN,
        SIGMA_MAX,
        1e-16,
        ftol,
    )
    .ok_or(Error::OutOfBounds(price))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roundtrip_at_20_vol() {
        let price = black_scholes(100.0, 100.0, 0.0, 0.0, 0.2, 1.0, VanillaKind::Put);
        let sigma = implied_vol(price, 100.0, 100.0, 0.0, 1.0, VanillaKind::Put).unwrap();
        assert!((sigma - 0.2).abs() < 1e-8);
    }

    #[test]
    fn below_intrinsic_rejected() {
        // deep ITM put priced below its sigma->0 floor
        assert!(matches!(
            implied_vol(10.0, 50.0, 100.0, 0.0, 1.0, VanillaKind::Put),
            Err(Error::OutOfBounds(_))
        ));
    }

    proptest! {
        #[test]
        fn roundtrip_lattice(
            moneyness in 0.5f64..2.0,
            tau in 0.1f64..3.0,
            sigma in 0.05f64..1.0,
            call in proptest::bool::ANY,
        ) {
            let kind = if call { VanillaKind::Call } else { VanillaKind::Put };
            let s = 100.0;
            let strike = s * moneyness;
            let price = black_scholes(s, strike, 0.0, 0.0, sigma, tau, kind);
            // far-OTM prices can underflow and carry no volatility information
            prop_assume!(price > 1e-10);
            let back = implied_vol(price, s, strike, 0.0, tau, kind).unwrap();
            // the roundtrip is exact in price space; sigma itself is only
            // as determined as the local vega allows
            let reprice = black_scholes(s, strike, 0.0, 0.0, back, tau, kind);
            prop_assert!(
                (reprice - price).abs() < 1e-9 * s,
                "sigma={sigma} back={back} price={price} reprice={reprice}"
            );
        }
    }
}
