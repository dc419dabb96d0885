//! Small shared numerical helpers.

/// Safeguarded root finding on a bracket `[lo, hi]` with `f(lo)` and `f(hi)`
/// of opposite sign: Newton steps where a derivative is supplied and they
/// stay inside the bracket, bisection otherwise.
///
/// Iterates until `|f| <= ftol` or the bracket width falls below `xtol`.
pub(crate) fn solve_bracketed<F, D>(
    f: F,
    df: Option<D>,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    ftol: f64,
) -> Option<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut x = 0.5 * (lo + hi);
    for iter in 0..200 {
        let fx = f(x);
        if fx.abs() <= ftol {
            return Some(x);
        }
        if fx.is_nan() || fx.signum() == flo.signum() {
            lo = x;
            if !fx.is_nan() {
                flo = fx;
            }
        } else {
            hi = x;
            fhi = fx;
        }
        let _ = fhi;
        if hi - lo <= xtol * (1.0 + x.abs()) {
            return Some(0.5 * (lo + hi));
        }
        // Newton on odd iterations only: the forced bisection in between
        // guarantees bracket shrinkage even where Newton creeps.
        let mut next = f64::NAN;
        if iter % 2 == 1 {
            if let Some(ref d) = df {
                let dx = d(x);
                if dx.is_finite() && dx != 0.0 && fx.is_finite() {
                    let cand = x - fx / dx;
                    if cand > lo && cand < hi {
                        next = cand;
                    }
                }
            }
        }
        x = if next.is_finite() { next } else { 0.5 * (lo + hi) };
    }
    None
}

/// Solves a tridiagonal system in place via the Thomas algorithm.
/// `sub`, `diag`, `sup` are the three bands; `rhs` is overwritten with the
/// solution.
pub(crate) fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    debug_assert_eq!(sub.len(), n);
    debug_assert_eq!(sup.len(), n);
    debug_assert_eq!(rhs.len(), n);
    let mut c_star = vec![0.0; n];
    let mut d_star = vec![0.0; n];
    c_star[0] = sup[0] / diag[0];
    d_star[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c_star[i - 1];
        c_star[i] = sup[i] / m;
        d_star[i] = (rhs[i] - sub[i] * d_star[i - 1]) / m;
    }
    rhs[n - 1] = d_star[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = d_star[i] - c_star[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_recovers_known_solution() {
        // A = [[2,1,0],[1,3,1],[0,1,2]], x = [1,2,3] -> b = [4,10,8]
        let mut rhs = vec![4.0, 10.0, 8.0];
        solve_tridiagonal(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0], &mut rhs);
        for (got, want) in rhs.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bracketed_root_of_cubic() {
        let f = |x: f64| x * x * x - 2.0;
        let df = |x: f64| 3.0 * x * x;
        let root = solve_bracketed(f, Some(df), 0.0, 2.0, 1e-15, 1e-14).unwrap();
        assert!((root - 2f64.powf(1.0 / 3.0)).abs() < 1e-10);
    }
}
