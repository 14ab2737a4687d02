//! Adaptive Simpson quadrature with an explicit error estimate.
//!
//! # Algorithm
//!
//! Classic bisecting Simpson: an interval is accepted when the two-panel
//! refinement `S2` agrees with the one-panel estimate `S1` to within
//! `15 * tol` (the factor 15 comes from the O(h^4) error cancellation of
//! Simpson's rule), and the accepted value is Richardson-corrected by
//! `(S2 - S1) / 15`. Otherwise the interval is split and each half gets half
//! the tolerance budget. All integrands in this crate are smooth products of
//! exponentials and polynomials in `exp(-s)`, so convergence is fast; the
//! depth cap exists to turn a misuse (or a pathological tolerance) into an
//! error instead of a hang.

use thiserror::Error;

/// A converged quadrature value with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Richardson-corrected integral value.
    pub value: f64,
    /// Sum of per-interval `|S2 - S1| / 15` terms: an estimate (not a strict
    /// bound) of the absolute error, honest for smooth integrands.
    pub error_estimate: f64,
}

/// Bisection exceeded the depth cap before meeting the tolerance.
#[derive(Debug, Clone, Copy, Error, PartialEq)]
#[error("adaptive Simpson did not converge on [{a}, {b}] within depth {max_depth}")]
pub struct NonConvergence {
    /// Left endpoint of the offending subinterval.
    pub a: f64,
    /// Right endpoint of the offending subinterval.
    pub b: f64,
    /// The depth cap that was exhausted.
    pub max_depth: u32,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Returns the Richardson-corrected value and an accumulated error estimate;
/// halving `abs_tol` moves the result by less than the reported estimate for
/// smooth integrands. `a <= b` is required; an empty interval yields zero.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<Quadrature, NonConvergence> {
    debug_assert!(a <= b, "integration bounds out of order: [{a}, {b}]");
    if a >= b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let mut acc = Quadrature {
        value: 0.0,
        error_estimate: 0.0,
    };
    refine(&f, a, b, fa, fm, fb, whole, abs_tol, max_depth, &mut acc)
        .map_err(|err| NonConvergence { max_depth, ..err })?;
    Ok(acc)
}

/// One Simpson panel over `[a, b]` with precomputed endpoint/midpoint values.
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth_left: u32,
    acc: &mut Quadrature,
) -> Result<(), NonConvergence> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // 15 * tol acceptance: Simpson halving cancels the leading error term,
    // so |delta| / 15 estimates the error of the corrected value.
    if delta.abs() <= 15.0 * tol {
        acc.value += left + right + delta / 15.0;
        acc.error_estimate += delta.abs() / 15.0;
        return Ok(());
    }
    if depth_left == 0 {
        return Err(NonConvergence { a, b, max_depth: 0 });
    }
    let half_tol = 0.5 * tol;
    refine(f, a, m, fa, flm, fm, left, half_tol, depth_left - 1, acc)?;
    refine(f, m, b, fm, frm, fb, right, half_tol, depth_left - 1, acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;
    const DEPTH: u32 = 40;

    #[test]
    fn cubic_is_exact_for_single_panel() {
        // Simpson integrates cubics exactly, so the first panel is accepted.
        let q = integrate(|x| x * x * x, 0.0, 2.0, TOL, DEPTH).unwrap();
        assert!((q.value - 4.0).abs() < 1e-12, "got {}", q.value);
    }

    #[test]
    fn exponential_meets_tolerance() {
        let q = integrate(f64::exp, 0.0, 2.0, TOL, DEPTH).unwrap();
        let truth = 2.0f64.exp() - 1.0;
        assert!(
            (q.value - truth).abs() <= q.error_estimate.max(1e-12),
            "value {} truth {} estimate {}",
            q.value,
            truth,
            q.error_estimate
        );
    }

    #[test]
    fn empty_interval_is_zero() {
        let q = integrate(f64::exp, 1.5, 1.5, TOL, DEPTH).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.error_estimate, 0.0);
    }

    #[test]
    fn halving_tolerance_moves_less_than_estimate() {
        // The reported estimate must dominate the actual refinement step.
        let f = |x: f64| (3.0 * x).sin().exp();
        let coarse = integrate(f, 0.0, 2.0, 1e-6, DEPTH).unwrap();
        let fine = integrate(f, 0.0, 2.0, 5e-7, DEPTH).unwrap();
        assert!(
            (coarse.value - fine.value).abs() <= coarse.error_estimate.max(1e-15),
            "step {} vs estimate {}",
            (coarse.value - fine.value).abs(),
            coarse.error_estimate
        );
    }

    #[test]
    fn depth_cap_reports_nonconvergence() {
        // An integrable singularity cannot be resolved in two levels.
        let err = integrate(
            |x: f64| x.abs().sqrt().recip().min(1e12),
            0.0,
            1.0,
            1e-12,
            2,
        )
        .unwrap_err();
        assert_eq!(err.max_depth, 2, "error carries the configured cap: {err}");
    }
}
