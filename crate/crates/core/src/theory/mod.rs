//! Analytic limits of the cascade: binomial kernels, the fluid-limit
//! functionals, the stopping point, and the normal-fluctuation variance.
//!
//! Everything is parameterized by the degree/threshold distribution and the
//! time change `z = exp(-t)`: a ball is still white at time `t` with
//! probability `exp(-t)`, so an inactive bin of degree `d` keeps a
//! `Binomial(d, exp(-t))`-distributed white count. The stopping point is
//! the largest root of `phi(z) = lambda z^2 - h_B(z)` in `[0, 1]`, the
//! activated fraction follows from binomial tails, and the fluctuation
//! variance comes from the martingale integrals of [`delta`], with an
//! independent closed-form cross-check carried in the diagnostics.

pub mod quad;

use quad::{NonConvergence, Quadrature};
use thiserror::Error;

use crate::dist::{DegreeThresholdDistribution, EmpiricalCounts};

/// Errors from the analytic layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    /// A survival probability fell outside `[0, 1]`.
    #[error("z = {z} is outside [0, 1]")]
    ZOutOfRange {
        /// The offending value.
        z: f64,
    },
    /// A time was negative (or NaN).
    #[error("t = {t} is not a nonnegative time")]
    BadTime {
        /// The offending value.
        t: f64,
    },
    /// An exponentially scaled tail grew past the floating-point range.
    #[error("overflow computing {what} at t = {t}")]
    Overflow {
        /// Which quantity overflowed.
        what: &'static str,
        /// Evaluation time.
        t: f64,
    },
    /// Adaptive quadrature hit its depth cap before reaching tolerance.
    #[error(transparent)]
    Quadrature(#[from] NonConvergence),
}

/// Tolerances and limits for root finding and quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance for each adaptive integral.
    pub abs_tol: f64,
    /// Maximum bisection depth per integral.
    pub max_depth: u32,
    /// Root tolerance: bracket width for bisection, and the `|phi|` cutoff
    /// that accepts a grid point as a root.
    pub root_tol: f64,
    /// Grid step of the downward scan for the stopping root.
    pub scan_step: f64,
    /// Evaluation horizon standing in for `t* = infinity` when the root is
    /// at zero (the cascade then never stalls in the limit).
    pub t_horizon: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-9,
            max_depth: 40,
            root_tol: 1e-12,
            scan_step: 1e-4,
            t_horizon: 20.0,
        }
    }
}

/// Side observations from [`solve`], kept out of the headline numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Final bracket around the stopping root (collapsed to a point for a
    /// grid hit or an endpoint root).
    pub root_bracket: (f64, f64),
    /// True when the root only touches zero without a sign change. The
    /// normal-limit claims are unsupported in that regime and consumers
    /// should treat the variance as indicative only.
    pub tangency: bool,
    /// Accumulated quadrature error estimate behind `sigma2_star`.
    pub sigma2_quad_error: f64,
    /// Independent closed-form evaluation of the variance (sum of per-class
    /// binomial indicator variances); should match `sigma2_star` to within
    /// the quadrature error.
    pub sigma2_closed_form: f64,
    /// Value of the variant activation-fraction formula
    /// `1 - sum p * beta(d, 1 - exp(-t), theta)`, which parameterizes the
    /// tail by threshold rank instead of white-ball survival. It disagrees
    /// with the simulated process (already at t = 0), and is recorded so
    /// consumers can see it was considered and rejected.
    pub a_hat_variant: f64,
}

/// The analytic solution at the stopping point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryResult {
    /// Mean degree.
    pub lambda: f64,
    /// Largest root of `phi` in `[0, 1]`.
    pub z_hat: f64,
    /// Stopping time `-ln z_hat`; `+inf` when `z_hat = 0`.
    pub t_star: f64,
    /// Limit activated fraction at `t_star` (at the configured horizon when
    /// `t_star` is infinite).
    pub a_hat_star: f64,
    /// Fluctuation variance of the activated count at the same time.
    pub sigma2_star: f64,
    /// Cross-checks and caveats.
    pub diagnostics: Diagnostics,
}

fn check_z(z: f64) -> Result<(), TheoryError> {
    if (0.0..=1.0).contains(&z) {
        Ok(())
    } else {
        Err(TheoryError::ZOutOfRange { z })
    }
}

fn check_t(t: f64) -> Result<(), TheoryError> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(TheoryError::BadTime { t })
    }
}

/// Binomial coefficient as a float, exact while the intermediate products
/// stay in the integer-exact range (comfortably so for the degree sizes the
/// distributions carry); `infinity` signals an overflow to callers.
fn comb(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 1..=k {
        acc = acc * f64::from(n - k + i) / f64::from(i);
    }
    acc
}

/// `b(d, z, l)` without the domain check, for hot loops.
fn pmf_unchecked(d: u32, z: f64, l: u32) -> f64 {
    if l > d {
        return 0.0;
    }
    if z == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if z == 1.0 {
        return if l == d { 1.0 } else { 0.0 };
    }
    comb(d, l) * z.powi(l as i32) * (1.0 - z).powi((d - l) as i32)
}

/// `beta(d, z, l)` without the domain check: 1 for `l <= 0`, 0 for `l > d`,
/// otherwise the sum accumulated from the smaller tail so no near-equal
/// quantities are subtracted.
fn tail_unchecked(d: u32, z: f64, l: i64) -> f64 {
    if l <= 0 {
        return 1.0;
    }
    if l > i64::from(d) {
        return 0.0;
    }
    let l = l as u32;
    if z == 0.0 {
        return 0.0;
    }
    if z == 1.0 {
        return 1.0;
    }
    if f64::from(l) <= f64::from(d) * z {
        // The lower tail is the minority mass: sum it and complement.
        let mut acc = 0.0;
        for r in 0..l {
            acc += pmf_unchecked(d, z, r);
        }
        1.0 - acc
    } else {
        // The upper tail is the minority mass: sum it directly, smallest
        // terms first.
        let mut acc = 0.0;
        for r in (l..=d).rev() {
            acc += pmf_unchecked(d, z, r);
        }
        acc
    }
}

/// Binomial point mass `b(d, z, l) = C(d, l) z^l (1-z)^(d-l)`; zero outside
/// `0 <= l <= d`.
pub fn binom_pmf(d: u32, z: f64, l: i64) -> Result<f64, TheoryError> {
    check_z(z)?;
    if l < 0 || l > i64::from(d) {
        return Ok(0.0);
    }
    Ok(pmf_unchecked(d, z, l as u32))
}

/// Upper binomial tail `beta(d, z, l) = P(Binomial(d, z) >= l)`: 1 for
/// `l <= 0`, 0 for `l > d`, accumulated from the smaller tail for
/// stability.
pub fn binom_tail(d: u32, z: f64, l: i64) -> Result<f64, TheoryError> {
    check_z(z)?;
    Ok(tail_unchecked(d, z, l))
}

/// Expected white-ball mass per node held in inactive bins when each ball
/// survives with probability `z`:
/// `h_B(z) = sum_(d,theta>=1) p(d,theta) sum_(l=max(d-theta,0))^d l b(d,z,l)`.
///
/// The trajectory law of large numbers says `H_B(t)/n` tracks
/// `h_B(exp(-t))`. Monotone nondecreasing in `z`, `h_B(0) = 0`, and
/// `h_B(1) = lambda - sum_d d p(d, 0)`.
pub fn h_b(dist: &DegreeThresholdDistribution, z: f64) -> Result<f64, TheoryError> {
    check_z(z)?;
    let mut acc = 0.0;
    for atom in dist.atoms() {
        if atom.theta == 0 {
            continue;
        }
        // A bin stays inactive exactly while at least d - theta balls are
        // white, so only those occupancies hold inactive-bin mass. The
        // l = 0 term would contribute nothing anyway.
        let lo = atom.d.saturating_sub(atom.theta).max(1);
        for l in lo..=atom.d {
            acc += atom.p * f64::from(l) * pmf_unchecked(atom.d, z, l);
        }
    }
    Ok(acc)
}

/// The stopping functional `phi(z) = lambda z^2 - h_B(z)`.
///
/// `phi(z) = 0` balances the white-ball death flow against the inactive
/// mass; its largest root in `[0, 1]` is where the exploration stalls.
pub fn phi(dist: &DegreeThresholdDistribution, z: f64) -> Result<f64, TheoryError> {
    check_z(z)?;
    let lambda = dist
        .mean_degree()
        .expect("validated distributions have positive mean degree");
    Ok(lambda * z * z - h_b(dist, z)?)
}

struct RootScan {
    z_hat: f64,
    tangency: bool,
    bracket: (f64, f64),
}

fn bisect(
    f: &impl Fn(f64) -> Result<f64, TheoryError>,
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, (f64, f64)), TheoryError> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok((mid, (mid, mid)));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), (lo, hi)))
}

fn find_zhat_detail(
    dist: &DegreeThresholdDistribution,
    cfg: &QuadratureConfig,
) -> Result<RootScan, TheoryError> {
    let phi_at = |z: f64| phi(dist, z);
    let tol = cfg.root_tol;

    let f_one = phi_at(1.0)?;
    if f_one.abs() < tol {
        // z = 1 means no seed reaches anyone; the supremum is the boundary.
        return Ok(RootScan {
            z_hat: 1.0,
            tangency: false,
            bracket: (1.0, 1.0),
        });
    }

    let mut hi = 1.0;
    let mut f_hi = f_one;
    let mut k = 1u64;
    loop {
        let z = 1.0 - k as f64 * cfg.scan_step;
        if z <= 0.0 {
            // phi(0) = 0 exactly: the always-available fallback root.
            return Ok(RootScan {
                z_hat: 0.0,
                tangency: false,
                bracket: (0.0, 0.0),
            });
        }
        let f = phi_at(z)?;
        if f.abs() < tol {
            // The grid sits on a root. When both neighbors share a sign the
            // curve only touches zero here: the crossing-free case the
            // normal-limit assumptions exclude.
            let below = (z - cfg.scan_step).max(0.0);
            let f_below = phi_at(below)?;
            let tangency = f_below.abs() >= tol && f_below.signum() == f_hi.signum();
            return Ok(RootScan {
                z_hat: z,
                tangency,
                bracket: (below, hi),
            });
        }
        if f.signum() != f_hi.signum() {
            let (root, bracket) = bisect(&phi_at, z, f, hi, tol)?;
            return Ok(RootScan {
                z_hat: root,
                tangency: false,
                bracket,
            });
        }
        hi = z;
        f_hi = f;
        k += 1;
    }
}

/// Largest root of [`phi`] in `[0, 1]` and a tangency flag.
///
/// Scans downward from `z = 1` in steps of `cfg.scan_step`, accepting a
/// grid point with `|phi| < cfg.root_tol` or bisecting a sign change down
/// to a bracket of width `cfg.root_tol`. The flag is raised when the root
/// is a touch without a sign change, where the fluctuation theory stops
/// applying; roots that only touch zero strictly between grid points are
/// beyond the scan's resolution. `z = 0` is always a root, so the scan
/// cannot fail.
pub fn find_zhat(
    dist: &DegreeThresholdDistribution,
    cfg: &QuadratureConfig,
) -> Result<(f64, bool), TheoryError> {
    find_zhat_detail(dist, cfg).map(|scan| (scan.z_hat, scan.tangency))
}

/// Limit activated fraction at time `t`:
/// `a_hat(t) = 1 - sum_(d,theta>=1) p(d,theta) beta(d, exp(-t), d-theta)`.
///
/// A threshold-`theta` bin is still inactive at `t` exactly when at least
/// `d - theta` of its balls are white, which happens with probability
/// `beta(d, exp(-t), d - theta)`; seeds are active from the start. At
/// `t = 0` this reduces to the seed fraction.
pub fn a_hat(dist: &DegreeThresholdDistribution, t: f64) -> Result<f64, TheoryError> {
    check_t(t)?;
    let z = (-t).exp();
    let mut inactive = 0.0;
    for atom in dist.atoms() {
        if atom.theta == 0 {
            continue;
        }
        inactive += atom.p * tail_unchecked(atom.d, z, i64::from(atom.d) - i64::from(atom.theta));
    }
    Ok(1.0 - inactive)
}

/// [`a_hat`] with the limit class weights replaced by realized counts
/// `u_n(d, theta) / n`, the centering the per-run fluctuation statistic
/// needs. An empty count table yields 0.
pub fn a_hat_empirical(counts: &EmpiricalCounts, t: f64) -> Result<f64, TheoryError> {
    check_t(t)?;
    let n = counts.n();
    if n == 0 {
        return Ok(0.0);
    }
    let z = (-t).exp();
    let scale = 1.0 / n as f64;
    let mut inactive = 0.0;
    let mut total_weight = 0.0;
    for (&(d, theta), &count) in counts.table() {
        let weight = count as f64 * scale;
        total_weight += weight;
        if theta == 0 {
            continue;
        }
        inactive += weight * tail_unchecked(d, z, i64::from(d) - i64::from(theta));
    }
    Ok(total_weight - inactive)
}

/// `exp(2 l t) * beta(d, exp(-t), l)` accumulated termwise so the huge
/// exponential and the tiny tail never meet as separate factors. Returns
/// `infinity` past the floating-point range.
fn exp_scaled_tail_raw(d: u32, l: u32, t: f64) -> f64 {
    // 1 - exp(-t), computed without cancellation for small t.
    let q = -f64::exp_m1(-t);
    let mut acc = 0.0;
    for r in l..=d {
        let expo = (2.0 * f64::from(l) - f64::from(r)) * t;
        acc += comb(d, r) * expo.exp() * q.powi((d - r) as i32);
    }
    acc
}

fn exp_scaled_tail(d: u32, l: u32, t: f64) -> Result<f64, TheoryError> {
    let value = exp_scaled_tail_raw(d, l, t);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(TheoryError::Overflow {
            what: "exponentially scaled binomial tail",
            t,
        })
    }
}

/// Core of [`delta`] for a known class mass: value and quadrature error.
/// Valid for `1 <= l <= d`, `t >= 0`.
fn delta_terms(
    p: f64,
    d: u32,
    l: u32,
    t: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<(f64, f64), TheoryError> {
    let boundary = exp_scaled_tail(d, l, t)?;
    let integral = quad::integrate(|s| exp_scaled_tail_raw(d, l, s), 0.0, t, abs_tol, max_depth)?;
    let two_l = 2.0 * f64::from(l);
    Ok((
        p * (1.0 - boundary + two_l * integral.value),
        p * two_l * integral.error_estimate,
    ))
}

/// Per-class martingale variance kernel:
/// `Delta(d,theta,l,t) = p(d,theta) (1 - e^(2lt) beta(d, e^(-t), l)
///   + 2l int_0^t e^(2ls) beta(d, e^(-s), l) ds)`.
///
/// Identically zero for `l > d` (the tail-count process for those
/// occupancies is identically zero, so its compensated martingale carries
/// no variance), for `l = 0`, at `t = 0`, and for a class the distribution
/// does not carry.
pub fn delta(
    dist: &DegreeThresholdDistribution,
    d: u32,
    theta: u32,
    l: u32,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, TheoryError> {
    check_t(t)?;
    if l == 0 || l > d || t == 0.0 {
        return Ok(0.0);
    }
    let p = dist
        .atoms()
        .iter()
        .find(|a| a.d == d && a.theta == theta)
        .map_or(0.0, |a| a.p);
    if p == 0.0 {
        return Ok(0.0);
    }
    delta_terms(p, d, l, t, cfg.abs_tol, cfg.max_depth).map(|(value, _)| value)
}

/// Fluctuation variance of the activated fraction at time `t`, from the
/// martingale integrals: per class with `l0 = d - theta >= 1`,
///
/// `e^(-2 l0 t) [ Delta_(l0)(t) + l0^2 sum_(l=l0+1)^d C(l-1, l0)^2
///   (2/(l-l0)) int_0^t (e^(-s) - e^(-t))^(2(l-l0)-1) e^(-s)
///   Delta_l(s) ds ]`,
///
/// summed over classes. Classes with `theta >= d` never flip, so their
/// indicator carries no variance and they contribute nothing (for
/// `l0 = 0` the weighted sum has prefactor zero and the leading term
/// vanishes identically). The returned error estimate folds the outer
/// quadrature errors with the budget allotted to the nested inner
/// integrals.
pub fn sigma2_a(
    dist: &DegreeThresholdDistribution,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<Quadrature, TheoryError> {
    check_t(t)?;
    if t == 0.0 {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let e_t = (-t).exp();
    let inner_tol = cfg.abs_tol * 1e-2;
    let mut value = 0.0;
    let mut error = 0.0;
    for atom in dist.atoms() {
        if atom.theta == 0 || atom.theta >= atom.d {
            continue;
        }
        let l0 = atom.d - atom.theta;
        let damp = (-2.0 * f64::from(l0) * t).exp();
        let (lead, lead_err) = delta_terms(atom.p, atom.d, l0, t, inner_tol, cfg.max_depth)?;
        value += damp * lead;
        error += damp * lead_err;
        for l in (l0 + 1)..=atom.d {
            let c = comb(l - 1, l0);
            let weight = damp * f64::from(l0).powi(2) * c * c * 2.0 / f64::from(l - l0);
            let kernel_pow = (2 * (l - l0) - 1) as i32;
            let integrand =
                |s: f64| match delta_terms(atom.p, atom.d, l, s, inner_tol, cfg.max_depth) {
                    Ok((d_val, _)) => ((-s).exp() - e_t).powi(kernel_pow) * (-s).exp() * d_val,
                    Err(_) => f64::INFINITY,
                };
            let outer = quad::integrate(
                integrand,
                0.0,
                t,
                cfg.abs_tol / (1.0 + weight),
                cfg.max_depth,
            )?;
            value += weight * outer.value;
            error += weight * (outer.error_estimate + t * inner_tol);
        }
    }
    Ok(Quadrature {
        value,
        error_estimate: error,
    })
}

/// Closed-form route to the same variance: each class contributes the
/// binomial indicator variance `p beta (1 - beta)` at
/// `beta = beta(d, exp(-t), d - theta)`. Used as the independent
/// cross-check on [`sigma2_a`] (classes with `theta >= d` contribute zero
/// automatically since their tail is 1).
pub fn sigma2_closed_form(dist: &DegreeThresholdDistribution, t: f64) -> Result<f64, TheoryError> {
    check_t(t)?;
    let z = (-t).exp();
    let mut acc = 0.0;
    for atom in dist.atoms() {
        if atom.theta == 0 {
            continue;
        }
        let beta = tail_unchecked(atom.d, z, i64::from(atom.d) - i64::from(atom.theta));
        acc += atom.p * beta * (1.0 - beta);
    }
    Ok(acc)
}

fn a_hat_variant(dist: &DegreeThresholdDistribution, t: f64) -> Result<f64, TheoryError> {
    check_t(t)?;
    let q = -f64::exp_m1(-t);
    let mut inactive = 0.0;
    for atom in dist.atoms() {
        if atom.theta == 0 {
            continue;
        }
        inactive += atom.p * tail_unchecked(atom.d, q, i64::from(atom.theta));
    }
    Ok(1.0 - inactive)
}

/// Assembles the full analytic solution: mean degree, stopping root and
/// time, activated fraction, and fluctuation variance, with diagnostics.
///
/// When the root is `z_hat = 0` the stopping time is `+inf` and the
/// fraction/variance are evaluated at `cfg.t_horizon` instead, a documented
/// stand-in. When the tangency flag is set the variance is still reported
/// but the normal-limit interpretation is unsupported.
pub fn solve(
    dist: &DegreeThresholdDistribution,
    cfg: &QuadratureConfig,
) -> Result<TheoryResult, TheoryError> {
    let lambda = dist
        .mean_degree()
        .expect("validated distributions have positive mean degree");
    let scan = find_zhat_detail(dist, cfg)?;
    let t_star = if scan.z_hat > 0.0 {
        (-scan.z_hat.ln()).max(0.0)
    } else {
        f64::INFINITY
    };
    let t_eval = if t_star.is_finite() {
        t_star
    } else {
        cfg.t_horizon
    };
    let a_hat_star = a_hat(dist, t_eval)?;
    let sigma2 = sigma2_a(dist, t_eval, cfg)?;
    Ok(TheoryResult {
        lambda,
        z_hat: scan.z_hat,
        t_star,
        a_hat_star,
        sigma2_star: sigma2.value,
        diagnostics: Diagnostics {
            root_bracket: scan.bracket,
            tangency: scan.tangency,
            sigma2_quad_error: sigma2.error_estimate,
            sigma2_closed_form: sigma2_closed_form(dist, t_eval)?,
            a_hat_variant: a_hat_variant(dist, t_eval)?,
        },
    })
}
