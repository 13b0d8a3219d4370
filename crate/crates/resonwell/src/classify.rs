//! Real-axis root census, imaginary-axis checks, quadrant counts, and
//! asymptotic diagnostics for the resonances of a scalar square well.
//!
//! For real coupling `alpha` every real resonance is a root of an explicit
//! transcendental equation, so this module locates them by bracketed
//! bisection instead of contour search. With `s = ell*sqrt(alpha)`:
//!
//! * positive roots solve `tan g = sqrt(s^2 - g^2)/g` on `g in (0, s)`,
//!   one per branch of the tangent, with `lambda = sqrt(s^2 - g^2)/ell`;
//! * negative roots in `(-sqrt(alpha), 0)` solve the reciprocal equation
//!   `tan g = g/sqrt(s^2 - g^2)`, mirrored to `lambda < 0`;
//! * a root below `-sqrt(alpha)` exists only for `s < 1` and solves
//!   `s*sinh t = t` with `lambda = -sqrt(alpha)*cosh t`.
//!
//! For `alpha < 0` all resonances are real and solve `gt*cosh t = t` with
//! `gt = ell*sqrt(-alpha)` and `lambda = -sqrt(-alpha)*sinh t`. The count
//! (two, one, or zero) flips at the critical coupling [`gamma_star`].

use crate::error::{Error, Result};
use crate::matfun::{principal_sqrt, C64, EigenvalueData, SquareWell};
use crate::scalar_res::{alpha_resonances, Resonance, ResonanceTag, SearchRegion};
use std::f64::consts::{FRAC_PI_2, PI};

/// Bisection width for the real-root solvers, relative to `1 + |x|`.
const ROOT_TOL: f64 = 1e-13;
/// Detection width for boundary couplings (`s` on the half-pi grid,
/// `alpha*ell^2 = 1`).
const BOUNDARY_TOL: f64 = 1e-10;

/// Real resonances of a scalar well with real coupling, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RealResonanceReport {
    pub alpha: C64,
    /// Roots in `(0, sqrt(alpha))`; empty when `alpha < 0`.
    pub positive_roots: Vec<f64>,
    /// Roots on the negative axis, both inside and below `-sqrt(alpha)`.
    pub negative_roots: Vec<f64>,
    /// Boundary-coupling markers. `SpecialZero` flags `s` on the half-pi
    /// grid (the origin joins the resonance set); `SpecialNegInvEll` flags
    /// the couplings whose root sits exactly at `-1/ell`.
    pub special: Vec<ResonanceTag>,
}

/// Decay diagnostic for a family of left-half-plane resonances.
///
/// For each retained resonance the ratio `|Im lambda| * exp(ell*Re lambda)`
/// is recorded; along the resonance strings these approach
/// `|sqrt(alpha)|/2`. Entries are sorted by decreasing `-Re lambda`, so the
/// first ratio is the most converged one.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticDiagnostic {
    /// Retained resonances, deepest (most negative real part) first.
    pub lambdas: Vec<C64>,
    /// `|Im lambda| * exp(ell * Re lambda)` per retained resonance.
    pub ratios: Vec<f64>,
    /// Limit value `|sqrt(alpha)|/2`.
    pub target: f64,
}

impl AsymptoticDiagnostic {
    /// Least-squares slope of `ratio` against `1/|Re lambda|`.
    ///
    /// A finite, moderate slope with ratios near [`Self::target`] indicates
    /// the expected first-order approach; the sign of the slope is not
    /// constrained.
    pub fn trend_slope(&self) -> f64 {
        let n = self.ratios.len() as f64;
        let xs: Vec<f64> = self.lambdas.iter().map(|l| 1.0 / l.re.abs()).collect();
        let xbar = xs.iter().sum::<f64>() / n;
        let ybar = self.ratios.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in xs.iter().zip(&self.ratios) {
            num += (x - xbar) * (y - ybar);
            den += (x - xbar) * (x - xbar);
        }
        num / den
    }
}

/// Bisect `f` on `[a, b]`, assuming `f(a)` and `f(b)` have opposite signs.
fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol * (1.0 + mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fa < 0.0) != (fm < 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Bisect on `(a, b)` after insetting the endpoints, retrying with smaller
/// insets when the sign change hides close to an end. Returns `None` when no
/// sign change is found at any inset.
fn bracket_root(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let len = b - a;
    if !(len > 0.0) {
        return None;
    }
    for inset in [1e-6, 1e-9, 1e-12] {
        let (x0, x1) = (a + inset * len, b - inset * len);
        let (f0, f1) = (f(x0), f(x1));
        if !f0.is_finite() || !f1.is_finite() {
            continue;
        }
        if f0 == 0.0 {
            return Some(x0);
        }
        if f1 == 0.0 {
            return Some(x1);
        }
        if (f0 < 0.0) != (f1 < 0.0) {
            return Some(bisect(f, x0, x1, ROOT_TOL));
        }
    }
    None
}

/// The critical coupling separating two, one, and zero resonances of a
/// negative scalar well: the root in `(0, 1)` of
/// `sqrt(g^2+1) - ln(1 + sqrt(g^2+1)) + ln g`.
///
/// `gt = ell*sqrt(-alpha) < gamma_star()` gives two resonances,
/// equality one (at `-1/ell`), and `gt > gamma_star()` none.
pub fn gamma_star() -> f64 {
    let phi = |g: f64| {
        let r = g.hypot(1.0);
        r - (1.0 + r).ln() + g.ln()
    };
    bisect(&phi, 1e-12, 1.0, 1e-14)
}

/// All real resonances of the scalar well `(alpha, ell)` with real
/// `alpha != 0`, found by bracketed bisection on the branch equations.
///
/// Boundary couplings are detected to within `1e-10` and reported through
/// `special`; the bracket census still runs for them (the sign analysis
/// stays well posed there, and for `alpha = 1/ell^2` the root `-1/ell` is
/// included among `negative_roots`).
pub fn real_resonances(alpha: f64, ell: f64) -> Result<RealResonanceReport> {
    if !alpha.is_finite() || alpha == 0.0 {
        return Err(Error::Validation(format!(
            "coupling must be finite and nonzero, got {alpha}"
        )));
    }
    if !ell.is_finite() || ell <= 0.0 {
        return Err(Error::Validation(format!(
            "half-width must be finite and positive, got {ell}"
        )));
    }

    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut special = Vec::new();

    if alpha > 0.0 {
        let s = ell * alpha.sqrt();

        // Boundary detection: s on the half-pi grid puts the origin in the
        // resonance set; s = 1 puts a root exactly at -1/ell.
        let k = (s / FRAC_PI_2).round();
        if k >= 1.0 && (s - k * FRAC_PI_2).abs() <= BOUNDARY_TOL * (1.0 + s) {
            special.push(ResonanceTag::SpecialZero);
        }
        let degenerate = (alpha * ell * ell - 1.0).abs() <= BOUNDARY_TOL;
        if degenerate {
            special.push(ResonanceTag::SpecialNegInvEll);
            negative.push(-1.0 / ell);
        }

        // lambda = sqrt(s^2 - g^2)/ell stays accurate near g = s in the
        // factored form.
        let lambda_of = |g: f64| ((s - g) * (s + g)).max(0.0).sqrt() / ell;

        // Positive roots: one per tangent branch meeting the quarter circle.
        // tan g - sqrt(s^2-g^2)/g runs from -inf to +inf on each bracket.
        let h = |g: f64| g.tan() - ((s - g) * (s + g)).max(0.0).sqrt() / g;
        let mut j = 0.0;
        while j * PI < s {
            let lo = j * PI;
            let hi = (j * PI + FRAC_PI_2).min(s);
            if let Some(g) = bracket_root(&h, lo, hi) {
                positive.push(lambda_of(g));
            }
            j += 1.0;
        }

        // Negative roots inside (-sqrt(alpha), 0): scan the reciprocal
        // equation between consecutive tangent poles. Unlike the positive
        // branch the sign change is not guaranteed per piece, so each piece
        // gets a dense sweep with geometric refinement toward its ends.
        let gg = |g: f64| g / ((s - g) * (s + g)).max(f64::MIN_POSITIVE).sqrt() - g.tan();
        let mut bounds = vec![0.0];
        let mut jp = 0.0;
        loop {
            let pole = jp * PI + FRAC_PI_2;
            if pole >= s {
                break;
            }
            bounds.push(pole);
            jp += 1.0;
        }
        bounds.push(s);
        for pair in bounds.windows(2) {
            for g in scan_roots(&gg, pair[0], pair[1]) {
                let lam = -lambda_of(g);
                // g -> s collapses to lambda = 0, which is the origin
                // marker, not a negative root.
                if lam < -1e-12 * (1.0 + s) {
                    negative.push(lam);
                }
            }
        }

        // Root below -sqrt(alpha): s*sinh t = t has a positive solution
        // exactly when s < 1 (skipped at the degenerate coupling, where the
        // root has merged into -1/ell).
        if s < 1.0 && !degenerate {
            let f = |t: f64| s * t.sinh() - t;
            // f < 0 on (0, t_minus] with cosh(t_minus) = 1/s; grow until
            // the sign flips back.
            let t_minus = (1.0 / s + (1.0 / (s * s) - 1.0).sqrt()).ln();
            let mut hi = 2.0 * t_minus.max(1.0);
            while f(hi) <= 0.0 {
                hi *= 2.0;
            }
            let t = bisect(&f, t_minus, hi, ROOT_TOL);
            negative.push(-alpha.sqrt() * t.cosh());
        }
    } else {
        let gt = ell * (-alpha).sqrt();
        // Minimum of gt*cosh t - t over t > 0, evaluated in closed form;
        // its sign decides the census and its root is gamma_star.
        let r = gt.hypot(1.0);
        let f_min = r - (1.0 + r).ln() + gt.ln();
        let f = |t: f64| gt * t.cosh() - t;
        let t_min = (1.0 / gt).asinh();
        if f_min.abs() <= BOUNDARY_TOL {
            special.push(ResonanceTag::SpecialNegInvEll);
            negative.push(-1.0 / ell);
        } else if f_min < 0.0 {
            let t1 = bisect(&f, 1e-300, t_min, ROOT_TOL);
            let mut hi = 2.0 * t_min.max(1.0);
            while f(hi) <= 0.0 {
                hi *= 2.0;
            }
            let t2 = bisect(&f, t_min, hi, ROOT_TOL);
            negative.push(-(-alpha).sqrt() * t1.sinh());
            negative.push(-(-alpha).sqrt() * t2.sinh());
        }
    }

    positive.sort_by(|a, b| a.total_cmp(b));
    negative.sort_by(|a, b| a.total_cmp(b));
    negative.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * (1.0 + a.abs()));
    special.sort();
    special.dedup();

    Ok(RealResonanceReport {
        alpha: C64::new(alpha, 0.0),
        positive_roots: positive,
        negative_roots: negative,
        special,
    })
}

/// Sign-change sweep on `(a, b)`: uniform samples plus geometric refinement
/// toward both endpoints, then bisection on each change.
fn scan_roots(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Vec<f64> {
    let len = b - a;
    if !(len > 0.0) {
        return Vec::new();
    }
    let mut xs: Vec<f64> = (1..600).map(|i| a + len * (i as f64) / 600.0).collect();
    for i in 2..45 {
        let d = len * 0.5f64.powi(i);
        xs.push(a + d);
        xs.push(b - d);
    }
    xs.sort_by(|u, v| u.total_cmp(v));
    xs.dedup();

    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for x in xs {
        let v = f(x);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if v == 0.0 {
            roots.push(x);
            prev = None;
            continue;
        }
        if let Some((px, pv)) = prev {
            if (pv < 0.0) != (v < 0.0) {
                roots.push(bisect(f, px, x, ROOT_TOL));
            }
        }
        prev = Some((x, v));
    }
    roots.dedup_by(|u, v| (*u - *v).abs() <= 1e-10 * (1.0 + v.abs()));
    roots
}

/// Whether the well `(alpha, ell)` has no resonance on the punctured
/// imaginary axis inside `region`. Real couplings only; a complex `alpha`
/// is a domain error because the symmetry argument behind the check needs a
/// real well.
pub fn imaginary_axis_check(alpha: C64, ell: f64, region: &SearchRegion) -> Result<bool> {
    if alpha.im.abs() > 1e-12 * (1.0 + alpha.norm()) {
        return Err(Error::Domain(format!(
            "imaginary-axis classification requires a real coupling, got {alpha}"
        )));
    }
    let well = SquareWell::scalar(alpha, ell)?;
    let data = EigenvalueData::new(alpha, 1, ell);
    let found = alpha_resonances(&data, &well, region)?;
    Ok(!found.iter().any(|r| {
        let lam = r.lambda;
        lam.re.abs() <= 1e-8 * (1.0 + lam.norm()) && lam.norm() > 1e-8
    }))
}

/// Resonance counts per open quadrant, `[Q1, Q2, Q3, Q4]`. Points within
/// `1e-8 * (1 + |lambda|)` of an axis belong to neither quadrant.
pub fn quadrant_census(resonances: &[Resonance]) -> [usize; 4] {
    let mut counts = [0usize; 4];
    for r in resonances {
        let lam = r.lambda;
        let tol = 1e-8 * (1.0 + lam.norm());
        if lam.re.abs() <= tol || lam.im.abs() <= tol {
            continue;
        }
        let idx = match (lam.re > 0.0, lam.im > 0.0) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        };
        counts[idx] += 1;
    }
    counts
}

/// Decay-rate diagnostic over the `take_n` deepest left-half-plane
/// resonances (off the real axis). Fails with a validation error when fewer
/// than `take_n` qualify.
pub fn asymptotic_ratio(
    resonances: &[Resonance],
    alpha: C64,
    ell: f64,
    take_n: usize,
) -> Result<AsymptoticDiagnostic> {
    if take_n == 0 {
        return Err(Error::Validation("take_n must be positive".into()));
    }
    let mut sel: Vec<C64> = resonances
        .iter()
        .map(|r| r.lambda)
        .filter(|l| l.re < 0.0 && l.im.abs() > 1e-12 * (1.0 + l.norm()))
        .collect();
    if sel.len() < take_n {
        return Err(Error::Validation(format!(
            "asymptotic diagnostic needs {take_n} left-half-plane resonances, found {}",
            sel.len()
        )));
    }
    sel.sort_by(|a, b| a.re.total_cmp(&b.re));
    sel.truncate(take_n);
    let ratios = sel.iter().map(|l| l.im.abs() * (ell * l.re).exp()).collect();
    Ok(AsymptoticDiagnostic {
        lambdas: sel,
        ratios,
        target: principal_sqrt(alpha).norm() / 2.0,
    })
}

/// Number of resonances above the logarithmic curve
/// `Re lambda = -eta - delta * ln(1 + |Im lambda|)`.
///
/// Requires `delta * ell < 1`: at that slope the curve starts swallowing
/// entire resonance strings and the count ceases to be finite-by-content, so
/// steeper requests are rejected rather than silently truncated by the
/// search region.
pub fn log_curve_count(
    resonances: &[Resonance],
    eta: f64,
    delta: f64,
    ell: f64,
) -> Result<usize> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::Validation(format!(
            "offset eta must be finite and positive, got {eta}"
        )));
    }
    if !delta.is_finite() || delta < 0.0 || delta * ell >= 1.0 {
        return Err(Error::Validation(format!(
            "slope delta must satisfy 0 <= delta*ell < 1, got delta = {delta}, ell = {ell}"
        )));
    }
    Ok(resonances
        .iter()
        .filter(|r| r.lambda.re > -eta - delta * (1.0 + r.lambda.im.abs()).ln())
        .count())
}
