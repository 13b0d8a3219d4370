//! Scalar resonance search through a hyperbolic change of variables.
//!
//! For one eigenvalue `alpha` of the coupling matrix the resonance condition
//! factors into four scalar exponential equations. Substituting
//! `lambda = sqrt(alpha) cosh z` turns all four into a single statement: the
//! entire function `f(z) = ell*sqrt(alpha)*sinh z + z` must take a value on
//! the lattice `i*(pi/2)*Z`. This module enumerates those `z` in a strip,
//! certifies completeness of each per-level search with winding numbers, maps
//! back to the lambda plane, and keeps only candidates that survive direct
//! verification against the determinant. The change of variables introduces
//! artifacts at `sinh z = 0` (`lambda = ±sqrt(alpha)`), which the
//! verification step removes.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::contour::{winding_number, ClosedPath};
use crate::error::{Error, Result};
use crate::jost;
use crate::matfun::{principal_sqrt, C64, EigenvalueData, SquareWell, ONE};

/// Residual target for polished roots of `f(z) - i*mu`. For very large `mu`
/// the attainable floor is a small multiple of `mu * eps`; the accept
/// threshold widens accordingly while the reported residual stays exact.
const NEWTON_TOL: f64 = 1e-12;
/// Relative clustering width for duplicate roots, in both planes.
const DEDUPE_TOL: f64 = 1e-8;
/// Four-equation residual acceptance, scaled by `1 + |lambda|`.
const FOUR_EQ_TOL: f64 = 1e-8;
/// Quadtree depth for repairing an uncertified rectangle search.
const SPLIT_DEPTH: usize = 5;

/// One root of `f(z) = i*mu` in the search strip.
#[derive(Debug, Clone, PartialEq)]
pub struct ZSolution {
    /// Real part of the root.
    pub t: f64,
    /// Imaginary part of the root.
    pub s: f64,
    /// Lattice value the phase function attains at the root.
    pub mu: f64,
    /// `|f(t + i s) - i*mu|` after polishing.
    pub residual: f64,
    /// Order of the root, certified by a small-circle winding number.
    pub order: usize,
}

/// Region of the lambda plane to search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchRegion {
    Disk { center: C64, radius: f64 },
    Rect { re: (f64, f64), im: (f64, f64) },
}

impl SearchRegion {
    pub fn validate(&self) -> Result<()> {
        match self {
            SearchRegion::Disk { center, radius } => {
                if !center.re.is_finite() || !center.im.is_finite() {
                    return Err(Error::Validation("region center must be finite".into()));
                }
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::Validation(format!(
                        "region radius must be positive, got {radius}"
                    )));
                }
            }
            SearchRegion::Rect { re, im } => {
                for (lo, hi, name) in [(re.0, re.1, "re"), (im.0, im.1, "im")] {
                    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                        return Err(Error::Validation(format!(
                            "region {name} range must be a finite interval, got [{lo}, {hi}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Closed membership, padded outward by `pad`.
    pub fn contains(&self, z: C64, pad: f64) -> bool {
        match self {
            SearchRegion::Disk { center, radius } => (z - center).norm() <= radius + pad,
            SearchRegion::Rect { re, im } => {
                z.re >= re.0 - pad && z.re <= re.1 + pad && z.im >= im.0 - pad && z.im <= im.1 + pad
            }
        }
    }

    /// Largest `|lambda|` over the region.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            SearchRegion::Disk { center, radius } => center.norm() + radius,
            SearchRegion::Rect { re, im } => {
                let x = re.0.abs().max(re.1.abs());
                let y = im.0.abs().max(im.1.abs());
                x.hypot(y)
            }
        }
    }

    pub fn boundary(&self) -> ClosedPath {
        match *self {
            SearchRegion::Disk { center, radius } => ClosedPath::Circle { center, radius },
            SearchRegion::Rect { re, im } => ClosedPath::Rect { re, im },
        }
    }
}

/// Classification labels attached to a located resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResonanceTag {
    Real,
    Imaginary,
    QuadrantI,
    QuadrantII,
    QuadrantIII,
    QuadrantIV,
    SpecialZero,
    SpecialNegInvEll,
}

impl std::fmt::Display for ResonanceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ResonanceTag::Real => "real",
            ResonanceTag::Imaginary => "imaginary",
            ResonanceTag::QuadrantI => "quadrant-i",
            ResonanceTag::QuadrantII => "quadrant-ii",
            ResonanceTag::QuadrantIII => "quadrant-iii",
            ResonanceTag::QuadrantIV => "quadrant-iv",
            ResonanceTag::SpecialZero => "special-zero",
            ResonanceTag::SpecialNegInvEll => "special-neg-inv-ell",
        };
        f.write_str(s)
    }
}

/// A verified resonance with its order as a zero of the determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonance {
    pub lambda: C64,
    pub multiplicity: usize,
    /// Indices into the well's eigenvalue list that generate this resonance.
    /// Empty in per-eigenvalue output; filled by matrix-level aggregation.
    pub generators: Vec<usize>,
    pub tags: Vec<ResonanceTag>,
}

/// Phase function of the hyperbolic substitution,
/// `f(z) = ell*sqrt(alpha)*sinh z + z` with the principal square root.
///
/// Odd, entire, and `f(z + 2*pi*i) = f(z) + 2*pi*i`. Requires `alpha != 0`.
pub fn f_alpha(z: C64, alpha: C64, ell: f64) -> C64 {
    principal_sqrt(alpha) * z.sinh() * ell + z
}

/// Smallest deviation among the four scalar resonance equations
/// `sqrt(±alpha) * e^(ell*b) = ±(b - lambda)` with `b = sqrt(lambda² - alpha)`.
///
/// Zero exactly at resonances of the scalar well. At the degenerate point
/// `lambda² = alpha` the four equations lose meaning (two hold identically)
/// and the residual is `|1 + lambda*ell|` instead, which vanishes exactly at
/// the genuine resonance `lambda = -1/ell`, `alpha = 1/ell²`.
pub fn four_eq_residual(lambda: C64, alpha: C64, ell: f64) -> f64 {
    let disc = lambda * lambda - alpha;
    if disc.norm() <= 1e-12 * (1.0 + lambda.norm_sqr() + alpha.norm()) {
        return (ONE + lambda * ell).norm();
    }
    let b = principal_sqrt(disc);
    let e = (b * ell).exp();
    let rhs = b - lambda;
    let sa = principal_sqrt(alpha);
    let sna = principal_sqrt(-alpha);
    [sa * e - rhs, sa * e + rhs, sna * e - rhs, sna * e + rhs]
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min)
}

/// Scalar determinant value `det W` for a one-dimensional well.
pub fn w_alpha(lambda: C64, alpha: C64, ell: f64) -> Result<C64> {
    let well = SquareWell::scalar(alpha, ell)?;
    Ok(jost::w_matrix(lambda, &well)?[(0, 0)])
}

/// Closed axis-aligned rectangle in the z plane.
#[derive(Debug, Clone, Copy)]
struct Zr {
    t0: f64,
    t1: f64,
    s0: f64,
    s1: f64,
}

impl Zr {
    fn path(&self) -> ClosedPath {
        ClosedPath::Rect {
            re: (self.t0, self.t1),
            im: (self.s0, self.s1),
        }
    }

    fn contains(&self, z: C64) -> bool {
        z.re >= self.t0 && z.re <= self.t1 && z.im >= self.s0 && z.im <= self.s1
    }

    fn span(&self) -> f64 {
        (self.t1 - self.t0).max(self.s1 - self.s0)
    }

    /// Outward inflation with slightly unequal sides so that a root sitting
    /// exactly on an edge or a symmetry line cannot track the new boundary.
    fn inflate(&self, d: f64) -> Zr {
        Zr {
            t0: self.t0 - d,
            t1: self.t1 + 1.13 * d,
            s0: self.s0 - 1.29 * d,
            s1: self.s1 + 1.41 * d,
        }
    }

    fn quadrants(&self) -> [Zr; 4] {
        // Midpoints are jittered off-center: roots love symmetry axes.
        let tm = 0.5 * (self.t0 + self.t1) + 3.7e-7 * (self.t1 - self.t0);
        let sm = 0.5 * (self.s0 + self.s1) + 2.3e-7 * (self.s1 - self.s0);
        [
            Zr { t0: self.t0, t1: tm, s0: self.s0, s1: sm },
            Zr { t0: tm, t1: self.t1, s0: self.s0, s1: sm },
            Zr { t0: self.t0, t1: tm, s0: sm, s1: self.s1 },
            Zr { t0: tm, t1: self.t1, s0: sm, s1: self.s1 },
        ]
    }
}

fn g_value(la: C64, mu: f64, z: C64) -> C64 {
    la * z.sinh() + z - C64::new(0.0, mu)
}

/// Damped Newton iteration on `u = g/g'`, which keeps quadratic convergence
/// at double roots (they occur wherever `f' = la*cosh z + 1 = 0`).
fn refine_root(la: C64, mu: f64, z0: C64, bound: f64) -> Option<C64> {
    let accept = NEWTON_TOL.max(4e-15 * (1.0 + mu.abs()));
    let mut z = z0;
    let mut gz = g_value(la, mu, z);
    for _ in 0..50 {
        if !gz.norm().is_finite() || z.norm() > bound {
            return None;
        }
        let dg = la * z.cosh() + ONE;
        if dg.norm() < 1e-290 {
            z += C64::new(1e-7, 1e-7);
            gz = g_value(la, mu, z);
            continue;
        }
        let u = gz / dg;
        let up = ONE - gz * (la * z.sinh()) / (dg * dg);
        let step = if up.norm() > 1e-8 { u / up } else { u };
        let mut improved = false;
        let mut scale = 1.0;
        for _ in 0..25 {
            let zn = z - step * scale;
            let gn = g_value(la, mu, zn);
            if gn.norm() < gz.norm() {
                let moved = (zn - z).norm();
                z = zn;
                gz = gn;
                improved = moved > 4e-16 * (1.0 + z.norm());
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (gz.norm() <= accept).then_some(z)
}

/// Newton starting points: a uniform grid, the lattice points of `sinh`,
/// and the curves where the real part of `g` vanishes. On those curves
/// `R(t) cos(s + phi(t)) = -t` with `R = |(p sinh t, q cosh t)|`, so sweeping
/// `t` and solving for `s` lands a seed on every branch of the zero set.
fn seed_points(la: C64, r: &Zr) -> Vec<C64> {
    let mut seeds = Vec::new();
    let nt = ((r.t1 - r.t0) / 0.5).ceil() as usize + 1;
    let ns = ((r.s1 - r.s0) / 0.5).ceil() as usize + 1;
    for i in 0..=nt {
        let t = r.t0 + (r.t1 - r.t0) * i as f64 / nt as f64;
        for j in 0..=ns {
            let s = r.s0 + (r.s1 - r.s0) * j as f64 / ns as f64;
            seeds.push(C64::new(t, s));
        }
    }
    let k0 = (r.s0 / PI).ceil() as i64;
    let k1 = (r.s1 / PI).floor() as i64;
    for k in k0..=k1 {
        let z = C64::new(0.0, k as f64 * PI);
        if r.contains(z) {
            seeds.push(z);
        }
    }
    let (p, q) = (la.re, la.im);
    let nb = ((r.t1 - r.t0) / 0.25).ceil() as usize + 1;
    for i in 0..=nb {
        let t = r.t0 + (r.t1 - r.t0) * i as f64 / nb as f64;
        let rr = (p * t.sinh()).hypot(q * t.cosh());
        if rr < 1e-300 || t.abs() > rr {
            continue;
        }
        let base = (t / rr).acos();
        let phi = (q * t.cosh()).atan2(p * t.sinh());
        for k in -3..=3i64 {
            let odd = (2 * k - 1) as f64 * PI;
            for s in [base - phi + odd, -base - phi + odd + 2.0 * PI] {
                if s >= r.s0 && s <= r.s1 {
                    seeds.push(C64::new(t, s));
                }
            }
        }
    }
    seeds
}

/// Cluster a root list and report each cluster's centroid.
///
/// An m-fold root (m = 3 at `z = i*pi` when `ell*sqrt(alpha) = 1`, m = 2 on
/// the exceptional coupling set) stalls Newton at a scatter radius of order
/// `(eps)^(1/m)`, far wider than the duplicate width. Two nearby points are
/// copies of one multiple root exactly when `g` at their midpoint sits at
/// the evaluation noise floor; a genuinely distinct pair keeps `|g(mid)|`
/// near `|g'| * d/2` instead.
fn dedupe_roots(la: C64, mu: f64, mut zs: Vec<C64>) -> Vec<C64> {
    zs.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let same = |a: C64, b: C64| {
        let d = (a - b).norm();
        let noise = 1e-13 * (1.0 + mu.abs() + la.norm() * a.re.cosh());
        d <= DEDUPE_TOL * (1.0 + a.norm())
            || (d <= 2e-3 && g_value(la, mu, (a + b) * 0.5).norm() <= 30.0 * noise)
    };
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for z in zs {
        match clusters.iter_mut().find(|c| same(centroid(c), z)) {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }
    clusters.iter().map(|c| centroid(c)).collect()
}

fn centroid(c: &[C64]) -> C64 {
    c.iter().sum::<C64>() / c.len() as f64
}

fn rect_roots(la: C64, mu: f64, r: &Zr) -> Vec<C64> {
    let bound = 2.0 * (r.t1 - r.t0 + r.s1 - r.s0) + 10.0;
    let found: Vec<C64> = seed_points(la, r)
        .into_iter()
        .filter_map(|z0| refine_root(la, mu, z0, bound))
        .filter(|z| r.contains(*z))
        .collect();
    dedupe_roots(la, mu, found)
}

/// Initial node count for the rectangle winding: the phase of `g` along the
/// boundary turns at most `|la| cosh(max|t|) + 1` per unit length.
fn winding_nodes(la: C64, r: &Zr) -> usize {
    let tmax = r.t0.abs().max(r.t1.abs());
    let perim = 2.0 * (r.t1 - r.t0 + r.s1 - r.s0);
    let var = perim * (la.norm() * tmax.cosh() + 1.0);
    (1.5 * var) as usize % 400_000 + 256
}

fn g_winding(la: C64, mu: f64, path: &ClosedPath, nodes: usize) -> Result<i64> {
    winding_number(|z| Ok(g_value(la, mu, z)), path, nodes)
}

/// Order of an isolated root by a small-circle winding count. `min_dist`
/// keeps the circle clear of the nearest other root.
fn root_order(la: C64, mu: f64, z: C64, min_dist: f64) -> Result<usize> {
    let mut rad = 1e-3f64.min(0.4 * min_dist).max(1e-9);
    let mut last = Error::ContourTooClose { min_abs: rad };
    for _ in 0..8 {
        match g_winding(la, mu, &ClosedPath::Circle { center: z, radius: rad }, 48) {
            Ok(w) if w >= 1 => return Ok(w as usize),
            Ok(_) => rad *= 2.0,
            Err(Error::ContourTooClose { min_abs }) => {
                last = Error::ContourTooClose { min_abs };
                rad *= 0.37;
            }
            Err(Error::NonIntegerWinding { value }) => {
                last = Error::NonIntegerWinding { value };
                rad *= 0.7;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Roots with orders inside `r`, certified complete: the boundary winding of
/// `g` must equal the sum of root orders. On mismatch the rectangle splits
/// into four and the children repair the count.
fn certified(la: C64, mu: f64, r: &Zr, depth: usize) -> Result<Vec<(C64, usize)>> {
    let w = g_winding(la, mu, &r.path(), winding_nodes(la, r))?;
    let roots = rect_roots(la, mu, r);
    let mut out = Vec::with_capacity(roots.len());
    for (i, &z) in roots.iter().enumerate() {
        let min_dist = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, w)| (w - z).norm())
            .fold(f64::INFINITY, f64::min);
        out.push((z, root_order(la, mu, z, min_dist)?));
    }
    let total: i64 = out.iter().map(|(_, o)| *o as i64).sum();
    if total == w {
        return Ok(out);
    }
    if depth == 0 {
        return Err(Error::Incomplete { expected: w, found: total });
    }
    let mut pool: Vec<C64> = out.iter().map(|(z, _)| *z).collect();
    for q in r.quadrants() {
        for (z, _) in certified_with_retry(la, mu, &q, depth - 1)? {
            pool.push(z);
        }
    }
    let merged: Vec<C64> = dedupe_roots(la, mu, pool)
        .into_iter()
        .filter(|z| r.contains(*z))
        .collect();
    let mut out = Vec::with_capacity(merged.len());
    for (i, &z) in merged.iter().enumerate() {
        let min_dist = merged
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, w)| (w - z).norm())
            .fold(f64::INFINITY, f64::min);
        out.push((z, root_order(la, mu, z, min_dist)?));
    }
    let total: i64 = out.iter().map(|(_, o)| *o as i64).sum();
    if total == w {
        Ok(out)
    } else {
        Err(Error::Incomplete { expected: w, found: total })
    }
}

/// Retries `certified` on progressively inflated copies of `r` whenever the
/// counting contour runs into a root.
fn certified_with_retry(la: C64, mu: f64, r: &Zr, depth: usize) -> Result<Vec<(C64, usize)>> {
    let scale = 2.7e-6 * (1.0 + r.span());
    for attempt in 0..5 {
        let rk = r.inflate(attempt as f64 * scale);
        match certified(la, mu, &rk, depth) {
            Err(Error::ContourTooClose { .. }) => continue,
            other => return other,
        }
    }
    certified(la, mu, &r.inflate(5.0 * scale), depth)
}

/// All roots of `f_alpha(z) = i*mu` in a closed rectangle, with certified
/// completeness.
///
/// `mu` must lie on the lattice `(pi/2)*Z` and the region must be a
/// rectangle. Roots are polished to residual `1e-12` (widened by `mu * eps`
/// once `|mu|` is large enough that f64 cancellation forbids the absolute
/// target), deduplicated within `1e-8`, and returned sorted by `(t, s)`.
pub fn z_roots(alpha: C64, ell: f64, mu: f64, rect: &SearchRegion) -> Result<Vec<ZSolution>> {
    if alpha.norm() == 0.0 || !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::Validation("alpha must be finite and nonzero".into()));
    }
    if !ell.is_finite() || ell <= 0.0 {
        return Err(Error::Validation(format!("ell must be positive, got {ell}")));
    }
    let k = mu / FRAC_PI_2;
    if !mu.is_finite() || (k - k.round()).abs() > 1e-9 * (1.0 + k.abs()) {
        return Err(Error::Validation(format!(
            "mu = {mu} is not on the half-pi lattice"
        )));
    }
    rect.validate()?;
    let SearchRegion::Rect { re, im } = *rect else {
        return Err(Error::Validation(
            "z-plane root search requires a rectangle region".into(),
        ));
    };
    let r = Zr { t0: re.0, t1: re.1, s0: im.0, s1: im.1 };
    let la = principal_sqrt(alpha) * ell;
    let pairs = certified_with_retry(la, mu, &r, SPLIT_DEPTH)?;
    let mut out: Vec<ZSolution> = pairs
        .into_iter()
        .map(|(z, order)| ZSolution {
            t: z.re,
            s: z.im,
            mu,
            residual: g_value(la, mu, z).norm(),
            order,
        })
        .collect();
    out.sort_by(|a, b| (a.t, a.s).partial_cmp(&(b.t, b.s)).unwrap());
    Ok(out)
}

/// Order of `lambda` as a zero of `det W` for the scalar well, by winding
/// the unit-modulus phase of the determinant around a small circle. Order
/// zero is a definite answer: two clean zero windings at growing radii
/// certify that no zero hides near the candidate, which is how the
/// substitution artifacts at `lambda = ±sqrt(alpha)` are recognized.
fn det_zero_order(well: &SquareWell, lambda: C64, min_dist: f64) -> Result<usize> {
    // Growth stays below min_dist so the circle never swallows a neighbor.
    let cap = (0.4 * min_dist).max(1e-9);
    let mut rad = (1e-4 * (1.0 + lambda.norm())).min(cap);
    let mut last = Error::ContourTooClose { min_abs: rad };
    let mut zero_streak = 0usize;
    for _ in 0..6 {
        let path = ClosedPath::Circle { center: lambda, radius: rad };
        match winding_number(
            |z| jost::jost_function(z, well).map(|nj| nj.phase_f_raw),
            &path,
            64,
        ) {
            Ok(w) if w >= 1 => return Ok(w as usize),
            Ok(_) => {
                zero_streak += 1;
                if zero_streak >= 2 {
                    return Ok(0);
                }
                rad = (3.0 * rad).min(cap);
            }
            Err(Error::ContourTooClose { min_abs }) => {
                zero_streak = 0;
                last = Error::ContourTooClose { min_abs };
                rad *= 0.31;
            }
            Err(Error::NonIntegerWinding { value }) => {
                zero_streak = 0;
                last = Error::NonIntegerWinding { value };
                rad *= 0.7;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn axis_tags(lambda: C64) -> Vec<ResonanceTag> {
    let tol = 1e-8 * (1.0 + lambda.norm());
    let mut tags = Vec::new();
    if lambda.im.abs() <= tol {
        tags.push(ResonanceTag::Real);
    }
    if lambda.re.abs() <= tol {
        tags.push(ResonanceTag::Imaginary);
    }
    if lambda.im.abs() > tol && lambda.re.abs() > tol {
        tags.push(match (lambda.re > 0.0, lambda.im > 0.0) {
            (true, true) => ResonanceTag::QuadrantI,
            (false, true) => ResonanceTag::QuadrantII,
            (false, false) => ResonanceTag::QuadrantIII,
            (true, false) => ResonanceTag::QuadrantIV,
        });
    }
    tags
}

struct Candidate {
    lambda: C64,
    tags: Vec<ResonanceTag>,
    /// Exact special values (0 and -1/ell) pin the cluster representative.
    pinned: bool,
}

/// All resonances generated by a single eigenvalue of the coupling matrix
/// inside `region`, verified and with certified orders.
///
/// The search pulls the region back through `lambda = sqrt(alpha) cosh z`
/// into the strip `|Im z| <= pi + 0.2`, sweeps every lattice level `i*mu`
/// the phase function can reach there (non-negative `mu` suffices: `f` is
/// odd and `cosh` is even, so the `-mu` roots give the same `lambda`), and
/// then filters the mapped candidates through the four-equation residual
/// and a winding-number order count; a certified order of zero marks a
/// substitution artifact. Boundary-lattice special points `lambda = 0` (when
/// `ell*sqrt(alpha)` sits on the half-pi lattice) and `lambda = -1/ell`
/// (when `alpha = 1/ell²`) are appended explicitly with their tags.
pub fn alpha_resonances(
    data: &EigenvalueData,
    well: &SquareWell,
    region: &SearchRegion,
) -> Result<Vec<Resonance>> {
    region.validate()?;
    let alpha = data.alpha;
    let ell = well.ell();
    let scalar_well = SquareWell::scalar(alpha, ell)?;
    let sq = principal_sqrt(alpha);

    let s_half = PI + 0.2;
    let wmax = region.bounding_radius() / sq.norm();
    let t_half = wmax.asinh() + 0.25;
    let zrect = SearchRegion::Rect {
        re: (-t_half, t_half),
        im: (-s_half, s_half),
    };
    // |f| <= |la| cosh(t) + |z| on the strip bounds every reachable level.
    let mu_max = ell * sq.norm() * t_half.cosh() + t_half.hypot(s_half) + PI;
    let kmax = (mu_max / FRAC_PI_2).floor() as i64;

    let per_mu: Vec<Vec<ZSolution>> = (0..=kmax)
        .into_par_iter()
        .map(|k| z_roots(alpha, ell, k as f64 * FRAC_PI_2, &zrect))
        .collect::<Result<Vec<_>>>()?;

    let pad = 1e-9 * (1.0 + region.bounding_radius());
    let mut cands: Vec<Candidate> = Vec::new();
    for zs in &per_mu {
        for z in zs {
            let lambda = sq * C64::new(z.t, z.s).cosh();
            if region.contains(lambda, pad) {
                cands.push(Candidate { lambda, tags: Vec::new(), pinned: false });
            }
        }
    }

    // Boundary-lattice specials, appended regardless of the sweep.
    if alpha.im.abs() <= 1e-12 * (1.0 + alpha.norm()) && alpha.re > 0.0 {
        let v = ell * alpha.re.sqrt();
        let k = (v / FRAC_PI_2).round();
        if k >= 1.0 && (v - k * FRAC_PI_2).abs() <= 1e-9 * (1.0 + v) {
            let zero = C64::new(0.0, 0.0);
            if region.contains(zero, pad) {
                cands.push(Candidate {
                    lambda: zero,
                    tags: vec![ResonanceTag::SpecialZero],
                    pinned: true,
                });
            }
        }
    }
    if (alpha * (ell * ell) - ONE).norm() <= 1e-9 {
        let lam = C64::new(-1.0 / ell, 0.0);
        if region.contains(lam, pad) {
            cands.push(Candidate {
                lambda: lam,
                tags: vec![ResonanceTag::SpecialNegInvEll],
                pinned: true,
            });
        }
    }

    // Merge duplicates across lattice levels; exact specials win the cluster.
    cands.sort_by(|a, b| {
        (a.lambda.re, a.lambda.im)
            .partial_cmp(&(b.lambda.re, b.lambda.im))
            .unwrap()
    });
    let mut clusters: Vec<Candidate> = Vec::new();
    for c in cands {
        match clusters
            .iter_mut()
            .find(|k| (k.lambda - c.lambda).norm() <= DEDUPE_TOL * (1.0 + c.lambda.norm()))
        {
            Some(k) => {
                if c.pinned && !k.pinned {
                    k.lambda = c.lambda;
                    k.pinned = true;
                }
                for t in c.tags {
                    if !k.tags.contains(&t) {
                        k.tags.push(t);
                    }
                }
            }
            None => clusters.push(c),
        }
    }

    // Verification: the change of variables manufactures artifacts at
    // lambda = ±sqrt(alpha) (from sinh z = 0). The residual filter rejects
    // them whenever 1 + lambda*ell stays away from zero; any that slip
    // through wind to order zero and are dropped below.
    let mut out: Vec<Resonance> = Vec::new();
    let survivors: Vec<&Candidate> = clusters
        .iter()
        .filter(|c| {
            four_eq_residual(c.lambda, alpha, ell) <= FOUR_EQ_TOL * (1.0 + c.lambda.norm())
        })
        .collect();
    for (i, c) in survivors.iter().enumerate() {
        let min_dist = survivors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, o)| (o.lambda - c.lambda).norm())
            .fold(f64::INFINITY, f64::min);
        let multiplicity = det_zero_order(&scalar_well, c.lambda, min_dist)?;
        if multiplicity == 0 {
            continue;
        }
        let mut tags = axis_tags(c.lambda);
        tags.extend(c.tags.iter().copied());
        tags.sort();
        tags.dedup();
        out.push(Resonance {
            lambda: c.lambda,
            multiplicity,
            generators: Vec::new(),
            tags,
        });
    }
    out.sort_by(|a, b| {
        (a.lambda.re, a.lambda.im)
            .partial_cmp(&(b.lambda.re, b.lambda.im))
            .unwrap()
    });
    Ok(out)
}
