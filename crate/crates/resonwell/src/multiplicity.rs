//! Resonance multiplicities of the matrix well, certified by contour
//! counting, plus the Weyl counting function.
//!
//! The determinant of the matrix Wronskian factors through the spectrum of
//! the coupling matrix, so the multiplicity of a resonance `lambda0` is
//!
//! ```text
//! m(lambda0) = sum over generating eigenvalues alpha of
//!              m_a(alpha) * ord(lambda0, W_alpha)
//! ```
//!
//! where `m_a` is the algebraic eigenvalue multiplicity. The scalar order
//! is 1 except at `lambda0 = -1/ell` for couplings in a distinguished
//! exceptional family (see [`omega_class`]), where it is 2; the origin is
//! handled separately by a winding count of the raw determinant.

use crate::contour::{winding_number, ClosedPath};
use crate::error::{Error, Result};
use crate::jost::jost_function;
use crate::matfun::{principal_sqrt, spectrum_with_multiplicity, C64, EigenvalueData, SquareWell};
use crate::scalar_res::{alpha_resonances, four_eq_residual, Resonance, SearchRegion};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Residual width for deciding which eigenvalues generate a resonance,
/// relative to `1 + |lambda0|`.
const GENERATOR_TOL: f64 = 1e-7;
/// Both defining equalities of an exceptional class must hold this tightly.
const OMEGA_TOL: f64 = 1e-8;
/// Cross-eigenvalue dedupe width when merging per-eigenvalue resonance
/// lists, relative to `1 + |lambda|`.
const MERGE_TOL: f64 = 1e-8;
/// A contour sample this far (relative, in log scale) below its neighbors
/// indicates a zero essentially on the contour.
const CLEARANCE_LOG: f64 = -23.025850929940457; // ln(1e-10)
/// Accepted distance from the accumulated winding to the nearest integer.
const WINDING_SLACK: f64 = 0.1;
/// Node-doubling ceiling for the trapezoid winding count.
const MAX_NODES: usize = 4096;

/// The four exceptional coupling families, named by the sign pattern of
/// their defining equalities, plus the generic outcome.
///
/// With `v = ell*sqrt(alpha)` and `w = sqrt(1 - v^2)`:
///
/// * `OnePlus`:  `v sinh w = w`  and `v cosh w = 1`;
/// * `OneMinus`: `v sinh w = -w` and `v cosh w = -1`;
/// * `TwoPlus`:  `v cosh w = iw` and `v sinh w = i`;
/// * `TwoMinus`: `v cosh w = -iw` and `v sinh w = -i`.
///
/// Membership forces a double zero of the substitution phase function and
/// hence a double zero of the scalar Wronskian at `-1/ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OmegaMembership {
    OnePlus,
    OneMinus,
    TwoPlus,
    TwoMinus,
    NotMember,
}

impl std::fmt::Display for OmegaMembership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OmegaMembership::OnePlus => "omega-1-plus",
            OmegaMembership::OneMinus => "omega-1-minus",
            OmegaMembership::TwoPlus => "omega-2-plus",
            OmegaMembership::TwoMinus => "omega-2-minus",
            OmegaMembership::NotMember => "none",
        };
        f.write_str(s)
    }
}

/// Outcome of the exceptional-family test for one coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaClass {
    pub alpha: C64,
    pub membership: OmegaMembership,
    /// Largest defect of the matched pair of equalities, or the smallest
    /// defect over all four classes when nothing matched.
    pub residual: f64,
}

/// Classify the scaled spectral root `v = ell*sqrt(alpha)` directly.
///
/// The defining equalities depend on the coupling only through `v`, and the
/// map `v -> -v` swaps each `plus` class with its `minus` partner; exposing
/// the root-level test makes that symmetry checkable on constructed
/// members (both signs of `v` correspond to the same `alpha`).
pub fn omega_class_from_scaled_root(v: C64) -> (OmegaMembership, f64) {
    let w = principal_sqrt(C64::new(1.0, 0.0) - v * v);
    let sh = v * w.sinh();
    let ch = v * w.cosh();
    let i = C64::new(0.0, 1.0);
    let candidates = [
        (OmegaMembership::OnePlus, (sh - w).norm().max((ch - C64::new(1.0, 0.0)).norm())),
        (OmegaMembership::OneMinus, (sh + w).norm().max((ch + C64::new(1.0, 0.0)).norm())),
        (OmegaMembership::TwoPlus, (ch - i * w).norm().max((sh - i).norm())),
        (OmegaMembership::TwoMinus, (ch + i * w).norm().max((sh + i).norm())),
    ];
    for (m, r) in candidates {
        if r < OMEGA_TOL {
            return (m, r);
        }
    }
    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    (OmegaMembership::NotMember, best)
}

/// Test the coupling `alpha` against the four exceptional families.
///
/// Uses the principal branches throughout. The families form a measure-zero
/// set, so membership of an arbitrary coupling is numerically meaningless;
/// this is intended for constructed members and for the degenerate coupling
/// `alpha = 1/ell^2` (which satisfies the `OnePlus` equalities exactly,
/// with `w = 0`).
pub fn omega_class(alpha: C64, ell: f64) -> OmegaClass {
    let (membership, residual) = omega_class_from_scaled_root(principal_sqrt(alpha) * ell);
    OmegaClass { alpha, membership, residual }
}

/// Order of `lambda` as a zero of the scalar Wronskian for the coupling
/// `alpha`, by the exceptional-family case table: 2 exactly when `lambda`
/// is `-1/ell`, `alpha` lies in an exceptional family, and `alpha` is not
/// the degenerate coupling `1/ell^2` (where the zero stays simple).
pub fn mfrak(lambda: C64, alpha: C64, ell: f64) -> usize {
    let at_neg_inv_ell = (lambda + C64::new(1.0 / ell, 0.0)).norm() <= 1e-10 * (1.0 + 1.0 / ell);
    if !at_neg_inv_ell {
        return 1;
    }
    let degenerate =
        (alpha * ell * ell - C64::new(1.0, 0.0)).norm() <= 1e-10 * (1.0 + alpha.norm() * ell * ell);
    if degenerate {
        return 1;
    }
    if omega_class(alpha, ell).membership != OmegaMembership::NotMember {
        2
    } else {
        1
    }
}

/// Multiplicity of the verified resonance `lambda0` together with the
/// indices of the eigenvalues that generate it.
///
/// An eigenvalue generates `lambda0` when the four-equation residual is
/// below `1e-7 * (1 + |lambda0|)`; the multiplicity is the sum of
/// `m_a(alpha) * mfrak(lambda0, alpha)` over generators. The origin gets
/// its order from a winding count of the raw determinant on a small circle
/// instead, since the scalar order formula is not defined there.
pub fn resonance_multiplicity(
    lambda0: C64,
    well: &SquareWell,
    eigendata: &[EigenvalueData],
) -> Result<(usize, Vec<usize>)> {
    let ell = well.ell();
    let generators: Vec<usize> = eigendata
        .iter()
        .enumerate()
        .filter(|(_, data)| {
            four_eq_residual(lambda0, data.alpha, ell) < GENERATOR_TOL * (1.0 + lambda0.norm())
        })
        .map(|(i, _)| i)
        .collect();
    if generators.is_empty() {
        return Err(Error::Validation(format!(
            "{lambda0} fails resonance verification for every eigenvalue of the coupling matrix"
        )));
    }

    if lambda0.norm() <= 1e-9 {
        let radius = (0.05f64).min(0.15 / ell);
        let f = |lam: C64| jost_function(lam, well).map(|nj| nj.f_raw);
        let path = ClosedPath::Circle { center: C64::new(0.0, 0.0), radius };
        let m = winding_number(f, &path, 512)?;
        if m <= 0 {
            return Err(Error::Validation(
                "origin passed the residual test but the determinant does not vanish there".into(),
            ));
        }
        return Ok((m as usize, generators));
    }

    let m = generators
        .iter()
        .map(|&i| eigendata[i].mult_a * mfrak(lambda0, eigendata[i].alpha, ell))
        .sum();
    Ok((m, generators))
}

/// A circle for trapezoid argument-principle counting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    /// Circle with the default node budget, which scales with the phase
    /// variation of the exponential prefactor of the determinant.
    pub fn new(center: C64, radius: f64, ell: f64) -> Result<Self> {
        let nodes = 256usize.max(32 * (radius * (ell + 1.0)).ceil() as usize);
        Self::with_nodes(center, radius, nodes)
    }

    pub fn with_nodes(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::Validation("contour center must be finite".into()));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::Validation(format!(
                "contour radius must be finite and positive, got {radius}"
            )));
        }
        if nodes < 64 {
            return Err(Error::Validation(format!(
                "contour needs at least 64 nodes, got {nodes}"
            )));
        }
        Ok(ContourSpec { center, radius, nodes })
    }
}

/// Number of determinant zeros enclosed by the contour, counted with
/// multiplicity, by accumulating the continuous argument of the normalized
/// determinant over the circle.
///
/// The normalization divides the determinant by `(2*lambda)^d`, so when the
/// contour encloses the origin the accumulated winding runs `d` short of
/// the determinant's zero count and the difference is added back here.
///
/// The accumulated winding must land within 0.1 of an integer; otherwise
/// the node count is doubled up to 4096 before giving up. A sample whose
/// log magnitude dips ten decades below its neighborhood indicates a zero
/// essentially on the contour and is rejected outright.
pub fn argument_principle_count(spec: &ContourSpec, well: &SquareWell) -> Result<i64> {
    let origin_gap = spec.center.norm() - spec.radius;
    if origin_gap.abs() <= 1e-6 * (1.0 + spec.radius) {
        return Err(Error::Validation(
            "contour passes too close to the origin, where the normalization degenerates".into(),
        ));
    }
    let origin_correction = if origin_gap < 0.0 { well.dim() as i64 } else { 0 };
    let path = ClosedPath::Circle { center: spec.center, radius: spec.radius };
    Ok(path_winding(well, &path, spec.nodes, MAX_NODES)? + origin_correction)
}

/// Determinant zeros inside a whole search region, counted with
/// multiplicity by a winding count along the region boundary. This is the
/// certification counterpart of a full solver run over the same region.
pub fn boundary_count(well: &SquareWell, region: &SearchRegion) -> Result<i64> {
    region.validate()?;
    let origin = C64::new(0.0, 0.0);
    let boundary = region.boundary();
    if boundary.distance(origin) <= 1e-6 * (1.0 + region.bounding_radius()) {
        return Err(Error::Validation(
            "region boundary passes too close to the origin, where the normalization degenerates"
                .into(),
        ));
    }
    let origin_correction = if region.contains(origin, 0.0) {
        well.dim() as i64
    } else {
        0
    };
    let perimeter = match region {
        SearchRegion::Disk { radius, .. } => TAU * radius,
        SearchRegion::Rect { re, im } => 2.0 * (re.1 - re.0 + im.1 - im.0),
    };
    let start = 1024usize.max((24.0 * perimeter * (well.ell() + 1.0)) as usize);
    Ok(path_winding(well, &boundary, start, 1 << 19)? + origin_correction)
}

/// Winding number of the normalized determinant along `path`, by the
/// trapezoid continuous-argument count with node doubling.
fn path_winding(
    well: &SquareWell,
    path: &ClosedPath,
    start_nodes: usize,
    max_nodes: usize,
) -> Result<i64> {
    let mut nodes = start_nodes.max(64);
    loop {
        let samples: Vec<(f64, C64)> = (0..=nodes)
            .into_par_iter()
            .map(|k| {
                let t = ((k % nodes) as f64) / nodes as f64;
                let lam = path.point(t);
                let nj = jost_function(lam, well)?;
                match (nj.log_abs_f_tilde, nj.phase_f_tilde) {
                    (Some(l), Some(p)) => Ok((l, p)),
                    _ => Err(Error::Validation(
                        "contour passes through the origin, where the normalized determinant is undefined"
                            .into(),
                    )),
                }
            })
            .collect::<Result<_>>()?;

        // Local clearance: compare each log magnitude against a moving
        // window maximum, so the global exponential trend across a large
        // contour does not trigger false alarms.
        let window = 4usize.max(nodes / 128);
        let mut worst = 0.0f64;
        for k in 0..nodes {
            let mut local_max = f64::NEG_INFINITY;
            for off in 0..=2 * window {
                let j = (k + nodes + off - window) % nodes;
                local_max = local_max.max(samples[j].0);
            }
            worst = worst.min(samples[k].0 - local_max);
        }
        if worst < CLEARANCE_LOG {
            return Err(Error::ContourTooClose { min_abs: worst.exp() });
        }

        let mut total = 0.0;
        for pair in samples.windows(2) {
            total += (pair[1].1 * pair[0].1.conj()).arg();
        }
        let w = total / TAU;
        if (w - w.round()).abs() < WINDING_SLACK {
            return Ok(w.round() as i64);
        }
        if nodes >= max_nodes {
            return Err(Error::NonIntegerWinding { value: w });
        }
        nodes = (nodes * 2).min(max_nodes);
    }
}

/// All resonances of the matrix well in `region`, with multiplicities and
/// generator indices filled in by merging the per-eigenvalue searches.
///
/// The merged multiplicity is the sum over contributing eigenvalues of the
/// algebraic eigenvalue multiplicity times the per-eigenvalue zero order,
/// which is exactly the factorization of the determinant through the
/// spectrum. Output is sorted by real then imaginary part.
pub fn well_resonances(well: &SquareWell, region: &SearchRegion) -> Result<Vec<Resonance>> {
    let spectrum = spectrum_with_multiplicity(well, None)?;

    struct Cluster {
        sum: C64,
        count: usize,
        parts: Vec<(usize, usize)>,
        tags: Vec<crate::scalar_res::ResonanceTag>,
    }

    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, data) in spectrum.iter().enumerate() {
        for r in alpha_resonances(data, well, region)? {
            let lam = r.lambda;
            let hit = clusters.iter_mut().find(|c| {
                let rep = c.sum / c.count as f64;
                (rep - lam).norm() <= MERGE_TOL * (1.0 + lam.norm())
            });
            match hit {
                Some(c) => {
                    c.sum += lam;
                    c.count += 1;
                    c.parts.push((i, r.multiplicity));
                    c.tags.extend(r.tags);
                }
                None => clusters.push(Cluster {
                    sum: lam,
                    count: 1,
                    parts: vec![(i, r.multiplicity)],
                    tags: r.tags,
                }),
            }
        }
    }

    let mut out: Vec<Resonance> = clusters
        .into_iter()
        .map(|c| {
            let lambda = c.sum / c.count as f64;
            let mut generators: Vec<usize> = c.parts.iter().map(|p| p.0).collect();
            generators.sort_unstable();
            generators.dedup();
            let multiplicity = c
                .parts
                .iter()
                .map(|&(i, ord)| spectrum[i].mult_a * ord)
                .sum();
            let mut tags = c.tags;
            tags.sort();
            tags.dedup();
            Resonance { lambda, multiplicity, generators, tags }
        })
        .collect();
    out.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    Ok(out)
}

/// Resonance counting function: total multiplicity inside the closed disk
/// of radius `r`.
pub fn weyl_counting(resonances: &[Resonance], r: f64) -> usize {
    resonances
        .iter()
        .filter(|res| res.lambda.norm() <= r)
        .map(|res| res.multiplicity)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::CMatrix;

    // tan(theta) = theta on (pi, 3pi/2); alpha = 1 + theta^2 then satisfies
    // the OneMinus equalities exactly.
    const THETA_1: f64 = 4.4934094579090642;
    // tan(theta) = -1/theta on (pi/2, pi); alpha = 1 + theta^2 satisfies
    // the TwoPlus equalities.
    const THETA_2: f64 = 2.7983860457838871;
    // Couplings sharing the resonance lambda = 1 for ell = 1.
    const ALPHA_1: f64 = 1.740173884394967;
    const ALPHA_2: f64 = 5.115858365694523;

    fn diag_well(entries: &[C64], ell: f64) -> SquareWell {
        let d = entries.len();
        let mut a = CMatrix::zeros(d, d);
        for (i, &e) in entries.iter().enumerate() {
            a[(i, i)] = e;
        }
        SquareWell::new(a, ell).unwrap()
    }

    #[test]
    fn constructed_couplings_land_in_their_classes() {
        let a1 = C64::new(1.0 + THETA_1 * THETA_1, 0.0);
        let c = omega_class(a1, 1.0);
        assert_eq!(c.membership, OmegaMembership::OneMinus);
        assert!(c.residual < 1e-9, "residual {}", c.residual);

        let a2 = C64::new(1.0 + THETA_2 * THETA_2, 0.0);
        let c = omega_class(a2, 1.0);
        assert_eq!(c.membership, OmegaMembership::TwoPlus);
        assert!(c.residual < 1e-9, "residual {}", c.residual);

        // Generic couplings are far from every class.
        for alpha in [C64::new(2.0, 0.3), C64::new(5.0, 0.0), C64::new(0.0, 1.0)] {
            let c = omega_class(alpha, 1.0);
            assert_eq!(c.membership, OmegaMembership::NotMember);
            assert!(c.residual > 1e-3, "alpha {alpha}: residual {}", c.residual);
        }

        // The degenerate coupling satisfies the OnePlus equalities with
        // w = 0; its double zero is suppressed elsewhere, not here.
        let c = omega_class(C64::new(1.0, 0.0), 1.0);
        assert_eq!(c.membership, OmegaMembership::OnePlus);
        assert!(c.residual < 1e-14);
    }

    #[test]
    fn negating_the_scaled_root_swaps_plus_and_minus() {
        let v1 = C64::new((1.0 + THETA_1 * THETA_1).sqrt(), 0.0);
        assert_eq!(omega_class_from_scaled_root(v1).0, OmegaMembership::OneMinus);
        assert_eq!(omega_class_from_scaled_root(-v1).0, OmegaMembership::OnePlus);

        let v2 = C64::new((1.0 + THETA_2 * THETA_2).sqrt(), 0.0);
        assert_eq!(omega_class_from_scaled_root(v2).0, OmegaMembership::TwoPlus);
        assert_eq!(omega_class_from_scaled_root(-v2).0, OmegaMembership::TwoMinus);
    }

    #[test]
    fn scalar_order_doubles_only_in_the_exceptional_case() {
        let omega_member = C64::new(1.0 + THETA_1 * THETA_1, 0.0);
        // Away from -1/ell the order is always 1.
        assert_eq!(mfrak(C64::new(5.0, 0.0), omega_member, 1.0), 1);
        // At -1/ell for an exceptional coupling it doubles.
        assert_eq!(mfrak(C64::new(-1.0, 0.0), omega_member, 1.0), 2);
        // The degenerate coupling keeps a simple zero there.
        assert_eq!(mfrak(C64::new(-1.0, 0.0), C64::new(1.0, 0.0), 1.0), 1);
        // Generic couplings too.
        assert_eq!(mfrak(C64::new(-1.0, 0.0), C64::new(2.0, 0.0), 1.0), 1);
    }

    #[test]
    fn shared_resonance_sums_both_generators() {
        let well = diag_well(&[C64::new(ALPHA_1, 0.0), C64::new(ALPHA_2, 0.0)], 1.0);
        let data = spectrum_with_multiplicity(&well, None).unwrap();
        let (m, gens) = resonance_multiplicity(C64::new(1.0, 0.0), &well, &data).unwrap();
        assert_eq!(m, 2);
        assert_eq!(gens, vec![0, 1]);

        // A non-resonance fails verification.
        let err = resonance_multiplicity(C64::new(0.5, 0.7), &well, &data).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn origin_resonance_of_the_boundary_coupling_is_simple() {
        let well = diag_well(&[C64::new(std::f64::consts::PI * std::f64::consts::PI, 0.0)], 1.0);
        let data = spectrum_with_multiplicity(&well, None).unwrap();
        let (m, gens) = resonance_multiplicity(C64::new(0.0, 0.0), &well, &data).unwrap();
        assert_eq!(m, 1);
        assert_eq!(gens, vec![0]);
    }

    #[test]
    fn exceptional_coupling_doubles_and_the_contour_agrees() {
        let alpha = C64::new(1.0 + THETA_1 * THETA_1, 0.0);
        let well = diag_well(&[alpha], 1.0);
        let data = spectrum_with_multiplicity(&well, None).unwrap();
        let (m, _) = resonance_multiplicity(C64::new(-1.0, 0.0), &well, &data).unwrap();
        assert_eq!(m, 2);

        let spec = ContourSpec::new(C64::new(-1.0, 0.0), 0.05, 1.0).unwrap();
        assert_eq!(argument_principle_count(&spec, &well).unwrap(), 2);
    }

    #[test]
    fn contour_counts_for_the_degenerate_and_empty_cases() {
        let well = diag_well(&[C64::new(1.0, 0.0)], 1.0);
        // -1/ell is a simple zero at the degenerate coupling.
        let spec = ContourSpec::new(C64::new(-1.0, 0.0), 0.05, 1.0).unwrap();
        assert_eq!(argument_principle_count(&spec, &well).unwrap(), 1);
        // Far right half-plane: nothing there.
        let spec = ContourSpec::new(C64::new(10.0, 0.0), 2.0, 1.0).unwrap();
        assert_eq!(argument_principle_count(&spec, &well).unwrap(), 0);
    }

    #[test]
    fn contour_spec_validation() {
        assert!(ContourSpec::new(C64::new(0.0, 0.0), -1.0, 1.0).is_err());
        assert!(ContourSpec::with_nodes(C64::new(0.0, 0.0), 1.0, 32).is_err());
        // Default node budget grows with radius and width.
        let s = ContourSpec::new(C64::new(0.0, 0.0), 50.0, 1.0).unwrap();
        assert!(s.nodes >= 3200);
    }

    #[test]
    fn shared_resonance_merges_in_the_aggregate_list() {
        let well = diag_well(&[C64::new(ALPHA_1, 0.0), C64::new(ALPHA_2, 0.0)], 1.0);
        let region = SearchRegion::Disk { center: C64::new(1.0, 0.0), radius: 0.6 };
        let found = well_resonances(&well, &region).unwrap();
        let shared: Vec<&Resonance> = found
            .iter()
            .filter(|r| (r.lambda - C64::new(1.0, 0.0)).norm() < 1e-8)
            .collect();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].multiplicity, 2);
        assert_eq!(shared[0].generators, vec![0, 1]);
    }

    #[test]
    fn every_found_resonance_is_certified_by_an_isolating_contour() {
        let well = diag_well(&[C64::new(ALPHA_1, 0.0), C64::new(ALPHA_2, 0.0)], 1.0);
        let region = SearchRegion::Disk { center: C64::new(0.0, 0.0), radius: 5.0 };
        let found = well_resonances(&well, &region).unwrap();
        assert!(!found.is_empty());

        let mut min_gap = f64::INFINITY;
        for (i, a) in found.iter().enumerate() {
            for b in &found[i + 1..] {
                min_gap = min_gap.min((a.lambda - b.lambda).norm());
            }
        }
        let eps = (0.45 * min_gap).min(0.05);
        for r in &found {
            let spec = ContourSpec::new(r.lambda, eps, 1.0).unwrap();
            let counted = argument_principle_count(&spec, &well).unwrap();
            assert_eq!(
                counted as usize, r.multiplicity,
                "resonance {} certification",
                r.lambda
            );
        }

        // Global consistency: the boundary count sees exactly the interior
        // total, detecting both missed and spurious roots. Nudge the radius
        // if the circle happens to graze a resonance.
        let total: usize = found.iter().map(|r| r.multiplicity).sum();
        let mut global = None;
        for radius in [5.0, 4.97, 4.93] {
            let inside: usize = found
                .iter()
                .filter(|r| r.lambda.norm() <= radius)
                .map(|r| r.multiplicity)
                .sum();
            let spec = ContourSpec::new(C64::new(0.0, 0.0), radius, 1.0).unwrap();
            if let Ok(w) = argument_principle_count(&spec, &well) {
                global = Some((w, inside));
                break;
            }
        }
        let (w, inside) = global.expect("no usable global contour");
        assert_eq!(w as usize, inside);
        assert_eq!(inside, total);
    }

    #[test]
    fn jordan_block_census_matches_the_global_contour() {
        // Non-diagonalizable coupling: one eigenvalue of algebraic
        // multiplicity 2, so every resonance multiplicity is even and the
        // determinant winding must agree.
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = C64::new(2.0, 0.0);
        a[(0, 1)] = C64::new(1.0, 0.0);
        a[(1, 1)] = C64::new(2.0, 0.0);
        let well = SquareWell::new(a, 1.0).unwrap();

        let region = SearchRegion::Disk { center: C64::new(0.0, 0.0), radius: 3.5 };
        let found = well_resonances(&well, &region).unwrap();
        assert!(!found.is_empty());
        for r in &found {
            assert_eq!(r.multiplicity % 2, 0, "odd multiplicity at {}", r.lambda);
            assert_eq!(r.generators, vec![0]);
        }

        let total: usize = found.iter().map(|r| r.multiplicity).sum();
        let spec = ContourSpec::new(C64::new(0.0, 0.0), 3.5, 1.0).unwrap();
        assert_eq!(argument_principle_count(&spec, &well).unwrap() as usize, total);
    }

    #[test]
    fn weyl_counting_is_a_monotone_step_sum() {
        let mk = |re: f64, im: f64, m: usize| Resonance {
            lambda: C64::new(re, im),
            multiplicity: m,
            generators: vec![0],
            tags: Vec::new(),
        };
        let rs = vec![mk(1.0, 0.0, 1), mk(0.0, 2.0, 2), mk(-3.0, 0.0, 1)];
        assert_eq!(weyl_counting(&rs, 0.5), 0);
        assert_eq!(weyl_counting(&rs, 1.5), 1);
        assert_eq!(weyl_counting(&rs, 2.5), 3);
        assert_eq!(weyl_counting(&rs, 10.0), 4);
        let mut prev = 0;
        for r in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let n = weyl_counting(&rs, r);
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn boundary_count_matches_the_census_on_both_region_shapes() {
        let well = SquareWell::scalar(C64::new(2.0, 0.0), 1.0).unwrap();
        let disk = SearchRegion::Disk { center: C64::new(0.0, 0.0), radius: 4.0 };
        let rect = SearchRegion::Rect { re: (-4.0, 4.0), im: (-4.0, 4.0) };

        let in_disk = well_resonances(&well, &disk).unwrap();
        let total: i64 = in_disk.iter().map(|r| r.multiplicity as i64).sum();
        assert!(total >= 1);
        assert_eq!(boundary_count(&well, &disk).unwrap(), total);

        let in_rect = well_resonances(&well, &rect).unwrap();
        let rect_total: i64 = in_rect.iter().map(|r| r.multiplicity as i64).sum();
        assert_eq!(boundary_count(&well, &rect).unwrap(), rect_total);
        assert!(rect_total >= total, "the square contains the inscribed disk");

        // A region away from the origin gets no normalization correction.
        let offset = SearchRegion::Disk { center: C64::new(-2.0, 6.0), radius: 1.0 };
        let off_total: i64 = well_resonances(&well, &offset)
            .unwrap()
            .iter()
            .map(|r| r.multiplicity as i64)
            .sum();
        assert_eq!(boundary_count(&well, &offset).unwrap(), off_total);

        // A boundary through the origin is rejected rather than mis-counted.
        let grazing = SearchRegion::Disk { center: C64::new(0.0, 0.0), radius: 1e-9 };
        assert!(matches!(boundary_count(&well, &grazing), Err(Error::Validation(_))));
    }

    #[test]
    fn pairwise_shared_resonances_are_finitely_many() {
        // The two couplings share lambda = 1; any further shared resonance
        // would have to appear at moderate modulus, and the count of shared
        // points must stabilize between the two radii.
        let well = diag_well(&[C64::new(ALPHA_1, 0.0), C64::new(ALPHA_2, 0.0)], 1.0);
        let count_shared = |radius: f64| -> usize {
            let region = SearchRegion::Disk { center: C64::new(0.0, 0.0), radius };
            well_resonances(&well, &region)
                .unwrap()
                .iter()
                .filter(|r| r.generators.len() == 2)
                .count()
        };
        let at_40 = count_shared(40.0);
        let at_60 = count_shared(60.0);
        assert_eq!(at_40, at_60, "shared-resonance count failed to stabilize");
        assert!(at_40 >= 1, "the constructed shared resonance went missing");
    }
}
