//! Matrix functions and spectral data of the square-well coupling matrix.
//!
//! Everything downstream is expressed through the two entire functions
//!
//! ```text
//! cosh_m(M)  = sum_{n>=0} M^n / (2n)!      ( = cosh(sqrt(M)) )
//! sinhc_m(M) = sum_{n>=0} M^n / (2n+1)!    ( = sinh(sqrt(M))/sqrt(M) )
//! ```
//!
//! which are even in `sqrt(M)`, so no matrix square root or branch choice is
//! ever needed. Large arguments are handled by scaling `M` by `4^-k` and
//! applying the double-angle recurrences `S <- S*C`, `C <- 2*C^2 - I`;
//! summing the raw series at large norm would cancel catastrophically.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Norm threshold below which the truncated series is summed directly.
const SERIES_NORM_CAP: f64 = 8.0;
/// Hard cap on series terms; at norm <= 8 convergence needs ~15 terms.
const SERIES_TERM_CAP: usize = 512;
/// Relative truncation target for the series tail.
const SERIES_TOL: f64 = 1e-16;

/// Principal square root with the cut glued from above: for z on the
/// negative real axis the root is `+i sqrt(|z|)`.
pub fn principal_sqrt(z: C64) -> C64 {
    if z.im == 0.0 && z.re < 0.0 {
        C64::new(0.0, z.re.abs().sqrt())
    } else {
        z.sqrt()
    }
}

/// Scalar `cosh(sqrt(z))`; branch-free because cosh is even.
pub fn cosh_sqrt(z: C64) -> C64 {
    principal_sqrt(z).cosh()
}

/// Scalar `sinh(sqrt(z))/sqrt(z)` with the removable singularity filled in.
pub fn sinhc_sqrt(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        // 1 + z/3! + z^2/5! + z^3/7!; next term < 3e-18 at |z| = 1e-3
        ONE + z * (ONE / 6.0 + z * (ONE / 120.0 + z / 5040.0))
    } else {
        let w = principal_sqrt(z);
        w.sinh() / w
    }
}

/// Both entire well functions of one matrix argument in a single pass.
///
/// Errors with `Range` when the values themselves exceed `f64`; use
/// [`cosh_sinhc_m_scaled`] when only the determinant or a log-magnitude is
/// needed at extreme arguments.
pub fn cosh_sinhc_m(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (ct, st, sigma) = cosh_sinhc_m_scaled(m)?;
    let peak = sigma + ct.norm().max(st.norm()).ln();
    if peak > 708.0 {
        return Err(Error::Range { norm: m.norm() });
    }
    let e = sigma.exp();
    Ok((ct.map(|z| z * e), st.map(|z| z * e)))
}

/// As [`cosh_sinhc_m`] but in factored form `(C~, S~, sigma)` with
/// `cosh_m(M) = e^sigma С~` and `sinhc_m(M) = e^sigma S~`, where the matrix
/// parts stay of order one. This keeps log-determinants finite long after
/// the plain values overflow.
pub fn cosh_sinhc_m_scaled(m: &CMatrix) -> Result<(CMatrix, CMatrix, f64)> {
    let d = square_dim(m)?;
    let norm = m.norm();
    if !norm.is_finite() {
        return Err(Error::Range { norm });
    }

    let scalings = if norm <= SERIES_NORM_CAP {
        0
    } else {
        ((norm / SERIES_NORM_CAP).ln() / 4f64.ln()).ceil() as u32
    };
    let ms = m.map(|z| z / 4f64.powi(scalings as i32));
    let mnorm = ms.norm();

    let eye = CMatrix::identity(d, d);
    let mut cosh = eye.clone();
    let mut sinhc = eye.clone();
    let mut power = eye.clone();
    let mut ccoef = 1.0f64; // 1/(2n)!
    let mut scoef = 1.0f64; // 1/(2n+1)!
    let mut majorant = 1.0f64; // mnorm^n/(2n)!
    let target = SERIES_TOL * mnorm.sqrt().cosh().max(1.0);
    let mut converged = false;
    for n in 1..=SERIES_TERM_CAP {
        let nf = n as f64;
        power *= &ms;
        ccoef /= (2.0 * nf - 1.0) * (2.0 * nf);
        scoef /= (2.0 * nf) * (2.0 * nf + 1.0);
        cosh += power.map(|z| z * ccoef);
        sinhc += power.map(|z| z * scoef);
        majorant *= mnorm / ((2.0 * nf - 1.0) * (2.0 * nf));
        // Geometric tail bound for everything past term n.
        let ratio = mnorm / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
        let tail = majorant * ratio / (1.0 - ratio);
        if tail < target {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Range { norm });
    }

    // Double-angle steps on the factored pair: with C = e^sigma*C~ the
    // recurrences S <- S*C, C <- 2*C^2 - I become S~ <- S~*C~,
    // C~ <- 2*C~^2 - e^(-2*sigma)*I, sigma <- 2*sigma, followed by a
    // renormalization that keeps the matrix parts of order one.
    let mut sigma = 0.0f64;
    for _ in 0..scalings {
        let shrink = (-2.0 * sigma).exp(); // underflow to 0 is exact enough
        let s_next = &sinhc * &cosh;
        let c_next = (&cosh * &cosh).map(|z| 2.0 * z) - eye.map(|z| z * shrink);
        sigma *= 2.0;
        let t = c_next.norm().max(s_next.norm());
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::Range { norm });
        }
        sigma += t.ln();
        let inv = 1.0 / t;
        sinhc = s_next.map(|z| z * inv);
        cosh = c_next.map(|z| z * inv);
    }
    Ok((cosh, sinhc, sigma))
}

/// `cosh_m(M) = sum M^n/(2n)!`.
pub fn cosh_m(m: &CMatrix) -> Result<CMatrix> {
    Ok(cosh_sinhc_m(m)?.0)
}

/// `sinhc_m(M) = sum M^n/(2n+1)!`.
pub fn sinhc_m(m: &CMatrix) -> Result<CMatrix> {
    Ok(cosh_sinhc_m(m)?.1)
}

/// One eigenvalue of the coupling matrix together with the derived
/// well parameters `p = ell*Re sqrt(alpha) >= 0`, `q = ell*Im sqrt(alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueData {
    pub alpha: C64,
    pub mult_a: usize,
    pub p: f64,
    pub q: f64,
}

impl EigenvalueData {
    pub fn new(alpha: C64, mult_a: usize, ell: f64) -> Self {
        let root = principal_sqrt(alpha);
        EigenvalueData {
            alpha,
            mult_a,
            p: ell * root.re,
            q: ell * root.im,
        }
    }

    pub fn sqrt_alpha(&self) -> C64 {
        principal_sqrt(self.alpha)
    }
}

/// The potential data: an invertible complex coupling matrix `a` and the
/// half-width `ell` of the supporting interval `[-ell, ell]`.
#[derive(Debug, Clone)]
pub struct SquareWell {
    a: CMatrix,
    ell: f64,
}

impl SquareWell {
    /// Validates squareness, finiteness, `ell > 0` and invertibility
    /// (smallest eigenvalue modulus above `1e-10 * (1 + ||a||)`).
    pub fn new(a: CMatrix, ell: f64) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::Validation(format!(
                "matrix a must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix a has non-finite entries".into()));
        }
        if !ell.is_finite() || ell <= 0.0 {
            return Err(Error::Validation(format!("ell must be positive, got {ell}")));
        }
        let eigs = eigenvalues(&a)?;
        let min_abs = eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if min_abs <= 1e-10 * (1.0 + a.norm()) {
            return Err(Error::SingularCoupling { min_abs });
        }
        Ok(SquareWell { a, ell })
    }

    /// Scalar well from one eigenvalue, sharing the interval.
    pub fn scalar(alpha: C64, ell: f64) -> Result<Self> {
        SquareWell::new(CMatrix::from_element(1, 1, alpha), ell)
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

fn square_dim(m: &CMatrix) -> Result<usize> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::Validation(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Raw (unclustered) eigenvalues via complex Schur.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let d = square_dim(a)?;
    if d == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let schur = a
        .clone()
        .try_schur(1e-14, 100_000)
        .ok_or(Error::EigenConvergence)?;
    let t = schur.unpack().1;
    Ok((0..d).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of the coupling matrix clustered into algebraic-multiplicity
/// records. `cluster_tol` defaults to `1e-8 * (1 + ||a||)`; clusters are the
/// connected components of the proximity graph, represented by their mean.
/// Records are sorted by `(Re, Im)`.
pub fn spectrum_with_multiplicity(
    well: &SquareWell,
    cluster_tol: Option<f64>,
) -> Result<Vec<EigenvalueData>> {
    let a = well.a();
    let tol = cluster_tol.unwrap_or(1e-8 * (1.0 + a.norm()));
    if tol <= 0.0 {
        return Err(Error::Validation("cluster_tol must be positive".into()));
    }
    let eigs = eigenvalues(a)?;
    let n = eigs.len();
    let mut assigned = vec![usize::MAX; n];
    let mut next = 0usize;
    for i in 0..n {
        if assigned[i] != usize::MAX {
            continue;
        }
        // Grow the connected proximity component from i.
        let mut stack = vec![i];
        assigned[i] = next;
        while let Some(k) = stack.pop() {
            for j in 0..n {
                if assigned[j] == usize::MAX && (eigs[k] - eigs[j]).norm() <= tol {
                    assigned[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    let mut records = Vec::with_capacity(next);
    for c in 0..next {
        let members: Vec<C64> = (0..n).filter(|&i| assigned[i] == c).map(|i| eigs[i]).collect();
        let mut mean = members.iter().sum::<C64>() / members.len() as f64;
        // Snap tiny imaginary/real noise so real coupling stays real.
        if mean.im.abs() <= tol {
            mean.im = 0.0;
        }
        if mean.re.abs() <= tol {
            mean.re = 0.0;
        }
        records.push(EigenvalueData::new(mean, members.len(), well.ell()));
    }
    records.sort_by(|a, b| {
        a.alpha
            .re
            .total_cmp(&b.alpha.re)
            .then(a.alpha.im.total_cmp(&b.alpha.im))
    });
    Ok(records)
}

/// Polar data of the coupling matrix: the unitary factor `u_a` and the
/// Hermitian positive square root `|a|^(1/2)`, so that
/// `a = u_a * |a|^(1/2) * |a|^(1/2)`.
pub fn polar_factors(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let d = square_dim(a)?;
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(Error::EigenConvergence)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::EigenConvergence)?;
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-14 * smax.max(1.0) {
        return Err(Error::SingularCoupling { min_abs: smin });
    }
    // a = U S V^H; |a| = V S V^H; |a|^(1/2) = V S^(1/2) V^H; u_a = U V^H.
    let v = v_t.adjoint();
    let mut root = CMatrix::zeros(d, d);
    for k in 0..d {
        let sk = C64::new(svd.singular_values[k].sqrt(), 0.0);
        let col = v.column(k);
        for i in 0..d {
            for j in 0..d {
                root[(i, j)] += col[i] * sk * col[j].conj();
            }
        }
    }
    let unitary = u * &v_t.clone();
    Ok((unitary, root))
}

/// Determinant in log-magnitude/phase form: returns `(ln |det m|, det/|det|)`.
///
/// Row-equilibrated LU with partial pivoting, so the result stays finite for
/// matrices whose determinant overflows or underflows `f64` (entries up to
/// about `1e300` are handled). A singular matrix yields `(-inf, 0)`.
pub fn log_det(m: &CMatrix) -> (f64, C64) {
    let d = m.nrows();
    debug_assert_eq!(d, m.ncols());
    let mut work = m.clone_owned();
    let mut log_abs = 0.0f64;
    let mut phase = ONE;

    for i in 0..d {
        let scale = work.row(i).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if scale == 0.0 {
            return (f64::NEG_INFINITY, ZERO);
        }
        log_abs += scale.ln();
        let inv = 1.0 / scale;
        for j in 0..d {
            work[(i, j)] = work[(i, j)].scale(inv);
        }
    }

    for k in 0..d {
        let mut piv = k;
        let mut best = work[(k, k)].norm();
        for i in k + 1..d {
            let cand = work[(i, k)].norm();
            if cand > best {
                best = cand;
                piv = i;
            }
        }
        if best == 0.0 {
            return (f64::NEG_INFINITY, ZERO);
        }
        if piv != k {
            work.swap_rows(piv, k);
            phase = -phase;
        }
        let akk = work[(k, k)];
        log_abs += akk.norm().ln();
        phase *= akk.unscale(akk.norm());
        for i in k + 1..d {
            let factor = work[(i, k)] / akk;
            for j in k + 1..d {
                let sub = factor * work[(k, j)];
                work[(i, j)] -= sub;
            }
        }
    }
    (log_abs, phase)
}
