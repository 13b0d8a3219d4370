//! Winding numbers of analytic functions along closed paths.
//!
//! The count is the accumulated continuous argument: consecutive phase
//! increments are forced below 1 radian by adaptive bisection of the path
//! parameter, so the trapezoid sum of `d(arg f)` telescopes to an integer
//! multiple of `2*pi` up to rounding. A zero on (or hugging) the path shows
//! up as bisection-depth exhaustion and is reported as such.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest accepted single-step phase increment, radians.
const MAX_STEP: f64 = 1.0;
/// Path-parameter bisection depth; resolves features down to
/// `~2^-44 * (path length / initial nodes)`.
const MAX_DEPTH: u32 = 44;

/// A positively oriented closed path in the complex plane.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedPath {
    Circle { center: C64, radius: f64 },
    Rect { re: (f64, f64), im: (f64, f64) },
}

impl ClosedPath {
    /// Point at parameter `t in [0, 1)`, counterclockwise.
    pub fn point(&self, t: f64) -> C64 {
        match self {
            ClosedPath::Circle { center, radius } => {
                let th = 2.0 * std::f64::consts::PI * t;
                center + C64::new(radius * th.cos(), radius * th.sin())
            }
            ClosedPath::Rect { re, im } => {
                let (x0, x1) = *re;
                let (y0, y1) = *im;
                let s = 4.0 * t.rem_euclid(1.0);
                if s < 1.0 {
                    C64::new(x0 + (x1 - x0) * s, y0)
                } else if s < 2.0 {
                    C64::new(x1, y0 + (y1 - y0) * (s - 1.0))
                } else if s < 3.0 {
                    C64::new(x1 - (x1 - x0) * (s - 2.0), y1)
                } else {
                    C64::new(x0, y1 - (y1 - y0) * (s - 3.0))
                }
            }
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, z: C64) -> bool {
        match self {
            ClosedPath::Circle { center, radius } => (z - center).norm() < *radius,
            ClosedPath::Rect { re, im } => {
                z.re > re.0 && z.re < re.1 && z.im > im.0 && z.im < im.1
            }
        }
    }

    /// Distance from `z` to the path (exact for both shapes).
    pub fn distance(&self, z: C64) -> f64 {
        match self {
            ClosedPath::Circle { center, radius } => ((z - center).norm() - radius).abs(),
            ClosedPath::Rect { re, im } => {
                let dx = (re.0 - z.re).max(z.re - re.1);
                let dy = (im.0 - z.im).max(z.im - im.1);
                if dx <= 0.0 && dy <= 0.0 {
                    (-dx).min(-dy)
                } else {
                    (dx.max(0.0).powi(2) + dy.max(0.0).powi(2)).sqrt()
                }
            }
        }
    }
}

/// Winding number of `f` along `path`, starting from `initial_nodes`
/// equispaced parameter samples.
///
/// `f` may return any continuous nonvanishing scalar multiple of the
/// function of interest; only arguments matter.
pub fn winding_number<F>(f: F, path: &ClosedPath, initial_nodes: usize) -> Result<i64>
where
    F: Fn(C64) -> Result<C64>,
{
    let n = initial_nodes.max(8);
    let mut params: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
    params.push(1.0);
    let mut values = Vec::with_capacity(n + 1);
    for &t in &params {
        values.push(eval(&f, path, t)?);
    }

    let mut total = 0.0f64;
    for k in 0..n {
        total += segment_arg(
            &f,
            path,
            params[k],
            values[k],
            params[k + 1],
            values[k + 1],
            0,
        )?;
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.1 {
        return Err(Error::NonIntegerWinding { value: winding });
    }
    Ok(rounded as i64)
}

/// Wrap an angle difference into `[-pi, pi)`. Division-free, so it is safe
/// for values near the floating-point magnitude limits.
fn principal_angle(d: f64) -> f64 {
    use std::f64::consts::PI;
    (d + PI).rem_euclid(2.0 * PI) - PI
}

fn eval<F>(f: &F, path: &ClosedPath, t: f64) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let v = f(path.point(t))?;
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Range { norm: f64::INFINITY });
    }
    if v.norm() == 0.0 {
        return Err(Error::ContourTooClose { min_abs: 0.0 });
    }
    Ok(v)
}

fn segment_arg<F>(f: &F, path: &ClosedPath, t0: f64, v0: C64, t1: f64, v1: C64, depth: u32) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    let step = principal_angle(v1.arg() - v0.arg());
    if step.abs() <= MAX_STEP {
        return Ok(step);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::ContourTooClose {
            min_abs: v0.norm().min(v1.norm()),
        });
    }
    let tm = 0.5 * (t0 + t1);
    let vm = eval(f, path, tm)?;
    Ok(segment_arg(f, path, t0, v0, tm, vm, depth + 1)?
        + segment_arg(f, path, tm, vm, t1, v1, depth + 1)?)
}
