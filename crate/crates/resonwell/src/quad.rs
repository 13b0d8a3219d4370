//! Gauss-Legendre quadrature rules, plain and composite.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre polynomial from the Chebyshev-based
/// initial guess; accurate to machine precision for the moderate `n`
/// used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess: Chebyshev-like root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite rule: `panels` equal panels over `[lo, hi]`, each carrying a
/// `per_panel`-point Gauss-Legendre rule. Weights sum to `hi - lo`.
pub fn composite_gauss_legendre(
    lo: f64,
    hi: f64,
    panels: usize,
    per_panel: usize,
) -> (Vec<f64>, Vec<f64>) {
    assert!(panels >= 1 && hi > lo);
    let (base_x, base_w) = gauss_legendre(per_panel);
    let h = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * per_panel);
    let mut ws = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let mid = a + 0.5 * h;
        for (x, w) in base_x.iter().zip(base_w.iter()) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules_match_known_values() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3.0f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);

        let (x, w) = gauss_legendre(3);
        let r = (3.0f64 / 5.0).sqrt();
        assert!((x[0] + r).abs() < 1e-14 && x[1].abs() < 1e-15 && (x[2] - r).abs() < 1e-14);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // n-point rule is exact through degree 2n-1.
        for n in [4usize, 9, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let got: f64 = x
                .iter()
                .zip(w.iter())
                .map(|(xi, wi)| wi * xi.powi(deg as i32 - 1))
                .sum();
            // integral of x^(deg-1) over [-1,1]; deg-1 even.
            let want = 2.0 / deg as f64;
            assert!((got - want).abs() < 1e-12, "n={n} got {got} want {want}");
        }
    }

    #[test]
    fn composite_rule_covers_interval() {
        let (xs, ws) = composite_gauss_legendre(-3.0, 3.0, 16, 4);
        assert_eq!(xs.len(), 64);
        assert!((ws.iter().sum::<f64>() - 6.0).abs() < 1e-12);
        assert!(xs.windows(2).all(|p| p[0] < p[1]));
        assert!(xs.iter().all(|&x| (-3.0..=3.0).contains(&x)));
        // exp integrates to e^3 - e^-3 to near machine precision.
        let got: f64 = xs.iter().zip(ws.iter()).map(|(x, w)| w * x.exp()).sum();
        assert!((got - (3f64.exp() - (-3f64).exp())).abs() < 1e-10);
    }
}
