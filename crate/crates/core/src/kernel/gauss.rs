//! Gauss–Legendre nodes and the graded radial rule used by every polar
//! quadrature in the crate.

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1, "Gauss–Legendre order must be positive");
    let n = order;
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Maps a rule on `[-1, 1]` to `[a, b]` and appends it.
pub fn push_panel(rule: &[(f64, f64)], a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    out.extend(rule.iter().map(|&(x, w)| (mid + half * x, half * w)));
}

/// Composite rule on `τ ∈ [0, 1]`: `3·rings` uniform panels on `[0.1, 1]`,
/// geometric panels with ratio `10^{-1/rings}` from `0.1` down to `tau_min`,
/// and one closing panel on `[0, tau_min]`.
pub fn radial_rule(rings: usize, order: usize, tau_min: f64) -> Vec<(f64, f64)> {
    let rings = rings.max(1);
    let fine = gauss_legendre(order.max(2));
    let coarse = gauss_legendre((order / 2).max(4));
    let mut out = Vec::new();
    let uniform = 3 * rings;
    for i in 0..uniform {
        let a = 0.1 + 0.9 * i as f64 / uniform as f64;
        let b = 0.1 + 0.9 * (i + 1) as f64 / uniform as f64;
        push_panel(&fine, a, b, &mut out);
    }
    let ratio = 10f64.powf(-1.0 / rings as f64);
    let mut b = 0.1;
    while b > tau_min * 1.0000001 {
        let a = (b * ratio).max(tau_min);
        push_panel(&coarse, a, b, &mut out);
        b = a;
    }
    push_panel(&coarse, 0.0, b, &mut out);
    out
}
