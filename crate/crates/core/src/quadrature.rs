//! One-dimensional quadrature helpers built on double-exponential integration.

/// Integrates `f` over `[a, b]` to the requested relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // A first coarse pass fixes the absolute target for the refined pass.
    let coarse = quadrature::integrate(&f, a, b, 1e-6).integral.abs();
    let target = (rel_tol * coarse).max(f64::MIN_POSITIVE);
    quadrature::integrate(&f, a, b, target).integral
}

/// Integrates `f` over `[0, upper]`, splitting the range at decades so that
/// integrands concentrated near the origin are resolved on long intervals.
pub fn integrate_decades<F: Fn(f64) -> f64>(f: F, upper: f64, rel_tol: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = upper.min(1.0);
    while lo < upper {
        total += integrate(&f, lo, hi, rel_tol);
        lo = hi;
        hi = (hi * 10.0).min(upper);
    }
    total
}

/// Composite trapezoid rule on an arbitrary increasing node set.
pub fn trapezoid(nodes: &[f64], values: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(s, v)| 0.5 * (s[1] - s[0]) * (v[0] + v[1]))
        .sum()
}
