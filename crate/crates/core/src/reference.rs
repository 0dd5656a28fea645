//! Closed-form values of the demo problems, used as test oracles.

/// Eikonal demo (`|b| ≤ 1`, `l ≡ 1`, `g = min(|x|, 1)`):
/// `u(x, t) = t + min over |y − x| ≤ t of g(y)`.
pub fn eikonal(x: f64, t: f64) -> f64 {
    t + (x.abs() - t).max(0.0).min(1.0)
}

/// Gap demo, all interface mixtures allowed: sliding with the singular
/// mixture is free, and any descent costs at least as much as it saves in
/// `g`, so `U⁻ = g = min(2|x_N|, 2)`.
pub fn gap_minus(x_n: f64, _t: f64) -> f64 {
    (2.0 * x_n.abs()).min(2.0)
}

/// Gap demo, regular mixtures only: reach the interface at cost `2|x_N|`,
/// then wait at unit cost, or give up and pay the cap.
pub fn gap_plus(x_n: f64, t: f64) -> f64 {
    let a = x_n.abs();
    (2.0 * a).max(a + t).min(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert_eq!(eikonal(0.0, 1.0), 1.0);
        assert_eq!(eikonal(1.5, 0.25), 1.25);
        assert_eq!(eikonal(0.5, 0.0), 0.5);
        assert_eq!(gap_minus(0.0, 1.0), 0.0);
        assert_eq!(gap_plus(0.0, 1.0), 1.0);
        assert_eq!(gap_plus(0.25, 0.5), 0.75);
        assert_eq!(gap_plus(0.75, 0.5), 1.5);
        assert_eq!(gap_plus(3.0, 0.5), 2.0);
    }

    #[test]
    fn terminal_condition() {
        for x in [-2.0, -0.3, 0.0, 0.4, 1.7] {
            assert_eq!(gap_plus(x, 0.0), gap_minus(x, 0.0));
            assert_eq!(eikonal(x, 0.0), f64::min(f64::abs(x), 1.0));
        }
    }
}
