//! Bernoulli weight `B(z) = z / (e^z - 1)` and the derived quantities used by
//! the exponentially fitted particle flux.

/// `B(z) = z / (e^z - 1)`, with `B(0) = 1`.
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        // z/expm1 loses nothing here, but the series avoids the 0/0 at z = 0
        1.0 - z / 2.0 + z * z / 12.0
    } else if z > 700.0 {
        z * (-z).exp()
    } else {
        z / z.exp_m1()
    }
}

/// `B'(z)`.
pub fn bernoulli_deriv(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        -0.5 + z / 6.0 - z * z * z / 180.0
    } else if z > 0.0 {
        let e = (-z).exp();
        let d = -(-z).exp_m1();
        (1.0 - e - z) * e / (d * d)
    } else {
        let em1 = z.exp_m1();
        (em1 - z * z.exp()) / (em1 * em1)
    }
}

/// Divided difference `(B(w - s) - B(w)) / s`, continuous at `s = 0` where it
/// equals `-B'(w)`. Always positive since `B` is strictly decreasing.
pub fn bernoulli_divided_difference(w: f64, s: f64) -> f64 {
    if s.abs() < 1e-4 * (1.0 + w.abs()) {
        -bernoulli_deriv(w - 0.5 * s)
    } else {
        (bernoulli(w - s) - bernoulli(w)) / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_zero_and_symmetry() {
        assert_eq!(bernoulli(0.0), 1.0);
        for &z in &[1e-8, 1e-3, 0.3, 2.0, 30.0, 800.0] {
            // B(-z) = B(z) + z
            assert!((bernoulli(-z) - bernoulli(z) - z).abs() < 1e-12 * (1.0 + z));
        }
        assert!(bernoulli(1000.0) >= 0.0 && bernoulli(1000.0) < 1e-300);
        assert!((bernoulli(-1000.0) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for &z in &[
            -40.0, -3.0, -0.5, -2e-3, -5e-4, 0.0, 5e-4, 2e-3, 0.7, 4.0, 60.0,
        ] {
            let e = 1e-6;
            let fd = (bernoulli(z + e) - bernoulli(z - e)) / (2.0 * e);
            assert!(
                (fd - bernoulli_deriv(z)).abs() < 1e-8,
                "z={z}: {fd} vs {}",
                bernoulli_deriv(z)
            );
        }
    }

    #[test]
    fn divided_difference_is_continuous_and_positive() {
        for &w in &[-5.0, -0.1, 0.0, 0.02, 3.0] {
            let small = bernoulli_divided_difference(w, 1e-7);
            let below = bernoulli_divided_difference(w, 1.0001e-4 * (1.0 + w.abs()));
            let limit = -bernoulli_deriv(w);
            assert!((small - limit).abs() < 1e-7);
            assert!((below - limit).abs() < 1e-4);
            for &s in &[-3.0, -1e-2, 1e-2, 3.0] {
                assert!(bernoulli_divided_difference(w, s) > 0.0);
            }
        }
    }
}
