//! Central finite differences for gradient verification.
//!
//! These helpers only ever call forward functions, so they stay independent
//! of every hand-written backward pass they are used to check.

/// Central-difference gradient of a scalar function at `x` with step `h`.
pub fn central_diff<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = f(&probe);
        probe[i] = x[i] - h;
        let minus = f(&probe);
        probe[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * h);
    }
    grad
}

/// Largest relative disagreement between two gradient vectors. Coordinates
/// where both magnitudes fall below `atol` are treated as matching zeros;
/// below that the finite-difference estimate is noise-dominated.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64], atol: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| {
            let scale = a.abs().max(n.abs());
            if scale <= atol {
                0.0
            } else {
                (a - n).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Dot product, used to turn tensor-valued outputs into scalar probe losses.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_diff_matches_polynomial_gradient() {
        // f(x, y) = x²y + 3y → ∇ = (2xy, x² + 3)
        let f = |v: &[f64]| v[0] * v[0] * v[1] + 3.0 * v[1];
        let x = [1.5, -2.0];
        let numeric = central_diff(f, &x, 1e-5);
        let analytic = [2.0 * 1.5 * -2.0, 1.5 * 1.5 + 3.0];
        assert!(max_rel_error(&analytic, &numeric, 1e-8) < 1e-9);
    }

    #[test]
    fn rel_error_ignores_joint_zeros() {
        assert_eq!(max_rel_error(&[0.0, 1.0], &[1e-9, 1.0], 1e-5), 0.0);
        assert!(max_rel_error(&[1.0], &[1.1], 1e-5) > 0.09);
    }
}
