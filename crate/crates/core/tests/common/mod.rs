//! Shared assertions for the integration suites.

#![allow(dead_code)]

/// |a − b| as a fraction of max(|b|, floor); floor guards division near zero.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// Asserts |a − b| ≤ tol, with a labeled message.
pub fn assert_abs(a: f64, b: f64, tol: f64, what: &str) {
    let err = (a - b).abs();
    assert!(
        err <= tol,
        "{what}: got {a:.17e}, want {b:.17e}, |err| = {err:.3e} > {tol:.1e}"
    );
}

/// Asserts the relative error (floored at 1) is ≤ tol.
pub fn assert_rel(a: f64, b: f64, tol: f64, what: &str) {
    let err = rel_err(a, b, 1.0);
    assert!(
        err <= tol,
        "{what}: got {a:.17e}, want {b:.17e}, rel err = {err:.3e} > {tol:.1e}"
    );
}
