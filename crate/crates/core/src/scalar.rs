//! Scalar abstraction: the one trait every numerical routine is generic over.
//!
//! `Real` bundles the linear-algebra surface (`nalgebra::RealField`), FFT
//! compatibility (`rustfft::FftNum`), and f64-literal conversion. It is the
//! whole requirement set for the crate; `f64` is the working precision and
//! `f32` is supported for cheap exploratory runs.

use num_complex::Complex;

/// Floating-point scalar usable throughout the crate.
///
/// Deliberately not a supertrait of `num_traits::Float`: its inherent-style
/// methods (`sqrt`, `abs`, ...) collide with `nalgebra::RealField`'s. All
/// transcendental calls resolve through `RealField`.
pub trait Real:
    nalgebra::RealField + num_traits::FromPrimitive + num_traits::ToPrimitive + rustfft::FftNum
{
    /// Converts an `f64` literal; panics only if the value is unrepresentable.
    fn of(x: f64) -> Self;

    /// Largest acceptable sup-norm residual of the discrete elliptic equation
    /// for a constructed standing-wave profile. The contract value is 1e-9;
    /// single precision cannot represent that and gets a relaxed bound.
    fn profile_residual_tol() -> Self {
        Self::of(1e-9)
    }

    /// Bound on the spurious imaginary part of quantities that are real by
    /// construction (quadratures of real integrands computed in complex
    /// arithmetic).
    fn imag_residue_tol() -> Self {
        Self::of(1e-12)
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }

    fn profile_residual_tol() -> Self {
        5e-4
    }

    fn imag_residue_tol() -> Self {
        1e-4
    }
}

/// |x| without the `Signed`/`ComplexField` method-resolution clash.
pub fn fabs<T: Real>(x: T) -> T {
    <T as num_traits::Signed>::abs(&x)
}

/// |z|² using only ring operations.
pub fn modsq<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// |z|; avoids `num_complex::Complex::norm`, which needs `num_traits::Float`.
pub fn cmod<T: Real>(z: Complex<T>) -> T {
    modsq(z).sqrt()
}

/// arg z in (−π, π].
pub fn carg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

/// e^{iθ}.
pub fn expi<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}
