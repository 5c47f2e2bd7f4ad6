//! Periodic grid and Fourier spectral calculus.
//!
//! The domain is [−L/2, L/2) with periodic wrap, sampled at n equispaced
//! nodes (n a power of two). Differentiation is exact for trigonometric
//! polynomials resolvable on the grid; quadrature is the periodic trapezoid
//! rule dx·Σ, spectrally accurate for smooth periodic integrands.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::{cmod, fabs, modsq, Real};
use crate::{Error, Result};

/// Periodic spatial discretization plus cached FFT plans.
#[derive(Clone)]
pub struct Grid<T: Real> {
    n: usize,
    length: T,
    dx: T,
    xs: Vec<T>,
    ks: Vec<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl<T: Real> Grid<T> {
    /// Builds a grid of `n` nodes on [−length/2, length/2).
    pub fn new(length: T, n: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidParameter(
                "grid length must be positive and finite".into(),
            ));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "node count must be a power of two >= 16, got {n}"
            )));
        }
        let nt = T::of(n as f64);
        let dx = length / nt;
        let half = length / T::of(2.0);
        let xs: Vec<T> = (0..n).map(|j| T::of(j as f64) * dx - half).collect();
        let two_pi_over_l = T::two_pi() / length;
        let ks: Vec<T> = (0..n)
            .map(|j| {
                let js = if j <= n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                two_pi_over_l * T::of(js)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self {
            n,
            length,
            dx,
            xs,
            ks,
            fwd,
            inv,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Node coordinates −L/2 + j·dx.
    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    /// Wavenumbers 2π·j/L in FFT ordering (j = 0..n/2, then negative).
    pub fn ks(&self) -> &[T] {
        &self.ks
    }

    fn check_len(&self, f: &[Complex<T>]) {
        assert_eq!(
            f.len(),
            self.n,
            "field length {} does not match grid node count {}",
            f.len(),
            self.n
        );
    }

    fn check_finite(&self, f: &[Complex<T>]) {
        assert!(
            f.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "non-finite sample in grid function"
        );
    }

    /// Unnormalized forward DFT.
    pub fn fft(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        self.check_len(f);
        let mut buf = f.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse DFT including the 1/n normalization.
    pub fn ifft(&self, fhat: &[Complex<T>]) -> Vec<Complex<T>> {
        self.check_len(fhat);
        let mut buf = fhat.to_vec();
        self.inv.process(&mut buf);
        let scale = T::one() / T::of(self.n as f64);
        for z in &mut buf {
            *z = *z * scale;
        }
        buf
    }

    /// In-place unnormalized forward DFT; scratch must hold `scratch_len()`.
    pub fn fft_inplace(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.check_len(buf);
        self.fwd.process_with_scratch(buf, scratch);
    }

    /// In-place inverse DFT including normalization.
    pub fn ifft_inplace(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.check_len(buf);
        self.inv.process_with_scratch(buf, scratch);
        let scale = T::one() / T::of(self.n as f64);
        for z in buf.iter_mut() {
            *z = *z * scale;
        }
    }

    /// Scratch size for the in-place transform entry points.
    pub fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    /// Spectral first derivative (multiplier i·k, Nyquist mode zeroed).
    pub fn ddx(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        self.check_finite(f);
        let mut fhat = self.fft(f);
        let nyquist = self.n / 2;
        for (j, z) in fhat.iter_mut().enumerate() {
            if j == nyquist {
                *z = Complex::new(T::zero(), T::zero());
            } else {
                let k = self.ks[j];
                *z = Complex::new(-z.im * k, z.re * k);
            }
        }
        self.ifft(&fhat)
    }

    /// Spectral second derivative (multiplier −k², Nyquist included).
    pub fn d2x(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        self.check_finite(f);
        let mut fhat = self.fft(f);
        for (j, z) in fhat.iter_mut().enumerate() {
            let k2 = self.ks[j] * self.ks[j];
            *z = *z * (-k2);
        }
        self.ifft(&fhat)
    }

    /// Samples of f(· − y): periodic translation by y via phase multipliers.
    /// The Nyquist mode is damped with the real factor cos(k·y) to keep the
    /// translation operator symmetric in ±k.
    pub fn shift(&self, f: &[Complex<T>], y: T) -> Vec<Complex<T>> {
        self.check_finite(f);
        let mut fhat = self.fft(f);
        let nyquist = self.n / 2;
        for (j, z) in fhat.iter_mut().enumerate() {
            let phase = -self.ks[j] * y;
            if j == nyquist {
                *z = *z * phase.cos();
            } else {
                *z = *z * Complex::new(phase.cos(), phase.sin());
            }
        }
        self.ifft(&fhat)
    }

    /// Periodic quadrature dx·Σ f_j of a complex grid function.
    pub fn quad_c(&self, f: &[Complex<T>]) -> Complex<T> {
        self.check_len(f);
        self.check_finite(f);
        let mut s = Complex::new(T::zero(), T::zero());
        for z in f {
            s = s + *z;
        }
        s * self.dx
    }

    /// Quadrature of an analytically real integrand handed over in complex
    /// form; the imaginary residue is a sanity check, not data.
    pub fn quad_re(&self, f: &[Complex<T>]) -> T {
        let s = self.quad_c(f);
        debug_assert!(
            fabs(s.im) <= T::imag_residue_tol() * (T::one() + fabs(s.re)),
            "imaginary quadrature residue too large for a real quantity"
        );
        s.re
    }

    /// Quadrature of a real grid function.
    pub fn quad(&self, f: &[T]) -> T {
        assert_eq!(f.len(), self.n, "field length does not match grid");
        let mut s = T::zero();
        for x in f {
            assert!(x.is_finite(), "non-finite sample in grid function");
            s = s + *x;
        }
        s * self.dx
    }

    /// Ratio of the largest spectral amplitude in the top octave of
    /// wavenumbers (|j| ≥ n/4) to the largest overall; ~1 means the grid is
    /// too coarse, ~0 means fully resolved. Returns 0 for the zero field.
    pub fn tail_fraction(&self, f: &[Complex<T>]) -> T {
        let fhat = self.fft(f);
        let mut max_all = T::zero();
        let mut max_tail = T::zero();
        let n = self.n;
        for (j, z) in fhat.iter().enumerate() {
            let js = if j <= n / 2 { j } else { n - j };
            let a = cmod(*z);
            if a > max_all {
                max_all = a;
            }
            if js >= n / 4 && a > max_tail {
                max_tail = a;
            }
        }
        if max_all == T::zero() {
            T::zero()
        } else {
            max_tail / max_all
        }
    }

    /// Same length, twice the nodes.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.length, self.n * 2)
    }

    /// Band-limited interpolation of `f` onto a finer grid of the same
    /// length (node count a power-of-two multiple); the inserted high modes
    /// are zero and the Nyquist coefficient is split across ±k_nyq.
    pub fn upsample(&self, f: &[Complex<T>], fine: &Grid<T>) -> Vec<Complex<T>> {
        assert!(
            fine.n >= self.n && fine.n % self.n == 0 && fine.length == self.length,
            "target grid must refine the source grid"
        );
        if fine.n == self.n {
            return f.to_vec();
        }
        let fhat = self.fft(f);
        let mut out = vec![Complex::new(T::zero(), T::zero()); fine.n];
        let half = self.n / 2;
        let ratio = T::of(fine.n as f64 / self.n as f64);
        for j in 0..self.n {
            let z = fhat[j] * ratio;
            if j < half {
                out[j] = z;
            } else if j == half {
                let h = z * T::of(0.5);
                out[half] = h;
                out[fine.n - half] = h;
            } else {
                out[fine.n - (self.n - j)] = z;
            }
        }
        fine.ifft(&out)
    }
}

/// Squared L², squared H¹, and L^{p+1} integrals of one grid function.
#[derive(Clone, Copy, Debug)]
pub struct Norms<T> {
    /// ∫|f|²
    pub l2sq: T,
    /// ∫|f|² + ∫|f′|²
    pub h1sq: T,
    /// ∫|f|^{p+1}
    pub lp1: T,
}

/// Computes the three norm integrals used by every functional.
pub fn norms<T: Real>(grid: &Grid<T>, f: &[Complex<T>], p: T) -> Result<Norms<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidParameter(format!(
            "norm exponent p must exceed 1, got {p:?}"
        )));
    }
    let df = grid.ddx(f);
    let half_exp = (p + T::one()) / T::of(2.0);
    let mut l2 = T::zero();
    let mut dl2 = T::zero();
    let mut lp1 = T::zero();
    for (z, dz) in f.iter().zip(&df) {
        let m = modsq(*z);
        l2 = l2 + m;
        dl2 = dl2 + modsq(*dz);
        lp1 = lp1 + m.powf(half_exp);
    }
    let dx = grid.dx();
    Ok(Norms {
        l2sq: l2 * dx,
        h1sq: (l2 + dl2) * dx,
        lp1: lp1 * dx,
    })
}
