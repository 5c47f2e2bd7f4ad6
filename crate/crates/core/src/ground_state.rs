//! The standing-wave family: closed-form profiles φ_ω, their ω-derivative,
//! and the derived vectors Φ_ω = (φ_ω, iωφ_ω), ψ_ω = (∂_ωφ_ω, iω∂_ωφ_ω),
//! Ψ_ω = (4ωφ_ω, 0).
//!
//! φ_ω solves −φ″ + (1−ω²)φ = φ^p on the line and is sampled here as a
//! periodized image sum, which keeps the sampled function smooth across the
//! wrap boundary; one-shot sampling would leave a derivative jump whose
//! spectral ringing violates the residual contract on coarse-decay configs.

use num_complex::Complex;

use crate::field::{Pair, PhaseState};
use crate::grid::Grid;
use crate::scalar::{cmod, fabs, Real};
use crate::{Error, Result};

/// Number of periodic images summed on each side when sampling profiles.
const IMAGES: i32 = 2;

/// Largest single-image profile value tolerated at the domain boundary.
const BOUNDARY_DECAY_TOL: f64 = 1e-8;

/// Exponent and frequency of one standing wave, with validation.
#[derive(Clone, Copy, Debug)]
pub struct SolitonParams<T: Real> {
    p: T,
    omega: T,
}

impl<T: Real> SolitonParams<T> {
    /// Requires 1 < p < 5 and |ω| < 1.
    pub fn new(p: T, omega: T) -> Result<Self> {
        if !p.is_finite() || !(p > T::one()) || !(p < T::of(5.0)) {
            return Err(Error::InvalidParameter(format!(
                "exponent p must lie in (1, 5), got {p:?}"
            )));
        }
        if !omega.is_finite() || !(fabs(omega) < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "frequency omega must lie in (-1, 1), got {omega:?}"
            )));
        }
        Ok(Self { p, omega })
    }

    /// Parameters at the critical frequency ω_c(p).
    pub fn critical(p: T) -> Result<Self> {
        let omega = critical_frequency(p)?;
        Self::new(p, omega)
    }

    /// Same exponent, different frequency.
    pub fn with_omega(&self, omega: T) -> Result<Self> {
        Self::new(self.p, omega)
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    /// m² = 1 − ω², the squared mass of the shifted profile equation.
    pub fn m2(&self) -> T {
        T::one() - self.omega * self.omega
    }

    /// ω_c = √((p−1)/4).
    pub fn omega_c(&self) -> T {
        ((self.p - T::one()) / T::of(4.0)).sqrt()
    }
}

/// ω_c(p) = √((p−1)/4) for 1 < p < 5; strictly inside (0, 1).
pub fn critical_frequency<T: Real>(p: T) -> Result<T> {
    if !p.is_finite() || !(p > T::one()) || !(p < T::of(5.0)) {
        return Err(Error::InvalidParameter(format!(
            "exponent p must lie in (1, 5), got {p:?}"
        )));
    }
    Ok(((p - T::one()) / T::of(4.0)).sqrt())
}

/// The full standing-wave bundle on one grid.
#[derive(Clone, Debug)]
pub struct StandingWave<T: Real> {
    pub params: SolitonParams<T>,
    /// Profile φ_ω: real-valued, positive, even, decreasing in |x|.
    pub phi: Vec<Complex<T>>,
    /// Analytic ∂_ωφ_ω (chain rule on the closed form).
    pub dphi_domega: Vec<Complex<T>>,
    /// Φ_ω = (φ_ω, iωφ_ω) at t = 0.
    pub state: PhaseState<T>,
    /// ψ_ω = (∂_ωφ_ω, iω∂_ωφ_ω).
    pub psi: Pair<T>,
    /// Ψ_ω = (4ωφ_ω, 0).
    pub big_psi: Pair<T>,
}

impl<T: Real> StandingWave<T> {
    /// ∫|φ_ω|².
    pub fn phi_l2sq(&self, grid: &Grid<T>) -> T {
        let mut s = T::zero();
        for z in &self.phi {
            s = s + z.re * z.re;
        }
        s * grid.dx()
    }

    /// Pointwise potential φ_ω^{p−1}.
    pub fn potential(&self, _grid: &Grid<T>) -> Vec<T> {
        let pm1 = self.params.p - T::one();
        self.phi.iter().map(|z| z.re.powf(pm1)).collect()
    }

    /// iΦ_ω = (iφ_ω, −ωφ_ω), the gauge direction.
    pub fn i_phi(&self) -> Pair<T> {
        self.state.pair().rotated_i()
    }

    /// ∂ₓΦ_ω = (φ′_ω, iωφ′_ω), the translation direction.
    pub fn dx_phi(&self, grid: &Grid<T>) -> Pair<T> {
        let dphi = grid.ddx(&self.phi);
        let iom = Complex::new(T::zero(), self.params.omega);
        let v = dphi.iter().map(|z| *z * iom).collect();
        Pair::new(dphi, v)
    }

    /// ∂_ωΦ_ω = (∂_ωφ_ω, i(φ_ω + ω∂_ωφ_ω)).
    pub fn d_omega_phi(&self) -> Pair<T> {
        let iom = Complex::new(T::zero(), self.params.omega);
        let i = Complex::new(T::zero(), T::one());
        let v = self
            .dphi_domega
            .iter()
            .zip(&self.phi)
            .map(|(d, f)| *d * iom + *f * i)
            .collect();
        Pair::new(self.dphi_domega.clone(), v)
    }
}

/// ln sech(z), computed without overflow for any |z|.
fn ln_sech<T: Real>(z: T) -> T {
    let a = fabs(z);
    T::ln_2() - a - (-(a + a)).exp().ln_1p()
}

/// φ_0 at a single point: ((p+1)/2)^{1/(p−1)} sech^{2/(p−1)}((p−1)x/2),
/// with underflow flushed to an exact zero.
fn phi0_point<T: Real>(p: T, x: T) -> T {
    let alpha = T::one() / (p - T::one());
    let beta = (p - T::one()) / T::of(2.0);
    let log_val = alpha * ((p + T::one()) / T::of(2.0)).ln()
        + T::of(2.0) * alpha * ln_sech(beta * x);
    if log_val < T::of(-690.0) {
        T::zero()
    } else {
        log_val.exp()
    }
}

/// φ_ω at a single point via the rescaling φ_ω(x) = s^{2/(p−1)} φ_0(s·x),
/// s = √(1−ω²).
fn phi_omega_point<T: Real>(params: &SolitonParams<T>, x: T) -> T {
    let alpha = T::one() / (params.p - T::one());
    let s = params.m2().sqrt();
    s.powf(T::of(2.0) * alpha) * phi0_point(params.p, s * x)
}

/// ∂_ωφ_ω at a single point, by the chain rule on the rescaling:
/// −ω s^{2/(p−1)−2} φ_0(s·x) [2/(p−1) − s·x·tanh((p−1)s·x/2)].
fn dphi_domega_point<T: Real>(params: &SolitonParams<T>, x: T) -> T {
    let alpha = T::one() / (params.p - T::one());
    let beta = (params.p - T::one()) / T::of(2.0);
    let s = params.m2().sqrt();
    let sx = s * x;
    let two_alpha = T::of(2.0) * alpha;
    -params.omega
        * s.powf(two_alpha - T::of(2.0))
        * phi0_point(params.p, sx)
        * (two_alpha - sx * (beta * sx).tanh())
}

/// Periodized sample Σ_{|m| ≤ IMAGES} f(x + m·L) on every node.
fn sample_periodized<T: Real>(grid: &Grid<T>, f: impl Fn(T) -> T) -> Vec<Complex<T>> {
    grid.xs()
        .iter()
        .map(|&x| {
            let mut s = T::zero();
            for m in -IMAGES..=IMAGES {
                s = s + f(x + T::of(m as f64) * grid.length());
            }
            Complex::new(s, T::zero())
        })
        .collect()
}

/// Sup norm of the discrete elliptic residual −φ″ + m²φ − φ^p.
fn elliptic_residual_sup<T: Real>(grid: &Grid<T>, phi: &[Complex<T>], p: T, m2: T) -> T {
    let d2 = grid.d2x(phi);
    let mut worst = T::zero();
    for j in 0..grid.n() {
        let val = phi[j].re;
        let r = Complex::new(m2 * val - val.powf(p), T::zero()) - d2[j];
        let a = cmod(r);
        if a > worst {
            worst = a;
        }
    }
    worst
}

/// Samples φ_0 (the ω = 0 profile) and verifies the elliptic residual.
pub fn build_phi0<T: Real>(p: T, grid: &Grid<T>) -> Result<Vec<Complex<T>>> {
    let params = SolitonParams::new(p, T::zero())?;
    let phi = sample_periodized(grid, |x| phi_omega_point(&params, x));
    let res = elliptic_residual_sup(grid, &phi, p, T::one());
    if res > T::profile_residual_tol() {
        return Err(Error::ProfileAccuracy(format!(
            "discrete elliptic residual {res:?} exceeds tolerance; grid too short or too coarse"
        )));
    }
    Ok(phi)
}

/// Builds the standing-wave bundle at (p, ω): profile, ω-derivative, and the
/// vectors Φ_ω, ψ_ω, Ψ_ω. Rejects configurations whose profile has not
/// decayed at the wrap boundary or whose discrete residual is out of
/// tolerance.
pub fn build_family<T: Real>(params: SolitonParams<T>, grid: &Grid<T>) -> Result<StandingWave<T>> {
    let boundary = phi_omega_point(&params, -grid.length() / T::of(2.0));
    if boundary > T::of(BOUNDARY_DECAY_TOL) {
        return Err(Error::GridConfig(format!(
            "profile value {boundary:?} at the domain boundary; enlarge the domain"
        )));
    }
    let phi = sample_periodized(grid, |x| phi_omega_point(&params, x));
    let res = elliptic_residual_sup(grid, &phi, params.p, params.m2());
    if res > T::profile_residual_tol() {
        return Err(Error::ProfileAccuracy(format!(
            "discrete elliptic residual {res:?} exceeds tolerance; grid too short or too coarse"
        )));
    }
    let dphi = sample_periodized(grid, |x| dphi_domega_point(&params, x));

    let iom = Complex::new(T::zero(), params.omega);
    let v: Vec<Complex<T>> = phi.iter().map(|z| *z * iom).collect();
    let state = PhaseState::new(phi.clone(), v, T::zero());

    let psi_v: Vec<Complex<T>> = dphi.iter().map(|z| *z * iom).collect();
    let psi = Pair::new(dphi.clone(), psi_v);

    let four_omega = T::of(4.0) * params.omega;
    let big_u: Vec<Complex<T>> = phi.iter().map(|z| *z * four_omega).collect();
    let big_psi = Pair::new(big_u, vec![Complex::new(T::zero(), T::zero()); grid.n()]);

    Ok(StandingWave {
        params,
        phi,
        dphi_domega: dphi,
        state,
        psi,
        big_psi,
    })
}
