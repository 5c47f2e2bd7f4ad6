//! Conserved functionals of the Klein-Gordon flow and the action built from
//! them: charge Q, momentum P, energy E, and S_ω = E + ωQ.

use num_complex::Complex;

use crate::field::{Pair, PhaseState};
use crate::grid::{norms, Grid};
use crate::scalar::{modsq, Real};
use crate::Result;

/// The three conserved quantities of one state snapshot.
#[derive(Clone, Copy, Debug)]
pub struct ConservedTriple<T> {
    pub charge: T,
    pub momentum: T,
    pub energy: T,
}

/// Q(u, v) = Im ∫ u v̄ dx.
pub fn charge<T: Real>(grid: &Grid<T>, s: &PhaseState<T>) -> T {
    assert_eq!(s.len(), grid.n(), "state does not live on this grid");
    let mut acc = T::zero();
    for (a, b) in s.u.iter().zip(&s.v) {
        // Im(a·conj(b)) without forming the complex product.
        acc = acc + (a.im * b.re - a.re * b.im);
    }
    acc * grid.dx()
}

/// P(u, v) = Re ∫ ∂ₓu · v̄ dx.
pub fn momentum<T: Real>(grid: &Grid<T>, s: &PhaseState<T>) -> T {
    let du = grid.ddx(&s.u);
    let mut acc = T::zero();
    for (a, b) in du.iter().zip(&s.v) {
        acc = acc + (a.re * b.re + a.im * b.im);
    }
    acc * grid.dx()
}

/// E(u, v) = ½∫(|v|² + |∂ₓu|² + |u|²) − (1/(p+1))∫|u|^{p+1}.
pub fn energy<T: Real>(grid: &Grid<T>, s: &PhaseState<T>, p: T) -> Result<T> {
    let nu = norms(grid, &s.u, p)?;
    let mut v2 = T::zero();
    for z in &s.v {
        v2 = v2 + modsq(*z);
    }
    v2 = v2 * grid.dx();
    Ok(T::of(0.5) * (v2 + nu.h1sq) - nu.lp1 / (p + T::one()))
}

/// S(u, v) = E + ω_eff·Q; ω_eff may be a rescaled frequency λω.
pub fn action<T: Real>(grid: &Grid<T>, s: &PhaseState<T>, p: T, omega_eff: T) -> Result<T> {
    Ok(energy(grid, s, p)? + omega_eff * charge(grid, s))
}

/// All three conserved quantities from one snapshot.
pub fn conserved<T: Real>(grid: &Grid<T>, s: &PhaseState<T>, p: T) -> Result<ConservedTriple<T>> {
    Ok(ConservedTriple {
        charge: charge(grid, s),
        momentum: momentum(grid, s),
        energy: energy(grid, s, p)?,
    })
}

/// Gradient of Q in the real pairing: Q′(u, v) = (iv, −iu), so that
/// d/dε Q((u,v) + ε(f,g)) = ⟨Q′, (f,g)⟩.
pub fn charge_gradient<T: Real>(grid: &Grid<T>, s: &PhaseState<T>) -> Pair<T> {
    assert_eq!(s.len(), grid.n(), "state does not live on this grid");
    let i = Complex::new(T::zero(), T::one());
    let gu: Vec<Complex<T>> = s.v.iter().map(|z| *z * i).collect();
    let gv: Vec<Complex<T>> = s.u.iter().map(|z| -(*z * i)).collect();
    Pair::new(gu, gv)
}
