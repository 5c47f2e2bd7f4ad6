//! State containers: a complex pair field (u, v) with and without a time
//! stamp, plus the real inner product and norms used on pairs.

use num_complex::Complex;

use crate::grid::Grid;
use crate::scalar::{cmod, expi, modsq, Real};

/// A pair of complex grid functions, the vector (u, v) without dynamics.
#[derive(Clone, Debug)]
pub struct Pair<T: Real> {
    pub u: Vec<Complex<T>>,
    pub v: Vec<Complex<T>>,
}

impl<T: Real> Pair<T> {
    pub fn new(u: Vec<Complex<T>>, v: Vec<Complex<T>>) -> Self {
        assert_eq!(u.len(), v.len(), "pair components must share one grid");
        Self { u, v }
    }

    pub fn zeros(n: usize) -> Self {
        let z = vec![Complex::new(T::zero(), T::zero()); n];
        Self { u: z.clone(), v: z }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Componentwise x + c·y.
    pub fn axpy(&self, c: T, y: &Pair<T>) -> Pair<T> {
        assert_eq!(self.len(), y.len(), "pair length mismatch");
        let u = self
            .u
            .iter()
            .zip(&y.u)
            .map(|(a, b)| *a + *b * c)
            .collect();
        let v = self
            .v
            .iter()
            .zip(&y.v)
            .map(|(a, b)| *a + *b * c)
            .collect();
        Pair { u, v }
    }

    pub fn scaled(&self, c: T) -> Pair<T> {
        Pair {
            u: self.u.iter().map(|z| *z * c).collect(),
            v: self.v.iter().map(|z| *z * c).collect(),
        }
    }

    /// (i·u, i·v).
    pub fn rotated_i(&self) -> Pair<T> {
        let i = Complex::new(T::zero(), T::one());
        Pair {
            u: self.u.iter().map(|z| *z * i).collect(),
            v: self.v.iter().map(|z| *z * i).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.v)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// The dynamical state (u, v = ∂ₜu) at time t.
#[derive(Clone, Debug)]
pub struct PhaseState<T: Real> {
    pub u: Vec<Complex<T>>,
    pub v: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(u: Vec<Complex<T>>, v: Vec<Complex<T>>, t: T) -> Self {
        assert_eq!(u.len(), v.len(), "state components must share one grid");
        Self { u, v, t }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn pair(&self) -> Pair<T> {
        Pair {
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }

    /// Gauge rotation e^{iγ}(u, v); a symmetry of the flow.
    pub fn gauged(&self, gamma: T) -> PhaseState<T> {
        let ph = expi(gamma);
        PhaseState {
            u: self.u.iter().map(|z| *z * ph).collect(),
            v: self.v.iter().map(|z| *z * ph).collect(),
            t: self.t,
        }
    }

    pub fn sup_u(&self) -> T {
        let mut m = T::zero();
        for z in &self.u {
            let a = cmod(*z);
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .u
                .iter()
                .chain(&self.v)
                .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Real inner product ⟨x, y⟩ = Re ∫ (x_u ȳ_u + x_v ȳ_v) dx.
pub fn pair_inner<T: Real>(grid: &Grid<T>, x: &Pair<T>, y: &Pair<T>) -> T {
    assert_eq!(x.len(), grid.n(), "pair does not live on this grid");
    assert_eq!(y.len(), grid.n(), "pair does not live on this grid");
    let mut s = T::zero();
    for j in 0..grid.n() {
        let a = x.u[j] * y.u[j].conj() + x.v[j] * y.v[j].conj();
        s = s + a.re;
    }
    s * grid.dx()
}

/// ∫ |x_u|² + |x_v|² dx.
pub fn l2l2_normsq<T: Real>(grid: &Grid<T>, x: &Pair<T>) -> T {
    let mut s = T::zero();
    for j in 0..x.len() {
        s = s + modsq(x.u[j]) + modsq(x.v[j]);
    }
    s * grid.dx()
}

/// ∫ |∂ₓx_u|² + |x_u|² + |x_v|² dx, the squared H¹×L² norm.
pub fn h1l2_normsq<T: Real>(grid: &Grid<T>, x: &Pair<T>) -> T {
    let du = grid.ddx(&x.u);
    let mut s = T::zero();
    for j in 0..x.len() {
        s = s + modsq(du[j]) + modsq(x.u[j]) + modsq(x.v[j]);
    }
    s * grid.dx()
}
