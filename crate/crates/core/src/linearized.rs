//! The linearized operator around the standing wave: the Hessian
//!
//! H(f, g) = ( −f″ + f − pφ^{p−1}·Re f − iφ^{p−1}·Im f + iωg ,  g − iωf ),
//!
//! which is half the second variation of E + ωQ at Φ_ω (the second variation
//! of the half-quadratic energy convention used throughout this crate). H is
//! real-linear but not complex-linear, symmetric in the real pairing
//! ⟨x, y⟩ = Re∫(x_u ȳ_u + x_v ȳ_v), with kernel {iΦ_ω, ∂ₓΦ_ω} and exactly
//! one negative eigenvalue at the critical frequency.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::field::{pair_inner, Pair};
use crate::grid::Grid;
use crate::ground_state::{SolitonParams, StandingWave};
use crate::scalar::{fabs, Real};
use crate::{Error, Result};

/// Default cap on the dense embedding dimension 4n.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// The Hessian as a grid operator.
#[derive(Clone, Debug)]
pub struct HessianOperator<T: Real> {
    params: SolitonParams<T>,
    /// φ_ω^{p−1} sampled on the grid.
    potential: Vec<T>,
    n: usize,
}

impl<T: Real> HessianOperator<T> {
    pub fn new(grid: &Grid<T>, wave: &StandingWave<T>) -> Self {
        Self {
            params: wave.params,
            potential: wave.potential(grid),
            n: grid.n(),
        }
    }

    pub fn params(&self) -> SolitonParams<T> {
        self.params
    }

    /// Applies H to a pair field on the operator's grid.
    pub fn apply(&self, grid: &Grid<T>, x: &Pair<T>) -> Pair<T> {
        assert_eq!(grid.n(), self.n, "operator assembled on a different grid");
        assert_eq!(x.len(), self.n, "operand does not live on this grid");
        let omega = self.params.omega();
        let p = self.params.p();
        let d2f = grid.d2x(&x.u);
        let mut fu = Vec::with_capacity(self.n);
        let mut fv = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let f = x.u[j];
            let g = x.v[j];
            let w = self.potential[j];
            // −f″ + f − pW·Re f − iW·Im f + iωg
            let re = -d2f[j].re + f.re - p * w * f.re - omega * g.im;
            let im = -d2f[j].im + f.im - w * f.im + omega * g.re;
            fu.push(Complex::new(re, im));
            // g − iωf
            fv.push(Complex::new(g.re + omega * f.im, g.im - omega * f.re));
        }
        Pair::new(fu, fv)
    }

    /// Dense real-symmetric matrix of H in the embedding
    /// (Re f, Im f, Re g, Im g); entry (i, j) is the i-th output coordinate
    /// of H applied to the j-th basis vector, so ⟨Hx, y⟩ = dx·yᵀMx.
    pub fn assemble_dense(&self, grid: &Grid<T>, dense_cap: usize) -> Result<DMatrix<T>> {
        let n = self.n;
        if 4 * n > dense_cap {
            return Err(Error::DenseCap(format!(
                "embedding dimension {} exceeds the cap {dense_cap}",
                4 * n
            )));
        }
        let d2 = second_derivative_matrix(grid);
        let omega = self.params.omega();
        let p = self.params.p();
        let mut m = DMatrix::<T>::zeros(4 * n, 4 * n);
        for i in 0..n {
            for j in 0..n {
                // Block (Re f, Re f): −D² + I − p·diag(W).
                let mut a = -d2[(i, j)];
                // Block (Im f, Im f): −D² + I − diag(W).
                let mut b = -d2[(i, j)];
                if i == j {
                    let w = self.potential[i];
                    a = a + T::one() - p * w;
                    b = b + T::one() - w;
                }
                m[(i, j)] = a;
                m[(n + i, n + j)] = b;
            }
            // Cross blocks from iωg and −iωf, and the identity on g.
            m[(i, 3 * n + i)] = -omega;
            m[(3 * n + i, i)] = -omega;
            m[(n + i, 2 * n + i)] = omega;
            m[(2 * n + i, n + i)] = omega;
            m[(2 * n + i, 2 * n + i)] = T::one();
            m[(3 * n + i, 3 * n + i)] = T::one();
        }
        // The spectral D² block is symmetric up to FFT roundoff; enforce
        // exact symmetry after checking the asymmetry is only roundoff.
        let mut worst = T::zero();
        let mut scale = T::zero();
        for i in 0..4 * n {
            for j in (i + 1)..4 * n {
                let d = fabs(m[(i, j)] - m[(j, i)]);
                if d > worst {
                    worst = d;
                }
                let a = fabs(m[(i, j)]);
                if a > scale {
                    scale = a;
                }
            }
        }
        if worst > T::of(1e-10) * (T::one() + scale) {
            return Err(Error::Eigensolver(format!(
                "assembled matrix asymmetry {worst:?} beyond roundoff"
            )));
        }
        let half = T::of(0.5);
        for i in 0..4 * n {
            for j in (i + 1)..4 * n {
                let s = (m[(i, j)] + m[(j, i)]) * half;
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
        }
        Ok(m)
    }
}

/// Spectral second-derivative operator as a dense circulant matrix.
pub fn second_derivative_matrix<T: Real>(grid: &Grid<T>) -> DMatrix<T> {
    let n = grid.n();
    let mut delta = vec![Complex::new(T::zero(), T::zero()); n];
    delta[0] = Complex::new(T::one(), T::zero());
    let col = grid.d2x(&delta);
    let mut m = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = col[(i + n - j) % n].re;
        }
    }
    m
}

/// Dense matrix of the scalar operator −∂ₓₓ + c − diag(w).
pub fn scalar_operator_matrix<T: Real>(grid: &Grid<T>, c: T, w: &[T]) -> DMatrix<T> {
    let n = grid.n();
    assert_eq!(w.len(), n, "potential does not live on this grid");
    let mut m = second_derivative_matrix(grid);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = -m[(i, j)];
        }
        m[(i, i)] += c - w[i];
    }
    m
}

/// Eigenvalues of a dense symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues<T: Real>(m: DMatrix<T>) -> Vec<T> {
    let mut ev: Vec<T> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("non-finite eigenvalue"));
    ev
}

/// Lowest-k eigenpairs of a dense symmetric matrix, ascending.
pub fn symmetric_lowest_eigenpairs<T: Real>(
    m: DMatrix<T>,
    k: usize,
) -> (Vec<T>, Vec<DVector<T>>) {
    let dim = m.nrows();
    let decomp = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .partial_cmp(&decomp.eigenvalues[b])
            .expect("non-finite eigenvalue")
    });
    let k = k.min(dim);
    let mut vals = Vec::with_capacity(k);
    let mut vecs = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        vals.push(decomp.eigenvalues[idx]);
        vecs.push(DVector::from(decomp.eigenvectors.column(idx).into_owned()));
    }
    (vals, vecs)
}

/// Low-lying spectrum of the Hessian with eigenvector pair fields.
#[derive(Clone, Debug)]
pub struct SpectrumReport<T: Real> {
    /// Lowest eigenvalues, ascending.
    pub eigenvalues: Vec<T>,
    /// Matching eigenvectors, orthonormal in the real pairing.
    pub eigenvectors: Vec<Pair<T>>,
    pub n_negative: usize,
    pub n_near_zero: usize,
    /// |μ| below this counts as zero: 1e−6 × the spectral radius estimate.
    pub threshold_zero: T,
}

/// Embeds a pair field into the real 4n vector (Re f, Im f, Re g, Im g).
pub fn embed<T: Real>(x: &Pair<T>) -> DVector<T> {
    let n = x.len();
    let mut v = DVector::<T>::zeros(4 * n);
    for j in 0..n {
        v[j] = x.u[j].re;
        v[n + j] = x.u[j].im;
        v[2 * n + j] = x.v[j].re;
        v[3 * n + j] = x.v[j].im;
    }
    v
}

/// Inverse of [`embed`].
pub fn unembed<T: Real>(v: &DVector<T>) -> Pair<T> {
    let n = v.len() / 4;
    let mut u = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for j in 0..n {
        u.push(Complex::new(v[j], v[n + j]));
        w.push(Complex::new(v[2 * n + j], v[3 * n + j]));
    }
    Pair::new(u, w)
}

impl<T: Real> HessianOperator<T> {
    /// Lowest-k eigenpairs with negative/near-zero counts over the whole
    /// spectrum. One dense decomposition; counts and the zero threshold use
    /// every eigenvalue, not only the k returned.
    pub fn spectrum(&self, grid: &Grid<T>, k: usize, dense_cap: usize) -> Result<SpectrumReport<T>> {
        let m = self.assemble_dense(grid, dense_cap)?;
        let dim = m.nrows();
        let decomp = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            decomp.eigenvalues[a]
                .partial_cmp(&decomp.eigenvalues[b])
                .expect("non-finite eigenvalue")
        });
        if decomp.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigensolver("non-finite eigenvalue".into()));
        }
        let mut radius = T::zero();
        for v in decomp.eigenvalues.iter() {
            let a = fabs(*v);
            if a > radius {
                radius = a;
            }
        }
        let threshold_zero = T::of(1e-6) * radius;
        let n_negative = decomp
            .eigenvalues
            .iter()
            .filter(|&&v| v < -threshold_zero)
            .count();
        let n_near_zero = decomp
            .eigenvalues
            .iter()
            .filter(|&&v| fabs(v) < threshold_zero)
            .count();
        let inv_sqrt_dx = (T::one() / grid.dx()).sqrt();
        let k = k.min(dim);
        let mut eigenvalues = Vec::with_capacity(k);
        let mut eigenvectors = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            eigenvalues.push(decomp.eigenvalues[idx]);
            let col = decomp.eigenvectors.column(idx).into_owned();
            eigenvectors.push(unembed(&(col * inv_sqrt_dx)));
        }
        Ok(SpectrumReport {
            eigenvalues,
            eigenvectors,
            n_negative,
            n_near_zero,
            threshold_zero,
        })
    }

    /// Minimum of the Rayleigh quotient ⟨Hx, x⟩ / ‖x‖²_{L²×L²} over the
    /// orthogonal complement of the constraint span. Positive return
    /// certifies coercivity of H on that complement.
    pub fn coercivity_margin(
        &self,
        grid: &Grid<T>,
        constraints: &[Pair<T>],
        dense_cap: usize,
    ) -> Result<T> {
        let mut m = self.assemble_dense(grid, dense_cap)?;
        let dim = m.nrows();
        // Orthonormalize the constraints (modified Gram-Schmidt); reject a
        // rank-deficient set.
        let mut basis: Vec<DVector<T>> = Vec::new();
        for c in constraints {
            let mut v = embed(c);
            for q in &basis {
                let proj = q.dot(&v);
                v.axpy(-proj, q, T::one());
            }
            let norm = v.norm();
            if norm < T::of(1e-10) {
                return Err(Error::InvalidParameter(
                    "constraint set is rank-deficient".into(),
                ));
            }
            v /= norm;
            basis.push(v);
        }
        if basis.is_empty() {
            let vals = symmetric_eigenvalues(m);
            return Ok(vals[0]);
        }
        // Project: M' = P M P + τ Σ qqᵀ with P = I − Σ qqᵀ; the penalty τ
        // pushes constraint directions above the physical spectrum so the
        // minimum eigenvalue of M' is the constrained minimum.
        let tau = T::of(10.0) * infinity_norm(&m) + T::one();
        let w: Vec<DVector<T>> = basis.iter().map(|q| &m * q).collect();
        let s: Vec<Vec<T>> = basis
            .iter()
            .map(|qi| w.iter().map(|wj| qi.dot(wj)).collect())
            .collect();
        for (i, qi) in basis.iter().enumerate() {
            // M −= q_i w_iᵀ + w_i q_iᵀ
            for r in 0..dim {
                for c in 0..dim {
                    m[(r, c)] -= qi[r] * w[i][c] + w[i][r] * qi[c];
                }
            }
        }
        for (i, qi) in basis.iter().enumerate() {
            for (j, qj) in basis.iter().enumerate() {
                let sij = s[i][j];
                for r in 0..dim {
                    for c in 0..dim {
                        m[(r, c)] += qi[r] * sij * qj[c];
                    }
                }
            }
            for r in 0..dim {
                for c in 0..dim {
                    m[(r, c)] += qi[r] * tau * qi[c];
                }
            }
        }
        let vals = symmetric_eigenvalues(m);
        Ok(vals[0])
    }

    /// Constants (C₁, C₂) of the pointwise bound
    /// ‖ξ‖²_{H¹×L²} ≤ C₁⟨Hξ, ξ⟩ + C₂‖ξ‖²_{L²×L²},
    /// valid for every pair field ξ on the grid: C₁ = 1/(1−|ω|),
    /// C₂ = p·max(φ^{p−1})/(1−|ω|).
    pub fn h1_bootstrap_constants(&self) -> (T, T) {
        let omega = fabs(self.params.omega());
        let p = self.params.p();
        let mut wmax = T::zero();
        for &w in &self.potential {
            if w > wmax {
                wmax = w;
            }
        }
        let c1 = T::one() / (T::one() - omega);
        (c1, p * wmax * c1)
    }
}

fn infinity_norm<T: Real>(m: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        let mut row = T::zero();
        for j in 0..m.ncols() {
            row += fabs(m[(i, j)]);
        }
        if row > worst {
            worst = row;
        }
    }
    worst
}

/// Largest principal angle (radians) between the spans of two orthonormal
/// bases given as pair fields; used to compare discrete kernels with their
/// analytic counterparts.
pub fn subspace_angle<T: Real>(grid: &Grid<T>, a: &[Pair<T>], b: &[Pair<T>]) -> T {
    assert_eq!(a.len(), b.len(), "subspaces must share a dimension");
    let k = a.len();
    let mut gram = DMatrix::<T>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = pair_inner(grid, &a[i], &b[j]);
        }
    }
    let svd = gram.svd(false, false);
    let mut smin = T::one();
    for s in svd.singular_values.iter() {
        if *s < smin {
            smin = *s;
        }
    }
    // Clamp for roundoff above 1.
    if smin > T::one() {
        smin = T::one();
    }
    smin.acos()
}

/// Gram-Schmidt in the real pairing; panics if the set is rank-deficient.
pub fn orthonormalize<T: Real>(grid: &Grid<T>, set: &[Pair<T>]) -> Vec<Pair<T>> {
    let mut out: Vec<Pair<T>> = Vec::new();
    for x in set {
        let mut v = x.clone();
        for q in &out {
            let proj = pair_inner(grid, &v, q);
            v = v.axpy(-proj, q);
        }
        let norm = pair_inner(grid, &v, &v).sqrt();
        assert!(norm > T::of(1e-10), "orthonormalization: dependent set");
        v = v.scaled(T::one() / norm);
        out.push(v);
    }
    out
}
