//! Dense complex linear algebra primitives: Kronecker products, partial
//! traces, Hermitian eigendecompositions and unitary propagators.
//!
//! Conventions (fixed globally): hbar = 1, joint basis index = i*N + alpha
//! (system-major), default norm = Frobenius, summations run index-ascending.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, re, Real};

/// Dense complex matrix, the universal carrier for operators and states.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex vector.
pub type CVec<T> = DVector<Complex<T>>;

/// Hermiticity tolerance used by contract checks.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dimensions of the system/environment factorization of the joint space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    /// System dimension n.
    pub dim_s: usize,
    /// Environment dimension N.
    pub dim_e: usize,
}

impl HilbertSpec {
    pub fn new(dim_s: usize, dim_e: usize) -> Result<Self> {
        if dim_s == 0 || dim_e == 0 {
            return Err(Error::parameter("HilbertSpec", "dimensions must be >= 1"));
        }
        Ok(HilbertSpec { dim_s, dim_e })
    }

    /// Joint dimension n*N.
    pub fn joint(&self) -> usize {
        self.dim_s * self.dim_e
    }

    /// Joint basis index for |i> x |alpha> (system-major).
    #[inline]
    pub fn idx(&self, i: usize, alpha: usize) -> usize {
        i * self.dim_e + alpha
    }
}

/// n x n identity.
pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::<T>::identity(n, n)
}

/// Maximum absolute entry of `a`.
pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    let mut m = T::zero();
    for v in a.iter() {
        let n = crate::scalar::cnorm(*v);
        if n > m {
            m = n;
        }
    }
    m
}

/// Frobenius norm.
pub fn frobenius<T: Real>(a: &CMat<T>) -> T {
    a.norm()
}

/// Max-entry deviation from Hermiticity, max_ij |A_ij - conj(A_ji)|.
pub fn hermiticity_deviation<T: Real>(a: &CMat<T>) -> T {
    let mut dev = T::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = crate::scalar::cnorm(a[(i, j)] - a[(j, i)].conj());
            if d > dev {
                dev = d;
            }
        }
    }
    dev
}

fn check_square<T: Real>(a: &CMat<T>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Check `a` is square and Hermitian within `HERMITICITY_TOL`.
pub fn check_hermitian<T: Real>(a: &CMat<T>, name: &'static str) -> Result<()> {
    check_square(a)?;
    let dev = hermiticity_deviation(a);
    if dev > re(HERMITICITY_TOL) {
        return Err(Error::NotHermitian {
            name,
            deviation: crate::scalar::to_f64(dev),
        });
    }
    Ok(())
}

/// Kronecker product of two square matrices:
/// (A x B)[(i*p+k),(j*p+l)] = A[i,j] * B[k,l].
pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
    let m = check_square(a)?;
    let p = check_square(b)?;
    let mut out = CMat::<T>::zeros(m * p, m * p);
    for i in 0..m {
        for j in 0..m {
            let aij = a[(i, j)];
            for k in 0..p {
                for l in 0..p {
                    out[(i * p + k, j * p + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of two vectors, same index convention.
pub fn kron_vec<T: Real>(a: &CVec<T>, b: &CVec<T>) -> CVec<T> {
    let m = a.len();
    let p = b.len();
    let mut out = CVec::<T>::zeros(m * p);
    for i in 0..m {
        for k in 0..p {
            out[i * p + k] = a[i] * b[k];
        }
    }
    out
}

/// Partial trace over the environment factor:
/// out[i1,i2] = sum_gamma rho[(i1*N+g),(i2*N+g)].
pub fn partial_trace_env<T: Real>(rho: &CMat<T>, spec: &HilbertSpec) -> Result<CMat<T>> {
    let d = check_square(rho)?;
    if d != spec.joint() {
        return Err(Error::dimension("partial_trace_env", spec.joint(), d));
    }
    let (n, ne) = (spec.dim_s, spec.dim_e);
    let mut out = CMat::<T>::zeros(n, n);
    for i1 in 0..n {
        for i2 in 0..n {
            let mut acc = czero::<T>();
            for g in 0..ne {
                acc += rho[(spec.idx(i1, g), spec.idx(i2, g))];
            }
            out[(i1, i2)] = acc;
        }
    }
    Ok(out)
}

/// Partial trace over the system factor:
/// out[a1,a2] = sum_j rho[(j*N+a1),(j*N+a2)].
pub fn partial_trace_sys<T: Real>(rho: &CMat<T>, spec: &HilbertSpec) -> Result<CMat<T>> {
    let d = check_square(rho)?;
    if d != spec.joint() {
        return Err(Error::dimension("partial_trace_sys", spec.joint(), d));
    }
    let (n, ne) = (spec.dim_s, spec.dim_e);
    let mut out = CMat::<T>::zeros(ne, ne);
    for a1 in 0..ne {
        for a2 in 0..ne {
            let mut acc = czero::<T>();
            for j in 0..n {
                acc += rho[(spec.idx(j, a1), spec.idx(j, a2))];
            }
            out[(a1, a2)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    /// Real eigenvalues, ascending.
    pub values: DVector<T>,
    /// Unitary matrix of eigenvectors (columns), matching `values` order.
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn new(h: &CMat<T>, name: &'static str) -> Result<Self> {
        check_hermitian(h, name)?;
        let eig = h.clone().symmetric_eigen();
        let n = h.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let mut vectors = CMat::<T>::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(k));
        }
        Ok(HermitianEigen { values, vectors })
    }

    /// Reassemble f(H) = V diag(f(lambda)) V^H for a complex-valued f.
    pub fn apply_fn(&self, f: impl Fn(T) -> Complex<T>) -> CMat<T> {
        let d = DMatrix::from_diagonal(&self.values.map(f));
        &self.vectors * d * self.vectors.adjoint()
    }

    /// Smallest eigenvalue.
    pub fn min_value(&self) -> T {
        self.values[0]
    }

    /// Largest eigenvalue.
    pub fn max_value(&self) -> T {
        self.values[self.values.len() - 1]
    }
}

/// Unitary propagator exp(-i H dt) of a Hermitian generator, computed by
/// eigendecomposition (exact to machine precision at desk dimensions).
pub fn unitary_from_hamiltonian<T: Real>(h: &CMat<T>, dt: T) -> Result<CMat<T>> {
    let eig = HermitianEigen::new(h, "hamiltonian")?;
    Ok(eig.apply_fn(|lam| {
        let phase = -lam * dt;
        Complex::new(phase.cos(), phase.sin())
    }))
}

/// Cached propagator for a fixed Hermitian generator; the eigendecomposition
/// is computed once and shared across time points.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    eig: HermitianEigen<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(h: &CMat<T>, name: &'static str) -> Result<Self> {
        Ok(Propagator {
            eig: HermitianEigen::new(h, name)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.eig.values.len()
    }

    /// U(dt) = exp(-i H dt).
    pub fn unitary(&self, dt: T) -> CMat<T> {
        self.eig.apply_fn(|lam| {
            let phase = -lam * dt;
            Complex::new(phase.cos(), phase.sin())
        })
    }

    /// Evolve a pure state: psi(dt) = U(dt) psi.
    pub fn evolve_vec(&self, psi: &CVec<T>, dt: T) -> CVec<T> {
        let mut y = self.eig.vectors.adjoint() * psi;
        for (k, v) in y.iter_mut().enumerate() {
            let phase = -self.eig.values[k] * dt;
            *v *= Complex::new(phase.cos(), phase.sin());
        }
        &self.eig.vectors * y
    }

    /// Evolve a density matrix: rho(dt) = U rho U^H.
    pub fn evolve_density(&self, rho: &CMat<T>, dt: T) -> CMat<T> {
        let u = self.unitary(dt);
        &u * rho * u.adjoint()
    }
}

/// Commutator AB - BA.
pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
    let n = check_square(a)?;
    let m = check_square(b)?;
    if n != m {
        return Err(Error::dimension("commutator", n, m));
    }
    Ok(a * b - b * a)
}

/// Frobenius norm of the commutator AB - BA.
pub fn commutator_norm<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<T> {
    Ok(frobenius(&commutator(a, b)?))
}

/// General matrix exponential by scaling-and-squaring with a Taylor series.
/// Used for the Zassenhaus correction factors, which are anti-Hermitian but
/// not generated directly from a Hermitian matrix.
pub fn expm<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    let n = check_square(a)?;
    let norm = frobenius(a);
    let mut squarings = 0u32;
    let mut scale = T::one();
    let half = re::<T>(0.5);
    let mut scaled_norm = norm;
    while scaled_norm > half && squarings < 60 {
        scaled_norm *= half;
        scale *= half;
        squarings += 1;
    }
    let b = a.map(|v| v * Complex::new(scale, T::zero()));
    let mut term = identity::<T>(n);
    let mut sum = identity::<T>(n);
    for k in 1..=20 {
        term = (&term * &b) / Complex::new(re::<T>(k as f64), T::zero());
        sum += &term;
        if frobenius(&term) < re(1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Trace of a matrix.
pub fn trace<T: Real>(a: &CMat<T>) -> Complex<T> {
    let mut acc = czero::<T>();
    for k in 0..a.nrows().min(a.ncols()) {
        acc += a[(k, k)];
    }
    acc
}

/// Smallest eigenvalue of a Hermitian matrix (for PSD checks).
pub fn min_eigenvalue<T: Real>(a: &CMat<T>, name: &'static str) -> Result<T> {
    Ok(HermitianEigen::new(a, name)?.min_value())
}

/// Validate a density matrix: Hermitian, unit trace, PSD within `tol`.
pub fn check_density<T: Real>(rho: &CMat<T>, tol: f64, name: &'static str) -> Result<()> {
    check_hermitian(rho, name)?;
    let tr = trace(rho);
    if crate::scalar::cnorm(tr - cone::<T>()) > re(tol) {
        return Err(Error::State(format!(
            "{name}: trace deviates from 1 by {:e}",
            crate::scalar::to_f64(crate::scalar::cnorm(tr - cone::<T>()))
        )));
    }
    let min = min_eigenvalue(rho, name)?;
    if min < -re::<T>(tol) {
        return Err(Error::State(format!(
            "{name}: smallest eigenvalue {:e} below -{tol:e}",
            crate::scalar::to_f64(min)
        )));
    }
    Ok(())
}
