//! Hamiltonian triple construction: spin and truncated-boson operator
//! factories, the pure-dephasing spin-boson model, the degenerate-coupling
//! (J^2) model, and validated user-supplied triples.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{check_hermitian, identity, kron, CMat, HilbertSpec};
use crate::scalar::{cplx, czero, re, Real};

/// System, environment and coupling Hamiltonians together with the lifted
/// total H = H_S x I + I x H_E + H_SE on the joint space.
#[derive(Debug, Clone)]
pub struct HamiltonianTriple<T: Real> {
    pub spec: HilbertSpec,
    pub h_s: CMat<T>,
    pub h_e: CMat<T>,
    /// Coupling, already on the joint space.
    pub h_se: CMat<T>,
    pub h_total: CMat<T>,
}

impl<T: Real> HamiltonianTriple<T> {
    /// Assemble and validate a triple from its parts.
    pub fn new(h_s: CMat<T>, h_e: CMat<T>, h_se: CMat<T>) -> Result<Self> {
        check_hermitian(&h_s, "H_S")?;
        check_hermitian(&h_e, "H_E")?;
        check_hermitian(&h_se, "H_SE")?;
        let spec = HilbertSpec::new(h_s.nrows(), h_e.nrows())?;
        if h_se.nrows() != spec.joint() {
            return Err(Error::dimension("H_SE", spec.joint(), h_se.nrows()));
        }
        let h_total = Self::lift_s(&h_s, &spec)? + Self::lift_e(&h_e, &spec)? + &h_se;
        Ok(HamiltonianTriple {
            spec,
            h_s,
            h_e,
            h_se,
            h_total,
        })
    }

    fn lift_s(h_s: &CMat<T>, spec: &HilbertSpec) -> Result<CMat<T>> {
        kron(h_s, &identity::<T>(spec.dim_e))
    }

    fn lift_e(h_e: &CMat<T>, spec: &HilbertSpec) -> Result<CMat<T>> {
        kron(&identity::<T>(spec.dim_s), h_e)
    }

    /// H_S x I on the joint space.
    pub fn lifted_h_s(&self) -> CMat<T> {
        Self::lift_s(&self.h_s, &self.spec).expect("validated dims")
    }

    /// I x H_E on the joint space.
    pub fn lifted_h_e(&self) -> CMat<T> {
        Self::lift_e(&self.h_e, &self.spec).expect("validated dims")
    }

    /// Free part H_S x I + I x H_E.
    pub fn h_free(&self) -> CMat<T> {
        self.lifted_h_s() + self.lifted_h_e()
    }
}

/// Jz and J^2 in the |j m> basis, m descending from j to -j; dimension 2j+1.
pub fn spin_ops<T: Real>(two_j: u32) -> Result<(CMat<T>, CMat<T>)> {
    if two_j == 0 {
        return Err(Error::parameter("j", "spin must be >= 1/2"));
    }
    let dim = two_j as usize + 1;
    let j = re::<T>(two_j as f64 / 2.0);
    let mut jz = CMat::<T>::zeros(dim, dim);
    for k in 0..dim {
        jz[(k, k)] = Complex::new(j - re(k as f64), T::zero());
    }
    let jsq = identity::<T>(dim) * Complex::new(j * (j + T::one()), T::zero());
    Ok((jz, jsq))
}

/// Parse a half-integer spin given as a float (0.5, 1.0, 1.5, ...).
pub fn two_j_from_float(j: f64) -> Result<u32> {
    let two_j = 2.0 * j;
    if !(two_j.fract().abs() < 1e-9) || two_j < 1.0 - 1e-9 {
        return Err(Error::parameter("j", format!("{j} is not a half-integer >= 1/2")));
    }
    Ok(two_j.round() as u32)
}

/// Truncated boson operators on the (n_max+1)-level space:
/// a[n-1,n] = sqrt(n); a_dag = a^H; num = a_dag a = diag(0..n_max).
/// The matrix element from |n_max> to the dropped level n_max+1 is cut.
pub fn boson_ops<T: Real>(n_max: usize) -> Result<(CMat<T>, CMat<T>, CMat<T>)> {
    if n_max < 1 {
        return Err(Error::parameter("n_max", "boson truncation must be >= 1"));
    }
    let dim = n_max + 1;
    let mut a = CMat::<T>::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex::new(re::<T>(n as f64).sqrt(), T::zero());
    }
    let a_dag = a.adjoint();
    let num = &a_dag * &a;
    Ok((a, a_dag, num))
}

/// One bath mode of the dephasing model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub omega: f64,
    pub g: num_complex::Complex<f64>,
}

/// Parameters for the built-in models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Spin j encoded as 2j.
    pub two_j: u32,
    /// System frequency (omega_0 for dephasing, omega for the J^2 model).
    pub omega: f64,
    /// Bath modes (dephasing model only).
    pub modes: Vec<Mode>,
    /// Oscillator quantum (J^2 model only).
    pub beta: f64,
    /// Coupling strength (J^2 model only).
    pub eta: f64,
    /// Boson truncation level per mode.
    pub n_max: usize,
}

impl ModelParams {
    /// Default dephasing preset: j = 1/2, three incommensurate modes.
    pub fn dephasing_default() -> Self {
        ModelParams {
            two_j: 1,
            omega: 1.0,
            modes: vec![
                Mode { omega: 1.0, g: num_complex::Complex::new(0.4, 0.0) },
                Mode { omega: 2.0_f64.sqrt(), g: num_complex::Complex::new(0.4, 0.0) },
                Mode { omega: 5.0_f64.sqrt(), g: num_complex::Complex::new(0.4, 0.0) },
            ],
            beta: 0.0,
            eta: 0.0,
            n_max: 3,
        }
    }

    /// Default J^2 preset: j = 1/2, omega = beta = 1, eta = 0.3.
    pub fn jsquared_default() -> Self {
        ModelParams {
            two_j: 1,
            omega: 1.0,
            modes: Vec::new(),
            beta: 1.0,
            eta: 0.3,
            n_max: 6,
        }
    }
}

/// Lift a single-mode operator into the K-mode product space at mode `k`.
fn lift_mode<T: Real>(op: &CMat<T>, k: usize, dims: &[usize]) -> Result<CMat<T>> {
    let mut out = identity::<T>(1);
    for (m, &d) in dims.iter().enumerate() {
        let factor = if m == k { op.clone() } else { identity::<T>(d) };
        out = kron(&out, &factor)?;
    }
    Ok(out)
}

/// Pure-dephasing spin-boson model:
/// H_S = omega_0 Jz, H_E = sum_k omega_k a_k^+ a_k,
/// H_SE = Jz x sum_k (g_k a_k + g_k^* a_k^+).
/// The shared system operator Jz makes [H_S, H_SE] = 0 by construction.
pub fn build_dephasing_model<T: Real>(params: &ModelParams) -> Result<HamiltonianTriple<T>> {
    if params.modes.is_empty() {
        return Err(Error::parameter("modes", "dephasing model needs >= 1 mode"));
    }
    let (jz, _) = spin_ops::<T>(params.two_j)?;
    let h_s = &jz * cplx::<T>(params.omega, 0.0);

    let n_modes = params.modes.len();
    let dims = vec![params.n_max + 1; n_modes];
    let env_dim: usize = dims.iter().product();
    let (a, a_dag, num) = boson_ops::<T>(params.n_max)?;

    let mut h_e = CMat::<T>::zeros(env_dim, env_dim);
    let mut coupling_e = CMat::<T>::zeros(env_dim, env_dim);
    for (k, mode) in params.modes.iter().enumerate() {
        h_e += lift_mode(&num, k, &dims)? * cplx::<T>(mode.omega, 0.0);
        let b = &a * cplx::<T>(mode.g.re, mode.g.im) + &a_dag * cplx::<T>(mode.g.re, -mode.g.im);
        coupling_e += lift_mode(&b, k, &dims)?;
    }
    let h_se = kron(&jz, &coupling_e)?;
    HamiltonianTriple::new(h_s, h_e, h_se)
}

/// Degenerate-coupling model:
/// H_S = omega Jz, H_E = beta a^+ a, H_SE = eta (a^+ + a) x J^2.
/// J^2 = j(j+1) I on the multiplet, so H_SE acts as the identity on S:
/// [H_S, H_SE] = 0 while [H_E, H_SE] != 0 for eta != 0.
pub fn build_jsquared_model<T: Real>(params: &ModelParams) -> Result<HamiltonianTriple<T>> {
    if !params.omega.is_finite() || !params.beta.is_finite() || !params.eta.is_finite() {
        return Err(Error::parameter("omega/beta/eta", "must be finite reals"));
    }
    let (jz, jsq) = spin_ops::<T>(params.two_j)?;
    let h_s = &jz * cplx::<T>(params.omega, 0.0);
    let (a, a_dag, num) = boson_ops::<T>(params.n_max)?;
    let h_e = &num * cplx::<T>(params.beta, 0.0);
    let x = (&a + &a_dag) * cplx::<T>(params.eta, 0.0);
    let h_se = kron(&jsq, &x)?;
    HamiltonianTriple::new(h_s, h_e, h_se)
}

/// Validated user-supplied triple.
pub fn build_custom_model<T: Real>(
    h_s: CMat<T>,
    h_e: CMat<T>,
    h_se: CMat<T>,
) -> Result<HamiltonianTriple<T>> {
    HamiltonianTriple::new(h_s, h_e, h_se)
}

/// The sigma_x x sigma_x counterexample: qubit system (H_S = sigma_z),
/// qubit environment (H_E = sigma_z), coupling strength * sigma_x x sigma_x.
pub fn build_counterexample_model<T: Real>(strength: f64) -> Result<HamiltonianTriple<T>> {
    let sz = CMat::<T>::from_row_slice(
        2,
        2,
        &[cplx(1., 0.), czero(), czero(), cplx(-1., 0.)],
    );
    let sx = CMat::<T>::from_row_slice(
        2,
        2,
        &[czero(), cplx(1., 0.), cplx(1., 0.), czero()],
    );
    let h_se = kron(&sx, &sx)? * cplx::<T>(strength, 0.0);
    HamiltonianTriple::new(sz.clone(), sz, h_se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator_norm, max_abs};

    #[test]
    fn spin_half_ops() {
        let (jz, jsq) = spin_ops::<f64>(1).unwrap();
        assert_eq!(jz[(0, 0)], cplx(0.5, 0.));
        assert_eq!(jz[(1, 1)], cplx(-0.5, 0.));
        assert_eq!(jsq[(0, 0)], cplx(0.75, 0.));
        assert!(commutator_norm(&jz, &jsq).unwrap() == 0.0);
    }

    #[test]
    fn spin_one_ops() {
        let (jz, jsq) = spin_ops::<f64>(2).unwrap();
        assert_eq!(jz[(0, 0)], cplx(1., 0.));
        assert_eq!(jz[(1, 1)], cplx(0., 0.));
        assert_eq!(jz[(2, 2)], cplx(-1., 0.));
        assert_eq!(jsq[(1, 1)], cplx(2., 0.));
    }

    #[test]
    fn spin_rejects_zero() {
        assert!(spin_ops::<f64>(0).is_err());
        assert!(two_j_from_float(0.7).is_err());
        assert_eq!(two_j_from_float(1.5).unwrap(), 3);
    }

    #[test]
    fn boson_ladder() {
        let (a, a_dag, num) = boson_ops::<f64>(3).unwrap();
        assert_eq!(a[(0, 1)], cplx(1., 0.));
        assert_eq!(a[(1, 2)], cplx(2f64.sqrt(), 0.));
        for n in 0..4 {
            assert!((num[(n, n)] - cplx(n as f64, 0.)).norm() < 1e-14);
        }
        // truncated commutator: identity except bottom-right entry -n_max
        let comm = &a * &a_dag - &a_dag * &a;
        for n in 0..3 {
            assert!((comm[(n, n)] - cplx(1., 0.)).norm() < 1e-14);
        }
        assert!((comm[(3, 3)] - cplx(-3., 0.)).norm() < 1e-14);
    }

    #[test]
    fn boson_rejects_zero_levels() {
        assert!(boson_ops::<f64>(0).is_err());
    }

    #[test]
    fn dephasing_commutes_with_system() {
        let params = ModelParams::dephasing_default();
        let m = build_dephasing_model::<f64>(&params).unwrap();
        assert_eq!(m.spec.dim_s, 2);
        assert_eq!(m.spec.dim_e, 64);
        assert!(commutator_norm(&m.lifted_h_s(), &m.h_se).unwrap() < 1e-12);
    }

    #[test]
    fn dephasing_one_mode_dimensions() {
        let mut params = ModelParams::dephasing_default();
        params.modes.truncate(1);
        params.n_max = 3;
        let m = build_dephasing_model::<f64>(&params).unwrap();
        assert_eq!(m.spec.joint(), 8);
    }

    #[test]
    fn dephasing_decoupled_when_g_zero() {
        let mut params = ModelParams::dephasing_default();
        for mode in &mut params.modes {
            mode.g = num_complex::Complex::new(0., 0.);
        }
        params.n_max = 1;
        let m = build_dephasing_model::<f64>(&params).unwrap();
        assert_eq!(max_abs(&m.h_se), 0.0);
    }

    #[test]
    fn dephasing_rejects_empty_modes() {
        let mut params = ModelParams::dephasing_default();
        params.modes.clear();
        assert!(build_dephasing_model::<f64>(&params).is_err());
    }

    #[test]
    fn jsquared_commutators() {
        let mut params = ModelParams::jsquared_default();
        params.n_max = 2;
        let m = build_jsquared_model::<f64>(&params).unwrap();
        assert!(commutator_norm(&m.lifted_h_s(), &m.h_se).unwrap() < 1e-12);
        assert!(commutator_norm(&m.lifted_h_e(), &m.h_se).unwrap() > 1e-6);
    }

    #[test]
    fn jsquared_diagonal_block_structure() {
        // <jm|H|jm> = omega m + beta a^+a + eta j(j+1)(a^+ + a)
        let params = ModelParams::jsquared_default();
        let m = build_jsquared_model::<f64>(&params).unwrap();
        let (a, a_dag, num) = boson_ops::<f64>(params.n_max).unwrap();
        let gamma_j = params.eta * 0.5 * 1.5;
        let ne = params.n_max + 1;
        for (block, mval) in [(0usize, 0.5), (1usize, -0.5)] {
            let expect = &num * cplx(params.beta, 0.)
                + (&a + &a_dag) * cplx(gamma_j, 0.)
                + identity::<f64>(ne) * cplx(params.omega * mval, 0.);
            let mut got = CMat::<f64>::zeros(ne, ne);
            for r in 0..ne {
                for c in 0..ne {
                    got[(r, c)] = m.h_total[(block * ne + r, block * ne + c)];
                }
            }
            assert!(max_abs(&(got - expect)) < 1e-13);
        }
    }

    #[test]
    fn jsquared_eta_zero_decouples() {
        let mut params = ModelParams::jsquared_default();
        params.eta = 0.0;
        params.n_max = 2;
        let m = build_jsquared_model::<f64>(&params).unwrap();
        assert_eq!(max_abs(&m.h_se), 0.0);
    }

    #[test]
    fn custom_model_validates() {
        let m = build_counterexample_model::<f64>(0.4).unwrap();
        assert!(commutator_norm(&m.lifted_h_e(), &m.h_se).unwrap() > 1e-3);

        let mut bad = CMat::<f64>::zeros(4, 4);
        bad[(0, 1)] = cplx(1., 0.);
        let sz = CMat::<f64>::from_row_slice(2, 2, &[cplx(1., 0.), czero(), czero(), cplx(-1., 0.)]);
        let err = build_custom_model(sz.clone(), sz, bad).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { name: "H_SE", .. }));
    }

    #[test]
    fn scalar_spaces_commute() {
        let one = identity::<f64>(1);
        let m = build_custom_model(one.clone(), one.clone(), one).unwrap();
        assert_eq!(commutator_norm(&m.lifted_h_s(), &m.h_se).unwrap(), 0.0);
        assert_eq!(commutator_norm(&m.lifted_h_e(), &m.h_se).unwrap(), 0.0);
    }
}
