//! Exact joint evolution, reduced states, the super-matrix dynamical map and
//! the Markov-condition diagnostics.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{
    check_density, frobenius, kron, kron_vec, partial_trace_env, partial_trace_sys, CMat, CVec,
    HermitianEigen, Propagator,
};
use crate::model::HamiltonianTriple;
use crate::scalar::{cone, czero, re, Real};

/// Tolerance for state validation (normalization, Hermiticity, trace).
pub const STATE_TOL: f64 = 1e-12;

/// Product initial condition: system amplitudes c and environment weights d,
/// rho(t0) = (sum c_i c_j^* |i><j|) x d.
#[derive(Debug, Clone)]
pub struct InitialState<T: Real> {
    pub c: CVec<T>,
    pub d: CMat<T>,
}

impl<T: Real> InitialState<T> {
    pub fn new(c: CVec<T>, d: CMat<T>) -> Result<Self> {
        let norm2 = c.iter().map(|v| v.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if (norm2 - T::one()).abs() > re(STATE_TOL) {
            return Err(Error::State(format!(
                "amplitudes not normalized: sum |c_i|^2 = {}",
                crate::scalar::to_f64(norm2)
            )));
        }
        check_density(&d, STATE_TOL, "environment weights d")?;
        Ok(InitialState { c, d })
    }

    /// Initial system density c c^H.
    pub fn rho_s0(&self) -> CMat<T> {
        &self.c * self.c.adjoint()
    }

    /// Initial joint density rho_S0 x d.
    pub fn joint_density(&self) -> CMat<T> {
        kron(&self.rho_s0(), &self.d).expect("square factors")
    }

    /// Maximally coherent system on `n` states with environment weights `d`.
    pub fn maximally_coherent(n: usize, d: CMat<T>) -> Result<Self> {
        let amp = Complex::new(re::<T>(1.0 / (n as f64).sqrt()), T::zero());
        Self::new(CVec::from_element(n, amp), d)
    }

    /// Vacuum environment weight matrix |0><0| of dimension `dim_e`.
    pub fn vacuum_env(dim_e: usize) -> CMat<T> {
        let mut d = CMat::<T>::zeros(dim_e, dim_e);
        d[(0, 0)] = cone();
        d
    }

    /// Maximally mixed environment I/N.
    pub fn maximally_mixed_env(dim_e: usize) -> CMat<T> {
        crate::linalg::identity::<T>(dim_e) * Complex::new(re::<T>(1.0 / dim_e as f64), T::zero())
    }
}

/// Uniform time grid t0 + k dt, k = 0..=steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T: Real> {
    pub t0: T,
    pub dt: T,
    pub steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t0: T, dt: T, steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(Error::parameter("steps", "time grid needs >= 1 step"));
        }
        if dt <= T::zero() {
            return Err(Error::parameter("dt", "time step must be positive"));
        }
        Ok(TimeGrid { t0, dt, steps })
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.steps)
            .map(|k| self.t0 + re::<T>(k as f64) * self.dt)
            .collect()
    }

    pub fn t_end(&self) -> T {
        self.t0 + re::<T>(self.steps as f64) * self.dt
    }
}

/// Evolve the joint density over an interval of length `t`:
/// U rho0 U^H with U = exp(-i H_total t).
pub fn evolve_joint<T: Real>(
    model: &HamiltonianTriple<T>,
    rho0: &CMat<T>,
    t: T,
) -> Result<CMat<T>> {
    if rho0.nrows() != model.spec.joint() || rho0.ncols() != model.spec.joint() {
        return Err(Error::dimension("evolve_joint", model.spec.joint(), rho0.nrows()));
    }
    let prop = Propagator::new(&model.h_total, "H_total")?;
    Ok(prop.evolve_density(rho0, t))
}

/// Reduced system state at elapsed time `t` for a product initial state.
pub fn reduced_state<T: Real>(
    model: &HamiltonianTriple<T>,
    state: &InitialState<T>,
    t: T,
) -> Result<CMat<T>> {
    let evo = Evolution::new(model, state)?;
    Ok(evo.reduced_at(t))
}

/// Trajectory evaluator: eigendecomposes H_total once and splits the initial
/// joint density into pure components (one per nonzero eigenvalue of d), so a
/// reduced state costs O(rank * dim^2) per time point.
pub struct Evolution<T: Real> {
    prop: Propagator<T>,
    spec: crate::linalg::HilbertSpec,
    /// (weight, joint pure component) pairs.
    components: Vec<(T, CVec<T>)>,
}

impl<T: Real> Evolution<T> {
    pub fn new(model: &HamiltonianTriple<T>, state: &InitialState<T>) -> Result<Self> {
        if state.c.len() != model.spec.dim_s || state.d.nrows() != model.spec.dim_e {
            return Err(Error::dimension(
                "Evolution",
                format!("({}, {})", model.spec.dim_s, model.spec.dim_e),
                format!("({}, {})", state.c.len(), state.d.nrows()),
            ));
        }
        let prop = Propagator::new(&model.h_total, "H_total")?;
        let d_eig = HermitianEigen::new(&state.d, "environment weights d")?;
        let mut components = Vec::new();
        for k in 0..d_eig.values.len() {
            let w = d_eig.values[k];
            if w > re(1e-14) {
                let phi = CVec::from_iterator(
                    state.d.nrows(),
                    d_eig.vectors.column(k).iter().cloned(),
                );
                components.push((w, kron_vec(&state.c, &phi)));
            }
        }
        Ok(Evolution {
            prop,
            spec: model.spec,
            components,
        })
    }

    /// Joint density at elapsed time `t`.
    pub fn joint_at(&self, t: T) -> CMat<T> {
        let dim = self.spec.joint();
        let mut rho = CMat::<T>::zeros(dim, dim);
        for (w, psi0) in &self.components {
            let psi = self.prop.evolve_vec(psi0, t);
            rho += (&psi * psi.adjoint()) * Complex::new(*w, T::zero());
        }
        rho
    }

    /// Reduced system state at elapsed time `t`.
    pub fn reduced_at(&self, t: T) -> CMat<T> {
        let n = self.spec.dim_s;
        let ne = self.spec.dim_e;
        let mut out = CMat::<T>::zeros(n, n);
        for (w, psi0) in &self.components {
            let psi = self.prop.evolve_vec(psi0, t);
            for i1 in 0..n {
                for i2 in 0..n {
                    let mut acc = czero::<T>();
                    for g in 0..ne {
                        acc += psi[i1 * ne + g] * psi[i2 * ne + g].conj();
                    }
                    out[(i1, i2)] += acc * Complex::new(*w, T::zero());
                }
            }
        }
        out
    }

    /// Reduced environment state at elapsed time `t`.
    pub fn env_at(&self, t: T) -> CMat<T> {
        partial_trace_sys(&self.joint_at(t), &self.spec).expect("consistent dims")
    }
}

/// The reduced dynamical map: rank-4 tensor C[(i1,i2),(j1,j2)](t,t0) stored
/// with row index i1*n+i2 and column index j1*n+j2.
#[derive(Debug, Clone)]
pub struct SuperMap<T: Real> {
    pub t0: T,
    pub t: T,
    pub dim_s: usize,
    pub tensor: CMat<T>,
}

impl<T: Real> SuperMap<T> {
    #[inline]
    pub fn entry(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> Complex<T> {
        self.tensor[(i1 * self.dim_s + i2, j1 * self.dim_s + j2)]
    }

    /// Compose with a map for the earlier interval:
    /// self covers (ts, t); `earlier` covers (t0, ts).
    pub fn compose_after(&self, earlier: &SuperMap<T>) -> Result<SuperMap<T>> {
        if self.dim_s != earlier.dim_s {
            return Err(Error::dimension("SuperMap::compose", earlier.dim_s, self.dim_s));
        }
        Ok(SuperMap {
            t0: earlier.t0,
            t: self.t,
            dim_s: self.dim_s,
            tensor: &earlier.tensor * &self.tensor,
        })
    }

    /// Hermiticity-compatibility deviation:
    /// max |C[(i1,i2),(j1,j2)] - conj(C[(i2,i1),(j2,j1)])|.
    pub fn hermiticity_compat_deviation(&self) -> T {
        let n = self.dim_s;
        let mut dev = T::zero();
        for i1 in 0..n {
            for i2 in 0..n {
                for j1 in 0..n {
                    for j2 in 0..n {
                        let d = crate::scalar::cnorm(self.entry(i1, i2, j1, j2) - self.entry(i2, i1, j2, j1).conj());
                        if d > dev {
                            dev = d;
                        }
                    }
                }
            }
        }
        dev
    }
}

/// Build the super matrix for environment weights `d` over (t0, t):
/// C[(i1,i2),(j1,j2)] = sum_{a1,a2,g} d[a1,a2] U[(j1 g),(i1 a1)] conj(U[(j2 g),(i2 a2)]).
pub fn super_matrix<T: Real>(
    model: &HamiltonianTriple<T>,
    d: &CMat<T>,
    t: T,
    t0: T,
) -> Result<SuperMap<T>> {
    check_density(d, STATE_TOL, "environment weights d")?;
    if d.nrows() != model.spec.dim_e {
        return Err(Error::dimension("super_matrix", model.spec.dim_e, d.nrows()));
    }
    let n = model.spec.dim_s;
    let ne = model.spec.dim_e;
    let prop = Propagator::new(&model.h_total, "H_total")?;
    let u = prop.unitary(t - t0);
    let idx = |i: usize, a: usize| i * ne + a;

    // Split d into pure components to turn the (a1, a2, g) triple sum into
    // per-component inner products over g.
    let d_eig = HermitianEigen::new(d, "environment weights d")?;
    let mut tensor = CMat::<T>::zeros(n * n, n * n);
    for k in 0..ne {
        let w = d_eig.values[k];
        if w <= re(1e-16) {
            continue;
        }
        // v[j, i][g] = sum_a U[(j g),(i a)] phi[a]
        let phi = d_eig.vectors.column(k);
        let mut v = vec![CVec::<T>::zeros(ne); n * n];
        for j in 0..n {
            for i in 0..n {
                let slot = &mut v[j * n + i];
                for g in 0..ne {
                    let mut acc = czero::<T>();
                    for a in 0..ne {
                        acc += u[(idx(j, g), idx(i, a))] * phi[a];
                    }
                    slot[g] = acc;
                }
            }
        }
        let wc = Complex::new(w, T::zero());
        for i1 in 0..n {
            for i2 in 0..n {
                for j1 in 0..n {
                    for j2 in 0..n {
                        let mut acc = czero::<T>();
                        let v1 = &v[j1 * n + i1];
                        let v2 = &v[j2 * n + i2];
                        for g in 0..ne {
                            acc += v1[g] * v2[g].conj();
                        }
                        tensor[(i1 * n + i2, j1 * n + j2)] += wc * acc;
                    }
                }
            }
        }
    }
    Ok(SuperMap {
        t0,
        t,
        dim_s: n,
        tensor,
    })
}

/// Apply the map to an initial system density:
/// out[j1,j2] = sum_{i1,i2} rho_s0[i1,i2] C[(i1,i2),(j1,j2)].
pub fn apply_map<T: Real>(map: &SuperMap<T>, rho_s0: &CMat<T>) -> Result<CMat<T>> {
    let n = map.dim_s;
    if rho_s0.nrows() != n || rho_s0.ncols() != n {
        return Err(Error::dimension("apply_map", n, rho_s0.nrows()));
    }
    let mut out = CMat::<T>::zeros(n, n);
    for j1 in 0..n {
        for j2 in 0..n {
            let mut acc = czero::<T>();
            for i1 in 0..n {
                for i2 in 0..n {
                    acc += rho_s0[(i1, i2)] * map.entry(i1, i2, j1, j2);
                }
            }
            out[(j1, j2)] = acc;
        }
    }
    Ok(out)
}

/// Apply the map to pure-state amplitudes (rho_s0 = c c^H).
pub fn apply_map_amplitudes<T: Real>(map: &SuperMap<T>, c: &CVec<T>) -> Result<CMat<T>> {
    apply_map(map, &(c * c.adjoint()))
}

/// Interaction-picture bath correlation
/// Tr[rho(t0) H_SE(t) H_SE(t')] with H_SE(tau) = e^{+i H0 tau} H_SE e^{-i H0 tau},
/// H0 the free part. The trace is taken in the state (I_n / n) x d.
pub fn env_correlation<T: Real>(
    model: &HamiltonianTriple<T>,
    d: &CMat<T>,
    t: T,
    t_prime: T,
) -> Result<Complex<T>> {
    check_density(d, STATE_TOL, "environment weights d")?;
    let n = model.spec.dim_s;
    let prop = Propagator::new(&model.h_free(), "H_free")?;
    let h_int = |tau: T| -> CMat<T> {
        let u = prop.unitary(tau); // e^{-i H0 tau}
        u.adjoint() * &model.h_se * u
    };
    let rho0 = kron(
        &(crate::linalg::identity::<T>(n) * Complex::new(re::<T>(1.0 / n as f64), T::zero())),
        d,
    )?;
    let prod = rho0 * h_int(t) * h_int(t_prime);
    Ok(crate::linalg::trace(&prod))
}

/// Markov condition diagnostics at elapsed time `t`:
/// correlation_ratio = ||rho_SE - rho_S x rho_E||_F / ||rho_SE||_F,
/// env_drift = ||rho_E(t) - rho_E(t0)||_F.
pub fn markov_condition_check<T: Real>(
    model: &HamiltonianTriple<T>,
    state: &InitialState<T>,
    t: T,
) -> Result<(T, T)> {
    let evo = Evolution::new(model, state)?;
    let rho_se = evo.joint_at(t);
    let rho_s = partial_trace_env(&rho_se, &model.spec)?;
    let rho_e = partial_trace_sys(&rho_se, &model.spec)?;
    let product = kron(&rho_s, &rho_e)?;
    let ratio = frobenius(&(&rho_se - product)) / frobenius(&rho_se);
    let drift = frobenius(&(rho_e - &state.d));
    Ok((ratio, drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs, trace};
    use crate::model::{build_counterexample_model, build_dephasing_model, ModelParams};
    use crate::scalar::cplx;

    fn qubit_pair_model() -> HamiltonianTriple<f64> {
        build_counterexample_model::<f64>(0.4).unwrap()
    }

    fn plus_state(d: CMat<f64>) -> InitialState<f64> {
        InitialState::maximally_coherent(2, d).unwrap()
    }

    #[test]
    fn initial_state_validation() {
        let c = CVec::<f64>::from_vec(vec![cplx(0.9, 0.), cplx(0.1, 0.)]);
        assert!(InitialState::new(c, InitialState::vacuum_env(2)).is_err());
        let mut d = CMat::<f64>::zeros(2, 2);
        d[(0, 0)] = cplx(2.0, 0.);
        let c = CVec::<f64>::from_vec(vec![cplx(1., 0.), cplx(0., 0.)]);
        assert!(InitialState::new(c, d).is_err());
    }

    #[test]
    fn evolve_identity_at_zero() {
        let m = qubit_pair_model();
        let st = plus_state(InitialState::vacuum_env(2));
        let rho0 = st.joint_density();
        let rho = evolve_joint(&m, &rho0, 0.0).unwrap();
        assert!(max_abs(&(rho - rho0)) < 1e-13);
    }

    #[test]
    fn purity_preserved() {
        let m = qubit_pair_model();
        let st = plus_state(InitialState::maximally_mixed_env(2));
        let rho0 = st.joint_density();
        let p0 = trace(&(&rho0 * &rho0)).re;
        for &t in &[0.3, 1.1, 2.7] {
            let rho = evolve_joint(&m, &rho0, t).unwrap();
            let p = trace(&(&rho * &rho)).re;
            assert!((p - p0).abs() < 1e-10);
        }
    }

    #[test]
    fn decoupled_factorizes() {
        // H_SE = 0: reduced state equals U_S rho_S0 U_S^H
        let sz = CMat::<f64>::from_row_slice(2, 2, &[cplx(1., 0.), cplx(0., 0.), cplx(0., 0.), cplx(-1., 0.)]);
        let sx = CMat::<f64>::from_row_slice(2, 2, &[cplx(0., 0.), cplx(1., 0.), cplx(1., 0.), cplx(0., 0.)]);
        let h_s = sx;
        let m = crate::model::build_custom_model(h_s.clone(), sz, CMat::<f64>::zeros(4, 4)).unwrap();
        let st = plus_state(InitialState::vacuum_env(2));
        let t = 0.9;
        let got = reduced_state(&m, &st, t).unwrap();
        let us = crate::linalg::unitary_from_hamiltonian(&h_s, t).unwrap();
        let expect = &us * st.rho_s0() * us.adjoint();
        assert!(max_abs(&(got - expect)) < 1e-12);
    }

    #[test]
    fn dephasing_eigenstate_stays_put() {
        let mut params = ModelParams::dephasing_default();
        params.modes.truncate(1);
        params.n_max = 2;
        let m = build_dephasing_model::<f64>(&params).unwrap();
        let c = CVec::<f64>::from_vec(vec![cplx(1., 0.), cplx(0., 0.)]);
        let st = InitialState::new(c, InitialState::vacuum_env(m.spec.dim_e)).unwrap();
        for &t in &[0.5, 2.0, 7.0] {
            let rho = reduced_state(&m, &st, t).unwrap();
            assert!((rho[(0, 0)].re - 1.0).abs() < 1e-10);
            assert!(rho[(0, 1)].norm() < 1e-10);
        }
    }

    #[test]
    fn trace_preserved_on_grid() {
        let m = qubit_pair_model();
        let st = plus_state(InitialState::maximally_mixed_env(2));
        let evo = Evolution::new(&m, &st).unwrap();
        for t in TimeGrid::new(0.0, 0.25, 10).unwrap().times() {
            let rho = evo.reduced_at(t);
            assert!((trace(&rho).re - 1.0).abs() < 1e-12);
            assert!(trace(&rho).im.abs() < 1e-12);
            assert!(crate::linalg::hermiticity_deviation(&rho) < 1e-12);
            assert!(crate::linalg::min_eigenvalue(&rho, "rho_S").unwrap() > -1e-10);
        }
    }

    #[test]
    fn super_map_identity_at_t0() {
        let m = qubit_pair_model();
        let d = InitialState::maximally_mixed_env(2);
        let map = super_matrix(&m, &d, 1.3, 1.3).unwrap();
        let st = plus_state(d);
        let out = apply_map(&map, &st.rho_s0()).unwrap();
        assert!(max_abs(&(out - st.rho_s0())) < 1e-13);
    }

    #[test]
    fn super_map_factorizes_when_decoupled() {
        let sz = CMat::<f64>::from_row_slice(2, 2, &[cplx(1., 0.), cplx(0., 0.), cplx(0., 0.), cplx(-1., 0.)]);
        let sx = CMat::<f64>::from_row_slice(2, 2, &[cplx(0., 0.), cplx(1., 0.), cplx(1., 0.), cplx(0., 0.)]);
        let m = crate::model::build_custom_model(sx.clone(), sz, CMat::<f64>::zeros(4, 4)).unwrap();
        let d = InitialState::maximally_mixed_env(2);
        let t = 0.7;
        let map = super_matrix(&m, &d, t, 0.0).unwrap();
        let us = crate::linalg::unitary_from_hamiltonian(&sx, t).unwrap();
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let expect = us[(j1, i1)] * us[(j2, i2)].conj();
                        assert!((map.entry(i1, i2, j1, j2) - expect).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn map_matches_reduced_state() {
        let m = qubit_pair_model();
        let d = InitialState::maximally_mixed_env(2);
        let st = plus_state(d.clone());
        for &t in &[0.4, 1.0, 2.2] {
            let map = super_matrix(&m, &d, t, 0.0).unwrap();
            assert!(map.hermiticity_compat_deviation() < 1e-12);
            let via_map = apply_map(&map, &st.rho_s0()).unwrap();
            let direct = reduced_state(&m, &st, t).unwrap();
            assert!(max_abs(&(via_map - direct)) < 1e-10);
        }
    }

    #[test]
    fn apply_map_linear() {
        let m = qubit_pair_model();
        let d = InitialState::vacuum_env(2);
        let map = super_matrix(&m, &d, 0.8, 0.0).unwrap();
        let r1 = identity::<f64>(2) * cplx(0.5, 0.);
        let mut r2 = CMat::<f64>::zeros(2, 2);
        r2[(0, 0)] = cplx(0.25, 0.);
        r2[(1, 1)] = cplx(0.75, 0.);
        r2[(0, 1)] = cplx(0.1, 0.05);
        r2[(1, 0)] = cplx(0.1, -0.05);
        let (alpha, beta) = (cplx(0.3, 0.), cplx(0.7, 0.));
        let lhs = apply_map(&map, &(&r1 * alpha + &r2 * beta)).unwrap();
        let rhs = apply_map(&map, &r1).unwrap() * alpha + apply_map(&map, &r2).unwrap() * beta;
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn env_correlation_basics() {
        let sz = CMat::<f64>::from_row_slice(2, 2, &[cplx(1., 0.), cplx(0., 0.), cplx(0., 0.), cplx(-1., 0.)]);
        let m = crate::model::build_custom_model(sz.clone(), sz.clone(), CMat::<f64>::zeros(4, 4)).unwrap();
        let d = InitialState::vacuum_env(2);
        let c = env_correlation(&m, &d, 0.3, 0.9).unwrap();
        assert!(c.norm() < 1e-14);

        let m2 = qubit_pair_model();
        let same_time = env_correlation(&m2, &d, 0.6, 0.6).unwrap();
        assert!(same_time.im.abs() < 1e-12);
        assert!(same_time.re >= 0.0);
    }

    #[test]
    fn dephasing_correlation_decays_in_first_window() {
        let mut params = ModelParams::dephasing_default();
        params.n_max = 2;
        let m = build_dephasing_model::<f64>(&params).unwrap();
        let d = InitialState::vacuum_env(m.spec.dim_e);
        let c0 = env_correlation(&m, &d, 0.0, 0.0).unwrap().norm();
        let window_end = std::f64::consts::PI / 5.0_f64.sqrt();
        let c1 = env_correlation(&m, &d, 0.0, window_end).unwrap().norm();
        assert!(c0 > 0.0);
        assert!(c1 < c0);
    }

    #[test]
    fn markov_check_limits() {
        let m = qubit_pair_model();
        let st = plus_state(InitialState::maximally_mixed_env(2));
        let (ratio, drift) = markov_condition_check(&m, &st, 0.0).unwrap();
        assert!(ratio < 1e-12);
        assert!(drift < 1e-12);
    }

    #[test]
    fn weak_coupling_correlates_less() {
        let weak = build_counterexample_model::<f64>(0.05).unwrap();
        let strong = build_counterexample_model::<f64>(2.0).unwrap();
        let st = plus_state(InitialState::maximally_mixed_env(2));
        let t = 0.8;
        let (rw, _) = markov_condition_check(&weak, &st, t).unwrap();
        let (rs, _) = markov_condition_check(&strong, &st, t).unwrap();
        assert!(rw < rs);
    }
}
