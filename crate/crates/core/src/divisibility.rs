//! Quantitative divisibility tests: composition of super matrices, state-level
//! residuals, per-environment-state block decomposition, commutator
//! diagnostics and Markov time scales.

use num_complex::Complex;

use crate::dynamics::{apply_map, reduced_state, super_matrix, Evolution, InitialState, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{
    commutator_norm, frobenius, identity, kron, max_abs, CMat, HermitianEigen,
};
use crate::model::HamiltonianTriple;
use crate::scalar::{re, to_f64, Real};

/// Absolute max-entry tolerance below which a composition is called divisible.
pub const DIVISIBLE_TOL: f64 = 1e-9;
/// Residual above which a composition is called non-divisible; between the
/// two thresholds the verdict is inconclusive.
pub const NON_DIVISIBLE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Divisible,
    NonDivisible,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Divisible => "divisible",
            Verdict::NonDivisible => "non-divisible",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Result of a divisibility scan over split triples.
#[derive(Debug, Clone)]
pub struct DivisibilityReport {
    /// The (t0, ts, t) triples tested.
    pub split_times: Vec<(f64, f64, f64)>,
    /// Max-entry composition residual per triple.
    pub residuals: Vec<f64>,
    /// ||[lift(H_E), H_SE]||_F in the H_E eigenbasis.
    pub comm_es: f64,
    /// ||[lift(H_S), H_SE]||_F in the H_E eigenbasis.
    pub comm_ss: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
}

/// Model with H_E diagonalized; the same physics in a rotated basis.
pub struct RotatedModel<T: Real> {
    pub model: HamiltonianTriple<T>,
    /// Environment eigenvalues (diagonal of the rotated H_E), ascending.
    pub env_levels: Vec<T>,
    /// The rotation W applied on the environment factor.
    pub env_rotation: CMat<T>,
}

/// Rotate a triple into the basis in which H_E is diagonal.
pub fn rotate_to_env_eigenbasis<T: Real>(model: &HamiltonianTriple<T>) -> Result<RotatedModel<T>> {
    let eig = HermitianEigen::new(&model.h_e, "H_E")?;
    let w = eig.vectors.clone();
    let ne = model.spec.dim_e;
    let mut h_e = CMat::<T>::zeros(ne, ne);
    for k in 0..ne {
        h_e[(k, k)] = Complex::new(eig.values[k], T::zero());
    }
    let r = kron(&identity::<T>(model.spec.dim_s), &w)?;
    let h_se = r.adjoint() * &model.h_se * &r;
    let rotated = HamiltonianTriple::new(model.h_s.clone(), h_e, h_se)?;
    Ok(RotatedModel {
        model: rotated,
        env_levels: eig.values.iter().cloned().collect(),
        env_rotation: w,
    })
}

impl<T: Real> RotatedModel<T> {
    /// Environment weights transported into the rotated basis.
    pub fn rotate_weights(&self, d: &CMat<T>) -> CMat<T> {
        self.env_rotation.adjoint() * d * &self.env_rotation
    }
}

/// Max-entry residual ||C(t,t0) - C(ts,t0) o C(t,ts)||_max; every map is
/// built from the same environment weights `d`.
pub fn composition_residual<T: Real>(
    model: &HamiltonianTriple<T>,
    d: &CMat<T>,
    t0: T,
    ts: T,
    t: T,
) -> Result<T> {
    if !(t0 < ts && ts < t) {
        return Err(Error::parameter("times", "need t0 < ts < t"));
    }
    let full = super_matrix(model, d, t, t0)?;
    let first = super_matrix(model, d, ts, t0)?;
    let second = super_matrix(model, d, t, ts)?;
    let composed = second.compose_after(&first)?;
    Ok(max_abs(&(full.tensor - composed.tensor)))
}

/// ||rho_S(t) - C(t,ts)[C(ts,t0)[rho_S(t0)]]||_F for a concrete initial state.
pub fn state_divisibility_residual<T: Real>(
    model: &HamiltonianTriple<T>,
    state: &InitialState<T>,
    t0: T,
    ts: T,
    t: T,
) -> Result<T> {
    if !(t0 < ts && ts < t) {
        return Err(Error::parameter("times", "need t0 < ts < t"));
    }
    let direct = reduced_state(model, state, t - t0)?;
    let first = super_matrix(model, &state.d, ts, t0)?;
    let second = super_matrix(model, &state.d, t, ts)?;
    let mid = apply_map(&first, &state.rho_s0())?;
    let composed = apply_map(&second, &mid)?;
    Ok(frobenius(&(direct - composed)))
}

/// Same residual for an arbitrary (possibly mixed) initial system state
/// rho_s0 with environment weights d; the joint state starts as the product
/// rho_s0 (x) d, for which the super-matrix propagation is exact.
pub fn mixed_state_divisibility_residual<T: Real>(
    model: &HamiltonianTriple<T>,
    rho_s0: &crate::linalg::CMat<T>,
    d: &crate::linalg::CMat<T>,
    t0: T,
    ts: T,
    t: T,
) -> Result<T> {
    if !(t0 < ts && ts < t) {
        return Err(Error::parameter("times", "need t0 < ts < t"));
    }
    let full = super_matrix(model, d, t, t0)?;
    let first = super_matrix(model, d, ts, t0)?;
    let second = super_matrix(model, d, t, ts)?;
    let direct = apply_map(&full, rho_s0)?;
    let mid = apply_map(&first, rho_s0)?;
    let composed = apply_map(&second, &mid)?;
    Ok(frobenius(&(direct - composed)))
}

/// Commutator diagnostics in the H_E eigenbasis:
/// (||[lift(H_E), H_SE]||_F, ||[lift(H_S), H_SE]||_F).
pub fn commutator_diagnostics<T: Real>(model: &HamiltonianTriple<T>) -> Result<(T, T)> {
    let rot = rotate_to_env_eigenbasis(model)?;
    let comm_es = commutator_norm(&rot.model.lifted_h_e(), &rot.model.h_se)?;
    let comm_ss = commutator_norm(&rot.model.lifted_h_s(), &rot.model.h_se)?;
    Ok((comm_es, comm_ss))
}

/// Markov time-scale estimate per the spectral-spread heuristics.
#[derive(Debug, Clone, Copy)]
pub struct TimescaleEstimate {
    /// Spectral spread of H_E (max - min eigenvalue).
    pub delta_e: f64,
    /// Environment memory time 1/delta_E.
    pub tau_e: f64,
    /// Operator 2-norm of H_SE.
    pub coupling_norm: f64,
    /// System evolution time 1/(||H_SE||^2 tau_E).
    pub tau_s: f64,
    /// Accumulated phase ||H_SE|| tau_E.
    pub phase: f64,
    /// tau_E / tau_S (= phase^2).
    pub ratio: f64,
    /// True when phase < 0.1.
    pub markov_flag: bool,
}

/// Estimate the Markov time scales of a model.
pub fn markov_timescales<T: Real>(model: &HamiltonianTriple<T>) -> Result<TimescaleEstimate> {
    let env = HermitianEigen::new(&model.h_e, "H_E")?;
    let delta_e = to_f64(env.max_value() - env.min_value());
    if delta_e <= 0.0 {
        return Err(Error::DegenerateEnvironment);
    }
    let se = HermitianEigen::new(&model.h_se, "H_SE")?;
    let coupling_norm = to_f64(se.max_value().abs().max(se.min_value().abs()));
    let tau_e = 1.0 / delta_e;
    let phase = coupling_norm * tau_e;
    let tau_s = if coupling_norm > 0.0 {
        1.0 / (coupling_norm * coupling_norm * tau_e)
    } else {
        f64::INFINITY
    };
    Ok(TimescaleEstimate {
        delta_e,
        tau_e,
        coupling_norm,
        tau_s,
        phase,
        ratio: phase * phase,
        markov_flag: phase < 0.1,
    })
}

/// Per-environment-state slice of the reduced dynamics, in the H_E eigenbasis.
#[derive(Debug, Clone)]
pub struct GammaBlock<T: Real> {
    /// Environment eigenstate index.
    pub gamma: usize,
    /// rho_S-gamma(t): the gamma-diagonal environment block of the joint state.
    pub rho_s_gamma: CMat<T>,
    /// Deviation from unitary evolution under the gamma-block Hamiltonian.
    pub block_residual: T,
}

fn require_diagonal<T: Real>(d: &CMat<T>, context: &'static str) -> Result<Vec<T>> {
    let n = d.nrows();
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && crate::scalar::cnorm(d[(i, j)]) > re(1e-10) {
                return Err(Error::Unsupported(format!(
                    "{context}: environment weights are not diagonal in the H_E eigenbasis"
                )));
            }
        }
        diag.push(d[(i, i)].re);
    }
    Ok(diag)
}

/// gamma-block Hamiltonian <j1 gamma|H_total|j2 gamma> (n x n).
fn gamma_block_hamiltonian<T: Real>(model: &HamiltonianTriple<T>, gamma: usize) -> CMat<T> {
    let n = model.spec.dim_s;
    let mut h = CMat::<T>::zeros(n, n);
    for j1 in 0..n {
        for j2 in 0..n {
            h[(j1, j2)] = model.h_total[(model.spec.idx(j1, gamma), model.spec.idx(j2, gamma))];
        }
    }
    h
}

/// Extract the env-diagonal blocks rho_S-gamma(t) of the evolved joint state.
fn gamma_slices<T: Real>(evo: &Evolution<T>, spec: &crate::linalg::HilbertSpec, t: T) -> Vec<CMat<T>> {
    let rho = evo.joint_at(t);
    let n = spec.dim_s;
    (0..spec.dim_e)
        .map(|g| {
            let mut out = CMat::<T>::zeros(n, n);
            for j1 in 0..n {
                for j2 in 0..n {
                    out[(j1, j2)] = rho[(spec.idx(j1, g), spec.idx(j2, g))];
                }
            }
            out
        })
        .collect()
}

/// Decompose the reduced state at time `t` into per-gamma contributions and
/// measure each block's deviation from unitary evolution generated by the
/// gamma-block Hamiltonian. Requires diagonal weights in the H_E eigenbasis.
pub fn gamma_block_decompose<T: Real>(
    model: &HamiltonianTriple<T>,
    state: &InitialState<T>,
    t: T,
) -> Result<Vec<GammaBlock<T>>> {
    let rot = rotate_to_env_eigenbasis(model)?;
    let d_rot = rot.rotate_weights(&state.d);
    let weights = require_diagonal(&d_rot, "gamma_block_decompose")?;
    let rotated_state = InitialState::new(state.c.clone(), symmetrize_diag(&d_rot))?;
    let evo = Evolution::new(&rot.model, &rotated_state)?;
    let slices = gamma_slices(&evo, &rot.model.spec, t);
    let rho_s0 = state.rho_s0();
    let mut out = Vec::with_capacity(weights.len());
    for (g, slice) in slices.into_iter().enumerate() {
        let h_g = gamma_block_hamiltonian(&rot.model, g);
        let u_g = crate::linalg::unitary_from_hamiltonian(&h_g, t)?;
        let expect = &u_g * &rho_s0 * u_g.adjoint() * Complex::new(weights[g], T::zero());
        let block_residual = frobenius(&(&slice - expect));
        out.push(GammaBlock {
            gamma: g,
            rho_s_gamma: slice,
            block_residual,
        });
    }
    Ok(out)
}

/// Clean tiny off-diagonal noise from a numerically diagonal weight matrix.
fn symmetrize_diag<T: Real>(d: &CMat<T>) -> CMat<T> {
    let n = d.nrows();
    let mut out = CMat::<T>::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = Complex::new(d[(i, i)].re.max(T::zero()), T::zero());
    }
    // renormalize the trace after clipping
    let tr: T = (0..n).map(|i| out[(i, i)].re).fold(T::zero(), |a, b| a + b);
    if tr > T::zero() {
        for i in 0..n {
            out[(i, i)] /= Complex::new(tr, T::zero());
        }
    }
    out
}

/// Remainder time series of the one-time non-divisible decomposition:
/// R_gamma(t) = d rho_S-gamma/dt + i [H_S + H_d^gamma + e_gamma I, rho_S-gamma],
/// with the derivative taken by central differences. `H_d` is the
/// environment-block-diagonal part of the rotated coupling.
pub fn nonlocal_decomposition<T: Real>(
    model: &HamiltonianTriple<T>,
    state: &InitialState<T>,
    grid: &TimeGrid<T>,
) -> Result<Vec<Vec<T>>> {
    let rot = rotate_to_env_eigenbasis(model)?;
    let d_rot = rot.rotate_weights(&state.d);
    require_diagonal(&d_rot, "nonlocal_decomposition")?;
    let rotated_state = InitialState::new(state.c.clone(), symmetrize_diag(&d_rot))?;
    let evo = Evolution::new(&rot.model, &rotated_state)?;
    let spec = rot.model.spec;
    let n = spec.dim_s;
    let ne = spec.dim_e;
    let ii = crate::scalar::i::<T>();
    let delta = re::<T>(1e-5);

    // per-gamma generator: H_S + <gamma|H_SE|gamma>-block + e_gamma I
    let mut generators = Vec::with_capacity(ne);
    for g in 0..ne {
        let mut h_d_g = CMat::<T>::zeros(n, n);
        for j1 in 0..n {
            for j2 in 0..n {
                h_d_g[(j1, j2)] = rot.model.h_se[(spec.idx(j1, g), spec.idx(j2, g))];
            }
        }
        let gen = &model.h_s
            + h_d_g
            + identity::<T>(n) * Complex::new(rot.env_levels[g], T::zero());
        generators.push(gen);
    }

    let mut series = vec![Vec::with_capacity(grid.steps + 1); ne];
    for t in grid.times() {
        let fwd = gamma_slices(&evo, &spec, t + delta);
        let bwd = gamma_slices(&evo, &spec, t - delta);
        let now = gamma_slices(&evo, &spec, t);
        for g in 0..ne {
            let deriv = (&fwd[g] - &bwd[g]) / Complex::new(delta + delta, T::zero());
            let comm = &generators[g] * &now[g] - &now[g] * &generators[g];
            let remainder = deriv + comm * ii;
            series[g].push(frobenius(&remainder));
        }
    }
    Ok(series)
}

/// Run a composition-residual scan and assemble the report.
pub fn assess_divisibility<T: Real>(
    model: &HamiltonianTriple<T>,
    d: &CMat<T>,
    triples: &[(T, T, T)],
    tolerance: f64,
) -> Result<DivisibilityReport> {
    let (comm_es, comm_ss) = commutator_diagnostics(model)?;
    let mut residuals = Vec::with_capacity(triples.len());
    let mut split_times = Vec::with_capacity(triples.len());
    for &(t0, ts, t) in triples {
        residuals.push(to_f64(composition_residual(model, d, t0, ts, t)?));
        split_times.push((to_f64(t0), to_f64(ts), to_f64(t)));
    }
    let max_res = residuals.iter().cloned().fold(0.0_f64, f64::max);
    let verdict = if max_res < tolerance {
        Verdict::Divisible
    } else if max_res > NON_DIVISIBLE_TOL {
        Verdict::NonDivisible
    } else {
        Verdict::Inconclusive
    };
    Ok(DivisibilityReport {
        split_times,
        residuals,
        comm_es: to_f64(comm_es),
        comm_ss: to_f64(comm_ss),
        verdict,
        tolerance,
    })
}
