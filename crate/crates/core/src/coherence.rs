//! Coherence measures and decoherence diagnostics: interference terms,
//! einselection, l1 coherence, population conservation and the dephasing
//! exponent Gamma(t).


use crate::dynamics::{Evolution, InitialState, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, HermitianEigen};
use crate::model::HamiltonianTriple;
use crate::scalar::{czero, re, to_f64, Real};

/// Decomposition of a transition probability into its classical (diagonal)
/// and interference (cross) parts.
#[derive(Debug, Clone, Copy)]
pub struct TransitionProbability<T> {
    pub probability: T,
    pub diagonal: T,
    pub cross: T,
}

/// prob = |sum_i conj(c_i) b_i|^2, split as sum_i |c_i^* b_i|^2 plus the
/// interference cross term.
pub fn transition_probability<T: Real>(
    c: &CVec<T>,
    b: &CVec<T>,
) -> Result<TransitionProbability<T>> {
    for (name, v) in [("c", c), ("b", b)] {
        let n2 = v.iter().map(|x| x.norm_sqr()).fold(T::zero(), |a, x| a + x);
        if (n2 - T::one()).abs() > re(1e-12) {
            return Err(Error::State(format!("{name} is not normalized")));
        }
    }
    if c.len() != b.len() {
        return Err(Error::dimension("transition_probability", c.len(), b.len()));
    }
    let overlap = c
        .iter()
        .zip(b.iter())
        .fold(czero::<T>(), |acc, (ci, bi)| acc + ci.conj() * bi);
    let probability = overlap.norm_sqr();
    let diagonal = c
        .iter()
        .zip(b.iter())
        .map(|(ci, bi)| (ci.conj() * bi).norm_sqr())
        .fold(T::zero(), |a, x| a + x);
    Ok(TransitionProbability {
        probability,
        diagonal,
        cross: probability - diagonal,
    })
}

/// Reduced state after environment correlation with pointer states:
/// out[i,j] = c_i c_j^* M[j,i] where M holds the pointer overlaps <a_j|a_i>.
/// M = I reproduces full einselection (diagonal rho), M = all-ones the
/// untouched pure state.
pub fn einselect<T: Real>(c: &CVec<T>, pointer_overlaps: &CMat<T>) -> Result<CMat<T>> {
    let n = c.len();
    if pointer_overlaps.nrows() != n || pointer_overlaps.ncols() != n {
        return Err(Error::dimension("einselect", n, pointer_overlaps.nrows()));
    }
    for v in pointer_overlaps.iter() {
        if crate::scalar::cnorm(*v) > T::one() + re(1e-12) {
            return Err(Error::State(
                "pointer overlap magnitude exceeds 1".to_string(),
            ));
        }
    }
    let mut out = CMat::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = c[i] * c[j].conj() * pointer_overlaps[(j, i)];
        }
    }
    Ok(out)
}

/// l1 coherence sum_{i != j} |rho_ij|.
pub fn coherence_l1<T: Real>(rho: &CMat<T>) -> T {
    let mut acc = T::zero();
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            if i != j {
                acc += crate::scalar::cnorm(rho[(i, j)]);
            }
        }
    }
    acc
}

/// Population drift in the H_S eigenbasis over a grid. Degenerate H_S
/// aggregates populations per eigenvalue before comparing.
#[derive(Debug, Clone)]
pub struct PopulationDrift<T> {
    pub max_drift: T,
    /// True when H_S has (numerically) degenerate eigenvalues and the drift
    /// is measured per eigenspace only.
    pub degenerate: bool,
}

pub fn population_drift<T: Real>(
    model: &HamiltonianTriple<T>,
    state: &InitialState<T>,
    grid: &TimeGrid<T>,
) -> Result<PopulationDrift<T>> {
    let eig = HermitianEigen::new(&model.h_s, "H_S")?;
    let n = model.spec.dim_s;
    // group indices by eigenvalue
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut degenerate = false;
    for k in 0..n {
        if k > 0 && (eig.values[k] - eig.values[k - 1]).abs() < re(1e-9) {
            groups.last_mut().unwrap().push(k);
            degenerate = true;
        } else {
            groups.push(vec![k]);
        }
    }
    let populations = |rho: &CMat<T>| -> Vec<T> {
        let rot = eig.vectors.adjoint() * rho * &eig.vectors;
        groups
            .iter()
            .map(|g| g.iter().map(|&k| rot[(k, k)].re).fold(T::zero(), |a, b| a + b))
            .collect()
    };
    let evo = Evolution::new(model, state)?;
    let base = populations(&evo.reduced_at(T::zero()));
    let mut max_drift = T::zero();
    for t in grid.times() {
        let p = populations(&evo.reduced_at(t - grid.t0));
        for (a, b) in p.iter().zip(base.iter()) {
            let d = (*a - *b).abs();
            if d > max_drift {
                max_drift = d;
            }
        }
    }
    Ok(PopulationDrift {
        max_drift,
        degenerate,
    })
}

/// Sentinel for Gamma(t) when the off-diagonal magnitude underflows.
pub const GAMMA_INFINITY: f64 = f64::INFINITY;

/// Time series of coherence quantities along a trajectory.
#[derive(Debug, Clone)]
pub struct CoherenceTrace<T> {
    pub times: Vec<T>,
    pub l1: Vec<T>,
    /// |rho[pair.0, pair.1]|(t) for the tracked off-diagonal element.
    pub offdiag_abs: Vec<T>,
    /// Diagonal populations per grid point.
    pub populations: Vec<Vec<T>>,
    /// Gamma(t) = -ln(|rho_kl(t)| / |rho_kl(t0)|); +inf where |rho_kl|
    /// underflows.
    pub gamma: Vec<f64>,
}

/// Scan l1 coherence, a tracked off-diagonal element, populations and the
/// dephasing exponent over a grid.
pub fn coherence_trace<T: Real>(
    model: &HamiltonianTriple<T>,
    state: &InitialState<T>,
    grid: &TimeGrid<T>,
    pair: (usize, usize),
) -> Result<CoherenceTrace<T>> {
    let n = model.spec.dim_s;
    if pair.0 >= n || pair.1 >= n {
        return Err(Error::parameter("pair", "matrix element out of range"));
    }
    let evo = Evolution::new(model, state)?;
    let rho0 = evo.reduced_at(T::zero());
    let base = crate::scalar::cnorm(rho0[(pair.0, pair.1)]);
    if base < re(1e-14) {
        return Err(Error::State(
            "tracked off-diagonal element vanishes at t0".to_string(),
        ));
    }
    let times = grid.times();
    let mut trace = CoherenceTrace {
        times: times.clone(),
        l1: Vec::with_capacity(times.len()),
        offdiag_abs: Vec::with_capacity(times.len()),
        populations: Vec::with_capacity(times.len()),
        gamma: Vec::with_capacity(times.len()),
    };
    for &t in &times {
        let rho = evo.reduced_at(t - grid.t0);
        trace.l1.push(coherence_l1(&rho));
        let mag = crate::scalar::cnorm(rho[(pair.0, pair.1)]);
        trace.offdiag_abs.push(mag);
        trace
            .populations
            .push((0..n).map(|k| rho[(k, k)].re).collect());
        if mag < re(1e-14) {
            trace.gamma.push(GAMMA_INFINITY);
        } else {
            trace.gamma.push(-(to_f64(mag) / to_f64(base)).ln());
        }
    }
    Ok(trace)
}

/// Operationalized decoherence verdict: l1 coherence decays below 5% of its
/// initial value and stays below 10% for the rest of the window.
pub fn decoheres<T: Real>(trace: &CoherenceTrace<T>) -> bool {
    let initial = trace.l1.first().cloned().unwrap_or(T::zero());
    if initial <= T::zero() {
        return false;
    }
    let low = initial * re(0.05);
    let stay = initial * re(0.10);
    let mut crossed_at = None;
    for (k, v) in trace.l1.iter().enumerate() {
        if *v < low {
            crossed_at = Some(k);
            break;
        }
    }
    match crossed_at {
        None => false,
        Some(k) => trace.l1[k..].iter().all(|v| *v < stay),
    }
}
