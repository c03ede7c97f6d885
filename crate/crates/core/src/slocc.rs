//! SLOCC classification of three-qubit states and the gradient flow on the
//! norm square of the momentum map.
//!
//! A state is GHZ-class iff its Cayley hyperdeterminant is nonzero; the
//! remaining five classes are told apart by the ranks of the one-qubit
//! marginals.

use crate::error::Error;
use crate::linalg::{czero, normalize, Mat2, C};
use crate::qstate::{apply_slot_op, random_gl2, LocalSpectra, PureState};
use crate::scalar::{r, Real};
use crate::Result;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// The six SLOCC entanglement classes of three qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SloccClass {
    #[serde(rename = "GHZ")]
    Ghz,
    W,
    B1,
    B2,
    B3,
    #[serde(rename = "SEP")]
    Sep,
}

impl SloccClass {
    pub const ALL: [SloccClass; 6] = [
        SloccClass::Ghz,
        SloccClass::W,
        SloccClass::B1,
        SloccClass::B2,
        SloccClass::B3,
        SloccClass::Sep,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SloccClass::Ghz => "GHZ",
            SloccClass::W => "W",
            SloccClass::B1 => "B1",
            SloccClass::B2 => "B2",
            SloccClass::B3 => "B3",
            SloccClass::Sep => "SEP",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ghz" => Some(SloccClass::Ghz),
            "w" => Some(SloccClass::W),
            "b1" => Some(SloccClass::B1),
            "b2" => Some(SloccClass::B2),
            "b3" => Some(SloccClass::B3),
            "sep" => Some(SloccClass::Sep),
            _ => None,
        }
    }

    /// The class representative with rational amplitudes.
    pub fn representative<T: Real>(&self) -> PureState<T> {
        let mut amps = vec![czero(); 8];
        let half_sqrt2 = Complex::new(T::one() / r::<T>(2.0).sqrt(), T::zero());
        match self {
            SloccClass::Ghz => {
                amps[0b000] = half_sqrt2;
                amps[0b111] = half_sqrt2;
            }
            SloccClass::W => return PureState::w_state(3),
            SloccClass::B1 => {
                amps[0b000] = half_sqrt2;
                amps[0b011] = half_sqrt2;
            }
            SloccClass::B2 => {
                amps[0b000] = half_sqrt2;
                amps[0b101] = half_sqrt2;
            }
            SloccClass::B3 => {
                amps[0b000] = half_sqrt2;
                amps[0b110] = half_sqrt2;
            }
            SloccClass::Sep => return PureState::basis_state(3, 0),
        }
        PureState::new(3, amps).expect("representatives are normalized")
    }
}

/// One recorded step of the Kirwan gradient flow.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct FlowIterate<T: Real> {
    pub step: usize,
    pub lambdas: Vec<T>,
    pub moment_norm_sq: T,
}

/// Trace of the discretized gradient flow on `‖μ‖²`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct FlowTrace<T: Real> {
    pub iterates: Vec<FlowIterate<T>>,
    pub converged: bool,
    pub limit_spectra: Vec<T>,
}

fn require_three_qubits<T: Real>(state: &PureState<T>) -> Result<()> {
    if state.num_qubits() != 3 {
        return Err(Error::WrongQubitCount { expected: 3, actual: state.num_qubits() });
    }
    Ok(())
}

/// Cayley's 2×2×2 hyperdeterminant of the amplitude vector, in the fixed
/// sign convention
/// `Det = a₀₀₀²a₁₁₁² + a₀₀₁²a₁₁₀² + a₀₁₀²a₁₀₁² + a₀₁₁²a₁₀₀²
///  − 2(a₀₀₀a₀₀₁a₁₁₀a₁₁₁ + a₀₀₀a₀₁₀a₁₀₁a₁₁₁ + a₀₀₀a₀₁₁a₁₀₀a₁₁₁
///     + a₀₀₁a₀₁₀a₁₀₁a₁₁₀ + a₀₀₁a₀₁₁a₁₀₀a₁₁₀ + a₀₁₀a₀₁₁a₁₀₀a₁₀₁)
///  + 4(a₀₀₀a₀₁₁a₁₀₁a₁₁₀ + a₀₀₁a₀₁₀a₁₀₀a₁₁₁)`.
pub fn hyperdeterminant<T: Real>(state: &PureState<T>) -> Result<C<T>> {
    require_three_qubits(state)?;
    Ok(hyperdeterminant_raw(state.amplitudes()))
}

/// Same polynomial on a raw (not necessarily normalized) 8-vector.
pub fn hyperdeterminant_raw<T: Real>(a: &[C<T>]) -> C<T> {
    let idx = |b1: usize, b2: usize, b3: usize| a[(b1 << 2) | (b2 << 1) | b3];
    let a000 = idx(0, 0, 0);
    let a001 = idx(0, 0, 1);
    let a010 = idx(0, 1, 0);
    let a011 = idx(0, 1, 1);
    let a100 = idx(1, 0, 0);
    let a101 = idx(1, 0, 1);
    let a110 = idx(1, 1, 0);
    let a111 = idx(1, 1, 1);
    let two = Complex::new(r::<T>(2.0), T::zero());
    let four = Complex::new(r::<T>(4.0), T::zero());
    a000 * a000 * a111 * a111
        + a001 * a001 * a110 * a110
        + a010 * a010 * a101 * a101
        + a011 * a011 * a100 * a100
        - two
            * (a000 * a001 * a110 * a111
                + a000 * a010 * a101 * a111
                + a000 * a011 * a100 * a111
                + a001 * a010 * a101 * a110
                + a001 * a011 * a100 * a110
                + a010 * a011 * a100 * a101)
        + four * (a000 * a011 * a101 * a110 + a001 * a010 * a100 * a111)
}

/// Rank of each one-qubit marginal: eigenvalues above `tol` count.
pub fn local_ranks<T: Real>(state: &PureState<T>, tol: T) -> Result<[usize; 3]> {
    require_three_qubits(state)?;
    let mut ranks = [0usize; 3];
    for q in 1..=3 {
        let (lo, hi) = state.reduced_density(q)?.eigenvalues();
        ranks[q - 1] = (lo > tol) as usize + (hi > tol) as usize;
    }
    Ok(ranks)
}

/// Default hyperdeterminant-modulus threshold for [`classify`].
pub fn default_det_tol<T: Real>() -> T {
    r(1e-10)
}

/// Default marginal-eigenvalue threshold for [`classify`] and rank counts.
pub fn default_rank_tol<T: Real>() -> T {
    r(1e-9)
}

/// SLOCC classification: nonzero hyperdeterminant means GHZ, otherwise the
/// marginal-rank pattern decides.
pub fn classify<T: Real>(state: &PureState<T>, det_tol: T, rank_tol: T) -> Result<SloccClass> {
    require_three_qubits(state)?;
    let det = hyperdeterminant(state)?;
    if det.norm() > det_tol {
        return Ok(SloccClass::Ghz);
    }
    let ranks = local_ranks(state, rank_tol)?;
    match ranks {
        [2, 2, 2] => Ok(SloccClass::W),
        [1, 2, 2] => Ok(SloccClass::B1),
        [2, 1, 2] => Ok(SloccClass::B2),
        [2, 2, 1] => Ok(SloccClass::B3),
        [1, 1, 1] => Ok(SloccClass::Sep),
        // Exactly two pure marginals force the third to be pure as well.
        _ => Err(Error::InconsistentRanks { ranks }),
    }
}

/// Applies independent random invertible local operators (complex Gaussian
/// entries, redrawn while the condition number exceeds `conditioning_cap`)
/// to the class representative and renormalizes.
pub fn random_slocc_sample<T: Real>(
    label: SloccClass,
    seed: u64,
    conditioning_cap: T,
) -> PureState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = [Mat2::zero(); 3];
    for op in ops.iter_mut() {
        *op = loop {
            let g: Mat2<T> = random_gl2(&mut rng);
            if g.condition_number() <= conditioning_cap {
                break g;
            }
        };
    }
    label
        .representative()
        .apply_local(&ops, true)
        .expect("well-conditioned operators are invertible")
}

/// Default conditioning cap for [`random_slocc_sample`].
pub fn default_conditioning_cap<T: Real>() -> T {
    r(20.0)
}

/// Discretized gradient descent on `‖μ‖²`: the update is
/// `x ← normalize((⊗_i exp(−step·H_i)) x)` with `H_i = ρ_i − I/2`.
///
/// Stops when the λ-vector moves less than `tol` between iterates. A step
/// that increases `‖μ‖²` beyond rounding slack aborts with a diagnostic.
pub fn kirwan_flow<T: Real>(
    state: &PureState<T>,
    step: T,
    max_iter: usize,
    tol: T,
) -> Result<FlowTrace<T>> {
    require_three_qubits(state)?;
    let slack = r::<T>(1e-12);
    let mut current = state.clone();
    let mut iterates = Vec::new();
    let mut lambdas = current.psi().lambdas;
    let mut norm_sq = current.momentum_map().norm_sq();
    iterates.push(FlowIterate { step: 0, lambdas: lambdas.clone(), moment_norm_sq: norm_sq });
    let mut converged = false;
    for k in 1..=max_iter {
        let mu = current.momentum_map();
        let mut amps = current.amplitudes().to_vec();
        for (slot, h) in mu.shifted_blocks.iter().enumerate() {
            let gate = h.hermitian_exp(-step);
            apply_slot_op(&mut amps, &gate, 3, slot + 1);
        }
        normalize(&mut amps);
        let next = PureState::new(3, amps).expect("normalized in place");
        let next_lambdas = next.psi().lambdas;
        let next_norm_sq = next.momentum_map().norm_sq();
        if next_norm_sq > norm_sq + slack {
            return Err(Error::NonMonotoneFlow {
                step: k,
                increase: (next_norm_sq - norm_sq).to_f64().unwrap_or(f64::NAN),
            });
        }
        let moved = lambdas
            .iter()
            .zip(&next_lambdas)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        current = next;
        lambdas = next_lambdas;
        norm_sq = next_norm_sq;
        iterates.push(FlowIterate { step: k, lambdas: lambdas.clone(), moment_norm_sq: norm_sq });
        if moved < tol {
            converged = true;
            break;
        }
    }
    Ok(FlowTrace { iterates, converged, limit_spectra: lambdas })
}

/// Default step size for [`kirwan_flow`].
pub fn default_flow_step<T: Real>() -> T {
    r(0.05)
}

/// True iff `(H₁⊗I⊗I + I⊗H₂⊗I + I⊗I⊗H₃)v` is parallel to `v` within `tol`
/// (norm of the orthogonal component), i.e. the flow field vanishes at `[v]`.
pub fn is_momentum_critical<T: Real>(state: &PureState<T>, tol: T) -> Result<bool> {
    require_three_qubits(state)?;
    let mu = state.momentum_map();
    let v = state.amplitudes();
    let mut total = vec![czero(); v.len()];
    for (slot, h) in mu.shifted_blocks.iter().enumerate() {
        let mut hv = v.to_vec();
        apply_slot_op(&mut hv, h, 3, slot + 1);
        for (t, x) in total.iter_mut().zip(&hv) {
            *t = *t + *x;
        }
    }
    let along = crate::linalg::inner(v, &total);
    for (t, x) in total.iter_mut().zip(v) {
        *t = *t - *x * along;
    }
    Ok(crate::linalg::norm(&total) < tol)
}

/// Converts λ-coordinates to a [`LocalSpectra`] for flow targets.
pub fn spectra_of<T: Real>(lambdas: &[T]) -> LocalSpectra<T> {
    LocalSpectra::new(lambdas.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::qstate::{random_state_from_rng, random_unitary};

    #[test]
    fn hyperdeterminant_on_representatives() {
        let det = hyperdeterminant(&SloccClass::Sep.representative::<f64>()).unwrap();
        assert!(det.norm() < 1e-15);
        let det = hyperdeterminant(&SloccClass::Ghz.representative::<f64>()).unwrap();
        assert!((det.norm() - 0.25).abs() < 1e-14);
        let det = hyperdeterminant(&SloccClass::W.representative::<f64>()).unwrap();
        assert!(det.norm() < 1e-15);
    }

    #[test]
    fn hyperdeterminant_is_sl_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: PureState<f64> = random_state_from_rng(3, &mut rng);
            let raw = hyperdeterminant_raw(x.amplitudes());
            let mut amps = x.amplitudes().to_vec();
            for slot in 1..=3 {
                // Rescale a random invertible operator to determinant one.
                let g: Mat2<f64> = random_gl2(&mut rng);
                let det_root = g.det().sqrt();
                let sl = g.scale(c::<f64>(1.0, 0.0) / det_root);
                apply_slot_op(&mut amps, &sl, 3, slot);
            }
            let moved = hyperdeterminant_raw(&amps);
            assert!(
                (moved - raw).norm() <= 1e-9 * raw.norm().max(1e-3),
                "raw {raw}, moved {moved}"
            );
        }
    }

    #[test]
    fn local_rank_patterns() {
        let tol = default_rank_tol::<f64>();
        assert_eq!(local_ranks(&SloccClass::B1.representative::<f64>(), tol).unwrap(), [1, 2, 2]);
        assert_eq!(local_ranks(&SloccClass::Sep.representative::<f64>(), tol).unwrap(), [1, 1, 1]);
        assert_eq!(local_ranks(&SloccClass::W.representative::<f64>(), tol).unwrap(), [2, 2, 2]);
    }

    #[test]
    fn classify_representatives() {
        let dt = default_det_tol::<f64>();
        let rt = default_rank_tol::<f64>();
        for label in SloccClass::ALL {
            assert_eq!(classify(&label.representative::<f64>(), dt, rt).unwrap(), label);
        }
    }

    #[test]
    fn sep_samples_stay_product() {
        for seed in 0..50 {
            let x: PureState<f64> = random_slocc_sample(SloccClass::Sep, seed, 20.0);
            let ranks = local_ranks(&x, default_rank_tol()).unwrap();
            assert_eq!(ranks, [1, 1, 1]);
        }
    }

    #[test]
    fn classifier_round_trip_per_class() {
        let dt = default_det_tol::<f64>();
        let rt = default_rank_tol::<f64>();
        for label in SloccClass::ALL {
            let mut hits = 0;
            for seed in 0..200 {
                let x: PureState<f64> = random_slocc_sample(label, seed, 20.0);
                if classify(&x, dt, rt).unwrap() == label {
                    hits += 1;
                }
            }
            assert!(hits >= 198, "{}: {hits}/200", label.label());
        }
    }

    #[test]
    fn flow_is_stationary_at_representatives() {
        for label in [SloccClass::W, SloccClass::Ghz] {
            let x = label.representative::<f64>();
            let start = x.psi().lambdas;
            let trace = kirwan_flow(&x, 0.05, 50, 1e-12).unwrap();
            for (a, b) in trace.limit_spectra.iter().zip(&start) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!(trace.converged);
        }
    }

    #[test]
    fn flow_from_w_class_sample_reaches_the_w_vertex() {
        let x: PureState<f64> = random_slocc_sample(SloccClass::W, 99, 20.0);
        let trace = kirwan_flow(&x, 0.05, 4000, 1e-9).unwrap();
        assert!(trace.converged);
        for l in &trace.limit_spectra {
            assert!((l - 1.0 / 6.0).abs() < 1e-4, "limit {:?}", trace.limit_spectra);
        }
        // Norm square is non-increasing along the recorded trace.
        for pair in trace.iterates.windows(2) {
            assert!(pair[1].moment_norm_sq <= pair[0].moment_norm_sq + 1e-12);
        }
    }

    #[test]
    fn criticality_at_representatives_and_not_at_random_states() {
        assert!(is_momentum_critical(&SloccClass::W.representative::<f64>(), 1e-10).unwrap());
        assert!(is_momentum_critical(&SloccClass::B1.representative::<f64>(), 1e-10).unwrap());
        assert!(is_momentum_critical(&SloccClass::Ghz.representative::<f64>(), 1e-10).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let x: PureState<f64> = random_state_from_rng(3, &mut rng);
            assert!(!is_momentum_critical(&x, 1e-6).unwrap());
        }
    }

    #[test]
    fn det_bound_on_normalized_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..2000 {
            let x: PureState<f64> = random_state_from_rng(3, &mut rng);
            assert!(hyperdeterminant(&x).unwrap().norm() <= 0.25 + 1e-9);
        }
    }

    #[test]
    fn det_is_invariant_under_local_unitaries_in_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let x: PureState<f64> = random_state_from_rng(3, &mut rng);
        let base = hyperdeterminant(&x).unwrap().norm();
        for _ in 0..20 {
            let us = [
                random_unitary(&mut rng),
                random_unitary(&mut rng),
                random_unitary(&mut rng),
            ];
            let y = x.apply_local(&us, false).unwrap();
            assert!((hyperdeterminant(&y).unwrap().norm() - base).abs() < 1e-12);
        }
    }
}
