//! Pure states, reduced density matrices, the momentum map of the
//! local-unitary action, and the local-spectra map.
//!
//! Amplitudes are indexed by bitstrings with qubit 1 as the most significant
//! bit, so `|abc⟩` has index `(a << 2) | (b << 1) | c` for three qubits.

use crate::error::Error;
use crate::linalg::{c, czero, norm, normalize, Mat2, C};
use crate::scalar::{r, Real};
use crate::Result;
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Normalized amplitude vector of an N-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T: Real> {
    num_qubits: usize,
    amplitudes: Vec<C<T>>,
}

/// A one-qubit reduced density matrix: Hermitian, trace one, positive
/// semidefinite (all within 1e-12).
#[derive(Clone, Copy, Debug)]
pub struct DensityMatrix2<T: Real> {
    matrix: Mat2<T>,
}

/// Value of the momentum map: one traceless Hermitian block `ρ_i − I/2`
/// per qubit.
#[derive(Clone, Debug)]
pub struct MomentumValue<T: Real> {
    pub shifted_blocks: Vec<Mat2<T>>,
}

/// The λ-vector of a state: `λ_i = 1/2 − p_i` with `p_i` the minimal
/// eigenvalue of the i-th one-qubit marginal.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct LocalSpectra<T: Real> {
    pub lambdas: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    num_qubits: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl<T: Real> PureState<T> {
    /// Builds a state, renormalizing silently when the norm deviates from 1
    /// by at most 1e-6 and rejecting larger deviations.
    pub fn new(num_qubits: usize, mut amplitudes: Vec<C<T>>) -> Result<Self> {
        if num_qubits == 0 || amplitudes.len() != 1usize << num_qubits {
            return Err(Error::BadDimension { len: amplitudes.len(), num_qubits });
        }
        let n = norm(&amplitudes);
        let deviation = (n - T::one()).abs();
        if deviation > r(1e-6) {
            return Err(Error::NotNormalized { norm: n.to_f64().unwrap_or(f64::NAN) });
        }
        if deviation > T::zero() {
            normalize(&mut amplitudes);
        }
        Ok(PureState { num_qubits, amplitudes })
    }

    /// Builds a state from an arbitrary nonzero vector, normalizing it.
    pub fn from_unnormalized(num_qubits: usize, mut amplitudes: Vec<C<T>>) -> Result<Self> {
        if num_qubits == 0 || amplitudes.len() != 1usize << num_qubits {
            return Err(Error::BadDimension { len: amplitudes.len(), num_qubits });
        }
        let n = norm(&amplitudes);
        if n < r(1e-300) {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        normalize(&mut amplitudes);
        Ok(PureState { num_qubits, amplitudes })
    }

    /// Computational basis state `|bits⟩` (qubit 1 = most significant bit).
    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        let dim = 1usize << num_qubits;
        assert!(index < dim);
        let mut amps = vec![czero(); dim];
        amps[index] = c(1.0, 0.0);
        PureState { num_qubits, amplitudes: amps }
    }

    /// The L-qubit W state `(|10…0⟩ + |010…0⟩ + … + |0…01⟩)/√L`.
    pub fn w_state(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1);
        let dim = 1usize << num_qubits;
        let amp = Complex::new(T::one() / r::<T>(num_qubits as f64).sqrt(), T::zero());
        let mut amps = vec![czero(); dim];
        for q in 0..num_qubits {
            amps[1 << q] = amp;
        }
        PureState { num_qubits, amplitudes: amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit == 0 || qubit > self.num_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Bit mask selecting `qubit` (1-based, qubit 1 = most significant).
    fn mask(&self, qubit: usize) -> usize {
        1usize << (self.num_qubits - qubit)
    }

    /// Partial trace of `|v⟩⟨v|` over all qubits except `qubit`.
    pub fn reduced_density(&self, qubit: usize) -> Result<DensityMatrix2<T>> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        let mut rho = Mat2::zero();
        for i in 0..self.dim() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let v0 = self.amplitudes[i];
            let v1 = self.amplitudes[j];
            rho.e[0][0] = rho.e[0][0] + v0 * v0.conj();
            rho.e[0][1] = rho.e[0][1] + v0 * v1.conj();
            rho.e[1][1] = rho.e[1][1] + v1 * v1.conj();
        }
        rho.e[1][0] = rho.e[0][1].conj();
        Ok(DensityMatrix2 { matrix: rho })
    }

    /// Two-qubit marginal on qubits `(qa, qb)` as a 4×4 matrix with basis
    /// `|ab⟩`, `a` the bit of `qa`.
    pub fn reduced_density_pair(&self, qa: usize, qb: usize) -> Result<Vec<Vec<C<T>>>> {
        self.check_qubit(qa)?;
        self.check_qubit(qb)?;
        assert!(qa != qb);
        let ma = self.mask(qa);
        let mb = self.mask(qb);
        let mut rho = vec![vec![czero(); 4]; 4];
        for i in 0..self.dim() {
            let ri = (((i & ma != 0) as usize) << 1) | ((i & mb != 0) as usize);
            let rest_i = i & !(ma | mb);
            for a in 0..2usize {
                for b in 0..2usize {
                    let j = rest_i | if a == 1 { ma } else { 0 } | if b == 1 { mb } else { 0 };
                    let rj = (a << 1) | b;
                    rho[ri][rj] = rho[ri][rj] + self.amplitudes[i] * self.amplitudes[j].conj();
                }
            }
        }
        Ok(rho)
    }

    /// The momentum map value `μ([v])`: blocks `ρ_i − I/2` in the Hermitian
    /// convention.
    pub fn momentum_map(&self) -> MomentumValue<T> {
        let half = Mat2::diag(r(0.5), r(0.5));
        let blocks = (1..=self.num_qubits)
            .map(|q| self.reduced_density(q).expect("qubit in range").matrix().sub(&half))
            .collect();
        MomentumValue { shifted_blocks: blocks }
    }

    /// The spectral map: `λ_i = 1/2 − min-eigenvalue(ρ_i)`, closed form.
    pub fn psi(&self) -> LocalSpectra<T> {
        let half = r::<T>(0.5);
        let lambdas = (1..=self.num_qubits)
            .map(|q| {
                let rho = self.reduced_density(q).expect("qubit in range");
                let (lo, _) = rho.matrix().hermitian_eigenvalues();
                (half - lo).max(T::zero()).min(half)
            })
            .collect();
        LocalSpectra { lambdas }
    }

    /// Applies one 2×2 operator per qubit slot. Non-unitary operators
    /// require `renormalize`.
    pub fn apply_local(&self, ops: &[Mat2<T>], renormalize: bool) -> Result<Self> {
        assert_eq!(ops.len(), self.num_qubits, "one operator per qubit");
        for (slot, op) in ops.iter().enumerate() {
            if op.det().norm() == T::zero() || op.condition_number() > r(1e14) {
                return Err(Error::SingularOperator { slot: slot + 1 });
            }
            if !renormalize && op.unitarity_defect() > r(1e-10) {
                return Err(Error::NonUnitaryOperator { slot: slot + 1 });
            }
        }
        let mut amps = self.amplitudes.clone();
        for (slot, op) in ops.iter().enumerate() {
            apply_slot_op(&mut amps, op, self.num_qubits, slot + 1);
        }
        if renormalize {
            PureState::from_unnormalized(self.num_qubits, amps)
        } else {
            PureState::new(self.num_qubits, amps)
        }
    }

    /// Relabels qubits: new slot `s` carries old qubit `perm[s-1]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.num_qubits);
        for &q in perm {
            self.check_qubit(q)?;
        }
        let n = self.num_qubits;
        let mut amps = vec![czero(); self.dim()];
        for i in 0..self.dim() {
            let mut j = 0usize;
            for s in 0..n {
                let old_q = perm[s];
                let bit = (i >> (n - old_q)) & 1;
                j |= bit << (n - 1 - s);
            }
            amps[j] = self.amplitudes[i];
        }
        Ok(PureState { num_qubits: n, amplitudes: amps })
    }

    /// Fidelity-free overlap `|⟨other|self⟩|²`.
    pub fn overlap_sq(&self, other: &Self) -> T {
        crate::linalg::inner(other.amplitudes(), self.amplitudes()).norm_sqr()
    }

    /// Serializes to the state-file JSON object.
    pub fn to_json(&self) -> serde_json::Value {
        let file = StateFile {
            num_qubits: self.num_qubits,
            amplitudes: self
                .amplitudes
                .iter()
                .map(|a| [a.re.to_f64().unwrap_or(f64::NAN), a.im.to_f64().unwrap_or(f64::NAN)])
                .collect(),
        };
        serde_json::to_value(file).expect("state file serializes")
    }

    /// Parses the state-file JSON object, accepting unnormalized input.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedStateFile(e.to_string()))?;
        if file.num_qubits == 0 || file.amplitudes.len() != 1usize << file.num_qubits {
            return Err(Error::MalformedStateFile(format!(
                "expected 2^{} amplitude pairs, got {}",
                file.num_qubits,
                file.amplitudes.len()
            )));
        }
        let amps: Vec<C<T>> = file.amplitudes.iter().map(|p| c(p[0], p[1])).collect();
        PureState::from_unnormalized(file.num_qubits, amps)
    }
}

/// Applies a 2×2 operator to one qubit slot of an amplitude vector in place.
pub fn apply_slot_op<T: Real>(amps: &mut [C<T>], op: &Mat2<T>, num_qubits: usize, qubit: usize) {
    let mask = 1usize << (num_qubits - qubit);
    for i in 0..amps.len() {
        if i & mask != 0 {
            continue;
        }
        let j = i | mask;
        let v0 = amps[i];
        let v1 = amps[j];
        amps[i] = op.e[0][0] * v0 + op.e[0][1] * v1;
        amps[j] = op.e[1][0] * v0 + op.e[1][1] * v1;
    }
}

impl<T: Real> DensityMatrix2<T> {
    /// Validates the defining invariants: Hermitian, unit trace, PSD.
    pub fn new(matrix: Mat2<T>) -> Option<Self> {
        let tol = r::<T>(1e-12);
        if matrix.hermiticity_defect() > tol {
            return None;
        }
        if (matrix.trace().re - T::one()).abs() > tol || matrix.trace().im.abs() > tol {
            return None;
        }
        let (lo, _) = matrix.hermitian_eigenvalues();
        if lo < -tol {
            return None;
        }
        Some(DensityMatrix2 { matrix })
    }

    pub fn matrix(&self) -> Mat2<T> {
        self.matrix
    }

    /// Eigenvalues (min, max).
    pub fn eigenvalues(&self) -> (T, T) {
        self.matrix.hermitian_eigenvalues()
    }

    /// Purity `tr ρ²`.
    pub fn purity(&self) -> T {
        self.matrix.mul(&self.matrix).trace().re
    }
}

impl<T: Real> MomentumValue<T> {
    /// `‖μ‖² = Σ_i tr((ρ_i − I/2)²)`.
    pub fn norm_sq(&self) -> T {
        self.shifted_blocks.iter().map(|b| b.mul(b).trace().re).sum()
    }
}

impl<T: Real> LocalSpectra<T> {
    pub fn new(lambdas: Vec<T>) -> Self {
        LocalSpectra { lambdas }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Converts to minimal eigenvalues `p_i = 1/2 − λ_i`.
    pub fn min_eigenvalues(&self) -> Vec<T> {
        self.lambdas.iter().map(|&l| r::<T>(0.5) - l).collect()
    }

    /// Builds from minimal eigenvalues.
    pub fn from_min_eigenvalues(ps: &[T]) -> Self {
        LocalSpectra { lambdas: ps.iter().map(|&p| r::<T>(0.5) - p).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.lambdas
            .iter()
            .zip(&other.lambdas)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Haar-like random pure state: i.i.d. standard complex Gaussian amplitudes,
/// normalized. Deterministic in the seed.
pub fn haar_random_state<T: Real>(num_qubits: usize, seed: u64) -> PureState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_from_rng(num_qubits, &mut rng)
}

/// Same ensemble, drawing from a caller-provided generator.
pub fn random_state_from_rng<T: Real, R: Rng>(num_qubits: usize, rng: &mut R) -> PureState<T> {
    let dim = 1usize << num_qubits;
    let amps: Vec<C<T>> = (0..dim)
        .map(|_| {
            let (re, im) = gaussian_pair(rng);
            c(re, im)
        })
        .collect();
    PureState::from_unnormalized(num_qubits, amps).expect("gaussian vector is nonzero")
}

/// One pair of independent standard normals via Box–Muller.
pub fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    (radius * angle.cos(), radius * angle.sin())
}

/// A Haar-random 2×2 unitary (polar factor of a complex Gaussian matrix).
pub fn random_unitary<T: Real, R: Rng>(rng: &mut R) -> Mat2<T> {
    loop {
        let g = random_gl2(rng);
        let u: Mat2<T> = g.adjoint().maximizing_unitary().adjoint();
        if u.unitarity_defect() < r(1e-10) {
            return u;
        }
    }
}

/// A 2×2 matrix with i.i.d. standard complex Gaussian entries.
pub fn random_gl2<T: Real, R: Rng>(rng: &mut R) -> Mat2<T> {
    let mut entry = || {
        let (re, im) = gaussian_pair(rng);
        c(re, im)
    };
    Mat2::from_rows(entry(), entry(), entry(), entry())
}
