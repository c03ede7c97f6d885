//! Fibers of the spectral map: sampling states with prescribed local
//! spectra, estimating the dimension of the fiber modulo local unitaries
//! via invariant coordinates, constructive local-unitary equivalence
//! checks, and canonical forms on the polytope boundary.

use crate::error::Error;
use crate::linalg::{
    c, czero, hermitian_eigenvalues, inner, kron2, normalize, Mat2, C,
};
use crate::polytope::{self, FaceId};
use crate::qstate::{
    apply_slot_op, haar_random_state, random_state_from_rng, random_unitary, LocalSpectra,
    PureState,
};
use crate::scalar::{r, Real};
use crate::slocc::hyperdeterminant;
use crate::Result;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Local-unitary invariant coordinates of a three-qubit state: the three
/// purities, a Kempe-type two-site invariant, and the squared modulus of the
/// hyperdeterminant.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct InvariantTuple<T: Real> {
    pub i1: T,
    pub i2: T,
    pub i3: T,
    /// `tr[(ρ₁⊗ρ₂) ρ₁₂]`.
    pub i4: T,
    /// `|Det|²` of the normalized state.
    pub i5: T,
}

/// One accepted fiber sample with the spectral-matching residual at
/// convergence.
#[derive(Clone, Debug)]
pub struct FiberSample<T: Real> {
    pub state: PureState<T>,
    pub residual: T,
    /// Restart index that produced the sample (for reproducibility).
    pub restart: u64,
}

/// Result of a sampling run; `complete` is false when fewer than the
/// requested number of samples were accepted within the restart budget.
#[derive(Clone, Debug)]
pub struct FiberSampleBatch<T: Real> {
    pub samples: Vec<FiberSample<T>>,
    pub attempts: u64,
    pub acceptance_rate: f64,
    pub complete: bool,
}

/// Dimension estimate of a fiber's invariant-coordinate cloud.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct CloudReport<T: Real> {
    pub num_samples: usize,
    /// Raw `(I4, I5)` pairs.
    pub coordinates: Vec<(T, T)>,
    /// Singular values of the centered, rescaled cloud (the n×2 data matrix).
    pub centered_singular_values: [T; 2],
    /// Convex-hull area of the rescaled cloud.
    pub hull_area: T,
    /// Maximal pairwise distance of the rescaled cloud.
    pub max_pairwise_distance: T,
    pub estimated_dimension: usize,
}

/// Canonical form of a state on the polytope boundary.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub enum BoundaryCanonicalForm<T: Real> {
    /// On the polygonal face of qubit `face`: state
    /// `c₁|000⟩ + c₂|110⟩ + c₃|101⟩` after permuting `face` to slot 1;
    /// `moduli` are `(|c₁|², |c₂|², |c₃|²)`.
    Nondegenerate { face: usize, moduli: [T; 3] },
    /// On the face `λ_q = 0`: canonical data are the λ-values of the two
    /// non-degenerate qubits, which fix the 2-plane of the Schmidt pair.
    Degenerate { degenerate_qubit: usize, lambdas: [T; 2] },
}

/// Normalized histogram of Haar samples binned by distance to the polytope
/// boundary.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct ShellHistogram<T: Real> {
    pub num_samples: usize,
    pub num_bins: usize,
    pub bin_width: T,
    pub counts: Vec<usize>,
    /// Counts normalized to densities per unit shell width.
    pub densities: Vec<T>,
}

// ---------------------------------------------------------------------------
// Invariants

/// Computes the invariant tuple of a three-qubit state.
pub fn lu_invariants<T: Real>(state: &PureState<T>) -> Result<InvariantTuple<T>> {
    if state.num_qubits() != 3 {
        return Err(Error::WrongQubitCount { expected: 3, actual: state.num_qubits() });
    }
    let rho1 = state.reduced_density(1)?;
    let rho2 = state.reduced_density(2)?;
    let rho3 = state.reduced_density(3)?;
    let rho12 = state.reduced_density_pair(1, 2)?;
    let product = kron2(&rho1.matrix(), &rho2.matrix());
    let mut i4 = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            i4 += (product[i][j] * rho12[j][i]).re;
        }
    }
    let det = hyperdeterminant(state)?;
    Ok(InvariantTuple {
        i1: rho1.purity(),
        i2: rho2.purity(),
        i3: rho3.purity(),
        i4,
        i5: det.norm_sqr(),
    })
}

// ---------------------------------------------------------------------------
// Fiber sampling

/// Optimizer settings for [`sample_fiber`].
#[derive(Clone, Copy, Debug)]
pub struct FiberSamplerConfig<T: Real> {
    /// Fixed gradient step on the sphere.
    pub step: T,
    pub max_iter: usize,
    /// Acceptance threshold on the objective `F`.
    pub accept_tol: T,
    /// Early-exit floor: iteration stops once `F` drops below this.
    pub floor: T,
    /// Restart budget as a multiple of the requested count.
    pub restart_factor: u64,
}

impl<T: Real> Default for FiberSamplerConfig<T> {
    fn default() -> Self {
        FiberSamplerConfig {
            step: r(0.2),
            max_iter: 5000,
            accept_tol: r(1e-10),
            floor: r(1e-28),
            restart_factor: 50,
        }
    }
}

/// Spectral-matching objective `F(v) = Σ_i (λ_i(v) − target_i)²`.
pub fn fiber_objective<T: Real>(amps: &[C<T>], target: &[T]) -> T {
    let state = PureState::from_unnormalized(3, amps.to_vec()).expect("nonzero vector");
    state
        .psi()
        .lambdas
        .iter()
        .zip(target)
        .map(|(&l, &t)| (l - t) * (l - t))
        .sum()
}

/// Analytic Euclidean gradient of the fiber objective at a unit vector,
/// before tangent projection.
///
/// Away from marginal degeneracy `∇F = −4 Σ_i (λ_i − t_i) Q_i v` with
/// `Q_i` the projector onto the minimal eigenvector of `ρ_i` acting on
/// slot `i`; at near-degenerate spectra the eigenvector convention (ties
/// toward the smaller index) yields a subgradient.
pub fn fiber_gradient<T: Real>(amps: &[C<T>], target: &[T]) -> Vec<C<T>> {
    let state = PureState::new(3, amps.to_vec()).expect("unit vector");
    let lambdas = state.psi().lambdas;
    let mut grad = vec![czero(); amps.len()];
    for (i, (&l, &t)) in lambdas.iter().zip(target).enumerate() {
        let rho = state.reduced_density(i + 1).expect("qubit in range");
        let (lo, _) = rho.matrix().hermitian_eigenvalues();
        let u = rho.matrix().hermitian_eigenvector(lo);
        let projector = Mat2::from_rows(
            u[0] * u[0].conj(),
            u[0] * u[1].conj(),
            u[1] * u[0].conj(),
            u[1] * u[1].conj(),
        );
        let mut qv = amps.to_vec();
        apply_slot_op(&mut qv, &projector, 3, i + 1);
        let weight = r::<T>(-4.0) * (l - t);
        for (g, x) in grad.iter_mut().zip(&qv) {
            *g = *g + x.scale(weight);
        }
    }
    grad
}

/// Partial derivatives `∂Det/∂a_k` of the hyperdeterminant. The quartic
/// has degree ≤ 2 in each amplitude, so the unit central difference is the
/// exact derivative.
fn hyperdeterminant_partials<T: Real>(amps: &[C<T>]) -> Vec<C<T>> {
    let one = c::<T>(1.0, 0.0);
    (0..amps.len())
        .map(|k| {
            let mut plus = amps.to_vec();
            let mut minus = amps.to_vec();
            plus[k] = plus[k] + one;
            minus[k] = minus[k] - one;
            (crate::slocc::hyperdeterminant_raw(&plus)
                - crate::slocc::hyperdeterminant_raw(&minus))
            .scale(r(0.5))
        })
        .collect()
}

/// Residuals and tangent-projected gradients of the matching system at a
/// unit vector: `λ_i − t_i` with `∇λ_i = −2 Q_i v` (`Q_i` the
/// minimal-eigenvector projector at slot `i`), plus, when `with_det` is
/// set, `Re Det` and `Im Det` with the exact polynomial gradients.
fn residual_system<T: Real>(
    amps: &[C<T>],
    target: &[T],
    with_det: bool,
) -> (Vec<T>, Vec<Vec<C<T>>>) {
    let state = PureState::new(3, amps.to_vec()).expect("unit vector");
    let lambdas = state.psi().lambdas;
    let mut residual = Vec::with_capacity(5);
    let mut grads: Vec<Vec<C<T>>> = Vec::with_capacity(5);
    let project = |mut g: Vec<C<T>>| -> Vec<C<T>> {
        let along = inner(amps, &g).re;
        for (gk, &vk) in g.iter_mut().zip(amps) {
            *gk = *gk - vk.scale(along);
        }
        g
    };
    for i in 0..3 {
        residual.push(lambdas[i] - target[i]);
        let rho = state.reduced_density(i + 1).expect("qubit in range");
        let (lo, _) = rho.matrix().hermitian_eigenvalues();
        let u = rho.matrix().hermitian_eigenvector(lo);
        let projector = Mat2::from_rows(
            u[0] * u[0].conj(),
            u[0] * u[1].conj(),
            u[1] * u[0].conj(),
            u[1] * u[1].conj(),
        );
        let mut qv = amps.to_vec();
        apply_slot_op(&mut qv, &projector, 3, i + 1);
        let minus_two = r::<T>(-2.0);
        grads.push(project(qv.iter().map(|x| x.scale(minus_two)).collect()));
    }
    if with_det {
        let det = crate::slocc::hyperdeterminant_raw(amps);
        let partials = hyperdeterminant_partials(amps);
        // Realified gradient of Re f is conj(f'); of Im f, i·conj(f').
        residual.push(det.re);
        grads.push(project(partials.iter().map(|p| p.conj()).collect()));
        residual.push(det.im);
        let i_unit = c::<T>(0.0, 1.0);
        grads.push(project(partials.iter().map(|p| p.conj() * i_unit).collect()));
    }
    (residual, grads)
}

/// Solves a small (≤ 5×5) linear system by Gaussian elimination with
/// partial pivoting; `None` when the pivot underflows.
fn solve_small<T: Real>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[perm[i]][col].abs().partial_cmp(&m[perm[j]][col].abs()).unwrap()
            })
            .unwrap();
        perm.swap(col, pivot);
        let p = m[perm[col]][col];
        if p.abs() < r(1e-300) {
            return None;
        }
        for row in (col + 1)..n {
            let factor = m[perm[row]][col] / p;
            for k in col..n {
                let sub = factor * m[perm[col]][k];
                m[perm[row]][k] -= sub;
            }
            let sub = factor * rhs[perm[col]];
            rhs[perm[row]] -= sub;
        }
    }
    let mut x = vec![T::zero(); n];
    for col in (0..n).rev() {
        let mut acc = rhs[perm[col]];
        for k in (col + 1)..n {
            acc -= m[perm[col]][k] * x[k];
        }
        x[col] = acc / m[perm[col]][col];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step on the pair.
    let mut z = seed ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn optimize_one<T: Real>(
    target: &[T],
    seed: u64,
    restart: u64,
    cfg: &FiberSamplerConfig<T>,
    with_det: bool,
) -> Option<FiberSample<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, restart));
    let start: PureState<T> = random_state_from_rng(3, &mut rng);
    let mut amps = start.amplitudes().to_vec();
    // Levenberg–Marquardt on the residual system: λ(v) − t, extended on
    // polygonal faces by Re/Im Det (the fiber there lies in {Det = 0}, and
    // the extra residuals are linear in the otherwise quartically flat
    // transverse direction). Plain gradient descent converges only
    // polynomially at such boundary targets; the damped normal equations
    // amplify the near-null direction correctly and restore fast local
    // convergence.
    let extended = |v: &[C<T>]| -> T {
        let mut f = fiber_objective(v, target);
        if with_det {
            f += crate::slocc::hyperdeterminant_raw(v).norm_sqr();
        }
        f
    };
    let mut value = extended(&amps);
    let mut damping = r::<T>(1e-3);
    'outer: for _ in 0..cfg.max_iter {
        if value < cfg.floor {
            break;
        }
        let (residual, grads) = residual_system(&amps, target, with_det);
        let n = residual.len();
        let mut a = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = inner(&grads[i], &grads[j]).re;
            }
        }
        loop {
            let mut damped = a.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += damping;
            }
            let delta_ok = solve_small(&damped, &residual).map(|y| {
                let mut next = amps.clone();
                for (i, g) in grads.iter().enumerate() {
                    for (nk, &gk) in next.iter_mut().zip(g) {
                        *nk = *nk - gk.scale(y[i]);
                    }
                }
                normalize(&mut next);
                next
            });
            let accepted = match delta_ok {
                Some(next) => {
                    let next_value = extended(&next);
                    if next_value.is_finite() && next_value < value {
                        amps = next;
                        value = next_value;
                        true
                    } else {
                        false
                    }
                }
                None => false,
            };
            if accepted {
                damping = (damping * r(0.33)).max(r(1e-16));
                break;
            }
            damping *= r(4.0);
            if damping > r(1e12) {
                break 'outer;
            }
        }
    }
    let spectral = fiber_objective(&amps, target);
    if spectral < cfg.accept_tol && value < cfg.accept_tol {
        let state = PureState::new(3, amps).expect("unit vector");
        Some(FiberSample { state, residual: spectral, restart })
    } else {
        None
    }
}

/// Samples states whose local spectra match `target` by projected gradient
/// descent from Haar-random starts. Accepts minimizers with objective below
/// `tol`; gives up (with `complete = false`) after `50 × count` restarts.
pub fn sample_fiber<T: Real>(
    target: &LocalSpectra<T>,
    count: usize,
    seed: u64,
    tol: T,
) -> Result<FiberSampleBatch<T>> {
    let cfg = FiberSamplerConfig { accept_tol: tol, ..FiberSamplerConfig::default() };
    sample_fiber_with_config(target, count, seed, &cfg)
}

/// [`sample_fiber`] with explicit optimizer settings.
pub fn sample_fiber_with_config<T: Real>(
    target: &LocalSpectra<T>,
    count: usize,
    seed: u64,
    cfg: &FiberSamplerConfig<T>,
) -> Result<FiberSampleBatch<T>> {
    let report = polytope::higuchi_check(target, r(1e-9))?;
    if !report.inside {
        return Err(Error::OutsidePolytope {
            worst_slack: report.distance_to_boundary.to_f64().unwrap_or(f64::NAN),
        });
    }
    // On a polygonal face the fiber lies in {Det = 0}; enlist that as an
    // extra residual there (it regularizes the transversally degenerate
    // spectral system without changing the solution set).
    let with_det = report
        .active_faces
        .iter()
        .any(|f| matches!(f, FaceId::Polygonal { .. }));
    let lambdas = &target.lambdas;
    let cap = cfg.restart_factor * count as u64;
    let mut samples: Vec<FiberSample<T>> = Vec::with_capacity(count);
    let mut next_restart = 0u64;
    while samples.len() < count && next_restart < cap {
        let batch = (2 * (count - samples.len()).max(8)) as u64;
        let end = (next_restart + batch).min(cap);
        let found: Vec<Option<FiberSample<T>>> = (next_restart..end)
            .into_par_iter()
            .map(|restart| optimize_one(lambdas, seed, restart, cfg, with_det))
            .collect();
        for sample in found.into_iter().flatten() {
            if samples.len() < count {
                samples.push(sample);
            }
        }
        next_restart = end;
    }
    let attempts = samples.last().map(|s| s.restart + 1).unwrap_or(next_restart);
    let complete = samples.len() == count;
    let acceptance_rate = if attempts == 0 { 0.0 } else { samples.len() as f64 / attempts as f64 };
    Ok(FiberSampleBatch { samples, attempts, acceptance_rate, complete })
}

// ---------------------------------------------------------------------------
// Fiber dimension

/// Observed ranges of `(I4, I5)` over a fixed Haar reference ensemble,
/// used to put the two invariant coordinates on a common scale.
pub fn haar_reference_ranges<T: Real>() -> (T, T) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut min4 = T::infinity();
    let mut max4 = T::neg_infinity();
    let mut min5 = T::infinity();
    let mut max5 = T::neg_infinity();
    for _ in 0..2000 {
        let x: PureState<T> = random_state_from_rng(3, &mut rng);
        let inv = lu_invariants(&x).expect("three qubits");
        min4 = min4.min(inv.i4);
        max4 = max4.max(inv.i4);
        min5 = min5.min(inv.i5);
        max5 = max5.max(inv.i5);
    }
    (max4 - min4, max5 - min5)
}

/// Minimal number of samples for a dimension estimate.
pub const MIN_CLOUD_SAMPLES: usize = 50;

/// Estimates the fiber dimension modulo local unitaries from the `(I4, I5)`
/// cloud of accepted samples.
///
/// Dimension rule (after rescaling by the Haar reference ranges): a
/// dimension-0 verdict requires maximal pairwise distance below 1e-6;
/// dimension 2 requires two centered singular values above 1e-3 and hull
/// area above 1e-4; anything else reports 1.
pub fn fiber_dimension<T: Real>(
    _target: &LocalSpectra<T>,
    samples: &[FiberSample<T>],
) -> Result<CloudReport<T>> {
    if samples.len() < MIN_CLOUD_SAMPLES {
        return Err(Error::TooFewSamples { required: MIN_CLOUD_SAMPLES, actual: samples.len() });
    }
    let coordinates: Vec<(T, T)> = samples
        .iter()
        .map(|s| {
            let inv = lu_invariants(&s.state).expect("three qubits");
            (inv.i4, inv.i5)
        })
        .collect();
    let (range4, range5) = haar_reference_ranges::<T>();
    let rescaled: Vec<(T, T)> =
        coordinates.iter().map(|&(a, b)| (a / range4, b / range5)).collect();

    let n = rescaled.len();
    let nt = r::<T>(n as f64);
    let mean4 = rescaled.iter().map(|p| p.0).sum::<T>() / nt;
    let mean5 = rescaled.iter().map(|p| p.1).sum::<T>() / nt;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for &(a, b) in &rescaled {
        let da = a - mean4;
        let db = b - mean5;
        sxx += da * da;
        sxy += da * db;
        syy += db * db;
    }
    // Singular values of the centered n×2 data matrix, via its 2×2 scatter.
    let half = r::<T>(0.5);
    let mean = (sxx + syy) * half;
    let delta = (sxx - syy) * half;
    let radius = (delta * delta + sxy * sxy).sqrt();
    let sv_hi = (mean + radius).max(T::zero()).sqrt();
    let sv_lo = (mean - radius).max(T::zero()).sqrt();

    let mut max_pair = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let da = rescaled[i].0 - rescaled[j].0;
            let db = rescaled[i].1 - rescaled[j].1;
            max_pair = max_pair.max((da * da + db * db).sqrt());
        }
    }
    let hull_area = convex_hull_area(&rescaled);

    let sv_threshold = r::<T>(1e-3);
    let sv_count = (sv_hi > sv_threshold) as usize + (sv_lo > sv_threshold) as usize;
    let estimated_dimension = if max_pair < r(1e-6) {
        0
    } else if sv_count >= 2 && hull_area > r(1e-4) {
        2
    } else {
        1
    };

    Ok(CloudReport {
        num_samples: n,
        coordinates,
        centered_singular_values: [sv_hi, sv_lo],
        hull_area,
        max_pairwise_distance: max_pair,
        estimated_dimension,
    })
}

/// Area of the convex hull of a planar point cloud (monotone chain).
pub fn convex_hull_area<T: Real>(points: &[(T, T)]) -> T {
    let mut pts: Vec<(T, T)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    if pts.len() < 3 {
        return T::zero();
    }
    let cross = |o: (T, T), a: (T, T), b: (T, T)| -> T {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(T, T)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2
            && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= T::zero()
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(T, T)> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= T::zero()
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let hull: Vec<(T, T)> = lower.into_iter().chain(upper).collect();
    if hull.len() < 3 {
        return T::zero();
    }
    let mut area2 = T::zero();
    for i in 0..hull.len() {
        let (x1, y1) = hull[i];
        let (x2, y2) = hull[(i + 1) % hull.len()];
        area2 += x1 * y2 - x2 * y1;
    }
    area2.abs() * r(0.5)
}

// ---------------------------------------------------------------------------
// Local-unitary overlap maximization

/// Best value of `|⟨b| U₁⊗…⊗U_N |a⟩|²` over local unitaries found by
/// alternating polar updates with random restarts. A heuristic lower bound,
/// symmetric in its arguments up to numerical noise.
pub fn lu_overlap_max<T: Real>(
    a: &PureState<T>,
    b: &PureState<T>,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> T {
    assert_eq!(a.num_qubits(), b.num_qubits(), "equal qubit counts required");
    let n = a.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = T::zero();
    for restart in 0..restarts.max(1) {
        let mut ops: Vec<Mat2<T>> = if restart == 0 {
            vec![Mat2::identity(); n]
        } else {
            (0..n).map(|_| random_unitary(&mut rng)).collect()
        };
        let mut value = T::zero();
        for _sweep in 0..iters {
            let before = value;
            for slot in 1..=n {
                // Contract all slots except `slot`.
                let mut ca = a.amplitudes().to_vec();
                for (s, op) in ops.iter().enumerate() {
                    if s + 1 != slot {
                        apply_slot_op(&mut ca, op, n, s + 1);
                    }
                }
                let mask = 1usize << (n - slot);
                let mut m = Mat2::zero();
                for idx in 0..ca.len() {
                    let i = ((idx & mask) != 0) as usize;
                    let lo = idx & !mask;
                    let hi = idx | mask;
                    // M_{ij} = Σ_rest conj(b[j, rest]) · c[i, rest]
                    m.e[i][0] = m.e[i][0] + b.amplitudes()[lo].conj() * ca[idx];
                    m.e[i][1] = m.e[i][1] + b.amplitudes()[hi].conj() * ca[idx];
                }
                let u = m.maximizing_unitary();
                value = u.mul(&m).trace().re;
                ops[slot - 1] = u;
            }
            if (value - before).abs() < r(1e-15) {
                break;
            }
        }
        best = best.max(value * value);
    }
    best.min(T::one())
}

// ---------------------------------------------------------------------------
// Boundary canonical forms

/// Canonical form on a single polygonal face with non-degenerate marginal
/// spectra: solves `{|c₁|², |c₂|², |c₃|²}` from the marginal eigenvalues by
/// enumerating eigenvalue assignments.
pub fn boundary_canonical_nondegenerate<T: Real>(
    target: &LocalSpectra<T>,
) -> Result<BoundaryCanonicalForm<T>> {
    let tol = r::<T>(1e-9);
    if target.len() != 3 {
        return Err(Error::WrongQubitCount { expected: 3, actual: target.len() });
    }
    let faces = polytope::face_classify(target, tol)?;
    let polygonal: Vec<usize> = faces
        .iter()
        .filter_map(|f| match f {
            FaceId::Polygonal { qubit } => Some(*qubit),
            FaceId::Degenerate { .. } => None,
        })
        .collect();
    let degenerate = faces.iter().any(|f| matches!(f, FaceId::Degenerate { .. }));
    if polygonal.len() != 1 || degenerate {
        return Err(Error::NotOnNondegenerateFace {
            reason: format!("active faces {faces:?}"),
        });
    }
    for &l in &target.lambdas {
        if l <= tol || l >= r::<T>(0.5) - tol {
            return Err(Error::NotOnNondegenerateFace {
                reason: "marginal spectra must be non-degenerate".into(),
            });
        }
    }
    let face = polygonal[0];
    // Permute the active face to index 1, keeping the other two in order.
    let order = face_permutation(face);
    let p: Vec<T> = order.iter().map(|&q| r::<T>(0.5) - target.lambdas[q - 1]).collect();

    let mut solutions: Vec<[T; 3]> = Vec::new();
    for choice in 0..8u32 {
        let m: Vec<T> = (0..3)
            .map(|i| if choice & (1 << i) != 0 { T::one() - p[i] } else { p[i] })
            .collect();
        let sum: T = m.iter().copied().sum();
        if (sum - T::one()).abs() <= tol && m.iter().all(|&x| x >= -tol) {
            let candidate = [m[0].max(T::zero()), m[1].max(T::zero()), m[2].max(T::zero())];
            if !solutions
                .iter()
                .any(|s| s.iter().zip(&candidate).all(|(&a, &b)| (a - b).abs() < tol))
            {
                solutions.push(candidate);
            }
        }
    }
    match solutions.len() {
        1 => Ok(BoundaryCanonicalForm::Nondegenerate { face, moduli: solutions[0] }),
        0 => {
            let sum: T = p.iter().copied().sum();
            Err(Error::NoCanonicalSolution {
                residual: (sum - T::one()).abs().to_f64().unwrap_or(f64::NAN),
            })
        }
        _ => Err(Error::NotOnNondegenerateFace { reason: "ambiguous eigenvalue assignment".into() }),
    }
}

/// Slot order placing `face` first, the remaining qubits in ascending order.
fn face_permutation(face: usize) -> [usize; 3] {
    match face {
        1 => [1, 2, 3],
        2 => [2, 1, 3],
        3 => [3, 1, 2],
        _ => panic!("face index must be 1..=3"),
    }
}

/// Builds the canonical state `c₁|000⟩ + c₂|110⟩ + c₃|101⟩` (real
/// nonnegative amplitudes) in the original qubit order.
pub fn reconstruct_nondegenerate<T: Real>(form: &BoundaryCanonicalForm<T>) -> Result<PureState<T>> {
    let (face, moduli) = match form {
        BoundaryCanonicalForm::Nondegenerate { face, moduli } => (*face, moduli),
        BoundaryCanonicalForm::Degenerate { .. } => {
            return Err(Error::NotOnNondegenerateFace { reason: "degenerate form".into() })
        }
    };
    let mut amps = vec![czero(); 8];
    amps[0b000] = Complex::new(moduli[0].max(T::zero()).sqrt(), T::zero());
    amps[0b110] = Complex::new(moduli[1].max(T::zero()).sqrt(), T::zero());
    amps[0b101] = Complex::new(moduli[2].max(T::zero()).sqrt(), T::zero());
    let canonical = PureState::from_unnormalized(3, amps)?;
    // Undo the face permutation: slot s of the canonical state carries
    // original qubit order[s-1]; invert that relabeling.
    let order = face_permutation(face);
    let mut inverse = [0usize; 3];
    for (s, &q) in order.iter().enumerate() {
        inverse[q - 1] = s + 1;
    }
    canonical.permute_qubits(&inverse)
}

/// Canonical data on a degenerate face: permutes the maximally mixed qubit
/// to slot 1, verifies the two-qubit marginal of the rest is half a rank-2
/// projector, and returns the λ-values of the other two qubits.
pub fn boundary_canonical_degenerate<T: Real>(
    state: &PureState<T>,
    tol: T,
) -> Result<BoundaryCanonicalForm<T>> {
    if state.num_qubits() != 3 {
        return Err(Error::WrongQubitCount { expected: 3, actual: state.num_qubits() });
    }
    let lambdas = state.psi().lambdas;
    let (q_min, &l_min) = lambdas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("three entries");
    if l_min >= tol {
        return Err(Error::NoDegenerateMarginal {
            tol: tol.to_f64().unwrap_or(f64::NAN),
            min_lambda: l_min.to_f64().unwrap_or(f64::NAN),
        });
    }
    let degenerate_qubit = q_min + 1;
    let others: Vec<usize> = (1..=3).filter(|&q| q != degenerate_qubit).collect();
    let perm = [degenerate_qubit, others[0], others[1]];
    let permuted = state.permute_qubits(&perm)?;
    let rho23 = permuted.reduced_density_pair(2, 3)?;
    let eigs = hermitian_eigenvalues(&rho23);
    let half = r::<T>(0.5);
    let ok = eigs[0].abs() <= tol
        && eigs[1].abs() <= tol
        && (eigs[2] - half).abs() <= tol
        && (eigs[3] - half).abs() <= tol;
    if !ok {
        return Err(Error::NotHalfProjector {
            eigenvalues: eigs.iter().map(|e| e.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }
    let rest = permuted.psi().lambdas;
    Ok(BoundaryCanonicalForm::Degenerate { degenerate_qubit, lambdas: [rest[1], rest[2]] })
}

// ---------------------------------------------------------------------------
// Haar density near the boundary

/// Haar-samples three-qubit states, bins them by distance of their λ-vector
/// to the polytope boundary, and returns densities per unit shell width.
pub fn boundary_shell_histogram<T: Real>(
    num_samples: usize,
    num_bins: usize,
    seed: u64,
) -> ShellHistogram<T> {
    assert!(num_samples >= 10_000, "histogram needs at least 10^4 samples");
    assert!(num_bins >= 2);
    let distances: Vec<T> = (0..num_samples as u64)
        .into_par_iter()
        .map(|i| {
            let x: PureState<T> = haar_random_state(3, mix_seed(seed, i));
            let report =
                polytope::higuchi_check(&x.psi(), r(1e-9)).expect("Haar spectra are admissible");
            report.distance_to_boundary.max(T::zero())
        })
        .collect();
    let max_distance = distances.iter().copied().fold(T::zero(), T::max);
    let bin_width = max_distance / r::<T>(num_bins as f64) + r::<T>(1e-300);
    let mut counts = vec![0usize; num_bins];
    for &d in &distances {
        let mut bin = (d / bin_width).to_f64().unwrap_or(0.0) as usize;
        if bin >= num_bins {
            bin = num_bins - 1;
        }
        counts[bin] += 1;
    }
    let total = r::<T>(num_samples as f64);
    let densities =
        counts.iter().map(|&c| r::<T>(c as f64) / (total * bin_width)).collect();
    ShellHistogram { num_samples, num_bins, bin_width, counts, densities }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::slocc::SloccClass;

    #[test]
    fn invariants_on_presets() {
        let inv = lu_invariants(&PureState::<f64>::basis_state(3, 0)).unwrap();
        assert!((inv.i1 - 1.0).abs() < 1e-14);
        assert!((inv.i2 - 1.0).abs() < 1e-14);
        assert!((inv.i3 - 1.0).abs() < 1e-14);
        assert!((inv.i4 - 1.0).abs() < 1e-14);
        assert!(inv.i5 < 1e-20);

        let inv = lu_invariants(&SloccClass::Ghz.representative::<f64>()).unwrap();
        for p in [inv.i1, inv.i2, inv.i3] {
            assert!((p - 0.5).abs() < 1e-14);
        }
        assert!((inv.i5 - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn invariants_are_lu_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: PureState<f64> = random_state_from_rng(3, &mut rng);
            let base = lu_invariants(&x).unwrap();
            for _ in 0..5 {
                let us = [
                    random_unitary(&mut rng),
                    random_unitary(&mut rng),
                    random_unitary(&mut rng),
                ];
                let y = x.apply_local(&us, false).unwrap();
                let moved = lu_invariants(&y).unwrap();
                for (a, b) in [
                    (base.i1, moved.i1),
                    (base.i2, moved.i2),
                    (base.i3, moved.i3),
                    (base.i4, moved.i4),
                    (base.i5, moved.i5),
                ] {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let target = [0.13, 0.21, 0.34];
        let mut checked = 0;
        while checked < 25 {
            let x: PureState<f64> = random_state_from_rng(3, &mut rng);
            // Skip near-degenerate marginals where only a subgradient exists.
            if x.psi().lambdas.iter().any(|&l| l < 0.02 || l > 0.48) {
                continue;
            }
            let amps = x.amplitudes().to_vec();
            let grad = fiber_gradient(&amps, &target);
            let h = 1e-6;
            let mut norm_grad = 0.0f64;
            let mut norm_diff = 0.0f64;
            for k in 0..8 {
                for part in 0..2 {
                    let mut plus = amps.clone();
                    let mut minus = amps.clone();
                    let delta = if part == 0 { c(h, 0.0) } else { c(0.0, h) };
                    plus[k] = plus[k] + delta;
                    minus[k] = minus[k] - delta;
                    let fd =
                        (fiber_objective(&plus, &target) - fiber_objective(&minus, &target))
                            / (2.0 * h);
                    let analytic = if part == 0 { grad[k].re } else { grad[k].im };
                    // The analytic gradient ignores the normalization term,
                    // which is radial; compare after removing it.
                    let radial = if part == 0 { amps[k].re } else { amps[k].im };
                    let correction = {
                        let along: f64 = amps
                            .iter()
                            .zip(&grad)
                            .map(|(&v, &g)| v.re * g.re + v.im * g.im)
                            .sum();
                        along * radial
                    };
                    norm_grad += (analytic - correction) * (analytic - correction);
                    norm_diff += (fd - (analytic - correction)) * (fd - (analytic - correction));
                }
            }
            assert!(
                norm_diff.sqrt() <= 1e-6 * norm_grad.sqrt().max(1e-8),
                "relative deviation {}",
                norm_diff.sqrt() / norm_grad.sqrt()
            );
            checked += 1;
        }
    }

    #[test]
    fn sampler_hits_the_ghz_fiber() {
        let target = LocalSpectra::<f64>::new(vec![0.0, 0.0, 0.0]);
        let batch = sample_fiber(&target, 5, 1234, 1e-10).unwrap();
        assert!(batch.complete);
        for s in &batch.samples {
            for q in 1..=3 {
                let (lo, hi) = s.state.reduced_density(q).unwrap().eigenvalues();
                assert!((lo - 0.5).abs() < 1e-5 && (hi - 0.5).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic_in_the_seed() {
        let target = LocalSpectra::new(vec![0.15, 0.2, 0.3]);
        let a = sample_fiber(&target, 3, 7, 1e-10).unwrap();
        let b = sample_fiber(&target, 3, 7, 1e-10).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.state.amplitudes(), y.state.amplitudes());
            assert_eq!(x.restart, y.restart);
        }
    }

    #[test]
    fn sampler_rejects_off_polytope_targets() {
        let target = LocalSpectra::new(vec![0.0, 0.4, 0.4]);
        assert!(matches!(
            sample_fiber(&target, 3, 7, 1e-10),
            Err(Error::OutsidePolytope { .. })
        ));
    }

    #[test]
    fn overlap_of_a_state_with_itself_is_one() {
        let w = SloccClass::W.representative::<f64>();
        let best = lu_overlap_max(&w, &w, 1, 10, 0);
        assert!(best > 1.0 - 1e-12);
    }

    #[test]
    fn overlap_of_inequivalent_states_stays_below_one() {
        let ghz = SloccClass::Ghz.representative::<f64>();
        let sep = PureState::<f64>::basis_state(3, 0);
        let best = lu_overlap_max(&ghz, &sep, 12, 200, 5);
        // Best product-state overlap of GHZ is 1/2.
        assert!(best <= 0.9, "best {best}");
        assert!(best > 0.4);
    }

    #[test]
    fn overlap_is_symmetric_and_detects_lu_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a: PureState<f64> = random_state_from_rng(3, &mut rng);
        let b: PureState<f64> = random_state_from_rng(3, &mut rng);
        let ab = lu_overlap_max(&a, &b, 8, 200, 11);
        let ba = lu_overlap_max(&b, &a, 8, 200, 11);
        assert!((ab - ba).abs() < 1e-9, "ab {ab}, ba {ba}");

        let us = [
            random_unitary(&mut rng),
            random_unitary(&mut rng),
            random_unitary(&mut rng),
        ];
        let image = a.apply_local(&us, false).unwrap();
        let best = lu_overlap_max(&a, &image, 8, 300, 13);
        assert!(best > 1.0 - 1e-12, "best {best}");
    }

    #[test]
    fn nondegenerate_canonical_form_example() {
        // p = (0.4, 0.25, 0.15) in λ-coordinates.
        let target = LocalSpectra::<f64>::new(vec![0.1, 0.25, 0.35]);
        let form = boundary_canonical_nondegenerate(&target).unwrap();
        match &form {
            BoundaryCanonicalForm::Nondegenerate { face, moduli } => {
                assert_eq!(*face, 1);
                assert!((moduli[0] - 0.6).abs() < 1e-12);
                assert!((moduli[1] - 0.25).abs() < 1e-12);
                assert!((moduli[2] - 0.15).abs() < 1e-12);
            }
            _ => panic!("expected nondegenerate form"),
        }
        let state = reconstruct_nondegenerate(&form).unwrap();
        assert!(state.psi().max_abs_diff(&target) < 1e-12);
        assert!(hyperdeterminant(&state).unwrap().norm() < 1e-12);
    }

    #[test]
    fn nondegenerate_canonical_form_on_other_faces() {
        // Same spectra with the face moved to qubit 2.
        let target = LocalSpectra::new(vec![0.25, 0.1, 0.35]);
        let form = boundary_canonical_nondegenerate(&target).unwrap();
        match &form {
            BoundaryCanonicalForm::Nondegenerate { face, .. } => assert_eq!(*face, 2),
            _ => panic!("expected nondegenerate form"),
        }
        let state = reconstruct_nondegenerate(&form).unwrap();
        assert!(state.psi().max_abs_diff(&target) < 1e-12);
    }

    #[test]
    fn degenerate_marginal_violates_the_nondegenerate_precondition() {
        // p₁ = 1/2: λ₁ = 0.
        let target = LocalSpectra::new(vec![0.0, 0.25, 0.25]);
        assert!(matches!(
            boundary_canonical_nondegenerate(&target),
            Err(Error::NotOnNondegenerateFace { .. })
        ));
        // Interior point: no face active.
        let target = LocalSpectra::new(vec![0.1, 0.1, 0.1]);
        assert!(matches!(
            boundary_canonical_nondegenerate(&target),
            Err(Error::NotOnNondegenerateFace { .. })
        ));
    }

    #[test]
    fn degenerate_canonical_form_examples() {
        let ghz = SloccClass::Ghz.representative::<f64>();
        match boundary_canonical_degenerate(&ghz, 1e-8).unwrap() {
            BoundaryCanonicalForm::Degenerate { lambdas, .. } => {
                assert!(lambdas[0].abs() < 1e-10 && lambdas[1].abs() < 1e-10);
            }
            _ => panic!("expected degenerate form"),
        }

        // x_B1 with qubit 2 in slot 1: canonical data (1/2, 0).
        let b1 = SloccClass::B1.representative::<f64>();
        let permuted = b1.permute_qubits(&[2, 1, 3]).unwrap();
        match boundary_canonical_degenerate(&permuted, 1e-8).unwrap() {
            BoundaryCanonicalForm::Degenerate { degenerate_qubit, lambdas } => {
                assert_eq!(degenerate_qubit, 1);
                assert!((lambdas[0] - 0.5).abs() < 1e-10);
                assert!(lambdas[1].abs() < 1e-10);
            }
            _ => panic!("expected degenerate form"),
        }

        let sep = PureState::<f64>::basis_state(3, 0);
        assert!(matches!(
            boundary_canonical_degenerate(&sep, 1e-8),
            Err(Error::NoDegenerateMarginal { .. })
        ));
    }

    #[test]
    fn hull_area_of_a_unit_square() {
        let pts: Vec<(f64, f64)> =
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)];
        assert!((convex_hull_area(&pts) - 1.0).abs() < 1e-14);
        assert_eq!(convex_hull_area(&pts[..2]), 0.0);
    }

    #[test]
    fn shell_histogram_mass_is_normalized() {
        let hist: ShellHistogram<f64> = boundary_shell_histogram(10_000, 10, 77);
        let mass: f64 = hist.densities.iter().map(|d| d * hist.bin_width).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert_eq!(hist.counts.iter().sum::<usize>(), 10_000);
    }
}
