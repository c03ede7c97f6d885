//! Numerical orbit geometry: tangent spans of the compact, complexified, and
//! Borel group orbits, rank decisions, and sphericality certificates.
//!
//! The tangent space of an orbit at `[v]` is the span of the basis actions
//! `(I⊗…⊗A⊗…⊗I)v` projected onto the orthogonal complement of `v`; real and
//! complex ranks of that span give the real orbit dimensions.

use crate::error::Error;
use crate::linalg::{
    c, czero, inner, norm, rank_from_singular_values, singular_values_complex,
    singular_values_real, Mat2, C,
};
use crate::qstate::{apply_slot_op, PureState};
use crate::scalar::{r, Real};
use crate::Result;
use serde::Serialize;

/// One Lie-algebra basis element acting on a single qubit slot.
#[derive(Clone, Copy, Debug)]
pub struct AlgebraBasisElement<T: Real> {
    /// 1-based qubit slot the matrix acts on.
    pub slot: usize,
    pub matrix: Mat2<T>,
}

/// Real/complex orbit dimensions at a point plus the sphericality flag.
///
/// The flag certifies sphericality only when the report is evaluated at a
/// point of an open Borel orbit; callers supply the shifted representatives.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct OrbitReport<T: Real> {
    pub k_dim_real: usize,
    pub g_dim_real: usize,
    pub b_dim_complex: usize,
    pub spherical: bool,
    /// Singular-value lists behind each rank decision: K, G, Borel.
    pub singular_values: SingularValueLists<T>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct SingularValueLists<T: Real> {
    pub k_span: Vec<T>,
    pub g_span: Vec<T>,
    pub b_span: Vec<T>,
}

fn e21<T: Real>() -> Mat2<T> {
    Mat2::from_rows(czero(), czero(), c(1.0, 0.0), czero())
}

fn e12<T: Real>() -> Mat2<T> {
    Mat2::from_rows(czero(), c(1.0, 0.0), czero(), czero())
}

fn cartan<T: Real>() -> Mat2<T> {
    Mat2::from_rows(c(1.0, 0.0), czero(), czero(), c(-1.0, 0.0))
}

/// Anti-Hermitian basis of `su(2)`: `iσ_x, iσ_y, iσ_z`.
fn su2_elements<T: Real>() -> [Mat2<T>; 3] {
    [
        Mat2::from_rows(czero(), c(0.0, 1.0), c(0.0, 1.0), czero()),
        Mat2::from_rows(czero(), c(1.0, 0.0), c(-1.0, 0.0), czero()),
        Mat2::from_rows(c(0.0, 1.0), czero(), czero(), c(0.0, -1.0)),
    ]
}

/// Basis of `su(2)^⊕N` (3N anti-Hermitian elements).
pub fn su2_basis<T: Real>(num_qubits: usize) -> Vec<AlgebraBasisElement<T>> {
    let mut out = Vec::with_capacity(3 * num_qubits);
    for slot in 1..=num_qubits {
        for matrix in su2_elements() {
            out.push(AlgebraBasisElement { slot, matrix });
        }
    }
    out
}

/// Basis of `sl₂(ℂ)^⊕N`: `E₁₂, E₂₁, E₁₁−E₂₂` per slot.
pub fn sl2_basis<T: Real>(num_qubits: usize) -> Vec<AlgebraBasisElement<T>> {
    let mut out = Vec::with_capacity(3 * num_qubits);
    for slot in 1..=num_qubits {
        for matrix in [e12(), e21(), cartan()] {
            out.push(AlgebraBasisElement { slot, matrix });
        }
    }
    out
}

/// Basis of the Borel algebra `𝔟 = 𝔱^ℂ ⊕ 𝔫` of the lower-triangular Borel:
/// `E₂₁` and `E₁₁−E₂₂` per slot.
pub fn borel_basis<T: Real>(num_qubits: usize) -> Vec<AlgebraBasisElement<T>> {
    let mut out = Vec::with_capacity(2 * num_qubits);
    for slot in 1..=num_qubits {
        for matrix in [e21(), cartan()] {
            out.push(AlgebraBasisElement { slot, matrix });
        }
    }
    out
}

/// For each basis element computes `(I⊗…⊗A⊗…⊗I)v` minus its component
/// along `v`.
pub fn tangent_span<T: Real>(
    state: &PureState<T>,
    basis: &[AlgebraBasisElement<T>],
) -> Vec<Vec<C<T>>> {
    let v = state.amplitudes();
    basis
        .iter()
        .map(|el| {
            let mut av = v.to_vec();
            apply_slot_op(&mut av, &el.matrix, state.num_qubits(), el.slot);
            let along = inner(v, &av);
            for (t, x) in av.iter_mut().zip(v) {
                *t = *t - *x * along;
            }
            av
        })
        .collect()
}

/// Rank over ℝ, reading each complex vector as a real vector of doubled
/// length. All-zero input gives 0.
pub fn rank_real<T: Real>(vectors: &[Vec<C<T>>], tol: T) -> usize {
    rank_from_singular_values(&singular_values_real(vectors), tol)
}

/// Rank over ℂ.
pub fn rank_complex<T: Real>(vectors: &[Vec<C<T>>], tol: T) -> usize {
    rank_from_singular_values(&singular_values_complex(vectors), tol)
}

/// Default relative singular-value threshold for rank decisions.
pub fn default_rank_threshold<T: Real>() -> T {
    r(1e-7)
}

/// Assembles K-, G-, and Borel-orbit dimensions at the given point.
pub fn orbit_report<T: Real>(state: &PureState<T>) -> OrbitReport<T> {
    orbit_report_with_tol(state, default_rank_threshold())
}

/// Same as [`orbit_report`] with an explicit rank threshold.
pub fn orbit_report_with_tol<T: Real>(state: &PureState<T>, tol: T) -> OrbitReport<T> {
    let n = state.num_qubits();
    let k_sv = singular_values_real(&tangent_span(state, &su2_basis(n)));
    let g_sv = singular_values_complex(&tangent_span(state, &sl2_basis(n)));
    let b_sv = singular_values_complex(&tangent_span(state, &borel_basis(n)));
    let k_dim_real = rank_from_singular_values(&k_sv, tol);
    let g_dim_complex = rank_from_singular_values(&g_sv, tol);
    let b_dim_complex = rank_from_singular_values(&b_sv, tol);
    OrbitReport {
        k_dim_real,
        g_dim_real: 2 * g_dim_complex,
        b_dim_complex,
        spherical: b_dim_complex == g_dim_complex,
        singular_values: SingularValueLists { k_span: k_sv, g_span: g_sv, b_span: b_sv },
    }
}

/// Sphericality certificate for the L-qubit W class: dimensions at the
/// unipotent shift of the W state, where the Borel orbit is open.
pub fn w_sphericality_certificate<T: Real>(num_qubits: usize) -> OrbitReport<T> {
    assert!(num_qubits >= 3, "certificate defined for L >= 3");
    let w: PureState<T> = PureState::w_state(num_qubits);
    let mut ops = vec![Mat2::identity(); num_qubits];
    ops[0] = Mat2::from_rows(c(1.0, 0.0), c(1.0, 0.0), czero(), c(1.0, 0.0));
    let shifted = w.apply_local(&ops, true).expect("shear is invertible");
    orbit_report(&shifted)
}

/// Complex tangent dimension of the Borel orbit through a 2-plane of
/// `ℂ²⊗ℂ²`, computed in the 6-dimensional wedge space of the Plücker
/// embedding.
pub fn grassmannian_tangent_dim<T: Real>(phi: &[C<T>; 4], psi: &[C<T>; 4]) -> Result<usize> {
    let tol = r::<T>(1e-10);
    let n_phi = (norm(phi) - T::one()).abs();
    let n_psi = (norm(psi) - T::one()).abs();
    let cross = inner(phi, psi).norm();
    let deviation = n_phi.max(n_psi).max(cross);
    if deviation > tol {
        return Err(Error::NotOrthonormal { deviation: deviation.to_f64().unwrap_or(f64::NAN) });
    }

    let base = wedge(phi, psi);
    // Borel elements of sl(2) ⊕ sl(2) acting on ℂ² ⊗ ℂ².
    let mut tangents = Vec::with_capacity(4);
    for slot in 0..2 {
        for a in [e21::<T>(), cartan::<T>()] {
            let a_phi = apply_pair_slot(&a, phi, slot);
            let a_psi = apply_pair_slot(&a, psi, slot);
            let mut t = wedge(&a_phi, psi);
            let u = wedge(phi, &a_psi);
            for (x, y) in t.iter_mut().zip(&u) {
                *x = *x + *y;
            }
            // Project off the base point of the Plücker embedding.
            let along = inner(&base, &t) / inner(&base, &base);
            for (x, b) in t.iter_mut().zip(&base) {
                *x = *x - *b * along;
            }
            tangents.push(t);
        }
    }
    Ok(rank_complex(&tangents, default_rank_threshold()))
}

/// Wedge coordinates `w_{ij} = φ_i ψ_j − φ_j ψ_i` for `i < j`, in the order
/// `(01, 02, 03, 12, 13, 23)`.
fn wedge<T: Real>(phi: &[C<T>; 4], psi: &[C<T>; 4]) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(6);
    for i in 0..4 {
        for j in (i + 1)..4 {
            out.push(phi[i] * psi[j] - phi[j] * psi[i]);
        }
    }
    out
}

/// Applies a 2×2 operator to one tensor slot of a vector in `ℂ²⊗ℂ²`
/// (slot 0 is the most significant bit).
fn apply_pair_slot<T: Real>(op: &Mat2<T>, v: &[C<T>; 4], slot: usize) -> [C<T>; 4] {
    let mut out = [czero(); 4];
    let mask = if slot == 0 { 2usize } else { 1usize };
    for i in 0..4 {
        if i & mask != 0 {
            continue;
        }
        let j = i | mask;
        out[i] = op.e[0][0] * v[i] + op.e[0][1] * v[j];
        out[j] = op.e[1][0] * v[i] + op.e[1][1] * v[j];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_state_from_rng, random_unitary};
    use crate::slocc::SloccClass;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn raising_elements_at_w_are_parallel() {
        let w: PureState<f64> = PureState::w_state(3);
        let basis: Vec<AlgebraBasisElement<f64>> =
            (1..=3).map(|slot| AlgebraBasisElement { slot, matrix: e12() }).collect();
        let span = tangent_span(&w, &basis);
        assert_eq!(rank_complex(&span, 1e-7), 1);
        // Each is proportional to |000⟩.
        for v in &span {
            for (i, x) in v.iter().enumerate() {
                if i != 0 {
                    assert!(x.norm() < 1e-14);
                }
            }
            assert!(v[0].norm() > 1e-2);
        }
    }

    #[test]
    fn lowering_element_on_basis_state() {
        let sep: PureState<f64> = PureState::basis_state(3, 0);
        let span = tangent_span(&sep, &[AlgebraBasisElement { slot: 1, matrix: e21() }]);
        // Vector ∝ |100⟩.
        for (i, x) in span[0].iter().enumerate() {
            if i == 0b100 {
                assert!((x.norm() - 1.0).abs() < 1e-14);
            } else {
                assert!(x.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn borel_span_at_shifted_w_state_has_dimension_six() {
        let w: PureState<f64> = PureState::w_state(3);
        let shear = Mat2::from_rows(c(1.0, 0.0), c(1.0, 0.0), czero(), c(1.0, 0.0));
        let x = w.apply_local(&[shear, Mat2::identity(), Mat2::identity()], true).unwrap();
        let span = tangent_span(&x, &borel_basis(3));
        assert_eq!(span.len(), 6);
        assert_eq!(rank_complex(&span, 1e-7), 6);
    }

    #[test]
    fn rank_of_repeated_vector_is_one() {
        let v = vec![c::<f64>(1.0, 2.0), c(0.0, -1.0)];
        assert_eq!(rank_complex(&[v.clone(), v.clone(), v.clone()], 1e-7), 1);
        assert_eq!(rank_complex(&[vec![czero::<f64>(); 2]], 1e-7), 0);
    }

    #[test]
    fn w_state_span_ranks() {
        let w: PureState<f64> = PureState::w_state(3);
        assert_eq!(rank_complex(&tangent_span(&w, &sl2_basis(3)), 1e-7), 6);
        assert_eq!(rank_real(&tangent_span(&w, &su2_basis(3)), 1e-7), 8);
    }

    #[test]
    fn orbit_dimension_catalogue() {
        let report = orbit_report(&SloccClass::Ghz.representative::<f64>());
        assert_eq!(report.g_dim_real, 14);

        let report = orbit_report(&SloccClass::W.representative::<f64>());
        assert_eq!((report.g_dim_real, report.k_dim_real), (12, 8));

        for label in [SloccClass::B1, SloccClass::B2, SloccClass::B3] {
            let report = orbit_report(&label.representative::<f64>());
            assert_eq!((report.g_dim_real, report.k_dim_real), (8, 5), "{}", label.label());
        }

        let report = orbit_report(&SloccClass::Sep.representative::<f64>());
        assert_eq!((report.g_dim_real, report.k_dim_real), (6, 6));
    }

    #[test]
    fn ranks_are_stable_across_tolerances() {
        for label in SloccClass::ALL {
            let x = label.representative::<f64>();
            let a = orbit_report_with_tol(&x, 1e-6);
            let b = orbit_report_with_tol(&x, 1e-8);
            assert_eq!(a.k_dim_real, b.k_dim_real);
            assert_eq!(a.g_dim_real, b.g_dim_real);
            assert_eq!(a.b_dim_complex, b.b_dim_complex);
        }
    }

    #[test]
    fn orbit_report_is_constant_on_unitary_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for label in SloccClass::ALL {
            let x = label.representative::<f64>();
            let base = orbit_report(&x);
            for _ in 0..10 {
                let us = [
                    random_unitary(&mut rng),
                    random_unitary(&mut rng),
                    random_unitary(&mut rng),
                ];
                let y = x.apply_local(&us, false).unwrap();
                let moved = orbit_report(&y);
                // The Borel span is tied to the standard flag, so only the
                // compact and full orbit dimensions are unitary-invariant.
                assert_eq!(moved.k_dim_real, base.k_dim_real);
                assert_eq!(moved.g_dim_real, base.g_dim_real);
            }
        }
    }

    #[test]
    fn k_dim_bounded_by_g_dim_and_g_dim_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..30 {
            let x: PureState<f64> = random_state_from_rng(3, &mut rng);
            let report = orbit_report(&x);
            assert!(report.k_dim_real <= report.g_dim_real);
            assert_eq!(report.g_dim_real % 2, 0);
        }
    }

    #[test]
    fn w_certificates_for_small_qubit_counts() {
        for l in 3..=5 {
            let report = w_sphericality_certificate::<f64>(l);
            assert_eq!(report.b_dim_complex, 2 * l, "L = {l}");
            assert_eq!(report.g_dim_real, 4 * l, "L = {l}");
            assert!(report.spherical, "L = {l}");
        }
    }

    #[test]
    fn grassmannian_open_point_has_dimension_four() {
        let s = 0.5f64;
        let plus_plus: [C<f64>; 4] = [c(s, 0.0), c(s, 0.0), c(s, 0.0), c(s, 0.0)];
        let minus_minus: [C<f64>; 4] = [c(s, 0.0), c(-s, 0.0), c(-s, 0.0), c(s, 0.0)];
        assert_eq!(grassmannian_tangent_dim(&plus_plus, &minus_minus).unwrap(), 4);
    }

    #[test]
    fn grassmannian_torus_fixed_point_degenerates() {
        let zero = czero::<f64>();
        let e00 = [c(1.0, 0.0), zero, zero, zero];
        let e11 = [zero, zero, zero, c(1.0, 0.0)];
        assert!(grassmannian_tangent_dim(&e00, &e11).unwrap() < 4);
    }

    #[test]
    fn grassmannian_random_pairs_are_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..100 {
            let a: PureState<f64> = random_state_from_rng(2, &mut rng);
            let b: PureState<f64> = random_state_from_rng(2, &mut rng);
            // Gram–Schmidt.
            let mut psi = b.amplitudes().to_vec();
            let along = inner(a.amplitudes(), &psi);
            for (x, y) in psi.iter_mut().zip(a.amplitudes()) {
                *x = *x - *y * along;
            }
            crate::linalg::normalize(&mut psi);
            let phi: [C<f64>; 4] = a.amplitudes().try_into().unwrap();
            let psi: [C<f64>; 4] = psi.try_into().unwrap();
            assert_eq!(grassmannian_tangent_dim(&phi, &psi).unwrap(), 4);
        }
    }

    #[test]
    fn grassmannian_rejects_non_orthonormal_input() {
        let zero = czero::<f64>();
        let e00 = [c(1.0, 0.0), zero, zero, zero];
        let e01 = [c(0.5, 0.0), c(0.5, 0.0), zero, zero];
        assert!(matches!(
            grassmannian_tangent_dim(&e00, &e01),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
