//! The Kirwan polytope of N-qubit local spectra.
//!
//! In λ-coordinates the polygonal inequality `p_i ≤ Σ_{j≠i} p_j` (with
//! `p = 1/2 − λ`) reads `Σ_{j≠i} λ_j − λ_i ≤ (N−2)/2`; together with the
//! Weyl-chamber walls `λ_i ≥ 0` these constraints cut out the polytope.

use crate::error::Error;
use crate::qstate::LocalSpectra;
use crate::scalar::{r, Real};
use crate::slocc::SloccClass;
use crate::Result;
use serde::Serialize;
use std::collections::BTreeSet;

/// Identifier of a polytope facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FaceId {
    /// `Σ_{j≠i} λ_j − λ_i = (N−2)/2` for the given qubit.
    Polygonal { qubit: usize },
    /// `λ_i = 0`: the marginal of the given qubit is maximally mixed.
    Degenerate { qubit: usize },
}

/// Membership report: one slack per constraint, active faces, and the
/// distance to the boundary (the minimal slack).
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct PolytopeReport<T: Real> {
    pub inside: bool,
    /// Polygonal slacks for qubits 1..N, then chamber slacks λ_1..λ_N.
    pub margins: Vec<T>,
    pub active_faces: BTreeSet<FaceId>,
    pub distance_to_boundary: T,
}

/// Vertex list of the Kirwan polytope of one SLOCC-class closure.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct ClassPolytope<T: Real> {
    pub class_label: SloccClass,
    pub vertex_list: Vec<[T; 3]>,
}

/// Evaluates the polygonal and chamber constraints.
///
/// Margins are ordered `[polygonal(1..N), degenerate(1..N)]`; a face is
/// active when `|slack| ≤ tol`.
pub fn higuchi_check<T: Real>(lambdas: &LocalSpectra<T>, tol: T) -> Result<PolytopeReport<T>> {
    let n = lambdas.len();
    for &l in &lambdas.lambdas {
        if l < -tol || l > r::<T>(0.5) + tol {
            return Err(Error::LambdaOutOfRange {
                lambdas: lambdas.lambdas.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let total: T = lambdas.lambdas.iter().copied().sum();
    let bound = r::<T>((n as f64 - 2.0) / 2.0);
    let mut margins = Vec::with_capacity(2 * n);
    let mut active = BTreeSet::new();
    for i in 0..n {
        let li = lambdas.lambdas[i];
        let slack = bound - (total - li - li);
        margins.push(slack);
        if slack.abs() <= tol {
            active.insert(FaceId::Polygonal { qubit: i + 1 });
        }
    }
    for i in 0..n {
        let slack = lambdas.lambdas[i];
        margins.push(slack);
        if slack.abs() <= tol {
            active.insert(FaceId::Degenerate { qubit: i + 1 });
        }
    }
    let inside = margins.iter().all(|&m| m >= -tol);
    let distance = margins.iter().copied().fold(T::infinity(), T::min);
    Ok(PolytopeReport { inside, margins, active_faces: active, distance_to_boundary: distance })
}

/// Active faces of a point inside the polytope; empty means interior.
pub fn face_classify<T: Real>(lambdas: &LocalSpectra<T>, tol: T) -> Result<BTreeSet<FaceId>> {
    let report = higuchi_check(lambdas, tol)?;
    if !report.inside {
        return Err(Error::OutsidePolytope {
            worst_slack: report.distance_to_boundary.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(report.active_faces)
}

/// The five vertices of the three-qubit polytope plus the marked interior
/// point `v_W`, as `(name, λ-vector)` pairs.
pub fn three_qubit_vertices<T: Real>() -> Vec<(&'static str, [T; 3])> {
    let h = r::<T>(0.5);
    let z = T::zero();
    let sixth = T::one() / r::<T>(6.0);
    vec![
        ("sep", [h, h, h]),
        ("b1", [h, z, z]),
        ("b2", [z, h, z]),
        ("b3", [z, z, h]),
        ("ghz", [z, z, z]),
        ("w", [sixth, sixth, sixth]),
    ]
}

/// Combinatorics `(vertices, edges, facets)` of the three-qubit polytope,
/// derived from the constraint-activity pattern of the vertex list.
pub fn three_qubit_face_counts() -> (usize, usize, usize) {
    let verts: Vec<[f64; 3]> = three_qubit_vertices::<f64>()
        .into_iter()
        .filter(|(name, _)| *name != "w")
        .map(|(_, v)| v)
        .collect();
    let active: Vec<BTreeSet<FaceId>> = verts
        .iter()
        .map(|v| face_classify(&LocalSpectra::new(v.to_vec()), 1e-12).expect("vertex is inside"))
        .collect();
    let mut facets = BTreeSet::new();
    for set in &active {
        facets.extend(set.iter().copied());
    }
    // Two vertices of a 3-polytope span an edge iff they share two facets.
    let mut edges = 0;
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            if active[i].intersection(&active[j]).count() >= 2 {
                edges += 1;
            }
        }
    }
    (verts.len(), edges, facets.len())
}

/// Kirwan polytope of a SLOCC-class closure, as its vertex list.
pub fn class_polytope<T: Real>(label: SloccClass) -> ClassPolytope<T> {
    let h = r::<T>(0.5);
    let z = T::zero();
    let v_sep = [h, h, h];
    let vertex_list = match label {
        SloccClass::Ghz => vec![v_sep, [h, z, z], [z, h, z], [z, z, h], [z, z, z]],
        SloccClass::W => vec![[h, z, z], [z, h, z], [z, z, h], v_sep],
        SloccClass::B1 => vec![[h, z, z], v_sep],
        SloccClass::B2 => vec![[z, h, z], v_sep],
        SloccClass::B3 => vec![[z, z, h], v_sep],
        SloccClass::Sep => vec![v_sep],
    };
    ClassPolytope { class_label: label, vertex_list }
}

/// Membership in `conv{v_B1, v_B2, v_B3, v_SEP}`: the polytope constraints
/// plus the half-space `λ_1 + λ_2 + λ_3 ≥ 1/2`.
pub fn in_w_polytope<T: Real>(lambdas: &LocalSpectra<T>, tol: T) -> bool {
    let inside = match higuchi_check(lambdas, tol) {
        Ok(report) => report.inside,
        Err(_) => false,
    };
    let total: T = lambdas.lambdas.iter().copied().sum();
    inside && total >= r::<T>(0.5) - tol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectra(l: [f64; 3]) -> LocalSpectra<f64> {
        LocalSpectra::new(l.to_vec())
    }

    #[test]
    fn ghz_vertex_activates_all_chamber_walls() {
        let report = higuchi_check(&spectra([0.0, 0.0, 0.0]), 1e-9).unwrap();
        assert!(report.inside);
        let expect: BTreeSet<_> = (1..=3).map(|q| FaceId::Degenerate { qubit: q }).collect();
        assert_eq!(report.active_faces, expect);
    }

    #[test]
    fn polygonal_violation_is_reported() {
        let report = higuchi_check(&spectra([0.0, 0.4, 0.4]), 1e-9).unwrap();
        assert!(!report.inside);
        assert!((report.margins[0] - (-0.3)).abs() < 1e-12);
    }

    #[test]
    fn single_active_polygonal_face() {
        let report = higuchi_check(&spectra([0.1, 0.25, 0.35]), 1e-9).unwrap();
        assert!(report.inside);
        let expect: BTreeSet<_> = [FaceId::Polygonal { qubit: 1 }].into_iter().collect();
        assert_eq!(report.active_faces, expect);
    }

    #[test]
    fn lambda_out_of_range_is_an_error() {
        assert!(matches!(
            higuchi_check(&spectra([0.7, 0.0, 0.0]), 1e-9),
            Err(Error::LambdaOutOfRange { .. })
        ));
        assert!(matches!(
            higuchi_check(&spectra([-0.1, 0.2, 0.2]), 1e-9),
            Err(Error::LambdaOutOfRange { .. })
        ));
    }

    #[test]
    fn face_classification_examples() {
        assert!(face_classify(&spectra([1.0 / 6.0; 3]), 1e-9).unwrap().is_empty());

        let faces = face_classify(&spectra([0.5, 0.0, 0.0]), 1e-9).unwrap();
        let expect: BTreeSet<_> = [
            FaceId::Polygonal { qubit: 2 },
            FaceId::Polygonal { qubit: 3 },
            FaceId::Degenerate { qubit: 2 },
            FaceId::Degenerate { qubit: 3 },
        ]
        .into_iter()
        .collect();
        assert_eq!(faces, expect);

        let faces = face_classify(&spectra([0.0, 0.2, 0.2]), 1e-9).unwrap();
        let expect: BTreeSet<_> = [FaceId::Degenerate { qubit: 1 }].into_iter().collect();
        assert_eq!(faces, expect);

        assert!(matches!(
            face_classify(&spectra([0.0, 0.4, 0.4]), 1e-9),
            Err(Error::OutsidePolytope { .. })
        ));
    }

    #[test]
    fn vertex_table_and_counts() {
        let verts = three_qubit_vertices::<f64>();
        let get = |name: &str| verts.iter().find(|(n, _)| *n == name).unwrap().1;
        assert_eq!(get("ghz"), [0.0, 0.0, 0.0]);
        assert_eq!(get("b2"), [0.0, 0.5, 0.0]);
        assert_eq!(get("sep"), [0.5, 0.5, 0.5]);
        assert_eq!(three_qubit_face_counts(), (5, 9, 6));
    }

    #[test]
    fn only_the_five_vertices_among_lattice_points() {
        // All 0/½ lattice points: membership singles out exactly the vertices.
        let mut members = Vec::new();
        for bits in 0..8u32 {
            let l = |b: u32| if bits & (1 << b) != 0 { 0.5 } else { 0.0 };
            let point = [l(0), l(1), l(2)];
            if higuchi_check(&spectra(point), 1e-9).unwrap().inside {
                members.push(point);
            }
        }
        members.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect =
            vec![[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5], [0.5, 0.5, 0.5]];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(members, expect);
    }

    #[test]
    fn class_polytopes_match_the_catalogue() {
        let w = class_polytope::<f64>(SloccClass::W);
        assert_eq!(
            w.vertex_list,
            vec![[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5], [0.5, 0.5, 0.5]]
        );
        assert_eq!(class_polytope::<f64>(SloccClass::Sep).vertex_list, vec![[0.5, 0.5, 0.5]]);
        assert_eq!(
            class_polytope::<f64>(SloccClass::B1).vertex_list,
            vec![[0.5, 0.0, 0.0], [0.5, 0.5, 0.5]]
        );
        assert_eq!(class_polytope::<f64>(SloccClass::Ghz).vertex_list.len(), 5);
    }

    #[test]
    fn w_polytope_membership() {
        assert!(in_w_polytope(&spectra([1.0 / 6.0; 3]), 1e-9));
        assert!(!in_w_polytope(&spectra([0.0, 0.0, 0.0]), 1e-9));
        assert!(in_w_polytope(&spectra([0.3, 0.2, 0.2]), 1e-9));
    }

    #[test]
    fn lambda_bound_is_implied_by_the_six_constraints() {
        // Any λ (possibly with entries beyond 1/2) passing all six slacks
        // automatically has λ_i ≤ 1/2 + 2 tol: fuzz over a coarse grid.
        let tol = 1e-9;
        let mut grid = Vec::new();
        let mut x = -0.05;
        while x <= 0.75 {
            grid.push(x);
            x += 0.05;
        }
        for &a in &grid {
            for &b in &grid {
                for &c in &grid {
                    let total = a + b + c;
                    let poly_ok = (0..3).all(|i| {
                        let li = [a, b, c][i];
                        total - 2.0 * li <= 0.5 + tol
                    });
                    let chamber_ok = a >= -tol && b >= -tol && c >= -tol;
                    if poly_ok && chamber_ok {
                        for li in [a, b, c] {
                            assert!(li <= 0.5 + 2.0 * tol, "λ = {:?}", (a, b, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn permuting_qubits_permutes_margins() {
        let report = higuchi_check(&spectra([0.1, 0.25, 0.35]), 1e-9).unwrap();
        let permuted = higuchi_check(&spectra([0.25, 0.35, 0.1]), 1e-9).unwrap();
        // Permutation (1,2,3) -> (3,1,2) of the qubits.
        assert!((permuted.margins[0] - report.margins[1]).abs() < 1e-14);
        assert!((permuted.margins[1] - report.margins[2]).abs() < 1e-14);
        assert!((permuted.margins[2] - report.margins[0]).abs() < 1e-14);
        assert!((permuted.margins[3] - report.margins[4]).abs() < 1e-14);
    }
}
