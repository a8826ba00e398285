//! Face lattice of a polytope with symplectic classification of tangent
//! spaces.
//!
//! Faces are identified with their active facet index sets. The lattice is
//! generated by closing the vertex active sets under intersection: every face
//! of a polytope is the smallest face containing some set of vertices, and its
//! active set is the intersection of theirs.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::polytope::HPolytope;
use crate::symplectic::{SubspaceClass, SymplecticSpace};
use crate::{Error, Result};

const FACE_TOL: f64 = 1e-7;

/// A nonempty proper face of a polytope.
#[derive(Clone, Debug)]
pub struct Face {
    /// Indices of the facets active on the whole face.
    pub active: Vec<usize>,
    /// Affine dimension.
    pub dim: usize,
    /// Orthonormal basis of the tangent space `span(F - F)`; empty for vertices.
    pub tangent: Vec<DVector<f64>>,
    /// Generators of the normal cone: the active facet normals.
    pub normal_generators: Vec<DVector<f64>>,
    /// The vertices of the face.
    pub vertices: Vec<DVector<f64>>,
    /// Symplectic class of the tangent space; vertices classify as isotropic.
    pub class: SubspaceClass,
}

/// All nonempty proper faces, sorted by (dimension, active set).
pub fn face_lattice(body: &HPolytope) -> Result<Vec<Face>> {
    if body.dim() > 4 {
        return Err(Error::InvalidArgument(
            "face lattice enumeration is guarded to dimension <= 4".into(),
        ));
    }
    let space = SymplecticSpace::from_dim(body.dim())?;
    let verts = body.vertices()?;
    let active_sets: Vec<BTreeSet<usize>> = verts
        .vertices()
        .iter()
        .map(|v| body.active_facets(v, FACE_TOL).into_iter().collect())
        .collect();

    // Close under pairwise intersection; the empty set would be K itself.
    let mut closure: BTreeSet<BTreeSet<usize>> = active_sets.iter().cloned().collect();
    loop {
        let mut added = Vec::new();
        let sets: Vec<_> = closure.iter().cloned().collect();
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                let inter: BTreeSet<usize> = sets[i].intersection(&sets[j]).copied().collect();
                if !inter.is_empty() && !closure.contains(&inter) {
                    added.push(inter);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        closure.extend(added);
    }

    let mut faces = Vec::with_capacity(closure.len());
    for active in closure {
        let members: Vec<DVector<f64>> = verts
            .vertices()
            .iter()
            .zip(&active_sets)
            .filter(|(_, a)| active.is_subset(a))
            .map(|(v, _)| v.clone())
            .collect();
        let (dim, tangent) = tangent_basis(&members);
        let class = if tangent.is_empty() {
            SubspaceClass::Isotropic
        } else {
            space.classify_subspace(&tangent)?
        };
        faces.push(Face {
            normal_generators: active.iter().map(|&i| body.normal(i).clone()).collect(),
            active: active.into_iter().collect(),
            dim,
            tangent,
            vertices: members,
            class,
        });
    }
    faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.active.cmp(&b.active)));
    Ok(faces)
}

/// The 2-faces whose tangent plane is Lagrangian.
pub fn lagrangian_faces(body: &HPolytope) -> Result<Vec<Face>> {
    let n = body.dim() / 2;
    Ok(face_lattice(body)?
        .into_iter()
        .filter(|f| f.dim == n && f.class == SubspaceClass::Lagrangian)
        .collect())
}

/// The smallest face containing all given points, or None if some point is
/// not on the boundary.
pub fn smallest_face_containing(body: &HPolytope, points: &[DVector<f64>]) -> Option<Vec<usize>> {
    let mut active: Option<BTreeSet<usize>> = None;
    for p in points {
        let a: BTreeSet<usize> = body.active_facets(p, FACE_TOL).into_iter().collect();
        active = Some(match active {
            None => a,
            Some(prev) => prev.intersection(&a).copied().collect(),
        });
    }
    let active = active?;
    if active.is_empty() {
        return None;
    }
    Some(active.into_iter().collect())
}

fn tangent_basis(members: &[DVector<f64>]) -> (usize, Vec<DVector<f64>>) {
    if members.len() < 2 {
        return (0, Vec::new());
    }
    let ambient = members[0].len();
    let mut diffs = DMatrix::zeros(ambient, members.len() - 1);
    for (j, v) in members[1..].iter().enumerate() {
        diffs.column_mut(j).copy_from(&(v - &members[0]));
    }
    let scale = diffs.amax().max(1.0);
    let svd = diffs.svd(true, false);
    let u = svd.u.as_ref().expect("svd requested u");
    let r = svd.singular_values.iter().filter(|&&s| s > 1e-9 * scale).count();
    let basis = (0..r).map(|j| u.column(j).clone_owned()).collect();
    (r, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies;

    fn count_by_dim(faces: &[Face], dim: usize) -> usize {
        faces.iter().filter(|f| f.dim == dim).count()
    }

    #[test]
    fn cube_face_counts() {
        let cube = bodies::cube(4, 1.0).unwrap();
        let faces = face_lattice(&cube).unwrap();
        assert_eq!(count_by_dim(&faces, 3), 8);
        assert_eq!(count_by_dim(&faces, 2), 24);
        assert_eq!(count_by_dim(&faces, 1), 32);
        assert_eq!(count_by_dim(&faces, 0), 16);
    }

    #[test]
    fn simplex_face_count() {
        let s = bodies::standard_simplex(4).unwrap();
        let faces = face_lattice(&s).unwrap();
        assert_eq!(faces.len(), 30);
    }

    #[test]
    fn y_two_face_with_mixed_sign_actives() {
        // The 2-face {x1 = 1/2, x2 = 0}: one active normal from {+-e1, +-e3},
        // one from {+-e2, +-e4}. (The all-positive pair {e1, e2} pins a vertex,
        // not a 2-face: x1 = x2 = 1/2 forces x3 = x4 = 0 on Y.)
        let y = bodies::y_body().unwrap();
        let faces = face_lattice(&y).unwrap();
        let e1_me2 = faces.iter().find(|f| f.active == vec![0, 5]);
        assert!(e1_me2.is_some(), "expected a face with active normals {{e1, -e2}}");
        assert_eq!(e1_me2.unwrap().dim, 2);
        let e1_e2 = faces.iter().find(|f| f.active == vec![0, 1]);
        assert!(e1_e2.is_none(), "{{e1, e2}} should not be a face of Y");
    }

    #[test]
    fn lagrangian_faces_of_y_and_cube() {
        let y = bodies::y_body().unwrap();
        let ly = lagrangian_faces(&y).unwrap();
        // Pairs (sigma_a e_a, sigma_b e_b), a in {1,3}, b in {2,4}, except the
        // all-positive combination which degenerates to a vertex.
        assert_eq!(ly.len(), 12);
        for f in &ly {
            assert_eq!(f.active.len(), 2);
            let (i, j) = (f.active[0], f.active[1]);
            // facet order: e1..e4 = 0..3, -e1..-e4 = 4..7, e_s = 8.
            let axis = |k: usize| if k < 4 { k } else { k - 4 };
            let positive = |k: usize| k < 4;
            let (a, b) = (axis(i), axis(j));
            assert!(a % 2 != b % 2, "one normal per symplectic pair family");
            assert!(!(positive(i) && positive(j)), "all-positive pairs degenerate");
        }

        let cube = bodies::cube(4, 1.0).unwrap();
        let lc = lagrangian_faces(&cube).unwrap();
        assert_eq!(lc.len(), 16);
    }

    #[test]
    fn no_lagrangian_faces_on_24_cell() {
        let x = bodies::cell24().unwrap();
        assert!(lagrangian_faces(&x).unwrap().is_empty());
    }
}
