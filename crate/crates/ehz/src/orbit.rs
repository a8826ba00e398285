//! Polygonal closed characteristics on polytope boundaries.
//!
//! A maximizing sequence lifts to a closed polygon on `partial K` whose edges
//! run along `J` times the facet normals: the edge vectors are
//! `2 c beta_i J n_i` traversed in reversed sequence order, where
//! `c = 1/(2 A)`. The action of a polygonal loop is its symplectic area
//! `1/2 |sum omega(p_i, p_{i+1})|`, which equals `c` for maximizers.

use nalgebra::{DMatrix, DVector};

use crate::cuts::{CutPieces, CutSpec};
use crate::faces::smallest_face_containing;
use crate::lp::in_cone;
use crate::polytope::HPolytope;
use crate::solver::{self, CapacitySequence};
use crate::symplectic::{kernel_basis, SymplecticSpace};
use crate::{Error, Result};

const LIFT_TOL: f64 = 1e-8;

/// One edge of a closed orbit.
#[derive(Clone, Debug)]
pub struct OrbitEdge {
    /// Facet whose hyperplane contains the edge; the edge direction is `J`
    /// times this facet's normal (up to positive scale).
    pub facet: usize,
    /// Duration weight: `|edge| / (2 action)`.
    pub weight: f64,
    /// The displacement vector of the edge.
    pub vector: DVector<f64>,
}

/// A closed polygonal characteristic: `vertices[i] -> vertices[i+1]` is
/// `edges[i]`, cyclically.
#[derive(Clone, Debug)]
pub struct ClosedOrbit {
    pub vertices: Vec<DVector<f64>>,
    pub edges: Vec<OrbitEdge>,
    pub action: f64,
}

impl ClosedOrbit {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Symplectic area `1/2 |sum omega(p_i, p_{i+1})|` of a closed polygon.
pub fn orbit_action(vertices: &[DVector<f64>]) -> Result<f64> {
    if vertices.is_empty() {
        return Err(Error::InvalidArgument("empty polygon".into()));
    }
    let space = SymplecticSpace::from_dim(vertices[0].len())?;
    let mut acc = 0.0;
    for i in 0..vertices.len() {
        let j = (i + 1) % vertices.len();
        acc += space.omega_unchecked(&vertices[i], &vertices[j]);
    }
    Ok(0.5 * acc.abs())
}

/// Lift a maximizing (or feasible) sequence to a closed orbit on the boundary.
///
/// Edge vectors are `2 c beta_i J n_i` in reversed sequence order; the start
/// point solves the stacked facet-incidence conditions by least squares. A
/// residual or containment failure means the sequence does not lift to a
/// boundary orbit, which is a first-class outcome for non-maximizers.
pub fn orbit_from_sequence(body: &HPolytope, seq: &CapacitySequence) -> Result<ClosedOrbit> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let a = solver::sequence_action(body, seq)?;
    if a <= 0.0 {
        return Err(Error::Infeasible(format!(
            "sequence value {a} is not positive; no orbit lift"
        )));
    }
    let c = 1.0 / (2.0 * a);
    let entries: Vec<(usize, f64)> = seq.entries.iter().rev().copied().collect();
    let m = entries.len();
    let dim = body.dim();

    let mut dirs = Vec::with_capacity(m);
    for &(fi, beta) in &entries {
        let jn = space.j_apply(body.normal(fi))?;
        dirs.push(2.0 * c * beta * jn);
    }
    let mut closure = DVector::zeros(dim);
    for d in &dirs {
        closure += d;
    }
    if closure.amax() > LIFT_TOL {
        return Err(Error::Infeasible(format!(
            "sequence does not close: residual {:.3e}",
            closure.amax()
        )));
    }

    // <p0 + w_{i-1}, n_i> = h_i for every edge i.
    let mut lsq = DMatrix::zeros(m, dim);
    let mut rhs = DVector::zeros(m);
    let mut w = DVector::zeros(dim);
    for (i, &(fi, _)) in entries.iter().enumerate() {
        lsq.row_mut(i).copy_from(&body.normal(fi).transpose());
        rhs[i] = body.height(fi) - body.normal(fi).dot(&w);
        w += &dirs[i];
    }
    let svd = lsq.clone().svd(true, true);
    let p0 = svd.solve(&rhs, 1e-12).map_err(|e| Error::Degenerate(e.to_string()))?;
    let residual = (&lsq * &p0 - &rhs).amax();
    if residual > LIFT_TOL {
        return Err(Error::Infeasible(format!(
            "sequence does not lift to a boundary orbit: incidence residual {residual:.3e}"
        )));
    }

    let mut vertices = Vec::with_capacity(m);
    let mut p = p0.clone();
    for d in &dirs {
        vertices.push(p.clone());
        p += d;
    }
    for v in &vertices {
        if !body.contains(v, LIFT_TOL) {
            return Err(Error::Infeasible(
                "sequence does not lift to a boundary orbit: vertex leaves the body".into(),
            ));
        }
    }
    let action = orbit_action(&vertices)?;
    if (action - c).abs() > LIFT_TOL * c.max(1.0) {
        return Err(Error::Infeasible(format!(
            "orbit action {action} does not match 1/(2A) = {c}"
        )));
    }
    let edges = entries
        .iter()
        .zip(dirs)
        .map(|(&(fi, _), vector)| OrbitEdge {
            facet: fi,
            weight: vector.norm() / (2.0 * action),
            vector,
        })
        .collect();
    Ok(ClosedOrbit { vertices, edges, action })
}

/// Full verification of an orbit against its body: closure, containment,
/// facet incidence of every edge, and the characteristic cone condition.
pub fn verify_orbit(body: &HPolytope, orbit: &ClosedOrbit, tol: f64) -> Result<()> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let k = orbit.vertices.len();
    if k == 0 || k != orbit.edges.len() {
        return Err(Error::InvalidArgument("orbit vertex/edge count mismatch".into()));
    }
    for i in 0..k {
        let next = (i + 1) % k;
        let step = &orbit.vertices[next] - &orbit.vertices[i];
        if (&step - &orbit.edges[i].vector).amax() > tol {
            return Err(Error::Degenerate(format!("edge {i} vector inconsistent with vertices")));
        }
        if !body.contains(&orbit.vertices[i], tol) {
            return Err(Error::Degenerate(format!("vertex {i} leaves the body")));
        }
        let f = orbit.edges[i].facet;
        for p in [&orbit.vertices[i], &orbit.vertices[next]] {
            if (body.normal(f).dot(p) - body.height(f)).abs() > tol {
                return Err(Error::Degenerate(format!("edge {i} leaves facet {f}")));
            }
        }
        // -J(direction) must lie in the normal cone of the containing face.
        let active = smallest_face_containing(body, &[orbit.vertices[i].clone(), orbit.vertices[next].clone()])
            .ok_or_else(|| Error::Degenerate(format!("edge {i} is not on the boundary")))?;
        let generators: Vec<DVector<f64>> =
            active.iter().map(|&a| body.normal(a).clone()).collect();
        let dir = &orbit.edges[i].vector / orbit.edges[i].vector.norm();
        let w = -space.j_apply(&dir)?;
        if !in_cone(&w, &generators, 1e-9) {
            return Err(Error::Degenerate(format!(
                "edge {i}: -J direction is outside the normal cone"
            )));
        }
    }
    Ok(())
}

/// Dynamical label of one orbit edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    /// `-J(direction)` spans an extreme ray of the face's normal cone.
    ExtremeRay,
    /// The face is coisotropic and the direction stays in `J` times its
    /// normal cone.
    CoisotropicFace,
    /// Direction in the interior of a higher-dimensional isotropic part.
    IsotropicAmbiguous,
}

/// Classify each edge by the face it runs along.
pub fn classify_orbit_edges(body: &HPolytope, orbit: &ClosedOrbit) -> Result<Vec<EdgeLabel>> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let k = orbit.vertices.len();
    let mut labels = Vec::with_capacity(k);
    for i in 0..k {
        let next = (i + 1) % k;
        let active = smallest_face_containing(
            body,
            &[orbit.vertices[i].clone(), orbit.vertices[next].clone()],
        )
        .ok_or_else(|| Error::Degenerate(format!("edge {i} is not on the boundary")))?;
        let generators: Vec<DVector<f64>> =
            active.iter().map(|&a| body.normal(a).clone()).collect();
        let dir = &orbit.edges[i].vector / orbit.edges[i].vector.norm();
        let w = -space.j_apply(&dir)?;

        // Extreme ray: parallel to a generator that is not a conic
        // combination of the others.
        let mut extreme = false;
        for (gi, g) in generators.iter().enumerate() {
            if g.dot(&w) >= (1.0 - 1e-9) * w.norm() {
                let others: Vec<DVector<f64>> = generators
                    .iter()
                    .enumerate()
                    .filter(|&(gj, _)| gj != gi)
                    .map(|(_, h)| h.clone())
                    .collect();
                if others.is_empty() || !in_cone(g, &others, 1e-9) {
                    extreme = true;
                }
                break;
            }
        }
        if extreme {
            labels.push(EdgeLabel::ExtremeRay);
            continue;
        }

        // Tangent space of the face: the common kernel of the active normals.
        let mut rows = DMatrix::zeros(generators.len(), body.dim());
        for (r, g) in generators.iter().enumerate() {
            rows.row_mut(r).copy_from(&g.transpose());
        }
        let tangent = kernel_basis(&rows, 1e-9);
        let coisotropic = !tangent.is_empty()
            && space.classify_subspace(&tangent)?.is_coisotropic();
        if coisotropic && in_cone(&w, &generators, 1e-9) {
            labels.push(EdgeLabel::CoisotropicFace);
        } else {
            labels.push(EdgeLabel::IsotropicAmbiguous);
        }
    }
    Ok(labels)
}

/// Result of splitting an orbit along a cut: the two closed pieces, each on
/// the boundary of its piece body.
#[derive(Clone, Debug)]
pub struct SplitOrbits {
    /// Piece on the `{<x, v> >= level}` side (body `pieces.k1`).
    pub orbit1: ClosedOrbit,
    /// Piece on the `{<x, v> <= level}` side (body `pieces.k2`).
    pub orbit2: ClosedOrbit,
}

/// Split an orbit crossing the cut hyperplane exactly twice, transversally,
/// with the chord between the crossings a positive multiple of `J v`.
///
/// Each returned piece is closed by the straight chord segment, which runs
/// along `J` times the piece's cut-facet normal.
pub fn split_orbit(
    body: &HPolytope,
    orbit: &ClosedOrbit,
    spec: &CutSpec,
    pieces: &CutPieces,
) -> Result<SplitOrbits> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let k = orbit.vertices.len();
    let scale = orbit.vertices.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;

    let f: Vec<f64> = orbit.vertices.iter().map(|p| p.dot(&spec.v) - spec.level).collect();
    if f.iter().any(|&fi| fi.abs() <= tol) {
        return Err(Error::Infeasible(
            "orbit touches the cut hyperplane at a vertex; no transversal double crossing".into(),
        ));
    }
    let mut crossings: Vec<(usize, DVector<f64>)> = Vec::new();
    for i in 0..k {
        let j = (i + 1) % k;
        if f[i] * f[j] < 0.0 {
            let tau = f[i] / (f[i] - f[j]);
            let x = &orbit.vertices[i] + tau * (&orbit.vertices[j] - &orbit.vertices[i]);
            crossings.push((i, x));
        }
    }
    if crossings.len() != 2 {
        return Err(Error::Infeasible(format!(
            "orbit crosses the cut hyperplane {} times; need exactly 2",
            crossings.len()
        )));
    }
    let (ea, xa) = crossings[0].clone();
    let (eb, xb) = crossings[1].clone();

    let jv = space.j_apply(&spec.v)?;
    let chord = &xb - &xa;
    let lambda = chord.dot(&jv);
    if (&chord - lambda * &jv).amax() > 1e-8 * scale || lambda.abs() <= tol {
        return Err(Error::Infeasible(
            "this minimizer does not witness additivity at this cut: chord is not parallel to Jv"
                .into(),
        ));
    }

    // Arc strictly between the crossings (indices ea+1 ..= eb).
    let mid_vertices: Vec<DVector<f64>> = {
        let mut vs = vec![xa.clone()];
        let mut i = (ea + 1) % k;
        loop {
            vs.push(orbit.vertices[i].clone());
            if i == eb {
                break;
            }
            i = (i + 1) % k;
        }
        vs.push(xb.clone());
        vs
    };
    let rest_vertices: Vec<DVector<f64>> = {
        let mut vs = vec![xb.clone()];
        let mut i = (eb + 1) % k;
        loop {
            vs.push(orbit.vertices[i].clone());
            if i == ea {
                break;
            }
            i = (i + 1) % k;
        }
        vs.push(xa.clone());
        vs
    };

    // gamma(t2) - gamma(t1) in R+ Jv makes the arc between t1 and t2 the
    // piece on the {>= level} side. lambda > 0 means (t1, t2) = (xa, xb).
    let mid_side = f[(ea + 1) % k] > 0.0;
    let (k1_vertices, k2_vertices) = if lambda > 0.0 {
        if !mid_side {
            return Err(Error::Infeasible(
                "chord orientation inconsistent with the arc side".into(),
            ));
        }
        (mid_vertices, rest_vertices)
    } else {
        if mid_side {
            return Err(Error::Infeasible(
                "chord orientation inconsistent with the arc side".into(),
            ));
        }
        (rest_vertices, mid_vertices)
    };

    let orbit1 = close_piece(&pieces.k1, k1_vertices)?;
    let orbit2 = close_piece(&pieces.k2, k2_vertices)?;
    let total = orbit1.action + orbit2.action;
    if (total - orbit.action).abs() > 1e-8 * orbit.action.max(1.0) {
        return Err(Error::Degenerate(format!(
            "piece actions {} + {} do not sum to {}",
            orbit1.action, orbit2.action, orbit.action
        )));
    }
    verify_orbit(&pieces.k1, &orbit1, 1e-7)?;
    verify_orbit(&pieces.k2, &orbit2, 1e-7)?;
    Ok(SplitOrbits { orbit1, orbit2 })
}

/// Close an open vertex path (first and last on the cut plane) into an orbit
/// on the piece body; the closing chord becomes the final edge.
fn close_piece(piece: &HPolytope, path: Vec<DVector<f64>>) -> Result<ClosedOrbit> {
    // Drop the duplicated closing point: vertices are cyclic.
    let vertices = path;
    let action = orbit_action(&vertices)?;
    let k = vertices.len();
    let mut edges = Vec::with_capacity(k);
    for i in 0..k {
        let j = (i + 1) % k;
        let vector = &vertices[j] - &vertices[i];
        let facet = label_edge(piece, &vertices[i], &vertices[j], &vector)?;
        edges.push(OrbitEdge { facet, weight: vector.norm() / (2.0 * action), vector });
    }
    Ok(ClosedOrbit { vertices, edges, action })
}

/// Pick the facet containing both endpoints whose `J`-normal best matches the
/// edge direction.
fn label_edge(
    body: &HPolytope,
    a: &DVector<f64>,
    b: &DVector<f64>,
    vector: &DVector<f64>,
) -> Result<usize> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let dir = vector / vector.norm();
    let mut best: Option<(usize, f64)> = None;
    for (i, f) in body.facets().iter().enumerate() {
        let on_a = (f.normal.dot(a) - f.height).abs() <= 1e-7;
        let on_b = (f.normal.dot(b) - f.height).abs() <= 1e-7;
        if !(on_a && on_b) {
            continue;
        }
        let score = space.j_apply(&f.normal)?.dot(&dir);
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("edge is not on a facet of the piece".into()))
}

/// Glue two piece orbits along their cut segments into one orbit on the
/// parent boundary.
///
/// Each input must contain exactly one edge parallel to `-Jv` (`orbit1`) or
/// `+Jv` (`orbit2`) and the segment lengths must agree; `orbit2` is translated
/// so the segments coincide, both segments are removed, and the paths are
/// concatenated.
pub fn glue_orbits(
    body: &HPolytope,
    orbit1: &ClosedOrbit,
    orbit2: &ClosedOrbit,
    v: &DVector<f64>,
) -> Result<ClosedOrbit> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let unit = v / v.norm();
    let jv = space.j_apply(&unit)?;
    let seg1 = find_segment(orbit1, &(-&jv))?;
    let seg2 = find_segment(orbit2, &jv)?;
    let len1 = orbit1.edges[seg1].vector.norm();
    let len2 = orbit2.edges[seg2].vector.norm();
    if (len1 - len2).abs() > 1e-8 * len1.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "cut segment lengths differ: {len1} vs {len2}"
        )));
    }

    let k1 = orbit1.vertices.len();
    let k2 = orbit2.vertices.len();
    // orbit1 segment: a1 -> b1; orbit2 segment: a2 -> b2. Translate orbit2 by
    // (b1 - a2) so its segment runs b1 -> a1, then drop both segments.
    let b1 = &orbit1.vertices[(seg1 + 1) % k1];
    let a2 = &orbit2.vertices[seg2];
    let shift = b1 - a2;

    let mut vertices: Vec<DVector<f64>> = Vec::with_capacity(k1 + k2 - 2);
    for i in 0..k1 {
        vertices.push(orbit1.vertices[(seg1 + 1 + i) % k1].clone());
    }
    // vertices now starts at b1 and ends at a1; continue along orbit2 from
    // its segment end (b2 + shift = a1) -- skip that duplicate point.
    for i in 1..k2 {
        vertices.push(&orbit2.vertices[(seg2 + 1 + i) % k2] + &shift);
    }
    // The walk ends at a2 + shift = b1 = vertices[0]; the list is cyclic.
    vertices.pop();
    let dedup: Vec<DVector<f64>> = vertices
        .iter()
        .enumerate()
        .filter(|&(i, p)| {
            let prev = if i == 0 { vertices.len() - 1 } else { i - 1 };
            (p - &vertices[prev]).amax() > 1e-12
        })
        .map(|(_, p)| p.clone())
        .collect();
    let action = orbit_action(&dedup)?;
    let expected = orbit1.action + orbit2.action;
    if (action - expected).abs() > 1e-8 * expected.max(1.0) {
        return Err(Error::Degenerate(format!(
            "glued action {action} does not match {expected}"
        )));
    }
    let k = dedup.len();
    let mut edges = Vec::with_capacity(k);
    for i in 0..k {
        let j = (i + 1) % k;
        let vector = &dedup[j] - &dedup[i];
        let facet = label_edge(body, &dedup[i], &dedup[j], &vector)?;
        edges.push(OrbitEdge { facet, weight: vector.norm() / (2.0 * action), vector });
    }
    let glued = ClosedOrbit { vertices: dedup, edges, action };
    verify_orbit(body, &glued, 1e-7)?;
    Ok(glued)
}

/// Index of the unique edge parallel to `target` (unit).
fn find_segment(orbit: &ClosedOrbit, target: &DVector<f64>) -> Result<usize> {
    let mut found = None;
    for (i, e) in orbit.edges.iter().enumerate() {
        let dir = &e.vector / e.vector.norm();
        if (&dir - target).amax() <= 1e-8 {
            if found.is_some() {
                return Err(Error::InvalidArgument(
                    "orbit has multiple cut segments in the target direction".into(),
                ));
            }
            found = Some(i);
        }
    }
    found.ok_or_else(|| {
        Error::InvalidArgument("orbit has no cut segment in the target direction".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies;
    use approx::assert_relative_eq;

    fn y_rectangle() -> (HPolytope, ClosedOrbit) {
        let y = bodies::y_body().unwrap();
        // Maximizer (-e3, e1, e3, -e1) with beta = 1: facet indices 6,0,2,4.
        let seq = CapacitySequence::new(vec![(6, 1.0), (0, 1.0), (2, 1.0), (4, 1.0)]);
        let orbit = orbit_from_sequence(&y, &seq).unwrap();
        (y, orbit)
    }

    #[test]
    fn y_maximizer_lifts_to_rectangle() {
        let (y, orbit) = y_rectangle();
        assert_eq!(orbit.vertices.len(), 4);
        assert_relative_eq!(orbit.action, 0.25, epsilon = 1e-10);
        verify_orbit(&y, &orbit, 1e-8).unwrap();
        // The rectangle (0,0,0,0) -> (0,0,1/2,0) -> (1/2,0,1/2,0) -> (1/2,0,0,0)
        // up to cyclic shift.
        let expected = [
            DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 0.5, 0.0]),
            DVector::from_vec(vec![0.5, 0.0, 0.5, 0.0]),
            DVector::from_vec(vec![0.5, 0.0, 0.0, 0.0]),
        ];
        for e in &expected {
            assert!(
                orbit.vertices.iter().any(|p| (p - e).amax() <= 1e-9),
                "missing vertex {e:?}"
            );
        }
    }

    #[test]
    fn corrupted_sequence_fails_to_lift() {
        let y = bodies::y_body().unwrap();
        let seq = CapacitySequence::new(vec![(6, 1.1), (0, 1.0), (2, 1.0), (4, 1.0)]);
        assert!(orbit_from_sequence(&y, &seq).is_err());
    }

    #[test]
    fn square_boundary_action() {
        let sq = bodies::cube(2, 1.0).unwrap();
        // Facet order e1, e2, -e1, -e2; maximizer beta = 1/2 each.
        let seq = CapacitySequence::new(vec![(0, 0.5), (1, 0.5), (2, 0.5), (3, 0.5)]);
        let orbit = orbit_from_sequence(&sq, &seq).unwrap();
        assert_relative_eq!(orbit.action, 1.0, epsilon = 1e-10);
        verify_orbit(&sq, &orbit, 1e-8).unwrap();
        // Degenerate back-and-forth polygon has zero action.
        let degenerate = vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
        ];
        assert_relative_eq!(orbit_action(&degenerate).unwrap(), 0.0);
    }

    #[test]
    fn split_y_rectangle_along_e1() {
        let (y, orbit) = y_rectangle();
        let spec = CutSpec::new(DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]), 0.25).unwrap();
        let pieces = crate::cuts::cut(&y, &spec).unwrap();
        let split = split_orbit(&y, &orbit, &spec, &pieces).unwrap();
        assert_relative_eq!(split.orbit1.action, 0.125, epsilon = 1e-10);
        assert_relative_eq!(split.orbit2.action, 0.125, epsilon = 1e-10);

        // Round trip: gluing recovers the original orbit's action and vertices.
        let glued = glue_orbits(&y, &split.orbit1, &split.orbit2, &spec.v).unwrap();
        assert_relative_eq!(glued.action, orbit.action, epsilon = 1e-10);
        for p in &orbit.vertices {
            assert!(glued.vertices.iter().any(|q| (q - p).amax() <= 1e-9));
        }
    }

    #[test]
    fn split_refusals() {
        let (y, orbit) = y_rectangle();
        // The orbit lies in {x2 = 0}: no transversal crossing of x2 = level.
        let spec = CutSpec::new(DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]), 0.25).unwrap();
        let pieces = crate::cuts::cut(&y, &spec).unwrap();
        assert!(split_orbit(&y, &orbit, &spec, &pieces).is_err());
    }

    #[test]
    fn classify_y_rectangle_edges() {
        let (y, orbit) = y_rectangle();
        let labels = classify_orbit_edges(&y, &orbit).unwrap();
        assert!(labels.iter().all(|&l| l == EdgeLabel::ExtremeRay));
    }

    #[test]
    fn classify_cube_lagrangian_glide() {
        // The grand tour of [0,1]^4 along Lagrangian 2-faces: every edge
        // direction is J of an interior normal-cone combination.
        let cube = bodies::cube(4, 1.0).unwrap();
        let vertices = vec![
            DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0]),
            DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]),
        ];
        let action = orbit_action(&vertices).unwrap();
        let mut edges = Vec::new();
        for i in 0..4 {
            let j = (i + 1) % 4;
            let vector = &vertices[j] - &vertices[i];
            let facet = label_edge(&cube, &vertices[i], &vertices[j], &vector).unwrap();
            edges.push(OrbitEdge { facet, weight: vector.norm() / (2.0 * action), vector });
        }
        let orbit = ClosedOrbit { vertices, edges, action };
        verify_orbit(&cube, &orbit, 1e-8).unwrap();
        let labels = classify_orbit_edges(&cube, &orbit).unwrap();
        assert!(labels.iter().all(|&l| l == EdgeLabel::CoisotropicFace), "{labels:?}");
    }

    #[test]
    fn planar_orbit_edges_are_extreme_rays() {
        let sq = bodies::cube(2, 1.0).unwrap();
        let seq = CapacitySequence::new(vec![(0, 0.5), (1, 0.5), (2, 0.5), (3, 0.5)]);
        let orbit = orbit_from_sequence(&sq, &seq).unwrap();
        let labels = classify_orbit_edges(&sq, &orbit).unwrap();
        assert!(labels.iter().all(|&l| l == EdgeLabel::ExtremeRay));
    }
}
