//! Convex polytope representations and conversions.
//!
//! `HPolytope` is the half-space representation `{x : <x, n_i> <= h_i}` with
//! unit outer normals; `VPolytope` is the vertex representation. Conversions
//! between the two use brute-force subset enumeration, which is robust and
//! fast at the facet counts this crate targets (<= ~40).

use nalgebra::{DMatrix, DVector};

use crate::lp;
use crate::symplectic::{kernel_basis, rank};
use crate::{Error, Result};

/// Absolute tolerance for feasibility and deduplication on unit-normalized data.
pub const GEOM_TOL: f64 = 1e-9;

/// One facet `{x : <x, normal> <= height}` with `|normal| = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub height: f64,
}

/// Bounded full-dimensional polytope in half-space representation.
#[derive(Clone, Debug)]
pub struct HPolytope {
    dim: usize,
    facets: Vec<Facet>,
}

/// Polytope as the convex hull of its extreme points.
#[derive(Clone, Debug)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<DVector<f64>>,
}

impl HPolytope {
    /// Build from `(normal, height)` pairs. Normals are rescaled to unit
    /// length, exact duplicates are coalesced to the tightest height, and the
    /// result is checked to be bounded and full-dimensional.
    pub fn new(dim: usize, halfspaces: Vec<(DVector<f64>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut facets: Vec<Facet> = Vec::with_capacity(halfspaces.len());
        for (normal, height) in halfspaces {
            if normal.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: normal.len() });
            }
            let norm = normal.norm();
            if norm <= GEOM_TOL {
                return Err(Error::Degenerate("zero facet normal".into()));
            }
            let unit = normal / norm;
            let h = height / norm;
            if let Some(existing) =
                facets.iter_mut().find(|f| (&f.normal - &unit).amax() <= GEOM_TOL)
            {
                existing.height = existing.height.min(h);
            } else {
                facets.push(Facet { normal: unit, height: h });
            }
        }
        if facets.len() <= dim {
            return Err(Error::Degenerate(format!(
                "{} half-spaces cannot bound a {dim}-dimensional body",
                facets.len()
            )));
        }
        let poly = Self { dim, facets };
        poly.check_bounded()?;
        poly.check_full_dimensional()?;
        Ok(poly)
    }

    fn check_bounded(&self) -> Result<()> {
        // Bounded iff every coordinate direction has a finite support value.
        for i in 0..self.dim {
            for sign in [1.0, -1.0] {
                let mut v = DVector::zeros(self.dim);
                v[i] = sign;
                if self.support(&v).is_err() {
                    return Err(Error::Unbounded(format!("unbounded along coordinate {i}")));
                }
            }
        }
        Ok(())
    }

    fn check_full_dimensional(&self) -> Result<()> {
        let (_, r) = self.chebyshev_center()?;
        if r <= GEOM_TOL {
            return Err(Error::Degenerate(format!("body is not full-dimensional (inradius {r})")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn normal(&self, i: usize) -> &DVector<f64> {
        &self.facets[i].normal
    }

    pub fn height(&self, i: usize) -> f64 {
        self.facets[i].height
    }

    /// Support function `h_K(v) = max{<x, v> : x in K}` via LP.
    pub fn support(&self, v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let cons: Vec<_> = self
            .facets
            .iter()
            .map(|f| lp::LinCon::le(f.normal.iter().copied().collect(), f.height))
            .collect();
        let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); self.dim];
        let (opt, _) = lp::solve_lp(true, v.as_slice(), &cons, &bounds)?;
        Ok(opt)
    }

    /// Deepest interior point and the corresponding inradius.
    pub fn chebyshev_center(&self) -> Result<(DVector<f64>, f64)> {
        let normals: Vec<_> = self.facets.iter().map(|f| f.normal.clone()).collect();
        let heights: Vec<_> = self.facets.iter().map(|f| f.height).collect();
        lp::chebyshev_center(&normals, &heights)
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.facets.iter().all(|f| f.normal.dot(x) <= f.height + tol)
    }

    /// Indices of facets active at `x` (within `tol`).
    pub fn active_facets(&self, x: &DVector<f64>, tol: f64) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| (f.normal.dot(x) - f.height).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Enumerate the vertices by solving all `dim`-subsets of facet equations.
    pub fn vertices(&self) -> Result<VPolytope> {
        let d = self.dim;
        let k = self.facets.len();
        let mut verts: Vec<DVector<f64>> = Vec::new();
        let mut subset: Vec<usize> = (0..d).collect();
        let mut a = DMatrix::zeros(d, d);
        let mut b = DVector::zeros(d);
        loop {
            for (row, &fi) in subset.iter().enumerate() {
                a.row_mut(row).copy_from(&self.facets[fi].normal.transpose());
                b[row] = self.facets[fi].height;
            }
            let lu = a.clone().full_piv_lu();
            if let Some(x) = lu.solve(&b) {
                // Guard against ill-conditioned near-singular systems.
                let residual = (&a * &x - &b).amax();
                if residual <= 1e-7
                    && self.contains(&x, GEOM_TOL * 10.0)
                    && !verts.iter().any(|v| (v - &x).amax() <= 1e-7)
                {
                    verts.push(x);
                }
            }
            if !next_combination(&mut subset, k) {
                break;
            }
        }
        if verts.is_empty() {
            return Err(Error::Degenerate("no vertices found".into()));
        }
        VPolytope::new(self.dim, verts)
    }

    /// Drop facets that do not support a `(dim-1)`-dimensional face.
    ///
    /// A facet is kept iff at least `dim` vertices are active on it and those
    /// vertices affinely span dimension `dim - 1`.
    pub fn remove_redundant(&self) -> Result<Self> {
        let verts = self.vertices()?;
        let mut kept = Vec::new();
        for f in &self.facets {
            let active: Vec<&DVector<f64>> = verts
                .vertices()
                .iter()
                .filter(|v| (f.normal.dot(v) - f.height).abs() <= 1e-7)
                .collect();
            if active.len() < self.dim {
                continue;
            }
            let mut diffs = DMatrix::zeros(self.dim, active.len() - 1);
            for (j, v) in active[1..].iter().enumerate() {
                diffs.column_mut(j).copy_from(&(*v - active[0]));
            }
            if rank(&diffs, 1e-7) == self.dim - 1 {
                kept.push(f.clone());
            }
        }
        Self::new(self.dim, kept.into_iter().map(|f| (f.normal, f.height)).collect())
    }

    /// Translate by `x0`: heights become `h_i + <n_i, x0>`.
    pub fn translate(&self, x0: &DVector<f64>) -> Result<Self> {
        if x0.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x0.len() });
        }
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), height: f.height + f.normal.dot(x0) })
            .collect();
        Ok(Self { dim: self.dim, facets })
    }

    /// Scale about the origin by `lambda > 0`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), height: f.height * lambda })
            .collect();
        Ok(Self { dim: self.dim, facets })
    }

    /// Image under an invertible linear map, via the vertex representation.
    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<Self> {
        self.vertices()?.linear_image(m)?.facets()
    }

    /// Recenter so the Chebyshev center moves to the origin. Returns the new
    /// body and the applied translation (new = old translated by `-center`).
    pub fn recentered(&self) -> Result<(Self, DVector<f64>)> {
        let (c, _) = self.chebyshev_center()?;
        Ok((self.translate(&(-&c))?, c))
    }

    /// Facets sorted lexicographically by normal, then height.
    pub fn canonicalized(&self) -> Self {
        let mut facets = self.facets.clone();
        facets.sort_by(|a, b| lex_cmp(&a.normal, a.height, &b.normal, b.height));
        Self { dim: self.dim, facets }
    }

    /// Euclidean volume.
    pub fn volume(&self) -> Result<f64> {
        self.vertices()?.volume()
    }
}

impl VPolytope {
    /// Canonicalize: drop points that are convex combinations of the others,
    /// and deduplicate. The result stores exactly the extreme points.
    pub fn new(dim: usize, points: Vec<DVector<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Degenerate("no points".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
        }
        let mut unique: Vec<DVector<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if !unique.iter().any(|q| (q - &p).amax() <= 1e-9) {
                unique.push(p);
            }
        }
        let mut extreme = Vec::with_capacity(unique.len());
        for (i, p) in unique.iter().enumerate() {
            let others: Vec<DVector<f64>> =
                unique.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| q.clone()).collect();
            if others.is_empty() || !in_convex_hull(p, &others) {
                extreme.push(p.clone());
            }
        }
        extreme.sort_by(|a, b| lex_cmp(a, 0.0, b, 0.0));
        Ok(Self { dim, vertices: extreme })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn support(&self, v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        self.vertices
            .iter()
            .map(|p| p.dot(v))
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
            .ok_or_else(|| Error::Degenerate("no vertices".into()))
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.nrows() });
        }
        if m.clone().full_piv_lu().determinant().abs() <= 1e-12 {
            return Err(Error::Degenerate("linear image requires an invertible matrix".into()));
        }
        Self::new(self.dim, self.vertices.iter().map(|v| m * v).collect())
    }

    pub fn translate(&self, x0: &DVector<f64>) -> Result<Self> {
        Self::new(self.dim, self.vertices.iter().map(|v| v + x0).collect())
    }

    /// Facet enumeration: fit hyperplanes through all `dim`-subsets of
    /// vertices and keep the supporting ones, oriented outward.
    pub fn facets(&self) -> Result<HPolytope> {
        let d = self.dim;
        let m = self.vertices.len();
        if m <= d {
            return Err(Error::Degenerate("too few vertices for a full-dimensional body".into()));
        }
        let centroid = self.centroid();
        let mut halfspaces: Vec<(DVector<f64>, f64)> = Vec::new();
        let mut subset: Vec<usize> = (0..d).collect();
        loop {
            if let Some((normal, height)) = self.fit_supporting_hyperplane(&subset, &centroid) {
                if !halfspaces
                    .iter()
                    .any(|(n, h)| (n - &normal).amax() <= 1e-8 && (h - height).abs() <= 1e-8)
                {
                    halfspaces.push((normal, height));
                }
            }
            if !next_combination(&mut subset, m) {
                break;
            }
        }
        HPolytope::new(d, halfspaces)
    }

    fn fit_supporting_hyperplane(
        &self,
        subset: &[usize],
        centroid: &DVector<f64>,
    ) -> Option<(DVector<f64>, f64)> {
        let d = self.dim;
        let p0 = &self.vertices[subset[0]];
        let mut diffs = DMatrix::zeros(subset.len() - 1, d);
        for (row, &i) in subset[1..].iter().enumerate() {
            diffs.row_mut(row).copy_from(&(&self.vertices[i] - p0).transpose());
        }
        let kernel = kernel_basis(&diffs, 1e-9);
        // The subset must span exactly a (d-1)-flat.
        if kernel.len() != 1 {
            return None;
        }
        let mut normal = kernel.into_iter().next().unwrap();
        let mut height = normal.dot(p0);
        // Orient outward: the centroid is strictly inside.
        match normal.dot(centroid).partial_cmp(&height) {
            Some(std::cmp::Ordering::Greater) => {
                normal = -normal;
                height = -height;
            }
            Some(std::cmp::Ordering::Less) => {}
            _ => return None,
        }
        let supporting =
            self.vertices.iter().all(|v| normal.dot(v) <= height + 1e-8 * height.abs().max(1.0));
        if supporting {
            Some((normal, height))
        } else {
            None
        }
    }

    /// Euclidean volume via recursive pyramid decomposition about the
    /// centroid: `Vol_d = (1/d) sum_F dist(centroid, F) Vol_{d-1}(F)`.
    pub fn volume(&self) -> Result<f64> {
        volume_rec(&self.vertices)
    }
}

fn volume_rec(points: &[DVector<f64>]) -> Result<f64> {
    let ambient = points.first().map(|p| p.len()).unwrap_or(0);
    if points.len() < 2 {
        return Ok(0.0);
    }
    // Local orthonormal coordinates of the affine hull.
    let mut centered = DMatrix::zeros(ambient, points.len());
    let mut mean = DVector::zeros(ambient);
    for p in points {
        mean += p;
    }
    mean /= points.len() as f64;
    for (j, p) in points.iter().enumerate() {
        centered.column_mut(j).copy_from(&(p - &mean));
    }
    let scale = centered.amax().max(1.0);
    let svd = centered.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd requested u");
    let d_aff =
        svd.singular_values.iter().filter(|&&s| s > 1e-9 * scale).count();
    if d_aff == 0 {
        return Ok(0.0);
    }
    let local: Vec<DVector<f64>> = (0..points.len())
        .map(|j| {
            DVector::from_fn(d_aff, |r, _| u.column(r).dot(&centered.column(j).clone_owned()))
        })
        .collect();
    volume_full_dim(&local, d_aff)
}

fn volume_full_dim(points: &[DVector<f64>], d: usize) -> Result<f64> {
    match d {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok(hi - lo)
        }
        2 => Ok(polygon_area(points)),
        _ => {
            let vp = VPolytope::new(d, points.to_vec())?;
            let hp = vp.facets()?;
            let centroid = vp.centroid();
            let mut vol = 0.0;
            for f in hp.facets() {
                let active: Vec<DVector<f64>> = vp
                    .vertices()
                    .iter()
                    .filter(|v| (f.normal.dot(v) - f.height).abs() <= 1e-7)
                    .cloned()
                    .collect();
                let dist = f.height - f.normal.dot(&centroid);
                vol += dist * volume_rec(&active)?;
            }
            Ok(vol / d as f64)
        }
    }
}

/// Area of the convex hull of planar points (shoelace on the angular sort).
pub fn polygon_area(points: &[DVector<f64>]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / points.len() as f64;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / points.len() as f64;
    let mut pts: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| ((p[1] - cy).atan2(p[0] - cx), p[0], p[1]))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut twice = 0.0;
    for i in 0..pts.len() {
        let (_, x1, y1) = pts[i];
        let (_, x2, y2) = pts[(i + 1) % pts.len()];
        twice += x1 * y2 - x2 * y1;
    }
    twice.abs() / 2.0
}

/// Whether `p` is a convex combination of `points` (LP feasibility).
fn in_convex_hull(p: &DVector<f64>, points: &[DVector<f64>]) -> bool {
    let dim = p.len();
    let k = points.len();
    let mut cons = Vec::with_capacity(dim + 1);
    for row in 0..dim {
        let coeffs: Vec<f64> = points.iter().map(|q| q[row]).collect();
        cons.push(lp::LinCon::eq(coeffs, p[row]));
    }
    cons.push(lp::LinCon::eq(vec![1.0; k], 1.0));
    let bounds = vec![(0.0, f64::INFINITY); k];
    lp::lp_feasible(&cons, &bounds)
}

/// Advance `subset` to the next k-combination of `0..n`; false when done.
pub fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if subset[i] != i + n - k {
            break;
        }
    }
    subset[i] += 1;
    for j in (i + 1)..k {
        subset[j] = subset[j - 1] + 1;
    }
    true
}

/// Lexicographic comparison with a tolerance per component, so canonical
/// orders do not depend on roundoff noise in ties.
pub(crate) fn lex_cmp(a: &DVector<f64>, ah: f64, b: &DVector<f64>, bh: f64) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() <= 1e-9 {
            continue;
        }
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    if (ah - bh).abs() <= 1e-9 {
        return std::cmp::Ordering::Equal;
    }
    ah.partial_cmp(&bh).unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies;
    use approx::assert_relative_eq;

    #[test]
    fn support_examples() {
        let simplex = bodies::standard_simplex(4).unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!(simplex.support(&e1).unwrap(), 1.0, epsilon = 1e-9);

        let y = bodies::y_body().unwrap();
        let es = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        assert_relative_eq!(y.support(&es).unwrap(), 0.5, epsilon = 1e-9);
        let me1 = DVector::from_vec(vec![-1.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!(y.support(&me1).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn vertices_of_cube_and_simplex() {
        let cube = bodies::cube(4, 1.0).unwrap();
        assert_eq!(cube.vertices().unwrap().vertices().len(), 16);

        let simplex = bodies::standard_simplex(4).unwrap();
        let verts = simplex.vertices().unwrap();
        assert_eq!(verts.vertices().len(), 5);
        let origin = DVector::zeros(4);
        assert!(verts.vertices().iter().any(|v| (v - &origin).amax() <= 1e-9));
    }

    #[test]
    fn vertices_of_y() {
        let y = bodies::y_body().unwrap();
        let verts = y.vertices().unwrap();
        // {0} plus {e_i/2} plus {e_i/2 + e_j/2}.
        let mut expected: Vec<DVector<f64>> = vec![DVector::zeros(4)];
        for i in 0..4 {
            let mut v = DVector::zeros(4);
            v[i] = 0.5;
            expected.push(v);
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                let mut v = DVector::zeros(4);
                v[i] = 0.5;
                v[j] = 0.5;
                expected.push(v);
            }
        }
        assert_eq!(verts.vertices().len(), expected.len());
        for e in &expected {
            assert!(
                verts.vertices().iter().any(|v| (v - e).amax() <= 1e-9),
                "missing vertex {e:?}"
            );
        }
    }

    #[test]
    fn facet_enumeration_round_trips() {
        let square = VPolytope::new(
            2,
            vec![
                DVector::from_vec(vec![0.0, 0.0]),
                DVector::from_vec(vec![1.0, 0.0]),
                DVector::from_vec(vec![1.0, 1.0]),
                DVector::from_vec(vec![0.0, 1.0]),
            ],
        )
        .unwrap();
        assert_eq!(square.facets().unwrap().facet_count(), 4);

        let simplex_v = bodies::standard_simplex(4).unwrap().vertices().unwrap();
        assert_eq!(simplex_v.facets().unwrap().facet_count(), 5);

        let x24 = bodies::cell24().unwrap();
        assert_eq!(x24.facet_count(), 24);
        let back = x24.vertices().unwrap();
        assert_eq!(back.vertices().len(), 24);
    }

    #[test]
    fn volumes() {
        let simplex = bodies::standard_simplex(4).unwrap();
        assert_relative_eq!(simplex.volume().unwrap(), 1.0 / 24.0, epsilon = 1e-10);
        let cube = bodies::cube(4, 1.0).unwrap();
        assert_relative_eq!(cube.volume().unwrap(), 1.0, epsilon = 1e-10);
        let y = bodies::y_body().unwrap();
        assert_relative_eq!(y.volume().unwrap(), 1.0 / 32.0, epsilon = 1e-10);
    }

    #[test]
    fn volume_scaling_law() {
        let y = bodies::y_body().unwrap();
        let v0 = y.volume().unwrap();
        for lambda in [0.3, 1.7] {
            let scaled = y.scale(lambda).unwrap();
            assert_relative_eq!(
                scaled.volume().unwrap(),
                lambda.powi(4) * v0,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn redundant_facet_removed() {
        // Unit square plus a loose diagonal constraint.
        let hs = vec![
            (DVector::from_vec(vec![1.0, 0.0]), 1.0),
            (DVector::from_vec(vec![-1.0, 0.0]), 0.0),
            (DVector::from_vec(vec![0.0, 1.0]), 1.0),
            (DVector::from_vec(vec![0.0, -1.0]), 0.0),
            (DVector::from_vec(vec![1.0, 1.0]), 5.0),
        ];
        let p = HPolytope::new(2, hs).unwrap();
        assert_eq!(p.facet_count(), 5);
        assert_eq!(p.remove_redundant().unwrap().facet_count(), 4);
    }

    #[test]
    fn rejects_unbounded_and_degenerate() {
        let hs = vec![
            (DVector::from_vec(vec![1.0, 0.0]), 1.0),
            (DVector::from_vec(vec![0.0, 1.0]), 1.0),
            (DVector::from_vec(vec![0.0, -1.0]), 0.0),
        ];
        assert!(matches!(HPolytope::new(2, hs), Err(Error::Unbounded(_))));

        let flat = vec![
            (DVector::from_vec(vec![1.0, 0.0]), 0.0),
            (DVector::from_vec(vec![-1.0, 0.0]), 0.0),
            (DVector::from_vec(vec![0.0, 1.0]), 1.0),
            (DVector::from_vec(vec![0.0, -1.0]), 0.0),
        ];
        assert!(matches!(HPolytope::new(2, flat), Err(Error::Degenerate(_))));
    }
}
