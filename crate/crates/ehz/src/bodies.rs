//! The library of reference bodies used throughout the crate and the CLI.
//!
//! Every constructor documents its canonical coordinates and facet order;
//! solver sequences refer to facets by index, so the order is part of the
//! contract.

use nalgebra::{DMatrix, DVector};

use crate::polytope::{HPolytope, VPolytope};
use crate::{Error, Result};

fn unit(dim: usize, i: usize, sign: f64) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = sign;
    v
}

/// Standard simplex `conv{0, e_1, ..., e_d}`.
///
/// Facet order: `-e_1, ..., -e_d` (heights 0), then the diagonal normal
/// `(1,...,1)/sqrt(d)` with height `1/sqrt(d)`.
pub fn standard_simplex(dim: usize) -> Result<HPolytope> {
    let mut hs: Vec<(DVector<f64>, f64)> =
        (0..dim).map(|i| (unit(dim, i, -1.0), 0.0)).collect();
    hs.push((DVector::from_element(dim, 1.0), 1.0));
    HPolytope::new(dim, hs)
}

/// Axis-aligned box `prod [lo_i, hi_i]`.
///
/// Facet order: `e_1, ..., e_d` then `-e_1, ..., -e_d`.
pub fn box_body(bounds: &[(f64, f64)]) -> Result<HPolytope> {
    let dim = bounds.len();
    let mut hs = Vec::with_capacity(2 * dim);
    for (i, &(_, hi)) in bounds.iter().enumerate() {
        hs.push((unit(dim, i, 1.0), hi));
    }
    for (i, &(lo, _)) in bounds.iter().enumerate() {
        hs.push((unit(dim, i, -1.0), -lo));
    }
    HPolytope::new(dim, hs)
}

/// Cube `[0, side]^d`.
pub fn cube(dim: usize, side: f64) -> Result<HPolytope> {
    box_body(&vec![(0.0, side); dim])
}

/// Standard cross-polytope `conv{+-e_i}`.
///
/// Facets are the `2^d` sign patterns `(s_1,...,s_d)/sqrt(d)` with height
/// `1/sqrt(d)`, ordered by the binary code of the signs (`0 -> +`).
pub fn cross_polytope(dim: usize) -> Result<HPolytope> {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut hs = Vec::with_capacity(1 << dim);
    for code in 0..(1u32 << dim) {
        let n = DVector::from_fn(dim, |i, _| {
            if code >> i & 1 == 0 {
                scale
            } else {
                -scale
            }
        });
        hs.push((n, scale));
    }
    HPolytope::new(dim, hs)
}

/// The rotation applied to the cross-polytope: columns pair to
/// `|omega(v_i, v_j)| = 1/sqrt(3)` for all `i != j`.
pub fn cross_rotation() -> DMatrix<f64> {
    let s2 = 2.0_f64.sqrt();
    let s3 = 3.0_f64.sqrt();
    let s6 = 6.0_f64.sqrt();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, s2 / 2.0, 0.0, -s2 / 2.0, //
            0.0, 1.0 / s3, 1.0 / s3, 1.0 / s3, //
            0.0, 1.0 / s6, -(2.0_f64 / 3.0).sqrt(), 1.0 / s6,
        ],
    )
}

/// Image of the standard cross-polytope under [`cross_rotation`].
///
/// Since the map is a rotation, facet normals are the rotated normals of the
/// cross-polytope in the same order, with unchanged heights.
pub fn rotated_cross_polytope() -> Result<HPolytope> {
    let base = cross_polytope(4)?;
    let a = cross_rotation();
    let hs = base
        .facets()
        .iter()
        .map(|f| (&a * &f.normal, f.height))
        .collect();
    HPolytope::new(4, hs)
}

/// The 24-cell with vertices `(+-1, 0, 0, 0)` type and `(+-1/2, ..., +-1/2)`.
///
/// Built from the vertex list; the facet order is the canonical order produced
/// by facet enumeration.
pub fn cell24() -> Result<HPolytope> {
    Ok(cell24_vertices()?.facets()?.canonicalized())
}

pub fn cell24_vertices() -> Result<VPolytope> {
    let mut verts = Vec::with_capacity(24);
    for i in 0..4 {
        for sign in [1.0, -1.0] {
            verts.push(unit(4, i, sign));
        }
    }
    for code in 0..16u32 {
        verts.push(DVector::from_fn(4, |i, _| if code >> i & 1 == 0 { 0.5 } else { -0.5 }));
    }
    VPolytope::new(4, verts)
}

/// `Y = S cap [0, 1/2]^4`: the simplex truncated by the half-cube.
///
/// Facet order: `e_1..e_4` (height 1/2), `-e_1..-e_4` (height 0), then
/// `e_s = (1,1,1,1)/2` (height 1/2).
pub fn y_body() -> Result<HPolytope> {
    let mut hs: Vec<(DVector<f64>, f64)> =
        (0..4).map(|i| (unit(4, i, 1.0), 0.5)).collect();
    hs.extend((0..4).map(|i| (unit(4, i, -1.0), 0.0)));
    hs.push((DVector::from_element(4, 1.0), 1.0));
    HPolytope::new(4, hs)
}

/// Regular `k`-gon with the given circumradius and a vertex at `phase`
/// radians. Facet `i` is the edge between the vertices at `phase + 2 pi i / k`
/// and `phase + 2 pi (i+1) / k`.
pub fn regular_polygon(k: usize, circumradius: f64, phase: f64) -> Result<HPolytope> {
    if k < 3 {
        return Err(Error::InvalidArgument("polygon needs at least 3 vertices".into()));
    }
    let apothem = circumradius * (std::f64::consts::PI / k as f64).cos();
    let mut hs = Vec::with_capacity(k);
    for i in 0..k {
        let angle = phase + (2 * i + 1) as f64 * std::f64::consts::PI / k as f64;
        hs.push((DVector::from_vec(vec![angle.cos(), angle.sin()]), apothem));
    }
    HPolytope::new(2, hs)
}

/// Lagrangian product of a polygon `P` in the `(q_1, q_2)`-plane and `Q` in
/// the `(p_1, p_2)`-plane.
///
/// Facet order: all of `P`'s facets as `(n_x, n_y, 0, 0)`, then all of `Q`'s
/// as `(0, 0, m_x, m_y)`, heights unchanged.
pub fn lagrangian_product(p: &HPolytope, q: &HPolytope) -> Result<HPolytope> {
    if p.dim() != 2 || q.dim() != 2 {
        return Err(Error::InvalidArgument("lagrangian product takes two planar bodies".into()));
    }
    let mut hs = Vec::with_capacity(p.facet_count() + q.facet_count());
    for f in p.facets() {
        hs.push((DVector::from_vec(vec![f.normal[0], f.normal[1], 0.0, 0.0]), f.height));
    }
    for f in q.facets() {
        hs.push((DVector::from_vec(vec![0.0, 0.0, f.normal[0], f.normal[1]]), f.height));
    }
    HPolytope::new(4, hs)
}

/// Product of the regular pentagon (circumradius 1, vertex at angle pi/2) with
/// its rotation by 90 degrees.
pub fn pentagon_product() -> Result<HPolytope> {
    let p = regular_polygon(5, 1.0, std::f64::consts::FRAC_PI_2)?;
    let t = regular_polygon(5, 1.0, std::f64::consts::PI)?;
    lagrangian_product(&p, &t)
}

/// Look up a library body by CLI name.
///
/// `dim` applies to the bodies that exist in every even dimension and
/// defaults to 4.
pub fn by_name(name: &str, dim: Option<usize>) -> Result<HPolytope> {
    let d = dim.unwrap_or(4);
    match name.to_ascii_lowercase().as_str() {
        "simplex" => standard_simplex(d),
        "cube" => cube(d, 1.0),
        "half-cube" => cube(d, 0.5),
        "cross-polytope" => cross_polytope(d),
        "rotated-cross-polytope" => rotated_cross_polytope(),
        "24-cell" => cell24(),
        "y" => y_body(),
        "pentagon-product" => pentagon_product(),
        "square" => cube(2, 1.0),
        "pentagon" => regular_polygon(5, 1.0, std::f64::consts::FRAC_PI_2),
        other => Err(Error::InvalidArgument(format!("unknown body name `{other}`"))),
    }
}

/// Names accepted by [`by_name`].
pub const BODY_NAMES: &[&str] = &[
    "simplex",
    "cube",
    "half-cube",
    "cross-polytope",
    "rotated-cross-polytope",
    "24-cell",
    "y",
    "pentagon-product",
    "square",
    "pentagon",
];

/// Index of the facet whose normal matches `n` (up to tolerance).
pub fn facet_index(body: &HPolytope, n: &DVector<f64>) -> Option<usize> {
    let unit = n / n.norm();
    body.facets().iter().position(|f| (&f.normal - &unit).amax() <= 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::SymplecticSpace;
    use approx::assert_relative_eq;

    #[test]
    fn y_facets() {
        let y = y_body().unwrap();
        assert_eq!(y.facet_count(), 9);
        for i in 0..4 {
            assert_relative_eq!(y.height(i), 0.5);
            assert_relative_eq!(y.height(4 + i), 0.0);
        }
        assert_relative_eq!(y.height(8), 0.5);
        assert_relative_eq!(y.normal(8)[0], 0.5);
    }

    #[test]
    fn rotated_cross_polytope_omega_pairs() {
        let sp = SymplecticSpace::new(2).unwrap();
        let a = cross_rotation();
        // The rotation columns pair to |omega| = 1/sqrt(3).
        let target = 1.0 / 3.0_f64.sqrt();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let vi = a.column(i).clone_owned();
                let vj = a.column(j).clone_owned();
                let w = sp.omega(&vi, &vj).unwrap();
                assert_relative_eq!(w.abs(), target, epsilon = 1e-12);
            }
        }
        // And it is orthogonal.
        let ata = a.transpose() * &a;
        assert_relative_eq!((ata - DMatrix::identity(4, 4)).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pentagon_product_shape() {
        let pt = pentagon_product().unwrap();
        assert_eq!(pt.facet_count(), 10);
        let verts = pt.vertices().unwrap();
        assert_eq!(verts.vertices().len(), 25);
        let area = regular_polygon(5, 1.0, std::f64::consts::FRAC_PI_2)
            .unwrap()
            .volume()
            .unwrap();
        assert_relative_eq!(area, 2.5 * (0.4 * std::f64::consts::PI).sin(), epsilon = 1e-12);
        assert_relative_eq!(pt.volume().unwrap(), area * area, max_relative = 1e-9);
    }

    #[test]
    fn round_trip_facets_vertices() {
        for name in ["simplex", "cube", "y", "24-cell", "cross-polytope"] {
            let body = by_name(name, Some(4)).unwrap();
            let back = body.vertices().unwrap().facets().unwrap();
            assert_eq!(back.facet_count(), body.facet_count(), "{name}");
            for f in body.facets() {
                assert!(
                    back.facets()
                        .iter()
                        .any(|g| (&g.normal - &f.normal).amax() <= 1e-7
                            && (g.height - f.height).abs() <= 1e-7),
                    "{name}: facet {f:?} lost in round trip"
                );
            }
        }
    }
}
