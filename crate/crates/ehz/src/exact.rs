//! Exact rational verification of feasibility and capacity certificates.
//!
//! The capacity formula is invariant under positive rescaling of individual
//! normals (with the coefficients rescaled inversely), so exact verification
//! can use unnormalized rational facet data even when the unit normals are
//! irrational, as for the 24-cell. Float sequences convert by
//! `beta' = beta / |r_i|` followed by rational snapping; the exact
//! feasibility check is the gate, the snap is only a heuristic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::polytope::HPolytope;
use crate::solver::CapacitySequence;
use crate::{Error, Result};

pub type Rat = BigRational;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A polytope with rational (not necessarily unit) facet normals.
#[derive(Clone, Debug)]
pub struct ExactBody {
    pub dim: usize,
    pub normals: Vec<Vec<Rat>>,
    pub heights: Vec<Rat>,
}

/// Exact feasibility data of a sequence.
#[derive(Clone, Debug)]
pub struct ExactFeasibility {
    pub closing_zero: bool,
    pub normalization_one: bool,
    pub all_positive: bool,
}

impl ExactFeasibility {
    pub fn feasible(&self) -> bool {
        self.closing_zero && self.normalization_one && self.all_positive
    }
}

/// `omega(x, y)` for rational vectors under the fixed coordinate convention.
pub fn omega_exact(x: &[Rat], y: &[Rat]) -> Rat {
    let n = x.len() / 2;
    let mut acc = Rat::zero();
    for i in 0..n {
        acc += &x[n + i] * &y[i] - &x[i] * &y[n + i];
    }
    acc
}

impl ExactBody {
    /// Rational twin of a library body, facet order aligned index-by-index
    /// (up to positive per-facet scale) with [`crate::bodies::by_name`].
    pub fn from_name(name: &str, dim: Option<usize>) -> Result<Self> {
        let d = dim.unwrap_or(4);
        match name.to_ascii_lowercase().as_str() {
            "simplex" => Ok(Self::simplex(d)),
            "cube" => Ok(Self::cube(d, 1)),
            "square" => Ok(Self::cube(2, 1)),
            "cross-polytope" => Ok(Self::cross_polytope(d)),
            "y" => Ok(Self::y_body()),
            "24-cell" => Ok(Self::cell24()),
            other => Err(Error::InvalidArgument(format!(
                "no exact rational data for body `{other}`"
            ))),
        }
    }

    pub fn simplex(dim: usize) -> Self {
        let mut normals: Vec<Vec<Rat>> = Vec::with_capacity(dim + 1);
        let mut heights = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut n = vec![Rat::zero(); dim];
            n[i] = -Rat::one();
            normals.push(n);
            heights.push(Rat::zero());
        }
        normals.push(vec![Rat::one(); dim]);
        heights.push(Rat::one());
        Self { dim, normals, heights }
    }

    pub fn cube(dim: usize, side: i64) -> Self {
        let mut normals = Vec::with_capacity(2 * dim);
        let mut heights = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let mut n = vec![Rat::zero(); dim];
            n[i] = Rat::one();
            normals.push(n);
            heights.push(rat(side, 1));
        }
        for i in 0..dim {
            let mut n = vec![Rat::zero(); dim];
            n[i] = -Rat::one();
            normals.push(n);
            heights.push(Rat::zero());
        }
        Self { dim, normals, heights }
    }

    pub fn cross_polytope(dim: usize) -> Self {
        let mut normals = Vec::with_capacity(1 << dim);
        for code in 0..(1u32 << dim) {
            normals.push(
                (0..dim)
                    .map(|i| if code >> i & 1 == 0 { Rat::one() } else { -Rat::one() })
                    .collect(),
            );
        }
        let heights = vec![Rat::one(); 1 << dim];
        Self { dim, normals, heights }
    }

    pub fn y_body() -> Self {
        let mut normals = Vec::with_capacity(9);
        let mut heights = Vec::with_capacity(9);
        for i in 0..4 {
            let mut n = vec![Rat::zero(); 4];
            n[i] = Rat::one();
            normals.push(n);
            heights.push(rat(1, 2));
        }
        for i in 0..4 {
            let mut n = vec![Rat::zero(); 4];
            n[i] = -Rat::one();
            normals.push(n);
            heights.push(Rat::zero());
        }
        normals.push(vec![Rat::one(); 4]);
        heights.push(Rat::one());
        Self { dim: 4, normals, heights }
    }

    /// The 24-cell with integer normals `+-e_i +- e_j`, sorted to match the
    /// canonical float facet order.
    pub fn cell24() -> Self {
        let mut raw: Vec<Vec<Rat>> = Vec::with_capacity(24);
        for i in 0..4 {
            for j in (i + 1)..4 {
                for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let mut n = vec![Rat::zero(); 4];
                    n[i] = rat(si, 1);
                    n[j] = rat(sj, 1);
                    raw.push(n);
                }
            }
        }
        // Same comparator as the float canonicalization: lexicographic on the
        // unit-normalized coordinates (exact data, so plain comparison).
        raw.sort_by(|a, b| {
            let fa: Vec<f64> = a.iter().map(to_f64).collect();
            let fb: Vec<f64> = b.iter().map(to_f64).collect();
            fa.iter()
                .zip(&fb)
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let heights = vec![Rat::one(); 24];
        Self { dim: 4, normals: raw, heights }
    }

    pub fn facet_count(&self) -> usize {
        self.normals.len()
    }

    /// Objective `sum_{j<i} beta_i beta_j omega(n_i, n_j)`, exact.
    pub fn action(&self, entries: &[(usize, Rat)]) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (i, (fi, bi)) in entries.iter().enumerate() {
            if *fi >= self.facet_count() {
                return Err(Error::InvalidArgument(format!("facet index {fi} out of range")));
            }
            for (fj, bj) in &entries[..i] {
                acc += bi * bj * omega_exact(&self.normals[*fi], &self.normals[*fj]);
            }
        }
        Ok(acc)
    }

    /// Exact constraint check: `sum beta n = 0`, `sum beta h = 1`, `beta > 0`.
    pub fn feasibility(&self, entries: &[(usize, Rat)]) -> Result<ExactFeasibility> {
        let mut closing = vec![Rat::zero(); self.dim];
        let mut norm = Rat::zero();
        let mut all_positive = true;
        for (fi, bi) in entries {
            if *fi >= self.facet_count() {
                return Err(Error::InvalidArgument(format!("facet index {fi} out of range")));
            }
            for (c, n) in closing.iter_mut().zip(&self.normals[*fi]) {
                *c += bi * n;
            }
            norm += bi * &self.heights[*fi];
            all_positive &= bi.is_positive();
        }
        Ok(ExactFeasibility {
            closing_zero: closing.iter().all(Rat::is_zero),
            normalization_one: norm.is_one(),
            all_positive,
        })
    }

    /// Exact capacity upper bound `1 / (2 A)` from a feasible sequence.
    pub fn certify(&self, entries: &[(usize, Rat)]) -> Result<Rat> {
        let feas = self.feasibility(entries)?;
        if !feas.feasible() {
            return Err(Error::Infeasible(format!(
                "sequence fails exact constraints: closing_zero={}, normalization_one={}, all_positive={}",
                feas.closing_zero, feas.normalization_one, feas.all_positive
            )));
        }
        let a = self.action(entries)?;
        if !a.is_positive() {
            return Err(Error::Degenerate("sequence value is not positive".into()));
        }
        Ok(Rat::one() / (rat(2, 1) * a))
    }

    /// Convert a float sequence on the aligned float body: divide each `beta`
    /// by the norm of the rational normal and snap to small rationals. The
    /// exact feasibility check downstream validates the snap.
    pub fn sequence_from_float(
        &self,
        seq: &CapacitySequence,
        max_denominator: u64,
    ) -> Result<Vec<(usize, Rat)>> {
        seq.entries
            .iter()
            .map(|&(i, b)| {
                if i >= self.facet_count() {
                    return Err(Error::InvalidArgument(format!("facet index {i} out of range")));
                }
                let norm =
                    self.normals[i].iter().map(|x| to_f64(x) * to_f64(x)).sum::<f64>().sqrt();
                Ok((i, rationalize(b / norm, max_denominator)))
            })
            .collect()
    }

    /// Per-index alignment against a float body: each rational normal must be
    /// a positive multiple of the float facet normal.
    pub fn aligned_with(&self, body: &HPolytope, tol: f64) -> bool {
        if body.dim() != self.dim || body.facet_count() != self.facet_count() {
            return false;
        }
        for i in 0..self.facet_count() {
            let norm = self.normals[i].iter().map(|x| to_f64(x) * to_f64(x)).sum::<f64>().sqrt();
            let hf = to_f64(&self.heights[i]) / norm;
            if (hf - body.height(i)).abs() > tol {
                return false;
            }
            for (j, r) in self.normals[i].iter().enumerate() {
                if (to_f64(r) / norm - body.normal(i)[j]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation with denominator at most `max_denominator`
/// (continued fractions).
pub fn rationalize(x: f64, max_denominator: u64) -> Rat {
    if !x.is_finite() {
        return Rat::zero();
    }
    let negative = x < 0.0;
    let mut x = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = x.floor();
        if a > i64::MAX as f64 {
            break;
        }
        let a_int = a as i128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_denominator as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let mut r = Rat::new(BigInt::from(p1), BigInt::from(q1.max(1)));
    if negative {
        r = -r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies;

    #[test]
    fn rationalize_simple() {
        assert_eq!(rationalize(0.25, 1000), rat(1, 4));
        assert_eq!(rationalize(1.0, 1000), rat(1, 1));
        assert_eq!(rationalize(-0.5, 1000), rat(-1, 2));
        assert_eq!(rationalize(2.0 / 3.0, 1000), rat(2, 3));
    }

    #[test]
    fn exact_bodies_align_with_float_library() {
        for (name, dim) in
            [("simplex", 4), ("cube", 4), ("cross-polytope", 4), ("y", 4), ("24-cell", 4)]
        {
            let exact = ExactBody::from_name(name, Some(dim)).unwrap();
            let float = bodies::by_name(name, Some(dim)).unwrap();
            assert!(exact.aligned_with(&float, 1e-12), "{name} misaligned");
        }
    }

    #[test]
    fn y_certificate_is_exact() {
        let y = ExactBody::y_body();
        // (-e3, e1, e3, -e1) with beta = 1: value 2, capacity bound 1/4.
        let entries =
            vec![(6, Rat::one()), (0, Rat::one()), (2, Rat::one()), (4, Rat::one())];
        assert!(y.feasibility(&entries).unwrap().feasible());
        assert_eq!(y.action(&entries).unwrap(), rat(2, 1));
        assert_eq!(y.certify(&entries).unwrap(), rat(1, 4));
    }

    #[test]
    fn infeasible_sequences_are_rejected() {
        let y = ExactBody::y_body();
        let scaled =
            vec![(6, rat(2, 1)), (0, rat(2, 1)), (2, rat(2, 1)), (4, rat(2, 1))];
        assert!(!y.feasibility(&scaled).unwrap().feasible());
        assert!(y.certify(&scaled).is_err());
        let negative = vec![(6, rat(-1, 1)), (0, Rat::one())];
        assert!(!y.feasibility(&negative).unwrap().all_positive);
    }
}
