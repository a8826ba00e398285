//! Linear symplectic algebra on `R^{2n}` with a fixed coordinate convention.
//!
//! Coordinates are ordered `(q_1..q_n, p_1..p_n)`. The symplectic form is
//! `omega(x, y) = sum_i (x_{n+i} y_i - x_i y_{n+i})`, i.e. `omega = sum dp_i ^ dq_i`
//! with `omega(e_{n+i}, e_i) = +1`, and the complex structure is
//! `J(q, p) = (p, -q)`, so that `<J x, y> = omega(x, y)` and `J^2 = -I`.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// The phase space `R^{2n}` with the fixed coordinate convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticSpace {
    n: usize,
}

/// Classification of a linear subspace `V` against its omega-orthogonal
/// complement `V^omega`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubspaceClass {
    /// `V` is contained in `V^omega`.
    Isotropic,
    /// `V^omega` is contained in `V`.
    Coisotropic,
    /// Both inclusions hold; `dim V = n`.
    Lagrangian,
    /// `V` meets `V^omega` only at the origin.
    Symplectic,
    /// None of the above.
    Mixed,
}

impl SubspaceClass {
    /// Whether the class contains its omega-complement (Lagrangian counts).
    pub fn is_coisotropic(self) -> bool {
        matches!(self, SubspaceClass::Coisotropic | SubspaceClass::Lagrangian)
    }

    /// Whether the class is contained in its omega-complement (Lagrangian counts).
    pub fn is_isotropic(self) -> bool {
        matches!(self, SubspaceClass::Isotropic | SubspaceClass::Lagrangian)
    }
}

impl SymplecticSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("half-dimension must be positive".into()));
        }
        Ok(Self { n })
    }

    /// Construct from the ambient dimension `2n`.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "ambient dimension must be a positive even number, got {dim}"
            )));
        }
        Self::new(dim / 2)
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// The symplectic form `omega(x, y)`.
    pub fn omega(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.omega_unchecked(x, y))
    }

    /// `omega` without the dimension check, for hot loops.
    #[inline]
    pub fn omega_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            acc += x[n + i] * y[i] - x[i] * y[n + i];
        }
        acc
    }

    /// Apply `J(q, p) = (p, -q)`; satisfies `<J x, y> = omega(x, y)`.
    pub fn j_apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x)?;
        let n = self.n;
        let mut out = DVector::zeros(2 * n);
        for i in 0..n {
            out[i] = x[n + i];
            out[n + i] = -x[i];
        }
        Ok(out)
    }

    /// The inverse `J^{-1} = -J`.
    pub fn j_inv_apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(-self.j_apply(x)?)
    }

    /// Gram matrix `G_{ab} = omega(basis_a, basis_b)`.
    pub fn omega_gram(&self, basis: &[DVector<f64>]) -> Result<DMatrix<f64>> {
        for b in basis {
            self.check(b)?;
        }
        let m = basis.len();
        let mut g = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in (a + 1)..m {
                let w = self.omega_unchecked(&basis[a], &basis[b]);
                g[(a, b)] = w;
                g[(b, a)] = -w;
            }
        }
        Ok(g)
    }

    /// Orthonormal basis of the omega-orthogonal complement of `span(basis)`.
    ///
    /// `V^omega = { y : omega(b, y) = 0 for all b }`, which equals the kernel
    /// of the matrix with rows `(J b)^T`.
    pub fn omega_complement(&self, basis: &[DVector<f64>], tol: f64) -> Result<Vec<DVector<f64>>> {
        let dim = self.dim();
        let m = basis.len();
        let mut rows = DMatrix::zeros(m, dim);
        for (a, b) in basis.iter().enumerate() {
            let jb = self.j_apply(b)?;
            rows.row_mut(a).copy_from(&jb.transpose());
        }
        Ok(kernel_basis(&rows, tol))
    }

    /// Classify `span(basis)`; the basis must be linearly independent.
    pub fn classify_subspace(&self, basis: &[DVector<f64>]) -> Result<SubspaceClass> {
        if basis.is_empty() {
            return Err(Error::InvalidArgument("empty basis".into()));
        }
        for b in basis {
            self.check(b)?;
        }
        let tol = 1e-9;
        let dim = self.dim();
        let m = basis.len();
        let bmat = basis_matrix(basis);
        if rank(&bmat, tol) < m {
            return Err(Error::Degenerate("basis vectors are linearly dependent".into()));
        }

        let comp = self.omega_complement(basis, tol)?;
        let k = comp.len();

        // V subset V^omega  <=>  the omega-Gram of V vanishes.
        let gram = self.omega_gram(basis)?;
        let isotropic = gram.amax() <= tol * scale_of(basis);

        // V^omega subset V  <=>  rank [B | W] = dim V.
        let mut joint = DMatrix::zeros(dim, m + k);
        joint.view_mut((0, 0), (dim, m)).copy_from(&bmat);
        for (j, w) in comp.iter().enumerate() {
            joint.column_mut(m + j).copy_from(w);
        }
        let joint_rank = rank(&joint, tol);
        let coisotropic = joint_rank == m;
        let transversal = joint_rank == m + k;

        Ok(match (isotropic, coisotropic) {
            (true, true) => SubspaceClass::Lagrangian,
            (true, false) => SubspaceClass::Isotropic,
            // V and V^omega transversal: the form restricts nondegenerately.
            // This takes precedence for the full space, which is trivially
            // also coisotropic.
            (false, _) if transversal => SubspaceClass::Symplectic,
            (false, true) => SubspaceClass::Coisotropic,
            _ => SubspaceClass::Mixed,
        })
    }
}

/// Stack vectors as the columns of a matrix.
pub fn basis_matrix(vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let dim = vectors.first().map_or(0, |v| v.len());
    let mut m = DMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.column_mut(j).copy_from(v);
    }
    m
}

/// Numerical rank via singular values.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= tol {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > tol * smax.max(1.0)).count()
}

/// Orthonormal basis of the kernel of `m` (right null space).
pub fn kernel_basis(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let ncols = m.ncols();
    if m.nrows() == 0 {
        return (0..ncols)
            .map(|j| DVector::from_fn(ncols, |i, _| if i == j { 1.0 } else { 0.0 }))
            .collect();
    }
    // nalgebra computes the thin SVD; pad with zero rows so v_t spans all of
    // R^{ncols} and the full null space is visible.
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.max().max(1.0);
    let r = svd.singular_values.iter().filter(|&&s| s > tol * smax).count();
    (r..v_t.nrows()).map(|i| v_t.row(i).transpose()).collect()
}

fn scale_of(basis: &[DVector<f64>]) -> f64 {
    basis.iter().map(|b| b.amax()).fold(1.0_f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e(dim: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn omega_on_basis_vectors() {
        let sp = SymplecticSpace::new(2).unwrap();
        let e1 = e(4, 0);
        let e3 = e(4, 2);
        assert_eq!(sp.omega(&e1, &e1).unwrap(), 0.0);
        assert_eq!(sp.omega(&e3, &e1).unwrap(), 1.0);
        assert_eq!(sp.omega(&e1, &e3).unwrap(), -1.0);
    }

    #[test]
    fn j_matches_convention() {
        let sp = SymplecticSpace::new(2).unwrap();
        let e1 = e(4, 0);
        let e3 = e(4, 2);
        assert_eq!(sp.j_apply(&e3).unwrap(), e1);
        assert_eq!(sp.j_apply(&sp.j_apply(&e1).unwrap()).unwrap(), -&e1);
        assert_eq!(sp.j_apply(&(-&e1)).unwrap(), e3);
    }

    #[test]
    fn j_reproduces_omega() {
        let sp = SymplecticSpace::new(3).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, 0.0, -1.0]);
        let y = DVector::from_vec(vec![0.3, 1.0, -1.5, 2.0, -0.7, 0.25]);
        let jx = sp.j_apply(&x).unwrap();
        assert_relative_eq!(jx.dot(&y), sp.omega(&x, &y).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn classify_examples() {
        let sp = SymplecticSpace::new(2).unwrap();
        let (e1, e2, e3, e4) = (e(4, 0), e(4, 1), e(4, 2), e(4, 3));
        assert_eq!(
            sp.classify_subspace(&[e3.clone(), e4.clone()]).unwrap(),
            SubspaceClass::Lagrangian
        );
        assert_eq!(
            sp.classify_subspace(&[e1.clone(), e3.clone()]).unwrap(),
            SubspaceClass::Symplectic
        );
        assert_eq!(sp.classify_subspace(&[e1.clone()]).unwrap(), SubspaceClass::Isotropic);
        assert_eq!(
            sp.classify_subspace(&[e1.clone(), e2.clone(), e3.clone()]).unwrap(),
            SubspaceClass::Coisotropic
        );
        assert_eq!(
            sp.classify_subspace(&[e1.clone(), e2, e3, e4]).unwrap(),
            SubspaceClass::Symplectic
        );
        // A 2-plane that is neither isotropic, coisotropic, nor symplectic
        // does not exist in R^4; mixed spaces appear first in R^6.
        let sp6 = SymplecticSpace::new(3).unwrap();
        let mixed = sp6
            .classify_subspace(&[e(6, 0), e(6, 3), e(6, 1)])
            .unwrap();
        assert_eq!(mixed, SubspaceClass::Mixed);
    }

    #[test]
    fn classify_rejects_dependent_basis() {
        let sp = SymplecticSpace::new(2).unwrap();
        let e1 = e(4, 0);
        let two_e1 = 2.0 * &e1;
        assert!(sp.classify_subspace(&[e1, two_e1]).is_err());
    }

    #[test]
    fn classify_invariant_under_change_of_basis() {
        let sp = SymplecticSpace::new(2).unwrap();
        let b1 = vec![e(4, 2), e(4, 3)];
        let b2 = vec![&b1[0] + &b1[1], &b1[0] - 2.0 * &b1[1]];
        assert_eq!(sp.classify_subspace(&b1).unwrap(), sp.classify_subspace(&b2).unwrap());
    }
}
