//! Thin dense wrappers over the `microlp` simplex solver.
//!
//! Every LP in this crate is tiny (tens of variables, a handful of rows), so
//! the interface below favors clarity over sparsity.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;

use crate::{Error, Result};

/// One linear constraint `coeffs . x (op) rhs`.
#[derive(Clone, Debug)]
pub struct LinCon {
    pub coeffs: Vec<f64>,
    pub op: ComparisonOp,
    pub rhs: f64,
}

impl LinCon {
    pub fn eq(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, op: ComparisonOp::Eq, rhs }
    }
    pub fn le(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, op: ComparisonOp::Le, rhs }
    }
    pub fn ge(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, op: ComparisonOp::Ge, rhs }
    }
}

/// Maximize (or minimize) `objective . x` under `constraints` and per-variable
/// bounds. Returns the optimum and the optimizer.
pub fn solve_lp(
    maximize: bool,
    objective: &[f64],
    constraints: &[LinCon],
    bounds: &[(f64, f64)],
) -> Result<(f64, Vec<f64>)> {
    let nvars = objective.len();
    assert_eq!(bounds.len(), nvars);
    let direction =
        if maximize { OptimizationDirection::Maximize } else { OptimizationDirection::Minimize };
    let mut problem = Problem::new(direction);
    let vars: Vec<_> =
        (0..nvars).map(|j| problem.add_var(objective[j], (bounds[j].0, bounds[j].1))).collect();
    for con in constraints {
        assert_eq!(con.coeffs.len(), nvars);
        let terms: Vec<_> =
            vars.iter().zip(&con.coeffs).map(|(&v, &c)| (v, c)).filter(|&(_, c)| c != 0.0).collect();
        problem.add_constraint(&terms, con.op, con.rhs);
    }
    match problem.solve() {
        Ok(sol) => {
            let x = vars.iter().map(|&v| sol[v]).collect();
            Ok((sol.objective(), x))
        }
        Err(microlp::Error::Infeasible) => Err(Error::Infeasible("LP infeasible".into())),
        Err(microlp::Error::Unbounded) => Err(Error::Unbounded("LP unbounded".into())),
        Err(e) => Err(Error::Degenerate(format!("LP solver failure: {e}"))),
    }
}

/// Feasibility of `constraints` with the given bounds.
pub fn lp_feasible(constraints: &[LinCon], bounds: &[(f64, f64)]) -> bool {
    let nvars = bounds.len();
    solve_lp(false, &vec![0.0; nvars], constraints, bounds).is_ok()
}

/// Chebyshev center of `{x : <n_i, x> <= h_i}`: the deepest interior point and
/// its distance to the nearest facet. Fails on empty or unbounded input.
pub fn chebyshev_center(normals: &[DVector<f64>], heights: &[f64]) -> Result<(DVector<f64>, f64)> {
    let dim = normals.first().map_or(0, |n| n.len());
    let nvars = dim + 1; // (x, r)
    let mut cons = Vec::with_capacity(normals.len());
    for (n, &h) in normals.iter().zip(heights) {
        let mut coeffs = n.iter().copied().collect::<Vec<_>>();
        coeffs.push(n.norm());
        cons.push(LinCon::le(coeffs, h));
    }
    let mut objective = vec![0.0; nvars];
    objective[dim] = 1.0;
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); nvars];
    bounds[dim] = (0.0, f64::INFINITY);
    let (r, x) = solve_lp(true, &objective, &cons, &bounds)
        .map_err(|_| Error::Degenerate("no Chebyshev center: body empty or unbounded".into()))?;
    if !r.is_finite() {
        return Err(Error::Unbounded("Chebyshev radius unbounded".into()));
    }
    Ok((DVector::from_vec(x[..dim].to_vec()), r))
}

/// Whether `dir` lies in the conic hull of `generators` (within `tol` per
/// coordinate).
pub fn in_cone(dir: &DVector<f64>, generators: &[DVector<f64>], tol: f64) -> bool {
    if generators.is_empty() {
        return dir.amax() <= tol;
    }
    let dim = dir.len();
    let k = generators.len();
    // lambda >= 0 and slack variables s with |s| <= tol absorbing roundoff:
    // sum lambda_i g_i + s = dir.
    let nvars = k + dim;
    let mut cons = Vec::with_capacity(dim);
    for row in 0..dim {
        let mut coeffs = vec![0.0; nvars];
        for (i, g) in generators.iter().enumerate() {
            coeffs[i] = g[row];
        }
        coeffs[k + row] = 1.0;
        cons.push(LinCon::eq(coeffs, dir[row]));
    }
    let mut bounds = vec![(0.0, f64::INFINITY); k];
    bounds.extend(std::iter::repeat((-tol, tol)).take(dim));
    lp_feasible(&cons, &bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_center_of_box() {
        // [0,1] x [0,2]
        let normals = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![-1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![0.0, -1.0]),
        ];
        let heights = vec![1.0, 0.0, 2.0, 0.0];
        let (c, r) = chebyshev_center(&normals, &heights).unwrap();
        assert!((r - 0.5).abs() < 1e-9);
        assert!((c[0] - 0.5).abs() < 1e-9);
        assert!(c[1] > 0.5 - 1e-9 && c[1] < 1.5 + 1e-9);
    }

    #[test]
    fn cone_membership() {
        let g = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![1.0, 1.0])];
        assert!(in_cone(&DVector::from_vec(vec![2.0, 0.5]), &g, 1e-9));
        assert!(!in_cone(&DVector::from_vec(vec![-1.0, 0.0]), &g, 1e-9));
        assert!(!in_cone(&DVector::from_vec(vec![0.0, -1.0]), &g, 1e-9));
    }
}
