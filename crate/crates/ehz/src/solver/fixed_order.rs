//! Stationary-point solve for one ordered support.
//!
//! For a fixed order `(o_1, ..., o_m)` the objective is `Q = 1/2 beta^T S beta`
//! with `S_{ab} = omega(n_{o_max}, n_{o_min})`, maximized over the affine
//! slice `{sum beta h = 1, sum beta n = 0, beta >= 0}`. Maxima with some
//! `beta = 0` belong to smaller supports, so per order it suffices to report
//! (a) the pinned solution when the equality constraints determine `beta`
//! (the vertex case), and (b) stationary points of the equality-constrained
//! KKT system with all `beta > 0`. A singular KKT system yields a stationary
//! family, which is returned with its parametrization and sampled members.

use nalgebra::{DMatrix, DVector};

use super::{CapacitySequence, SolveContext, SolverConfig};
use crate::lp;
use crate::polytope::HPolytope;
use crate::{Error, Result};

/// Entries with `beta` below this are treated as absent: stationary solutions
/// carry KKT roundoff around 1e-10, and a coordinate at that scale means the
/// true solution sits on the boundary of the positive orthant (the reduced
/// support is enumerated separately).
pub(crate) const BETA_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-8;

/// A degenerate stationary family `beta(theta) = center + D theta`.
#[derive(Clone, Debug)]
pub struct OrderFamily {
    /// Orthonormal directions in beta-space (columns of `D`).
    pub directions: Vec<DVector<f64>>,
    /// Sampled members: interior center first, then per-direction extremes.
    pub samples: Vec<(DVector<f64>, f64)>,
}

/// One candidate for a fixed order.
#[derive(Clone, Debug)]
pub struct OrderSolution {
    /// Facet indices in order.
    pub order: Vec<usize>,
    /// Coefficients aligned with `order`.
    pub beta: DVector<f64>,
    pub value: f64,
    /// True when the stationary set is a family rather than a point.
    pub degenerate: bool,
    pub family: Option<OrderFamily>,
}

impl OrderSolution {
    pub fn sequence(&self) -> CapacitySequence {
        CapacitySequence::new(
            self.order.iter().copied().zip(self.beta.iter().copied()).collect(),
        )
        .pruned(BETA_TOL)
    }

    /// Family samples as pruned sequences.
    pub fn family_sequences(&self) -> Option<Vec<CapacitySequence>> {
        self.family.as_ref().map(|fam| {
            fam.samples
                .iter()
                .map(|(beta, _)| {
                    CapacitySequence::new(
                        self.order.iter().copied().zip(beta.iter().copied()).collect(),
                    )
                    .pruned(BETA_TOL)
                })
                .collect()
        })
    }
}

/// Objective matrix `S` for an order.
pub(crate) fn order_matrix(ctx: &SolveContext, order: &[usize]) -> DMatrix<f64> {
    let m = order.len();
    let mut s = DMatrix::zeros(m, m);
    for a in 1..m {
        for b in 0..a {
            let w = ctx.omega[(order[a], order[b])];
            s[(a, b)] = w;
            s[(b, a)] = w;
        }
    }
    s
}

/// Constraint matrix: first row the heights, then the normal coordinates.
fn constraint_matrix(ctx: &SolveContext, order: &[usize]) -> DMatrix<f64> {
    let dim = ctx.body.dim();
    let m = order.len();
    let mut a = DMatrix::zeros(dim + 1, m);
    for (col, &fi) in order.iter().enumerate() {
        a[(0, col)] = ctx.heights[fi];
        for row in 0..dim {
            a[(row + 1, col)] = ctx.body.normal(fi)[row];
        }
    }
    a
}

pub(crate) fn value_of(s: &DMatrix<f64>, beta: &DVector<f64>) -> f64 {
    0.5 * (beta.transpose() * s * beta)[(0, 0)]
}

/// Candidates for a single ordered support (no sub-orders).
pub(crate) fn candidates_for_order(ctx: &SolveContext, order: &[usize]) -> Vec<OrderSolution> {
    let m = order.len();
    if m < 2 {
        return Vec::new();
    }
    let a = constraint_matrix(ctx, order);
    let nrows = a.nrows();
    let s = order_matrix(ctx, order);
    let mut rhs_a = DVector::zeros(nrows);
    rhs_a[0] = 1.0;

    let a_rank = a.rank(1e-9);
    if a_rank == m {
        // Vertex case: the constraints pin beta.
        let svd = a.clone().svd(true, true);
        if let Ok(beta) = svd.solve(&rhs_a, 1e-12) {
            if (&a * &beta - &rhs_a).amax() <= RESIDUAL_TOL
                && beta.iter().all(|&b| b > BETA_TOL)
            {
                let value = value_of(&s, &beta);
                return vec![OrderSolution {
                    order: order.to_vec(),
                    beta,
                    value,
                    degenerate: false,
                    family: None,
                }];
            }
        }
        return Vec::new();
    }

    // Interior stationary points: S beta = lambda h + N^T mu on the slice.
    let size = m + nrows;
    let mut kkt = DMatrix::zeros(size, size);
    kkt.view_mut((0, 0), (m, m)).copy_from(&s);
    kkt.view_mut((0, m), (m, nrows)).copy_from(&a.transpose());
    kkt.view_mut((m, 0), (nrows, m)).copy_from(&a);
    let mut rhs = DVector::zeros(size);
    rhs[m] = 1.0;

    // Fast path: a well-conditioned KKT system pins the stationary point. A
    // tiny pivot ratio means the stationary set is (numerically) a family and
    // the LU solution would be an arbitrary point of it, so fall through.
    let lu = kkt.clone().full_piv_lu();
    let pivots: Vec<f64> = (0..size).map(|i| lu.u()[(i, i)].abs()).collect();
    let pivot_max = pivots.iter().cloned().fold(0.0, f64::max);
    let well_conditioned =
        pivot_max > 0.0 && pivots.iter().all(|&p| p > 1e-11 * pivot_max);
    if well_conditioned {
        if let Some(x) = lu.solve(&rhs) {
            let beta = x.rows(0, m).clone_owned();
            if (&a * &beta - &rhs_a).amax() <= RESIDUAL_TOL && beta.iter().all(|&b| b > BETA_TOL) {
                let value = value_of(&s, &beta);
                return vec![OrderSolution {
                    order: order.to_vec(),
                    beta,
                    value,
                    degenerate: false,
                    family: None,
                }];
            }
        }
        return Vec::new();
    }

    // Singular KKT system: parametrize the stationary family.
    let svd = kkt.clone().svd(true, true);
    let x = match svd.solve(&rhs, 1e-10) {
        Ok(x) => x,
        Err(_) => return Vec::new(),
    };
    if (&kkt * &x - &rhs).amax() > RESIDUAL_TOL {
        return Vec::new(); // inconsistent: no interior stationary point
    }
    let center0 = x.rows(0, m).clone_owned();

    // Null directions restricted to beta-space.
    let null = crate::symplectic::kernel_basis(&kkt, 1e-10);
    let beta_dirs: Vec<DVector<f64>> = null
        .iter()
        .map(|v| v.rows(0, m).clone_owned())
        .filter(|d| d.amax() > 1e-9)
        .collect();
    if beta_dirs.is_empty() {
        if center0.iter().all(|&b| b > BETA_TOL) {
            let value = value_of(&s, &center0);
            return vec![OrderSolution {
                order: order.to_vec(),
                beta: center0,
                value,
                degenerate: false,
                family: None,
            }];
        }
        return Vec::new();
    }
    let dirs = orthonormalize(&beta_dirs);

    // Deepest nonnegative member of the family (Chebyshev-style LP in theta).
    let p = dirs.len();
    let mut cons = Vec::with_capacity(m);
    for i in 0..m {
        let mut coeffs: Vec<f64> = dirs.iter().map(|d| d[i]).collect();
        coeffs.push(-1.0); // -t
        cons.push(lp::LinCon::ge(coeffs, -center0[i]));
    }
    let mut objective = vec![0.0; p + 1];
    objective[p] = 1.0;
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); p + 1];
    // The family is compact in beta, so theta is bounded; still, guard the LP.
    bounds[p] = (f64::NEG_INFINITY, 1e6);
    let (depth, theta) = match lp::solve_lp(true, &objective, &cons, &bounds) {
        Ok(r) => r,
        Err(_) => return Vec::new(),
    };
    if depth <= BETA_TOL {
        return Vec::new(); // no interior member: reduced supports cover this
    }
    let mut center = center0.clone();
    for (l, d) in dirs.iter().enumerate() {
        center += theta[l] * d;
    }

    // Per-direction extremes from the center.
    let mut samples = vec![(center.clone(), value_of(&s, &center))];
    for d in &dirs {
        for sign in [1.0, -1.0] {
            let dir = d * sign;
            let mut tmax = f64::INFINITY;
            for i in 0..m {
                if dir[i] < -1e-12 {
                    tmax = tmax.min(center[i] / (-dir[i]));
                }
            }
            if tmax.is_finite() && tmax > 1e-12 {
                let mut endpoint = &center + tmax * &dir;
                for b in endpoint.iter_mut() {
                    if b.abs() <= BETA_TOL {
                        *b = 0.0;
                    }
                }
                let val = value_of(&s, &endpoint);
                samples.push((endpoint, val));
            }
        }
    }
    let value = samples[0].1;
    vec![OrderSolution {
        order: order.to_vec(),
        beta: center,
        value,
        degenerate: true,
        family: Some(OrderFamily { directions: dirs, samples }),
    }]
}

fn orthonormalize(vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            let proj = u.dot(&w);
            w -= proj * u;
        }
        let n = w.norm();
        if n > 1e-9 {
            out.push(w / n);
        }
    }
    out
}

/// Solve one order together with all of its subsequences.
///
/// The returned candidates cover every support contained in `order` with the
/// induced sub-order, sorted by value (descending). Stationary families are
/// flagged degenerate and carry their sampled members.
pub fn solve_fixed_order(
    body: &HPolytope,
    order: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<OrderSolution>> {
    let m = order.len();
    if m < 2 {
        return Err(Error::InvalidArgument("order needs at least 2 entries".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in order {
        if i >= body.facet_count() {
            return Err(Error::InvalidArgument(format!("facet index {i} out of range")));
        }
        if !seen.insert(i) {
            return Err(Error::InvalidArgument("order contains repeated facets".into()));
        }
    }
    if m > 16 {
        return Err(Error::BudgetExceeded(
            "fixed-order sweep enumerates subsequences; capped at 16 entries".into(),
        ));
    }
    let ctx = SolveContext::new(body, cfg)?;
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        if (mask.count_ones() as usize) < 2 {
            continue;
        }
        let sub: Vec<usize> =
            (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| order[i]).collect();
        out.extend(candidates_for_order(&ctx, &sub));
    }
    out.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies;
    use crate::solver::SolverConfig;
    use approx::assert_relative_eq;

    /// Facet indices of Y: e1..e4 = 0..3, -e1..-e4 = 4..7, e_s = 8.
    const E1: usize = 0;
    const E2: usize = 1;
    const E3: usize = 2;
    const E4: usize = 3;
    const ME1: usize = 4;
    const ME2: usize = 5;
    const ME3: usize = 6;
    const ME4: usize = 7;
    const ES: usize = 8;

    #[test]
    fn y_four_cycle_is_pinned_at_ones() {
        let y = bodies::y_body().unwrap();
        let cfg = SolverConfig::default();
        let sols = solve_fixed_order(&y, &[ME3, E1, E3, ME1], &cfg).unwrap();
        let top = &sols[0];
        assert_relative_eq!(top.value, 2.0, epsilon = 1e-9);
        assert_eq!(top.order, vec![ME3, E1, E3, ME1]);
        for &b in top.beta.iter() {
            assert_relative_eq!(b, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn y_nine_order_surfaces_the_family() {
        let y = bodies::y_body().unwrap();
        let cfg = SolverConfig::default();
        let order = [ME3, E1, ME4, E2, ES, E3, ME1, E4, ME2];
        let sols = solve_fixed_order(&y, &order, &cfg).unwrap();
        assert_relative_eq!(sols[0].value, 2.0, epsilon = 1e-9);
        // A degenerate one-parameter family at value 2 must be among the
        // candidates, with endpoint samples at b_s = 0 and b_s = 2.
        let family = sols
            .iter()
            .find(|s| s.degenerate && (s.value - 2.0).abs() <= 1e-9)
            .expect("expected a degenerate maximizing family");
        let fam = family.family.as_ref().unwrap();
        assert_eq!(fam.directions.len(), 1);
        for (_, v) in &fam.samples {
            assert_relative_eq!(*v, 2.0, epsilon = 1e-8);
        }
        let es_pos = family.order.iter().position(|&i| i == ES).unwrap();
        let bs_values: Vec<f64> = fam.samples.iter().map(|(b, _)| b[es_pos]).collect();
        assert!(bs_values.iter().any(|&b| b.abs() <= 1e-8), "b_s = 0 endpoint");
        assert!(bs_values.iter().any(|&b| (b - 2.0).abs() <= 1e-8), "b_s = 2 endpoint");
    }

    #[test]
    fn unit_square_order_value() {
        let sq = bodies::cube(2, 1.0).unwrap();
        // Facet order of the box: e1, e2, -e1, -e2.
        let cfg = SolverConfig::default();
        let sols = solve_fixed_order(&sq, &[0, 1, 2, 3], &cfg).unwrap();
        assert_relative_eq!(sols[0].value, 0.5, epsilon = 1e-10);
    }
}
