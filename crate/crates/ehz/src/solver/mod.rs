//! EHZ capacity of polytopes via the combinatorial maximization formula.
//!
//! The capacity of a polytope `K` with unit outer facet normals `n_i` and
//! support values `h_i` is `c(K) = 1 / (2 A*)`, where `A*` is the maximum of
//!
//! ```text
//! Q(seq) = sum_{j < i} beta_i beta_j omega(n_i, n_j)
//! ```
//!
//! over ordered sequences of facet normals with `beta_i >= 0`,
//! `sum beta_i h_i = 1`, and `sum beta_i n_i = 0`. There is always a maximizer
//! in which each facet normal appears at most once, so the search ranges over
//! (subset, cyclic order) pairs; `Q` is invariant under cyclic rotation on the
//! closing-constraint slice.

mod bnb;
mod brute;
mod canonical;
mod fixed_order;

pub use fixed_order::{solve_fixed_order, OrderFamily, OrderSolution};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::polytope::HPolytope;
use crate::symplectic::SymplecticSpace;
use crate::{Error, Result};

/// Ordered sequence of `(facet index, beta)` pairs.
///
/// Serializes as `{"entries": [{"facet": i, "beta": b}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SequenceDto", from = "SequenceDto")]
pub struct CapacitySequence {
    pub entries: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize, Clone)]
struct SequenceEntryDto {
    facet: usize,
    beta: f64,
}

#[derive(Serialize, Deserialize, Clone)]
struct SequenceDto {
    entries: Vec<SequenceEntryDto>,
}

impl From<CapacitySequence> for SequenceDto {
    fn from(seq: CapacitySequence) -> Self {
        SequenceDto {
            entries: seq
                .entries
                .into_iter()
                .map(|(facet, beta)| SequenceEntryDto { facet, beta })
                .collect(),
        }
    }
}

impl From<SequenceDto> for CapacitySequence {
    fn from(dto: SequenceDto) -> Self {
        CapacitySequence {
            entries: dto.entries.into_iter().map(|e| (e.facet, e.beta)).collect(),
        }
    }
}

impl CapacitySequence {
    pub fn new(entries: Vec<(usize, f64)>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.entries.iter().map(|&(i, _)| i).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Drop entries with `beta <= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self::new(self.entries.iter().copied().filter(|&(_, b)| b > tol).collect())
    }

    /// Scale all coefficients by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.entries.iter().map(|&(i, b)| (i, b * s)).collect())
    }
}

/// Violation report attached to feasibility checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// `max_coord |sum beta_i n_i|`.
    pub closing_residual: f64,
    /// `|sum beta_i h_i - 1|`.
    pub normalization_residual: f64,
    pub min_beta: f64,
}

/// One maximizer: a sequence, optionally carrying the degenerate stationary
/// family it belongs to.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Maximizer {
    pub sequence: CapacitySequence,
    pub value: f64,
    /// Sampled members of the stationary family (present iff degenerate).
    pub family_samples: Option<Vec<CapacitySequence>>,
}

/// Search statistics.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub orders_evaluated: u64,
    pub candidates: u64,
}

/// Result of a capacity computation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity: f64,
    /// Optimal value `A*` of the quadratic objective; `capacity = 1/(2 A*)`.
    pub a_star: f64,
    /// Maximizers up to cyclic rotation and Lagrangian swaps.
    pub maximizers: Vec<Maximizer>,
    pub stats: SearchStats,
    /// Whether the search was exhaustive (or closed its bound gap).
    pub certified: bool,
    /// Relative gap between the best bound and the incumbent (0 if certified).
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Brute,
    Bnb,
}

/// Solver configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub engine: Engine,
    /// Cap on the support size; defaults to the facet count.
    pub max_subset_size: Option<usize>,
    /// Node budget for the search.
    pub node_budget: u64,
    /// Relative bound gap at which branch-and-bound stops certified.
    pub target_gap: f64,
    /// Relative tolerance for collecting tied maximizers.
    pub tie_tol: f64,
    /// Translate the Chebyshev center to the origin before solving.
    pub recenter: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Bnb,
            max_subset_size: None,
            node_budget: 200_000_000,
            target_gap: 0.0,
            tie_tol: 1e-9,
            recenter: true,
        }
    }
}

impl SolverConfig {
    pub fn brute() -> Self {
        Self { engine: Engine::Brute, ..Self::default() }
    }

    pub fn bnb() -> Self {
        Self { engine: Engine::Bnb, ..Self::default() }
    }
}

/// Precomputed data shared by the engines.
pub(crate) struct SolveContext {
    pub body: HPolytope,
    /// `omega[(i, j)] = omega(n_i, n_j)`.
    pub omega: DMatrix<f64>,
    pub heights: Vec<f64>,
    pub cfg: SolverConfig,
}

impl SolveContext {
    pub fn new(body: &HPolytope, cfg: &SolverConfig) -> Result<Self> {
        let space = SymplecticSpace::from_dim(body.dim())?;
        let solved_body =
            if cfg.recenter { body.recentered()?.0 } else { body.clone() };
        let k = solved_body.facet_count();
        let mut omega = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    omega[(i, j)] =
                        space.omega_unchecked(solved_body.normal(i), solved_body.normal(j));
                }
            }
        }
        let heights = solved_body.facets().iter().map(|f| f.height).collect();
        Ok(Self { body: solved_body, omega, heights, cfg: cfg.clone() })
    }

    pub fn facet_count(&self) -> usize {
        self.body.facet_count()
    }
}

/// The quadratic objective `Q = sum_{j<i} beta_i beta_j omega(n_i, n_j)` of a
/// sequence, constraints not checked.
pub fn sequence_action(body: &HPolytope, seq: &CapacitySequence) -> Result<f64> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let k = body.facet_count();
    let mut acc = 0.0;
    for (i, &(fi, bi)) in seq.entries.iter().enumerate() {
        if fi >= k {
            return Err(Error::InvalidArgument(format!("facet index {fi} out of range")));
        }
        for &(fj, bj) in &seq.entries[..i] {
            acc += bi * bj * space.omega_unchecked(body.normal(fi), body.normal(fj));
        }
    }
    Ok(acc)
}

/// Check the constraints of `M(K)`: all `beta > 0`, `sum beta h = 1`, and
/// `sum beta n = 0`, within `tol`.
pub fn sequence_feasible(body: &HPolytope, seq: &CapacitySequence, tol: f64) -> Result<FeasibilityReport> {
    let k = body.facet_count();
    let mut closing = DVector::zeros(body.dim());
    let mut norm = 0.0;
    let mut min_beta = f64::INFINITY;
    for &(fi, bi) in &seq.entries {
        if fi >= k {
            return Err(Error::InvalidArgument(format!("facet index {fi} out of range")));
        }
        closing += bi * body.normal(fi);
        norm += bi * body.height(fi);
        min_beta = min_beta.min(bi);
    }
    let closing_residual = closing.amax();
    let normalization_residual = (norm - 1.0).abs();
    Ok(FeasibilityReport {
        feasible: closing_residual <= tol && normalization_residual <= tol && min_beta > 0.0,
        closing_residual,
        normalization_residual,
        min_beta,
    })
}

/// Capacity upper bound from any feasible sequence: `1 / (2 Q)`.
pub fn certify(body: &HPolytope, seq: &CapacitySequence, tol: f64) -> Result<f64> {
    let report = sequence_feasible(body, seq, tol)?;
    if !report.feasible {
        return Err(Error::Infeasible(format!(
            "sequence not in M(K): closing residual {:.3e}, normalization residual {:.3e}, min beta {:.3e}",
            report.closing_residual, report.normalization_residual, report.min_beta
        )));
    }
    let value = sequence_action(body, seq)?;
    if value <= 0.0 {
        return Err(Error::Degenerate(format!(
            "sequence value {value} is not positive; no bound follows"
        )));
    }
    Ok(1.0 / (2.0 * value))
}

/// Compute the capacity with the configured engine.
pub fn capacity(body: &HPolytope, cfg: &SolverConfig) -> Result<CapacityResult> {
    let ctx = SolveContext::new(body, cfg)?;
    match cfg.engine {
        Engine::Brute => brute::run(&ctx),
        Engine::Bnb => bnb::run(&ctx),
    }
}

/// `rho_sys(K) = c(K)^n / (n! vol(K))`.
pub fn systolic_ratio(body: &HPolytope, cfg: &SolverConfig) -> Result<f64> {
    let result = capacity(body, cfg)?;
    systolic_ratio_from(body, result.capacity)
}

/// Systolic ratio from a known capacity value.
pub fn systolic_ratio_from(body: &HPolytope, capacity: f64) -> Result<f64> {
    let n = body.dim() / 2;
    let vol = body.volume()?;
    let mut fact = 1.0;
    for i in 2..=n {
        fact *= i as f64;
    }
    Ok(capacity.powi(n as i32) / (fact * vol))
}

pub(crate) fn assemble_result(
    best: f64,
    maximizers: Vec<Maximizer>,
    stats: SearchStats,
    certified: bool,
    gap: f64,
) -> Result<CapacityResult> {
    if !(best.is_finite() && best > 0.0) {
        return Err(Error::Degenerate(format!(
            "no positive feasible objective value found (best = {best})"
        )));
    }
    Ok(CapacityResult {
        capacity: 1.0 / (2.0 * best),
        a_star: best,
        maximizers,
        stats,
        certified,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies;
    use approx::assert_relative_eq;

    // Y facet indices: e1..e4 = 0..3, -e1..-e4 = 4..7, e_s = 8.
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
    fn sequence_action_examples() {
        let y = bodies::y_body().unwrap();
        let four = CapacitySequence::new(vec![(ME3, 1.0), (E1, 1.0), (E3, 1.0), (ME1, 1.0)]);
        assert_relative_eq!(sequence_action(&y, &four).unwrap(), 2.0, epsilon = 1e-12);

        let five = CapacitySequence::new(vec![
            (ME3, 1.0),
            (ME4, 1.0),
            (ES, 2.0),
            (ME1, 1.0),
            (ME2, 1.0),
        ]);
        assert_relative_eq!(sequence_action(&y, &five).unwrap(), 2.0, epsilon = 1e-12);

        let single = CapacitySequence::new(vec![(E2, 3.0)]);
        assert_relative_eq!(sequence_action(&y, &single).unwrap(), 0.0);
    }

    #[test]
    fn sequence_feasibility_examples() {
        let y = bodies::y_body().unwrap();
        let four = CapacitySequence::new(vec![(ME3, 1.0), (E1, 1.0), (E3, 1.0), (ME1, 1.0)]);
        assert!(sequence_feasible(&y, &four, 1e-9).unwrap().feasible);

        let doubled = four.scaled(2.0);
        let report = sequence_feasible(&y, &doubled, 1e-9).unwrap();
        assert!(!report.feasible);
        assert!(report.normalization_residual > 0.5);

        let negative = CapacitySequence::new(vec![(ME3, -1.0), (E3, 1.0)]);
        assert!(!sequence_feasible(&y, &negative, 1e-9).unwrap().feasible);
    }

    #[test]
    fn certify_examples() {
        let y = bodies::y_body().unwrap();
        let four = CapacitySequence::new(vec![(ME3, 1.0), (E1, 1.0), (E3, 1.0), (ME1, 1.0)]);
        assert_relative_eq!(certify(&y, &four, 1e-9).unwrap(), 0.25, epsilon = 1e-12);

        // A feasible but suboptimal sequence bounds the capacity strictly
        // above 1/4: splitting the mass evenly over both symplectic pairs
        // gives value 1 instead of 2.
        let sub = CapacitySequence::new(vec![
            (ME3, 0.5),
            (E1, 0.5),
            (E3, 0.5),
            (ME1, 0.5),
            (ME4, 0.5),
            (E2, 0.5),
            (E4, 0.5),
            (ME2, 0.5),
        ]);
        assert!(sequence_feasible(&y, &sub, 1e-9).unwrap().feasible);
        let bound = certify(&y, &sub, 1e-9).unwrap();
        assert_relative_eq!(bound, 0.5, epsilon = 1e-12);
        assert!(bound > 0.25 + 1e-6);

        let infeasible = four.scaled(2.0);
        assert!(certify(&y, &infeasible, 1e-9).is_err());
    }

    #[test]
    fn capacity_of_simplex_and_y() {
        let cfg = SolverConfig::brute();
        let s = bodies::standard_simplex(4).unwrap();
        let rs = capacity(&s, &cfg).unwrap();
        assert_relative_eq!(rs.capacity, 0.25, epsilon = 1e-10);
        assert!(rs.certified);

        let y = bodies::y_body().unwrap();
        let ry = capacity(&y, &SolverConfig::bnb()).unwrap();
        assert_relative_eq!(ry.capacity, 0.25, epsilon = 1e-10);
        assert_relative_eq!(ry.a_star, 2.0, epsilon = 1e-10);
        // A degenerate maximizer family must be surfaced with endpoint
        // representatives at b_s = 0 and b_s = 2.
        let samples: Vec<&CapacitySequence> = ry
            .maximizers
            .iter()
            .filter_map(|m| m.family_samples.as_ref())
            .flatten()
            .collect();
        assert!(!samples.is_empty(), "Y should surface a degenerate maximizer family");
        let bs_of = |seq: &CapacitySequence| {
            seq.entries.iter().filter(|&&(i, _)| i == ES).map(|&(_, b)| b).sum::<f64>()
        };
        assert!(samples.iter().any(|s| bs_of(s) <= 1e-7));
        assert!(samples.iter().any(|s| (bs_of(s) - 2.0).abs() <= 1e-7));
        // Representatives at both endpoints also appear as maximizers in
        // their own right.
        assert!(ry
            .maximizers
            .iter()
            .any(|m| m.sequence.entries.len() == 4 && bs_of(&m.sequence) == 0.0));
        assert!(ry
            .maximizers
            .iter()
            .any(|m| (bs_of(&m.sequence) - 2.0).abs() <= 1e-9));
    }

    #[test]
    fn budget_refusal_points_to_bnb() {
        let x = bodies::cell24().unwrap();
        let cfg = SolverConfig { node_budget: 10_000, ..SolverConfig::brute() };
        match capacity(&x, &cfg) {
            Err(crate::Error::BudgetExceeded(msg)) => assert!(msg.contains("bnb")),
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn systolic_ratios() {
        let s = bodies::standard_simplex(4).unwrap();
        assert_relative_eq!(
            systolic_ratio(&s, &SolverConfig::bnb()).unwrap(),
            0.75,
            epsilon = 1e-10
        );
        let y = bodies::y_body().unwrap();
        assert_relative_eq!(
            systolic_ratio(&y, &SolverConfig::bnb()).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn engines_agree_on_y() {
        let y = bodies::y_body().unwrap();
        let rb = capacity(&y, &SolverConfig::brute()).unwrap();
        let rn = capacity(&y, &SolverConfig::bnb()).unwrap();
        assert_relative_eq!(rb.a_star, rn.a_star, max_relative = 1e-10);
    }
}
