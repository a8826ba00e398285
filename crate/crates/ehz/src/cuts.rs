//! Hyperplane cuts, additivity defects, sweeps, and combinatorial cuts.
//!
//! A hyperplane `{<x, v> = s}` cuts `K` into `K1 = K cap {<x, v> >= s}` (which
//! gains the facet normal `-v`) and `K2 = K cap {<x, v> <= s}` (which gains
//! `+v`). The additivity defect is `c(K1) + c(K2) - c(K) >= 0`.
//!
//! A combinatorial cut for `(v, t)`, `t = h_K(v) - s`, is a maximizing
//! sequence of `K` together with a split index `m` such that the prefix
//! normals are facets of `K1`, the prefix sums to `c v` with `c > 0`, and `c`
//! matches
//!
//! ```text
//! c = (sum_{i<=m} beta_i h_i - 2 c(K) A1) / (h_K(v) - t),
//! A1 = sum_{i<j<=m} beta_i beta_j omega(n_i, n_j).
//! ```
//!
//! Existence is equivalent to additivity of the cut. The finder exploits the
//! constructive direction of that equivalence: maximizing sequences of the two
//! pieces that use the cut facet are spliced, rescaled, and verified against
//! the definition, so absence of a verified splice certifies (numerically)
//! that the cut is not additive.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::polytope::{Facet, HPolytope};
use crate::solver::{
    self, CapacityResult, CapacitySequence, SolverConfig,
};
use crate::symplectic::{rank, SymplecticSpace};
use crate::{Error, Result};

/// Relative tolerance for the coefficient match in the defining equation.
pub const C_MATCH_TOL: f64 = 1e-7;
/// Defect threshold below which a cut counts as additive.
pub const ADDITIVE_TOL: f64 = 1e-7;

/// A hyperplane cut `{<x, v> = level}` with unit normal `v`.
#[derive(Clone, Debug)]
pub struct CutSpec {
    pub v: DVector<f64>,
    pub level: f64,
}

impl CutSpec {
    pub fn new(v: DVector<f64>, level: f64) -> Result<Self> {
        let norm = v.norm();
        if norm <= 1e-12 {
            return Err(Error::InvalidArgument("zero cut normal".into()));
        }
        Ok(Self { v: v / norm, level: level / norm })
    }

    /// Cut at depth `t` below the support value: `level = h_K(v) - t`.
    pub fn from_depth(body: &HPolytope, v: DVector<f64>, t: f64) -> Result<Self> {
        let norm = v.norm();
        if norm <= 1e-12 {
            return Err(Error::InvalidArgument("zero cut normal".into()));
        }
        let unit = v / norm;
        let h = body.support(&unit)?;
        Self::new(unit, h - t)
    }

    pub fn depth(&self, body: &HPolytope) -> Result<f64> {
        Ok(body.support(&self.v)? - self.level)
    }
}

/// The two pieces of a cut, with facet index maps back to the parent body.
#[derive(Clone, Debug)]
pub struct CutPieces {
    /// `{<x, v> >= level}` side; gains the facet `-v`.
    pub k1: HPolytope,
    /// `{<x, v> <= level}` side; gains the facet `+v`.
    pub k2: HPolytope,
    /// Per k1-facet: the parent facet index, or None for the cut facet.
    pub k1_from_parent: Vec<Option<usize>>,
    pub k2_from_parent: Vec<Option<usize>>,
    pub k1_cut_facet: usize,
    pub k2_cut_facet: usize,
}

/// Capacities of the parent and the pieces of one cut.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutAnalysis {
    pub c_k: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c1 + c2 - c_k` (tiny negatives are reporting noise, not violations).
    pub defect: f64,
}

/// Cut a body along a hyperplane; geometry only.
pub fn cut(body: &HPolytope, spec: &CutSpec) -> Result<CutPieces> {
    let h_plus = body.support(&spec.v)?;
    let h_minus = body.support(&(-&spec.v))?;
    let margin = 1e-10 * h_plus.abs().max(h_minus.abs()).max(1.0);
    if spec.level >= h_plus - margin || spec.level <= -h_minus + margin {
        return Err(Error::InvalidArgument(format!(
            "cut level {} outside the open interval ({}, {})",
            spec.level, -h_minus, h_plus
        )));
    }
    let (k1, k1_from_parent, k1_cut_facet) =
        build_piece(body, -&spec.v, -spec.level)?;
    let (k2, k2_from_parent, k2_cut_facet) = build_piece(body, spec.v.clone(), spec.level)?;
    Ok(CutPieces { k1, k2, k1_from_parent, k2_from_parent, k1_cut_facet, k2_cut_facet })
}

/// Intersect with `{<x, n> <= h}`, prune redundant facets, and keep the map
/// back to parent facet indices.
fn build_piece(
    body: &HPolytope,
    cut_normal: DVector<f64>,
    cut_height: f64,
) -> Result<(HPolytope, Vec<Option<usize>>, usize)> {
    let dim = body.dim();
    // The cut plane is strictly interior, so it always undercuts a parallel
    // parent facet; such a facet is simply superseded.
    let mut raw: Vec<(Facet, Option<usize>)> = Vec::with_capacity(body.facet_count() + 1);
    for (i, f) in body.facets().iter().enumerate() {
        if (&f.normal - &cut_normal).amax() <= 1e-9 {
            continue;
        }
        raw.push((f.clone(), Some(i)));
    }
    raw.push((Facet { normal: cut_normal, height: cut_height }, None));

    let unpruned = HPolytope::new(
        dim,
        raw.iter().map(|(f, _)| (f.normal.clone(), f.height)).collect(),
    )?;
    let verts = unpruned.vertices()?;

    let mut kept: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut map = Vec::new();
    let mut cut_idx = None;
    for (f, parent) in &raw {
        let active: Vec<&DVector<f64>> = verts
            .vertices()
            .iter()
            .filter(|v| (f.normal.dot(v) - f.height).abs() <= 1e-7)
            .collect();
        if active.len() < dim {
            continue;
        }
        let mut diffs = nalgebra::DMatrix::zeros(dim, active.len() - 1);
        for (j, v) in active[1..].iter().enumerate() {
            diffs.column_mut(j).copy_from(&(*v - active[0]));
        }
        if rank(&diffs, 1e-7) != dim - 1 {
            continue;
        }
        if parent.is_none() {
            cut_idx = Some(kept.len());
        }
        kept.push((f.normal.clone(), f.height));
        map.push(*parent);
    }
    let cut_idx = cut_idx
        .ok_or_else(|| Error::Degenerate("cut facet does not support a facet of the piece".into()))?;
    Ok((HPolytope::new(dim, kept)?, map, cut_idx))
}

/// Cut, solve all three capacities, and report the defect.
pub fn additivity_defect(
    body: &HPolytope,
    spec: &CutSpec,
    cfg: &SolverConfig,
) -> Result<(CutPieces, CutAnalysis)> {
    let ctx = CutContext::analyze(body, spec, cfg)?;
    let analysis = ctx.analysis();
    Ok((ctx.pieces, analysis))
}

/// Solved data for one cut: the pieces and all three capacity results.
pub struct CutContext {
    pub pieces: CutPieces,
    pub k_result: CapacityResult,
    pub k1_result: CapacityResult,
    pub k2_result: CapacityResult,
}

impl CutContext {
    pub fn analyze(body: &HPolytope, spec: &CutSpec, cfg: &SolverConfig) -> Result<Self> {
        let pieces = cut(body, spec)?;
        let k_result = solver::capacity(body, cfg)?;
        Self::with_parent_result(body, spec, cfg, pieces, k_result)
    }

    /// Variant that reuses an already-solved parent capacity (sweeps).
    pub fn with_parent_result(
        _body: &HPolytope,
        _spec: &CutSpec,
        cfg: &SolverConfig,
        pieces: CutPieces,
        k_result: CapacityResult,
    ) -> Result<Self> {
        let k1_result = solver::capacity(&pieces.k1, cfg)?;
        let k2_result = solver::capacity(&pieces.k2, cfg)?;
        Ok(Self { pieces, k_result, k1_result, k2_result })
    }

    pub fn analysis(&self) -> CutAnalysis {
        let (c_k, c1, c2) =
            (self.k_result.capacity, self.k1_result.capacity, self.k2_result.capacity);
        CutAnalysis { c_k, c1, c2, defect: c1 + c2 - c_k }
    }
}

/// One row of a sweep table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    /// Depth `t = h_K(v) - level`.
    pub t: f64,
    pub level: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub sum: Option<f64>,
    pub c_k: f64,
    pub defect: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV with the fixed header `t,c1,c2,sum,cK,defect`; floats carry 17
    /// significant digits so goldens are byte-stable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,c1,c2,sum,cK,defect\n");
        let fmt = |x: Option<f64>| x.map_or(String::from("nan"), |x| format!("{x:.16e}"));
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{},{},{},{:.16e},{}\n",
                r.t,
                fmt(r.c1),
                fmt(r.c2),
                fmt(r.sum),
                r.c_k,
                fmt(r.defect)
            ));
        }
        out
    }
}

/// Sweep the cut level over `levels` (absolute levels `s`); one row per level,
/// failures recorded per row.
pub fn sweep(
    body: &HPolytope,
    v: &DVector<f64>,
    levels: &[f64],
    cfg: &SolverConfig,
) -> Result<SweepTable> {
    let unit = v / v.norm();
    let h_plus = body.support(&unit)?;
    let k_result = solver::capacity(body, cfg)?;
    let c_k = k_result.capacity;
    let rows: Vec<SweepRow> = levels
        .par_iter()
        .map(|&s| {
            let t = h_plus - s;
            let row = (|| -> Result<(f64, f64)> {
                let spec = CutSpec::new(unit.clone(), s)?;
                let pieces = cut(body, &spec)?;
                let c1 = solver::capacity(&pieces.k1, cfg)?.capacity;
                let c2 = solver::capacity(&pieces.k2, cfg)?.capacity;
                Ok((c1, c2))
            })();
            match row {
                Ok((c1, c2)) => SweepRow {
                    t,
                    level: s,
                    c1: Some(c1),
                    c2: Some(c2),
                    sum: Some(c1 + c2),
                    c_k,
                    defect: Some(c1 + c2 - c_k),
                    error: None,
                },
                Err(e) => SweepRow {
                    t,
                    level: s,
                    c1: None,
                    c2: None,
                    sum: None,
                    c_k,
                    defect: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepTable { rows })
}

/// Evenly spaced interior levels between the two support values.
pub fn level_grid(body: &HPolytope, v: &DVector<f64>, steps: usize) -> Result<Vec<f64>> {
    let unit = v / v.norm();
    let h_plus = body.support(&unit)?;
    let h_minus = body.support(&(-&unit))?;
    let lo = -h_minus;
    let hi = h_plus;
    Ok((1..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps + 1) as f64)
        .collect())
}

/// A maximizing sequence of `K` split into the two blocks of a combinatorial
/// cut, with the verification data of the defining identities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombinatorialCut {
    /// The full maximizing sequence in parent facet indices.
    pub sequence: CapacitySequence,
    /// Prefix length `m`: entries `0..m` are the `K1`-side block.
    pub split: usize,
    /// The positive coefficient with `sum_{i<=m} beta_i n_i = c v`.
    pub c: f64,
    pub a1: f64,
    pub a2: f64,
    pub h1: f64,
    pub h2: f64,
    /// Residual of the defining equation for `c` (relative).
    pub c_residual: f64,
    /// Induced maximizing sequences for the pieces, in piece facet indices.
    pub piece_sequences: (CapacitySequence, CapacitySequence),
}

/// Search result: all verified combinatorial cuts found at `(v, t)`.
#[derive(Debug)]
pub struct CombinatorialCutSearch {
    pub cuts: Vec<CombinatorialCut>,
    pub analysis: CutAnalysis,
}

/// Find combinatorial cuts for the hyperplane at depth `t` along `v`.
///
/// Candidate sequences are built by splicing maximizers of the two pieces that
/// use the cut facet, rescaling per the closing constraint, and verifying
/// membership in `M(K)`, maximality, and the coefficient equation. An empty
/// result for a cut with positive defect is the expected certificate of
/// non-additivity.
pub fn find_combinatorial_cut(
    body: &HPolytope,
    v: &DVector<f64>,
    t: f64,
    cfg: &SolverConfig,
) -> Result<CombinatorialCutSearch> {
    let spec = CutSpec::from_depth(body, v.clone(), t)?;
    let ctx = CutContext::analyze(body, &spec, cfg)?;
    let cuts = find_in_context(body, &spec, &ctx, cfg)?;
    Ok(CombinatorialCutSearch { cuts, analysis: ctx.analysis() })
}

/// The splice search on an already-solved cut context.
pub fn find_in_context(
    body: &HPolytope,
    spec: &CutSpec,
    ctx: &CutContext,
    _cfg: &SolverConfig,
) -> Result<Vec<CombinatorialCut>> {
    let space = SymplecticSpace::from_dim(body.dim())?;
    let pieces = &ctx.pieces;
    let h_v = body.support(&spec.v)?;
    let t = h_v - spec.level;
    let a_star = ctx.k_result.a_star;
    let c_k = ctx.k_result.capacity;

    let pool1 = sequence_pool(&ctx.k1_result, pieces.k1_cut_facet);
    let pool2 = sequence_pool(&ctx.k2_result, pieces.k2_cut_facet);

    let mut found: Vec<CombinatorialCut> = Vec::new();
    for m1 in &pool1 {
        for m2 in &pool2 {
            if let Some(comb) = splice(
                body, space, spec, pieces, m1, m2, h_v, t, a_star, c_k,
            ) {
                let duplicate = found.iter().any(|f| {
                    f.split == comb.split
                        && f.sequence.entries.len() == comb.sequence.entries.len()
                        && f.sequence
                            .entries
                            .iter()
                            .zip(&comb.sequence.entries)
                            .all(|(&(ia, ba), &(ib, bb))| ia == ib && (ba - bb).abs() <= 1e-7)
                });
                if !duplicate {
                    found.push(comb);
                }
            }
        }
    }
    Ok(found)
}

/// Maximizers and family samples that use the given facet with positive
/// coefficient.
fn sequence_pool(result: &CapacityResult, facet: usize) -> Vec<CapacitySequence> {
    let mut pool = Vec::new();
    for m in &result.maximizers {
        let mut candidates = vec![m.sequence.clone()];
        if let Some(samples) = &m.family_samples {
            candidates.extend(samples.iter().cloned());
        }
        for c in candidates {
            if c.entries.iter().any(|&(i, b)| i == facet && b > 1e-9) {
                pool.push(c);
            }
        }
    }
    pool
}

#[allow(clippy::too_many_arguments)]
fn splice(
    body: &HPolytope,
    space: SymplecticSpace,
    spec: &CutSpec,
    pieces: &CutPieces,
    m1: &CapacitySequence,
    m2: &CapacitySequence,
    h_v: f64,
    t: f64,
    a_star: f64,
    c_k: f64,
) -> Option<CombinatorialCut> {
    // Rotate m1 so its cut-facet entry is last, m2 so its entry is first.
    let pos1 = m1.entries.iter().position(|&(i, _)| i == pieces.k1_cut_facet)?;
    let pos2 = m2.entries.iter().position(|&(i, _)| i == pieces.k2_cut_facet)?;
    let mut rot1 = m1.entries.clone();
    let len1 = rot1.len();
    rot1.rotate_left((pos1 + 1) % len1);
    let (_, b1) = rot1.pop()?;
    let mut rot2 = m2.entries.clone();
    rot2.rotate_left(pos2);
    let b2 = rot2.remove(0).1;
    if b1 <= 1e-9 || b2 <= 1e-9 || rot1.is_empty() || rot2.is_empty() {
        return None;
    }

    // Map piece facet indices back to the parent body.
    let prefix: Option<Vec<(usize, f64)>> = rot1
        .iter()
        .map(|&(i, b)| pieces.k1_from_parent[i].map(|p| (p, b)))
        .collect();
    let suffix: Option<Vec<(usize, f64)>> = rot2
        .iter()
        .map(|&(i, b)| pieces.k2_from_parent[i].map(|p| (p, b)))
        .collect();
    let (prefix, suffix) = (prefix?, suffix?);

    // Scales from the normalization constraint; the closing constraint fixes
    // the ratio s1 b1 = s2 b2 = c.
    let h1_raw: f64 = prefix.iter().map(|&(i, b)| b * body.height(i)).sum();
    let h2_raw: f64 = suffix.iter().map(|&(i, b)| b * body.height(i)).sum();
    let denom = h1_raw / b1 + h2_raw / b2;
    if denom <= 1e-12 {
        return None;
    }
    let c = 1.0 / denom;
    let s1 = c / b1;
    let s2 = c / b2;

    let mut entries: Vec<(usize, f64)> =
        prefix.iter().map(|&(i, b)| (i, b * s1)).collect();
    let split = entries.len();
    entries.extend(suffix.iter().map(|&(i, b)| (i, b * s2)));
    let sequence = CapacitySequence::new(entries);

    // Membership in M(K) and maximality.
    let report = solver::sequence_feasible(body, &sequence, 1e-7).ok()?;
    if !report.feasible {
        return None;
    }
    let a = solver::sequence_action(body, &sequence).ok()?;
    if (a - a_star).abs() > 1e-6 * a_star.abs().max(1.0) {
        return None;
    }

    // Prefix block data and the coefficient equation.
    let mut a1 = 0.0;
    for (i, &(fi, bi)) in sequence.entries[..split].iter().enumerate() {
        for &(fj, bj) in &sequence.entries[..i] {
            a1 += bi * bj * space.omega_unchecked(body.normal(fi), body.normal(fj));
        }
    }
    let a2 = a - a1;
    let h_prefix: f64 =
        sequence.entries[..split].iter().map(|&(i, b)| b * body.height(i)).sum();
    let c_expected = (h_prefix - 2.0 * c_k * a1) / (h_v - t);
    let c_residual = (c - c_expected).abs() / c_expected.abs().max(1e-12);
    if c_residual > C_MATCH_TOL {
        return None;
    }
    // Prefix closing: sums to c v exactly.
    let mut prefix_sum = DVector::zeros(body.dim());
    for &(i, b) in &sequence.entries[..split] {
        prefix_sum += b * body.normal(i);
    }
    if (&prefix_sum - c * &spec.v).amax() > 1e-7 {
        return None;
    }

    let h1 = h_prefix - c * (h_v - t);
    let h2 = 1.0 - h1;

    // Induced piece sequences, in piece facet indices.
    let seq1 = {
        let mut e: Vec<(usize, f64)> =
            rot1.iter().map(|&(i, b)| (i, b * s1 / h1)).collect();
        e.push((pieces.k1_cut_facet, c / h1));
        CapacitySequence::new(e)
    };
    let seq2 = {
        let mut e = vec![(pieces.k2_cut_facet, c / h2)];
        e.extend(rot2.iter().map(|&(i, b)| (i, b * s2 / h2)));
        CapacitySequence::new(e)
    };

    Some(CombinatorialCut {
        sequence,
        split,
        c,
        a1,
        a2,
        h1,
        h2,
        c_residual,
        piece_sequences: (seq1, seq2),
    })
}

/// Verification report for the induced piece sequences of a combinatorial cut.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceSequenceReport {
    pub seq1_feasible: bool,
    pub seq2_feasible: bool,
    /// `|c(K1) - H1^2 / (2 A1)|`
    pub c1_block_residual: f64,
    /// `|c(K1) - A1 / (2 A^2)|`
    pub c1_share_residual: f64,
    /// `|c(K2) - A2 / (2 A^2)|`
    pub c2_share_residual: f64,
    /// `|c(K1) + c(K2) - c(K)|`
    pub additivity_residual: f64,
    /// `|A - (A1 + A2)|`
    pub block_sum_residual: f64,
}

/// Rebuild and verify the piece sequences of a combinatorial cut against the
/// solved piece capacities.
pub fn induced_piece_sequences(
    body: &HPolytope,
    ctx: &CutContext,
    comb: &CombinatorialCut,
) -> Result<(CapacitySequence, CapacitySequence, PieceSequenceReport)> {
    let (seq1, seq2) = comb.piece_sequences.clone();
    let r1 = solver::sequence_feasible(&ctx.pieces.k1, &seq1, 1e-7)?;
    let r2 = solver::sequence_feasible(&ctx.pieces.k2, &seq2, 1e-7)?;
    let a = solver::sequence_action(body, &comb.sequence)?;
    let c1 = ctx.k1_result.capacity;
    let c2 = ctx.k2_result.capacity;
    let c_k = ctx.k_result.capacity;
    let report = PieceSequenceReport {
        seq1_feasible: r1.feasible,
        seq2_feasible: r2.feasible,
        c1_block_residual: (c1 - comb.h1 * comb.h1 / (2.0 * comb.a1)).abs(),
        c1_share_residual: (c1 - comb.a1 / (2.0 * a * a)).abs(),
        c2_share_residual: (c2 - comb.a2 / (2.0 * a * a)).abs(),
        additivity_residual: (c1 + c2 - c_k).abs(),
        block_sum_residual: (a - (comb.a1 + comb.a2)).abs(),
    };
    Ok((seq1, seq2, report))
}
