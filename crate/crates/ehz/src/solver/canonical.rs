//! Canonical forms for maximizer sequences.
//!
//! Two sequences are reported once if they differ by a cyclic rotation or by
//! Lagrangian swaps (transpositions of adjacent entries whose normals have
//! vanishing omega-pairing). The canonical representative rotates the smallest
//! facet index to the front and bubble-sorts commuting adjacent inversions.

use super::{CapacitySequence, Maximizer, SolveContext};

const OMEGA_ZERO_TOL: f64 = 1e-12;

pub(crate) fn canonicalize(ctx: &SolveContext, seq: &CapacitySequence) -> CapacitySequence {
    let mut entries = seq.entries.clone();
    if entries.is_empty() {
        return seq.clone();
    }
    // Rotate the lexicographically smallest index sequence to the front.
    let m = entries.len();
    let best_rot = (0..m)
        .min_by_key(|&r| {
            let mut key = Vec::with_capacity(m);
            for i in 0..m {
                key.push(entries[(r + i) % m].0);
            }
            key
        })
        .unwrap_or(0);
    entries.rotate_left(best_rot);

    // Bubble commuting adjacent inversions to a fixpoint.
    loop {
        let mut changed = false;
        for i in 0..entries.len().saturating_sub(1) {
            let (a, b) = (entries[i].0, entries[i + 1].0);
            if a > b && ctx.omega[(a, b)].abs() <= OMEGA_ZERO_TOL {
                entries.swap(i, i + 1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    CapacitySequence::new(entries)
}

fn same_sequence(a: &CapacitySequence, b: &CapacitySequence, tol: f64) -> bool {
    a.entries.len() == b.entries.len()
        && a.entries
            .iter()
            .zip(&b.entries)
            .all(|(&(ia, ba), &(ib, bb))| ia == ib && (ba - bb).abs() <= tol)
}

/// Collects tied maximizers while tracking the running best value.
pub(crate) struct TieCollector {
    pub best: f64,
    pub maximizers: Vec<Maximizer>,
    tie_tol: f64,
    cap: usize,
}

impl TieCollector {
    pub fn new(tie_tol: f64) -> Self {
        Self { best: f64::NEG_INFINITY, maximizers: Vec::new(), tie_tol, cap: 128 }
    }

    fn margin(&self) -> f64 {
        self.tie_tol * self.best.abs().max(1.0)
    }

    /// Margin below the best value within which candidates still tie.
    pub fn tie_margin(&self) -> f64 {
        self.margin()
    }

    pub fn offer(
        &mut self,
        ctx: &SolveContext,
        value: f64,
        sequence: CapacitySequence,
        family_samples: Option<Vec<CapacitySequence>>,
    ) {
        if !value.is_finite() {
            return;
        }
        if self.best == f64::NEG_INFINITY {
            self.best = value;
        } else if value > self.best + self.margin() {
            self.best = value;
            let keep = self.margin();
            self.maximizers.retain(|m| m.value >= value - keep);
        } else if value < self.best - self.margin() {
            return;
        }
        let canon = canonicalize(ctx, &sequence);
        let dedup_tol = 1e-7;
        if let Some(existing) = self
            .maximizers
            .iter_mut()
            .find(|m| same_sequence(&m.sequence, &canon, dedup_tol))
        {
            // Prefer the family-carrying record.
            if existing.family_samples.is_none() {
                existing.family_samples = family_samples;
            }
            return;
        }
        if self.maximizers.len() < self.cap {
            self.maximizers.push(Maximizer { sequence: canon, value, family_samples });
        }
    }

    pub fn into_sorted(mut self) -> (f64, Vec<Maximizer>) {
        self.maximizers.sort_by(|a, b| {
            a.sequence
                .entries
                .len()
                .cmp(&b.sequence.entries.len())
                .then_with(|| a.sequence.entries.cmp_by_index(&b.sequence.entries))
        });
        (self.best, self.maximizers)
    }
}

trait CmpByIndex {
    fn cmp_by_index(&self, other: &Self) -> std::cmp::Ordering;
}

impl CmpByIndex for Vec<(usize, f64)> {
    fn cmp_by_index(&self, other: &Self) -> std::cmp::Ordering {
        let a: Vec<usize> = self.iter().map(|&(i, _)| i).collect();
        let b: Vec<usize> = other.iter().map(|&(i, _)| i).collect();
        a.cmp(&b)
    }
}
