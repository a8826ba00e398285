//! Exhaustive search over (subset, cyclic order) pairs.
//!
//! Cyclic invariance of the objective on the closing-constraint slice lets us
//! fix the smallest facet index of each subset at the front, leaving
//! `(m-1)!` orders per `m`-subset.

use super::canonical::TieCollector;
use super::fixed_order::candidates_for_order;
use super::{assemble_result, CapacityResult, SearchStats, SolveContext};
use crate::polytope::next_combination;
use crate::{Error, Result};

pub(crate) fn run(ctx: &SolveContext) -> Result<CapacityResult> {
    let k = ctx.facet_count();
    let cap = ctx.cfg.max_subset_size.unwrap_or(k).min(k);
    let planned = planned_orders(k, cap);
    if planned > ctx.cfg.node_budget as u128 {
        return Err(Error::BudgetExceeded(format!(
            "brute force would evaluate {planned} orders (budget {}); use the bnb engine",
            ctx.cfg.node_budget
        )));
    }

    let mut stats = SearchStats::default();
    let mut collector = TieCollector::new(ctx.cfg.tie_tol);
    for m in 2..=cap {
        let mut subset: Vec<usize> = (0..m).collect();
        loop {
            // subset[0] is the smallest index: fix it, permute the rest.
            let mut rest: Vec<usize> = subset[1..].to_vec();
            let mut order = Vec::with_capacity(m);
            permute(&mut rest, 0, &mut |perm| {
                order.clear();
                order.push(subset[0]);
                order.extend_from_slice(perm);
                stats.orders_evaluated += 1;
                for cand in candidates_for_order(ctx, &order) {
                    stats.candidates += 1;
                    collector.offer(ctx, cand.value, cand.sequence(), cand.family_sequences());
                }
            });
            if !next_combination(&mut subset, k) {
                break;
            }
        }
    }
    stats.nodes = stats.orders_evaluated;
    let (best, maximizers) = collector.into_sorted();
    assemble_result(best, maximizers, stats, true, 0.0)
}

/// Total orders `sum_{m=2}^{cap} C(k, m) (m-1)!`.
pub(crate) fn planned_orders(k: usize, cap: usize) -> u128 {
    let mut total: u128 = 0;
    for m in 2..=cap {
        let mut c: u128 = 1;
        for i in 0..m {
            c = c.saturating_mul((k - i) as u128);
        }
        for i in 1..=m {
            c /= i as u128;
        }
        let mut f: u128 = 1;
        for i in 2..m {
            f = f.saturating_mul(i as u128);
        }
        total = total.saturating_add(c.saturating_mul(f));
    }
    total
}

/// Heap-style recursive permutation enumeration (lexicographic-ish, stable).
fn permute(items: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}
