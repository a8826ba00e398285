//! Depth-first branch-and-bound over (subset, cyclic order) pairs.
//!
//! Search-space reductions, all of which preserve at least one maximizer per
//! tie class (maximizers are collected up to cyclic rotation and Lagrangian
//! swaps):
//!
//! - cyclic symmetry: the smallest facet index of the subset goes first;
//! - adjacent-pair test: appending `w` after `u` requires `omega(w, u) >= 0`,
//!   since an adjacent swap changes the objective by
//!   `2 beta_u beta_w omega(u, w)` and maximizers keep all `beta > 0`;
//! - commuting ties: when `omega(w, u) = 0` the two orders tie, so the pair is
//!   admitted only in ascending index order;
//! - feasibility: a prefix that admits no nonnegative closing completion is
//!   abandoned;
//! - admissible bounds: an entrywise bound on the objective over the
//!   normalization simplex (resolved pair orientations exact, unresolved ones
//!   replaced by `|omega|`), intersected with an isoperimetric cap
//!   `L^2 cot(pi/k) / (2k)` on closed `k`-gons of perimeter `L`.

use nalgebra::DMatrix;

use super::canonical::TieCollector;
use super::fixed_order::candidates_for_order;
use super::{assemble_result, CapacityResult, SearchStats, SolveContext};
use crate::lp;
use crate::Result;

const OMEGA_ZERO_TOL: f64 = 1e-12;

pub(crate) fn run(ctx: &SolveContext) -> Result<CapacityResult> {
    let mut search = Search::new(ctx);
    // Progressive deepening: exhaust short supports first so that the
    // incumbent is strong before the budget is spent deep in the tree.
    let cap = search.max_len;
    let mut stages: Vec<usize> = [4, 8].iter().copied().filter(|&s| s < cap).collect();
    stages.push(cap);
    for stage in stages {
        search.max_len = stage;
        search.run();
        if search.exhausted {
            break;
        }
    }
    let exhausted = search.exhausted;
    let open_bound = search.open_bound;
    let stats = search.stats;
    let (best, maximizers) = search.collector.into_sorted();
    let gap = if exhausted && open_bound > best {
        (open_bound - best) / best.abs().max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    let certified = !exhausted || gap <= ctx.cfg.target_gap;
    assemble_result(best, maximizers, stats, certified, gap)
}

struct Search<'a> {
    ctx: &'a SolveContext,
    k: usize,
    max_len: usize,
    /// Entrywise objective bound in simplex coordinates: resolved pairs carry
    /// their exact sign, unresolved ones `|omega|`; all divided by `h_i h_j`.
    bhat: DMatrix<f64>,
    used: Vec<bool>,
    prefix: Vec<usize>,
    first: usize,
    collector: TieCollector,
    stats: SearchStats,
    exhausted: bool,
    open_bound: f64,
    /// Squared maximal perimeter `(sum beta_i)^2` over the feasible slice.
    lmax_sq: f64,
    use_feasibility_lp: bool,
}

impl<'a> Search<'a> {
    fn new(ctx: &'a SolveContext) -> Self {
        let k = ctx.facet_count();
        let mut bhat = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    bhat[(i, j)] = ctx.omega[(i, j)].abs() / (ctx.heights[i] * ctx.heights[j]);
                }
            }
        }
        let lmax = max_perimeter(ctx).unwrap_or(f64::INFINITY);
        Search {
            ctx,
            k,
            max_len: ctx.cfg.max_subset_size.unwrap_or(k).min(k),
            bhat,
            used: vec![false; k],
            prefix: Vec::with_capacity(k),
            first: 0,
            collector: TieCollector::new(ctx.cfg.tie_tol),
            stats: SearchStats::default(),
            exhausted: false,
            open_bound: f64::NEG_INFINITY,
            lmax_sq: lmax * lmax,
            use_feasibility_lp: k >= 12,
        }
    }

    fn run(&mut self) {
        for first in 0..self.k {
            self.first = first;
            self.push(first);
            if self.exhausted {
                // Unexplored root block: its bound still caps the open gap.
                let bound = self.node_bound();
                self.open_bound = self.open_bound.max(bound);
            } else {
                self.dfs(first);
            }
            self.pop(first);
        }
    }

    fn push(&mut self, w: usize) {
        self.used[w] = true;
        self.prefix.push(w);
        // Pairs (w, j) with j still unused are now oriented: j comes after w.
        for j in 0..self.k {
            if !self.used[j] {
                let v = self.ctx.omega[(j, w)] / (self.ctx.heights[j] * self.ctx.heights[w]);
                self.bhat[(w, j)] = v;
                self.bhat[(j, w)] = v;
            }
        }
    }

    fn pop(&mut self, w: usize) {
        self.prefix.pop();
        self.used[w] = false;
        for j in 0..self.k {
            if !self.used[j] {
                let v =
                    self.ctx.omega[(j, w)].abs() / (self.ctx.heights[j] * self.ctx.heights[w]);
                self.bhat[(w, j)] = v;
                self.bhat[(j, w)] = v;
            }
        }
    }

    fn dfs(&mut self, last: usize) {
        self.stats.nodes += 1;
        if self.stats.nodes > self.ctx.cfg.node_budget {
            self.exhausted = true;
        }
        let bound = self.node_bound();
        if self.exhausted {
            self.open_bound = self.open_bound.max(bound);
            return;
        }
        if bound < self.collector.best - self.collector.tie_margin() {
            return;
        }
        if self.prefix.len() >= 3
            && self.use_feasibility_lp
            && !self.feasible_completion()
        {
            return;
        }

        // The prefix itself as a complete cyclic order.
        if self.prefix.len() >= 2
            && self.ctx.omega[(self.first, last)] >= -OMEGA_ZERO_TOL
        {
            self.stats.orders_evaluated += 1;
            for cand in candidates_for_order(self.ctx, &self.prefix) {
                self.stats.candidates += 1;
                self.collector.offer(
                    self.ctx,
                    cand.value,
                    cand.sequence(),
                    cand.family_sequences(),
                );
            }
        }

        if self.prefix.len() >= self.max_len {
            return;
        }
        for next in (self.first + 1)..self.k {
            if self.used[next] {
                continue;
            }
            let w = self.ctx.omega[(next, last)];
            if w < -OMEGA_ZERO_TOL {
                continue; // an adjacent swap would strictly improve
            }
            if w <= OMEGA_ZERO_TOL && next < last {
                continue; // commuting pair: admit ascending order only
            }
            self.push(next);
            self.dfs(next);
            self.pop(next);
            if self.exhausted {
                // This node's bound covers its remaining unvisited children.
                self.open_bound = self.open_bound.max(bound);
                return;
            }
        }
    }

    /// Upper bound for every completion of the current prefix.
    ///
    /// Members are the prefix plus every unused index above `first` (smaller
    /// indices belong to earlier root blocks).
    fn node_bound(&self) -> f64 {
        let mut members: Vec<usize> = Vec::with_capacity(self.k);
        for i in 0..self.k {
            if self.used[i] || i > self.first {
                members.push(i);
            }
        }
        let kk = members.len();
        let kk_eff = kk.min(self.max_len);
        if kk_eff < 2 {
            return 0.0;
        }
        let mut max_entry = 0.0_f64;
        for a in 1..kk {
            for b in 0..a {
                let v = self.bhat[(members[a], members[b])];
                if v > max_entry {
                    max_entry = v;
                }
            }
        }
        let pair_bound = 0.5 * max_entry * (1.0 - 1.0 / kk_eff as f64);
        let iso = if kk_eff >= 3 {
            self.lmax_sq / (2.0 * kk_eff as f64 * (std::f64::consts::PI / kk_eff as f64).tan())
        } else {
            0.0
        };
        pair_bound.min(iso.max(0.0))
    }

    /// Does any nonnegative closing completion of the prefix exist?
    fn feasible_completion(&self) -> bool {
        let dim = self.ctx.body.dim();
        let mut vars: Vec<usize> = self.prefix.clone();
        for i in (self.first + 1)..self.k {
            if !self.used[i] {
                vars.push(i);
            }
        }
        let nv = vars.len();
        let mut cons = Vec::with_capacity(dim + 1);
        cons.push(lp::LinCon::eq(vars.iter().map(|&i| self.ctx.heights[i]).collect(), 1.0));
        for row in 0..dim {
            cons.push(lp::LinCon::eq(
                vars.iter().map(|&i| self.ctx.body.normal(i)[row]).collect(),
                0.0,
            ));
        }
        let mut bounds = vec![(0.0, f64::INFINITY); nv];
        for slot in 0..self.prefix.len() {
            bounds[slot] = (1e-9, f64::INFINITY);
        }
        lp::lp_feasible(&cons, &bounds)
    }
}

/// `max sum beta_i` over the feasible slice (perimeter of the partial-sum
/// polygon, unit normals).
fn max_perimeter(ctx: &SolveContext) -> Option<f64> {
    let k = ctx.facet_count();
    let dim = ctx.body.dim();
    let mut cons = Vec::with_capacity(dim + 1);
    cons.push(lp::LinCon::eq(ctx.heights.clone(), 1.0));
    for row in 0..dim {
        cons.push(lp::LinCon::eq((0..k).map(|i| ctx.body.normal(i)[row]).collect(), 0.0));
    }
    let bounds = vec![(0.0, f64::INFINITY); k];
    lp::solve_lp(true, &vec![1.0; k], &cons, &bounds).ok().map(|(v, _)| v)
}
