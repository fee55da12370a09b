//! Enumeration of antichains and complexes, extremal-family search and
//! theorem verification over enumerated family spaces.
//!
//! All parallel work is split into a fixed set of subproblems whose results
//! are merged in subproblem order, so reports do not depend on the number of
//! worker threads.

mod theorems;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use theorems::{verify_cross_dependent, verify_theorem, Check, Scope, TheoremParams, TheoremReport, Violation};

use crate::algebra::gauss_binom;
use crate::error::{Error, Result};
use crate::lattice::{Family, Lattice};
use crate::patterns::Forbidden;

pub const DEFAULT_ENUM_CAP: usize = 5_000_000;
pub const EXACT_MAX_ELEMENTS: usize = 24;

fn require_table(lattice: &Lattice) -> Result<()> {
    if !lattice.has_relation_table() {
        return Err(Error::resource("lattice size for enumeration", lattice.size(), 4096));
    }
    Ok(())
}

fn comparability(lattice: &Lattice) -> Vec<FixedBitSet> {
    (0..lattice.size())
        .map(|h| {
            let mut c = lattice.up_set(h).unwrap().clone();
            c.union_with(lattice.down_set(h).unwrap());
            c
        })
        .collect()
}

/// Every antichain (including the empty one) exactly once, ordered
/// lexicographically by sorted handle list.
pub fn enumerate_antichains(lattice: &Lattice, cap: usize) -> Result<Vec<Family>> {
    require_table(lattice)?;
    let comp = comparability(lattice);
    let size = lattice.size();
    let mut out = Vec::new();
    fn rec(
        lattice: &Lattice,
        comp: &[FixedBitSet],
        cands: &[usize],
        chosen: &mut FixedBitSet,
        out: &mut Vec<Family>,
        cap: usize,
    ) -> Result<()> {
        if out.len() >= cap {
            return Err(Error::resource("antichain count (partial)", format!("≥ {}", out.len()), cap));
        }
        out.push(lattice.family_from_bits(chosen.clone()));
        for (i, &c) in cands.iter().enumerate() {
            let next: Vec<usize> = cands[i + 1..].iter().copied().filter(|&x| !comp[c].contains(x)).collect();
            chosen.insert(c);
            rec(lattice, comp, &next, chosen, out, cap)?;
            chosen.set(c, false);
        }
        Ok(())
    }
    let all: Vec<usize> = (0..size).collect();
    let mut chosen = FixedBitSet::with_capacity(size);
    rec(lattice, &comp, &all, &mut chosen, &mut out, cap)?;
    Ok(out)
}

/// Every complex (down-closed family), as the down-closures of the
/// antichains, in the same order.
pub fn enumerate_complexes(lattice: &Lattice, cap: usize) -> Result<Vec<Family>> {
    enumerate_antichains(lattice, cap)?
        .iter()
        .map(|a| lattice.downset_of(a))
        .collect()
}

/// Every up-set, as up-closures of the antichains.
pub fn enumerate_upsets(lattice: &Lattice, cap: usize) -> Result<Vec<Family>> {
    enumerate_antichains(lattice, cap)?
        .iter()
        .map(|a| lattice.upset_of(a))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Walks every family free of the configuration.
    Exact,
    /// Depth-first with size-based pruning.
    BranchBound,
    /// Seeded randomized greedy; gives a lower bound only.
    Sample { count: u64, seed: u64 },
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchMode::Exact => write!(f, "exact"),
            SearchMode::BranchBound => write!(f, "branch_bound"),
            SearchMode::Sample { count, seed } => write!(f, "sample({count},{seed})"),
        }
    }
}

pub struct SearchTask<'a> {
    pub lattice: &'a Lattice,
    pub forbidden: Forbidden,
    pub mode: SearchMode,
    /// Known upper bound on the answer; the search stops once it is reached.
    pub prune_bound: Option<usize>,
    pub node_cap: u64,
}

impl<'a> SearchTask<'a> {
    pub fn new(lattice: &'a Lattice, forbidden: Forbidden, mode: SearchMode) -> Self {
        SearchTask { lattice, forbidden, mode, prune_bound: None, node_cap: 2_000_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_size: usize,
    pub witness_family: Family,
    pub explored: u64,
    pub optimal: bool,
}

impl SearchResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "best": {"size": self.best_size, "handles": self.witness_family.handles()},
            "explored": self.explored,
            "optimal": self.optimal,
        })
    }
}

struct Dfs<'a> {
    lattice: &'a Lattice,
    forbidden: &'a Forbidden,
    prune: bool,
    stop_at: usize,
    node_cap: u64,
    nodes: u64,
    capped: bool,
    best_size: usize,
    best: Option<FixedBitSet>,
}

impl Dfs<'_> {
    fn run(&mut self, i: usize, cur: &mut FixedBitSet, size: usize) {
        if self.capped || self.best_size >= self.stop_at && self.best.is_some() {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.node_cap {
            self.capped = true;
            return;
        }
        let n = self.lattice.size();
        if i == n {
            if size > self.best_size || self.best.is_none() {
                self.best_size = size;
                self.best = Some(cur.clone());
            }
            return;
        }
        if self.prune && self.best.is_some() && size + (n - i) <= self.best_size {
            return;
        }
        if !self.forbidden.creates(self.lattice, cur, i) {
            cur.insert(i);
            self.run(i + 1, cur, size + 1);
            cur.set(i, false);
        }
        self.run(i + 1, cur, size);
    }
}

fn greedy(lattice: &Lattice, forbidden: &Forbidden, order: &[usize]) -> FixedBitSet {
    let mut cur = FixedBitSet::with_capacity(lattice.size());
    for &h in order {
        if !forbidden.creates(lattice, &cur, h) {
            cur.insert(h);
        }
    }
    cur
}

fn better(a: &(usize, Vec<usize>), b: &(usize, Vec<usize>)) -> bool {
    a.0 > b.0 || a.0 == b.0 && a.1 < b.1
}

/// Largest family avoiding the configuration. Ties are broken towards the
/// lexicographically smallest sorted handle list.
pub fn max_family(task: &SearchTask<'_>) -> Result<SearchResult> {
    let lattice = task.lattice;
    task.forbidden.validate(lattice)?;
    lattice.tabulate_disjointness();
    let n = lattice.size();
    match &task.mode {
        SearchMode::Sample { count, seed } => {
            let results: Vec<(usize, Vec<usize>)> = (0..*count)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    rng.set_stream(i);
                    let mut order: Vec<usize> = (0..n).collect();
                    order.shuffle(&mut rng);
                    let f = greedy(lattice, &task.forbidden, &order);
                    (f.count_ones(..), f.ones().collect())
                })
                .collect();
            let best = results
                .into_iter()
                .reduce(|a, b| if better(&b, &a) { b } else { a })
                .unwrap_or((0, Vec::new()));
            Ok(SearchResult {
                best_size: best.0,
                witness_family: lattice.family(best.1)?,
                explored: *count,
                optimal: false,
            })
        }
        SearchMode::Exact | SearchMode::BranchBound => {
            let exact = task.mode == SearchMode::Exact;
            if exact && n > EXACT_MAX_ELEMENTS {
                return Err(Error::resource("lattice size for exact search", n, EXACT_MAX_ELEMENTS));
            }
            let seed = greedy(lattice, &task.forbidden, &(0..n).collect::<Vec<_>>());
            let seed = (seed.count_ones(..), seed.ones().collect::<Vec<usize>>());
            let stop_at = task.prune_bound.unwrap_or(usize::MAX);
            let depth = n.min(10);
            let subtrees = 1u64 << depth;
            let per_cap = (task.node_cap / subtrees).max(1);
            let parts: Vec<(Option<(usize, Vec<usize>)>, u64, bool)> = (0..subtrees)
                .into_par_iter()
                .map(|p| {
                    // include-first order: prefix index 0 takes every element
                    let pattern = subtrees - 1 - p;
                    let mut cur = FixedBitSet::with_capacity(n);
                    let mut size = 0;
                    for i in 0..depth {
                        if pattern >> (depth - 1 - i) & 1 == 1 {
                            if task.forbidden.creates(lattice, &cur, i) {
                                return (None, 0, false);
                            }
                            cur.insert(i);
                            size += 1;
                        }
                    }
                    let mut dfs = Dfs {
                        lattice,
                        forbidden: &task.forbidden,
                        prune: !exact,
                        stop_at,
                        node_cap: per_cap,
                        nodes: 0,
                        capped: false,
                        best_size: if exact { 0 } else { seed.0 },
                        best: None,
                    };
                    if !exact && size + (n - depth) <= seed.0 {
                        return (None, 1, false);
                    }
                    dfs.run(depth, &mut cur, size);
                    let found = dfs.best.map(|b| (b.count_ones(..), b.ones().collect()));
                    (found, dfs.nodes, dfs.capped)
                })
                .collect();
            let mut best = seed;
            let mut explored = 0;
            let mut capped = false;
            for (found, nodes, cap_hit) in parts {
                explored += nodes;
                capped |= cap_hit;
                if let Some(f) = found {
                    if better(&f, &best) {
                        best = f;
                    }
                }
            }
            Ok(SearchResult {
                best_size: best.0,
                witness_family: lattice.family(best.1)?,
                explored,
                optimal: !capped,
            })
        }
    }
}

/// The real y ≥ k with [y, k]_q = m, and [y, k-1]_q at that point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussRoot {
    pub y: f64,
    pub lower: f64,
}

fn real_gauss(y: f64, k: usize, q: f64) -> f64 {
    (0..k)
        .map(|i| (q.powf(y - i as f64) - 1.0) / (q.powf((k - i) as f64) - 1.0))
        .product()
}

/// Solves [y, k]_q = m by bisection on [k, n] (absolute tolerance 1e-12).
pub fn solve_gauss_real(m: &BigUint, k: usize, q: u32, n: usize) -> Result<GaussRoot> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("need 1 ≤ k ≤ n (got k={k}, n={n})")));
    }
    let top = gauss_binom(n as i64, k as i64, q)?;
    if *m < BigUint::from(1u32) || *m > top {
        return Err(Error::domain(format!("m = {m} outside 1..={top}")));
    }
    let target = m.to_f64().unwrap();
    let qf = q as f64;
    let y = if *m == top {
        n as f64
    } else if *m == BigUint::from(1u32) {
        k as f64
    } else {
        let (mut lo, mut hi) = (k as f64, n as f64);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if real_gauss(mid, k, qf) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(GaussRoot { y, lower: real_gauss(y, k - 1, qf) })
}

#[derive(Clone, Debug, Serialize)]
pub struct RamseyResult {
    /// Colour of each handle, when a colouring without a monochromatic
    /// algebra was found.
    pub coloring: Option<Vec<usize>>,
    pub exhaustive: bool,
    pub explored: u64,
}

/// Looks for an r-colouring of the lattice with no monochromatic
/// d-dimensional algebra (q-algebra on L_n(q), Boolean algebra on B_n).
/// Exhaustive when r^size ≤ cap, otherwise `samples` seeded random colourings.
pub fn ramsey_color_check(lattice: &Lattice, r: usize, d: usize, cap: u64, samples: u64, seed: u64) -> Result<RamseyResult> {
    if r == 0 {
        return Err(Error::domain("need r ≥ 1"));
    }
    let forbidden = if lattice.is_boolean() { Forbidden::BooleanAlgebra(d) } else { Forbidden::QAlgebra(d) };
    forbidden.validate(lattice)?;
    let n = lattice.size();
    let total = (r as f64).powf(n as f64);
    if total <= cap as f64 {
        let mut classes = vec![FixedBitSet::with_capacity(n); r];
        let mut colors = vec![0usize; n];
        let mut explored = 0u64;
        fn rec(
            lattice: &Lattice,
            forbidden: &Forbidden,
            i: usize,
            used: usize,
            classes: &mut [FixedBitSet],
            colors: &mut [usize],
            explored: &mut u64,
        ) -> bool {
            *explored += 1;
            if i == lattice.size() {
                return true;
            }
            // colours are interchangeable: only open one new colour at a time
            for c in 0..(used + 1).min(classes.len()) {
                if forbidden.creates(lattice, &classes[c], i) {
                    continue;
                }
                classes[c].insert(i);
                colors[i] = c;
                if rec(lattice, forbidden, i + 1, used.max(c + 1), classes, colors, explored) {
                    return true;
                }
                classes[c].set(i, false);
            }
            false
        }
        let found = rec(lattice, &forbidden, 0, 0, &mut classes, &mut colors, &mut explored);
        return Ok(RamseyResult { coloring: found.then_some(colors), exhaustive: true, explored });
    }
    let hits: Vec<Option<Vec<usize>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let colors: Vec<usize> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0..r)).collect();
            let clean = (0..r).all(|c| {
                let fam = lattice.family((0..n).filter(|&h| colors[h] == c)).unwrap();
                forbidden.find(lattice, &fam).unwrap().is_none()
            });
            clean.then_some(colors)
        })
        .collect();
    Ok(RamseyResult { coloring: hits.into_iter().flatten().next(), exhaustive: false, explored: samples })
}
