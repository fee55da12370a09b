//! Forbidden-configuration detectors.
//!
//! Every detector is monotone: if a family contains the configuration, so
//! does every superfamily. The search module relies on this for pruning.
//! Detectors return the first witness in handle order.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Family, Lattice};

pub const MAX_PATTERN_SIZE: usize = 8;
pub const MAX_BOOLEAN_ALGEBRA_DIM: usize = 4;
pub const MAX_Q_ALGEBRA_DIM: usize = 3;

/// A finite poset given by its strict order relation (transitively closed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetPattern {
    name: String,
    less: Vec<Vec<bool>>,
}

impl PosetPattern {
    /// Strict order from generating pairs (u, v) meaning u < v.
    pub fn from_relations(name: &str, m: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut less = vec![vec![false; m]; m];
        for &(u, v) in pairs {
            if u >= m || v >= m {
                return Err(Error::usage(format!("relation ({u},{v}) outside a {m}-element pattern")));
            }
            less[u][v] = true;
        }
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    if less[i][k] && less[k][j] {
                        less[i][j] = true;
                    }
                }
            }
        }
        if (0..m).any(|i| less[i][i]) {
            return Err(Error::domain("pattern relation has a cycle"));
        }
        Ok(PosetPattern { name: name.to_string(), less })
    }

    /// P_k: a chain of k elements.
    pub fn chain(k: usize) -> Self {
        let pairs: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
        Self::from_relations(&format!("P{k}"), k, &pairs).unwrap()
    }

    /// Q_2 = B_2 with elements x, y, z, w (x < y, z < w).
    pub fn diamond() -> Self {
        Self::from_relations("Q2", 4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    pub fn antichain(k: usize) -> Self {
        Self::from_relations(&format!("A{k}"), k, &[]).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.less.len()
    }

    pub fn less(&self, u: usize, v: usize) -> bool {
        self.less[u][v]
    }

    fn role(&self, i: usize) -> String {
        if self.name == "Q2" {
            ["x", "y", "z", "w"][i].to_string()
        } else {
            i.to_string()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: String,
    pub handles: Vec<usize>,
    pub roles: Vec<(String, usize)>,
}

impl Witness {
    fn plain(kind: impl Into<String>, handles: Vec<usize>) -> Self {
        let roles = handles.iter().enumerate().map(|(i, &h)| (i.to_string(), h)).collect();
        Witness { kind: kind.into(), handles, roles }
    }
}

struct Embedder<'a> {
    lattice: &'a Lattice,
    pattern: &'a PosetPattern,
    members: &'a [usize],
    strong: bool,
    image: Vec<usize>,
    used: Vec<bool>,
}

impl Embedder<'_> {
    fn compatible(&self, pos: usize, h: usize) -> bool {
        (0..self.image.len()).all(|j| {
            if j == pos {
                return true;
            }
            let g = self.image[j];
            if g == usize::MAX {
                return true;
            }
            if g == h {
                return false;
            }
            let (pj, pi) = (self.pattern.less(j, pos), self.pattern.less(pos, j));
            if pj && !self.lattice.lt(g, h) || pi && !self.lattice.lt(h, g) {
                return false;
            }
            !(self.strong && !pj && !pi && self.lattice.comparable(g, h))
        })
    }

    fn run(&mut self, pos: usize) -> bool {
        if pos == self.image.len() {
            return true;
        }
        if self.image[pos] != usize::MAX {
            return self.run(pos + 1);
        }
        for idx in 0..self.members.len() {
            let h = self.members[idx];
            if self.used[idx] || !self.compatible(pos, h) {
                continue;
            }
            self.image[pos] = h;
            self.used[idx] = true;
            if self.run(pos + 1) {
                return true;
            }
            self.used[idx] = false;
            self.image[pos] = usize::MAX;
        }
        false
    }
}

fn embed(
    lattice: &Lattice,
    members: &[usize],
    pattern: &PosetPattern,
    strong: bool,
    anchor: Option<usize>,
) -> Result<Option<Witness>> {
    let m = pattern.size();
    if m > MAX_PATTERN_SIZE {
        return Err(Error::resource("pattern size", m, MAX_PATTERN_SIZE));
    }
    let anchored_positions: Vec<Option<usize>> = match anchor {
        None => vec![None],
        Some(_) => (0..m).map(Some).collect(),
    };
    for fixed in anchored_positions {
        let mut e = Embedder {
            lattice,
            pattern,
            members,
            strong,
            image: vec![usize::MAX; m],
            used: vec![false; members.len()],
        };
        if let (Some(p), Some(a)) = (fixed, anchor) {
            let Some(idx) = members.iter().position(|&h| h == a) else {
                return Ok(None);
            };
            e.image[p] = a;
            if !e.compatible(p, a) {
                continue;
            }
            e.used[idx] = true;
        }
        if e.run(0) {
            let roles = e.image.iter().enumerate().map(|(i, &h)| (pattern.role(i), h)).collect();
            let kind = format!("{}{}", if strong { "strong:" } else { "" }, pattern.name());
            return Ok(Some(Witness { kind, handles: e.image, roles }));
        }
    }
    Ok(None)
}

/// Injective ψ with u < v in the pattern ⇒ ψ(u) ⊊ ψ(v).
pub fn contains_weak(lattice: &Lattice, family: &Family, pattern: &PosetPattern) -> Result<Option<Witness>> {
    lattice.check_same(family)?;
    embed(lattice, &family.handles(), pattern, false, None)
}

/// Injective ψ with u < v in the pattern ⇔ ψ(u) ⊊ ψ(v).
pub fn contains_strong(lattice: &Lattice, family: &Family, pattern: &PosetPattern) -> Result<Option<Witness>> {
    lattice.check_same(family)?;
    embed(lattice, &family.handles(), pattern, true, None)
}

fn chain_search(lattice: &Lattice, members: &[usize], k: usize, anchor: Option<usize>) -> Option<Vec<usize>> {
    if k == 0 {
        return Some(Vec::new());
    }
    let m = members.len();
    // down[j]: longest chain ending at members[j], with predecessor links
    let mut down = vec![1usize; m];
    let mut prev = vec![usize::MAX; m];
    for j in 0..m {
        for i in 0..j {
            if down[i] + 1 > down[j] && lattice.lt(members[i], members[j]) {
                down[j] = down[i] + 1;
                prev[j] = i;
            }
        }
    }
    let mut up = vec![1usize; m];
    let mut next = vec![usize::MAX; m];
    for i in (0..m).rev() {
        for j in i + 1..m {
            if up[j] + 1 > up[i] && lattice.lt(members[i], members[j]) {
                up[i] = up[j] + 1;
                next[i] = j;
            }
        }
    }
    let centre = (0..m).find(|&i| {
        anchor.is_none_or(|a| members[i] == a) && down[i] + up[i] > k
    })?;
    let mut chain = Vec::new();
    let mut i = centre;
    while i != usize::MAX {
        chain.push(members[i]);
        i = prev[i];
    }
    chain.reverse();
    let mut i = next[centre];
    while i != usize::MAX {
        chain.push(members[i]);
        i = next[i];
    }
    // trim to exactly k elements keeping the centre
    let pos = chain.iter().position(|&h| h == members[centre]).unwrap();
    let start = pos.saturating_sub(k - 1).min(chain.len() - k);
    Some(chain[start..start + k].to_vec())
}

/// A chain of k members (the pattern P_k).
pub fn has_chain(lattice: &Lattice, family: &Family, k: usize) -> Result<Option<Witness>> {
    lattice.check_same(family)?;
    Ok(chain_search(lattice, &family.handles(), k, None).map(|c| Witness::plain(format!("P{k}"), c)))
}

fn diamond_scan(lattice: &Lattice, members: &[usize]) -> Option<Vec<usize>> {
    for (a, &x) in members.iter().enumerate() {
        for &w in members[a + 1..].iter().rev() {
            if lattice.dim(w) < lattice.dim(x) + 2 || !lattice.lt(x, w) {
                continue;
            }
            let mut between = members
                .iter()
                .filter(|&&y| y != x && y != w && lattice.lt(x, y) && lattice.lt(y, w));
            if let (Some(&y), Some(&z)) = (between.next(), between.next()) {
                return Some(vec![x, y, z, w]);
            }
        }
    }
    None
}

/// Weak copy of Q_2: x ⊊ y, z ⊊ w with y ≠ z.
pub fn has_diamond(lattice: &Lattice, family: &Family) -> Result<Option<Witness>> {
    lattice.check_same(family)?;
    Ok(diamond_scan(lattice, &family.handles()).map(|h| Witness {
        kind: "Q2".into(),
        roles: ["x", "y", "z", "w"].iter().zip(&h).map(|(r, &v)| (r.to_string(), v)).collect(),
        handles: h,
    }))
}

fn disjoint_search(lattice: &Lattice, members: &[usize], s: usize, anchor: Option<usize>) -> Option<Vec<usize>> {
    fn rec(lattice: &Lattice, cands: &[usize], s: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == s {
            return true;
        }
        for (i, &h) in cands.iter().enumerate() {
            if cands.len() - i < s - chosen.len() {
                break;
            }
            if chosen.iter().all(|&c| lattice.disjoint(c, h)) {
                chosen.push(h);
                if rec(lattice, &cands[i + 1..], s, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    match anchor {
        None => rec(lattice, members, s, &mut chosen).then_some(chosen),
        Some(a) => {
            let cands: Vec<usize> = members.iter().copied().filter(|&h| h != a && lattice.disjoint(a, h)).collect();
            chosen.push(a);
            if rec(lattice, &cands, s, &mut chosen) {
                chosen.sort_unstable();
                Some(chosen)
            } else {
                None
            }
        }
    }
}

/// s distinct members, pairwise disjoint (zero-dimensional meets).
pub fn has_s_disjoint(lattice: &Lattice, family: &Family, s: usize) -> Result<Option<Witness>> {
    lattice.check_same(family)?;
    if s < 2 {
        return Err(Error::domain(format!("s = {s} < 2")));
    }
    Ok(disjoint_search(lattice, &family.handles(), s, None).map(|h| Witness::plain(format!("disjoint:{s}"), h)))
}

/// Outcome of a cross-dependence check; `transversal` is a pairwise disjoint
/// choice V_i ∈ family_i when one exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossDependence {
    pub dependent: bool,
    pub transversal: Option<Vec<usize>>,
}

/// No choice V_1 ∈ F_1, ..., V_s ∈ F_s is pairwise disjoint. The same
/// element may be picked from several families; only the zero element is
/// disjoint from itself.
pub fn are_cross_dependent(lattice: &Lattice, families: &[Family]) -> Result<CrossDependence> {
    if families.len() < 2 {
        return Err(Error::domain("cross-dependence needs at least two families"));
    }
    for f in families {
        lattice.check_same(f)?;
    }
    let lists: Vec<Vec<usize>> = families.iter().map(Family::handles).collect();
    fn rec(lattice: &Lattice, lists: &[Vec<usize>], chosen: &mut Vec<usize>) -> bool {
        let i = chosen.len();
        if i == lists.len() {
            return true;
        }
        for &h in &lists[i] {
            if chosen.iter().all(|&c| lattice.disjoint(c, h)) {
                chosen.push(h);
                if rec(lattice, lists, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    let found = rec(lattice, &lists, &mut chosen);
    Ok(CrossDependence { dependent: !found, transversal: found.then_some(chosen) })
}

fn subset_label(mask: usize, d: usize) -> String {
    let parts: Vec<String> = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn algebra_witness(kind: String, members: &[usize], d: usize) -> Witness {
    let roles = members.iter().enumerate().map(|(mask, &h)| (subset_label(mask, d), h)).collect();
    Witness { kind, handles: members.to_vec(), roles }
}

fn boolean_algebra_search(lattice: &Lattice, members: &FixedBitSet, d: usize) -> Option<Vec<usize>> {
    let list: Vec<usize> = members.ones().collect();
    let mask = |h: usize| lattice.set_mask(h).unwrap();
    fn rec(
        lattice: &Lattice,
        members: &FixedBitSet,
        list: &[usize],
        d: usize,
        start: usize,
        base: u32,
        diffs: &mut Vec<u32>,
        sets: &mut Vec<usize>,
    ) -> bool {
        if diffs.len() == d {
            return true;
        }
        let used: u32 = diffs.iter().fold(0, |a, &b| a | b);
        for idx in start..list.len() {
            let h = list[idx];
            let m = lattice.set_mask(h).unwrap();
            if m & base != base || m == base {
                continue;
            }
            let diff = m & !base;
            if diff & used != 0 {
                continue;
            }
            let count = sets.len();
            let mut ok = true;
            for j in 0..count {
                let union = lattice.set_mask(sets[j]).unwrap() | diff;
                match lattice.handle_of_set(union) {
                    Some(u) if members.contains(u) => sets.push(u),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                diffs.push(diff);
                if rec(lattice, members, list, d, idx + 1, base, diffs, sets) {
                    return true;
                }
                diffs.pop();
            }
            sets.truncate(count);
        }
        false
    }
    for &x0 in &list {
        let mut diffs = Vec::new();
        let mut sets = vec![x0];
        if rec(lattice, members, &list, d, 0, mask(x0), &mut diffs, &mut sets) {
            return Some(sets);
        }
    }
    None
}

/// A d-dimensional Boolean algebra {X_0 ∪ ⋃_{i∈I} X_i : I ⊆ [d]} inside the
/// family, with X_1..X_d nonempty and pairwise disjoint and disjoint from X_0.
pub fn has_boolean_algebra(lattice: &Lattice, family: &Family, d: usize) -> Result<Option<Witness>> {
    lattice.check_same(family)?;
    check_algebra_args(lattice, d, true)?;
    Ok(boolean_algebra_search(lattice, family.bits(), d).map(|s| algebra_witness(format!("balg:{d}"), &s, d)))
}

fn q_algebra_search(lattice: &Lattice, members: &FixedBitSet, d: usize) -> Option<Vec<usize>> {
    let list: Vec<usize> = members.ones().collect();
    fn rec(
        lattice: &Lattice,
        members: &FixedBitSet,
        list: &[usize],
        d: usize,
        start: usize,
        chosen: usize,
        sums: &mut Vec<usize>,
    ) -> bool {
        if chosen == d {
            return true;
        }
        let base = sums[0];
        for idx in start..list.len() {
            let w = list[idx];
            if !lattice.lt(base, w) {
                continue;
            }
            let count = sums.len();
            let mut ok = true;
            for j in 0..count {
                let s = lattice.join(sums[j], w);
                if !members.contains(s) || sums.contains(&s) {
                    ok = false;
                    break;
                }
                sums.push(s);
            }
            if ok && rec(lattice, members, list, d, idx + 1, chosen + 1, sums) {
                return true;
            }
            sums.truncate(count);
        }
        false
    }
    for &w0 in &list {
        let mut sums = vec![w0];
        if rec(lattice, members, &list, d, 0, 0, &mut sums) {
            return Some(sums);
        }
    }
    None
}

/// A d-dimensional q-algebra, read as W_0 ⊊ W_i and all 2^d sums
/// W_0 + Σ_{i∈I} W_i pairwise distinct members of the family.
pub fn has_q_algebra(lattice: &Lattice, family: &Family, d: usize) -> Result<Option<Witness>> {
    lattice.check_same(family)?;
    check_algebra_args(lattice, d, false)?;
    Ok(q_algebra_search(lattice, family.bits(), d).map(|s| algebra_witness(format!("qalg:{d}"), &s, d)))
}

fn check_algebra_args(lattice: &Lattice, d: usize, boolean: bool) -> Result<()> {
    if d < 1 {
        return Err(Error::domain("algebra dimension must be at least 1"));
    }
    let cap = if boolean { MAX_BOOLEAN_ALGEBRA_DIM } else { MAX_Q_ALGEBRA_DIM };
    if d > cap {
        return Err(Error::resource("algebra dimension d", d, cap));
    }
    if boolean != lattice.is_boolean() {
        return Err(Error::usage(if boolean {
            "Boolean algebras are searched in B_n"
        } else {
            "q-algebras are searched in L_n(q)"
        }));
    }
    Ok(())
}

/// A forbidden configuration as used by the search and the CLI.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Forbidden {
    /// P_k, a chain of k members.
    Chain(usize),
    Diamond,
    Disjoint(usize),
    BooleanAlgebra(usize),
    QAlgebra(usize),
    Weak(PosetPattern),
    Strong(PosetPattern),
}

impl fmt::Display for Forbidden {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forbidden::Chain(k) => write!(f, "chain:{k}"),
            Forbidden::Diamond => write!(f, "Q2"),
            Forbidden::Disjoint(s) => write!(f, "disjoint:{s}"),
            Forbidden::BooleanAlgebra(d) => write!(f, "balg:{d}"),
            Forbidden::QAlgebra(d) => write!(f, "qalg:{d}"),
            Forbidden::Weak(p) => write!(f, "weak:{}", p.name()),
            Forbidden::Strong(p) => write!(f, "strong:{}", p.name()),
        }
    }
}

impl std::str::FromStr for Forbidden {
    type Err = Error;

    /// Accepts `P<k>`, `chain:<k>`, `Q2`, `diamond`, `disjoint:<s>`,
    /// `balg:<d>`, `qalg:<d>`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| t.parse::<usize>().map_err(|_| Error::usage(format!("bad number in pattern '{s}'")));
        let lower = s.to_ascii_lowercase();
        let parsed = if lower == "q2" || lower == "diamond" {
            Forbidden::Diamond
        } else if let Some(k) = lower.strip_prefix("chain:") {
            Forbidden::Chain(num(k)?)
        } else if let Some(k) = lower.strip_prefix('p') {
            Forbidden::Chain(num(k)?)
        } else if let Some(t) = lower.strip_prefix("disjoint:") {
            Forbidden::Disjoint(num(t)?)
        } else if let Some(t) = lower.strip_prefix("balg:") {
            Forbidden::BooleanAlgebra(num(t)?)
        } else if let Some(t) = lower.strip_prefix("qalg:") {
            Forbidden::QAlgebra(num(t)?)
        } else {
            return Err(Error::usage(format!("unknown pattern '{s}'")));
        };
        match parsed {
            Forbidden::Chain(0) => Err(Error::usage("chain length must be positive")),
            Forbidden::Disjoint(s) if s < 2 => Err(Error::usage("disjoint:s needs s ≥ 2")),
            p => Ok(p),
        }
    }
}

impl Forbidden {
    /// Rejects configurations that do not apply to the lattice.
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        match self {
            Forbidden::BooleanAlgebra(d) => check_algebra_args(lattice, *d, true),
            Forbidden::QAlgebra(d) => check_algebra_args(lattice, *d, false),
            Forbidden::Weak(p) | Forbidden::Strong(p) if p.size() > MAX_PATTERN_SIZE => {
                Err(Error::resource("pattern size", p.size(), MAX_PATTERN_SIZE))
            }
            Forbidden::Disjoint(s) if *s < 2 => Err(Error::domain("s < 2")),
            _ => Ok(()),
        }
    }

    pub fn find(&self, lattice: &Lattice, family: &Family) -> Result<Option<Witness>> {
        match self {
            Forbidden::Chain(k) => has_chain(lattice, family, *k),
            Forbidden::Diamond => has_diamond(lattice, family),
            Forbidden::Disjoint(s) => has_s_disjoint(lattice, family, *s),
            Forbidden::BooleanAlgebra(d) => has_boolean_algebra(lattice, family, *d),
            Forbidden::QAlgebra(d) => has_q_algebra(lattice, family, *d),
            Forbidden::Weak(p) => contains_weak(lattice, family, p),
            Forbidden::Strong(p) => contains_strong(lattice, family, p),
        }
    }

    /// Whether adding `new` to a family that is free of the configuration
    /// creates a copy. Callers validate first.
    pub fn creates(&self, lattice: &Lattice, members: &FixedBitSet, new: usize) -> bool {
        let mut with = members.clone();
        with.insert(new);
        let list: Vec<usize> = with.ones().collect();
        match self {
            Forbidden::Chain(k) => chain_search(lattice, &list, *k, Some(new)).is_some(),
            Forbidden::Diamond => embed(lattice, &list, &PosetPattern::diamond(), false, Some(new))
                .unwrap()
                .is_some(),
            Forbidden::Disjoint(s) => disjoint_search(lattice, &list, *s, Some(new)).is_some(),
            Forbidden::BooleanAlgebra(d) => boolean_algebra_search(lattice, &with, *d).is_some(),
            Forbidden::QAlgebra(d) => q_algebra_search(lattice, &with, *d).is_some(),
            Forbidden::Weak(p) => embed(lattice, &list, p, false, Some(new)).unwrap().is_some(),
            Forbidden::Strong(p) => embed(lattice, &list, p, true, Some(new)).unwrap().is_some(),
        }
    }
}
