//! The Boolean lattice B_n and the subspace lattices L_n(q), materialized
//! element by element behind one interface.
//!
//! Every element has a dense integer handle. Handles are sorted by dimension
//! and then lexicographically by the digits of the canonical reduced row
//! echelon basis, read row after row. A subset H of [n] is identified with
//! the coordinate subspace spanned by {e_x : x ∈ H}; its "rows" are those unit
//! vectors, so both kinds of lattice share the ordering rule and the cache
//! file layout.
//!
//! Note that "disjoint" means a zero-dimensional meet. The zero subspace is
//! therefore disjoint from every element, itself included.

mod cache;
mod family;

use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use num_traits::ToPrimitive;

pub use cache::{load_lattice, load_lattice_with_caps, save_lattice, CACHE_VERSION};
pub use family::Family;

use crate::algebra::{binomial, gauss_binom, FieldSpec};
use crate::error::{Error, Result};

static NEXT_LATTICE_ID: AtomicU64 = AtomicU64::new(1);

/// Which lattice to build: B_n or L_n(q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeSpec {
    Boolean,
    Linear(u32),
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeSpec::Boolean => write!(f, "B"),
            LatticeSpec::Linear(q) => write!(f, "{q}"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LatticeCaps {
    /// Largest allowed level of a linear lattice.
    pub max_level_size: u64,
    pub max_boolean_n: usize,
    /// Containment is tabulated up to this many elements.
    pub relation_threshold: usize,
    pub max_q: u32,
}

impl Default for LatticeCaps {
    fn default() -> Self {
        LatticeCaps {
            max_level_size: 1 << 20,
            max_boolean_n: 24,
            relation_threshold: 4096,
            max_q: crate::algebra::field::DEFAULT_MAX_Q,
        }
    }
}

/// A subspace given by its canonical RREF basis. Rows are base-q integers
/// with the first coordinate as most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    pub dim: usize,
    pub rows: Vec<u64>,
}

enum Store {
    /// Subset masks, bit x for element x.
    Boolean(Vec<u32>),
    /// RREF rows, level by level; level i stores `i` rows per element.
    Linear { field: FieldSpec, rows: Vec<u64>, row_start: Vec<usize> },
}

struct Relation {
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
}

pub struct Lattice {
    id: u64,
    n: usize,
    level_start: Vec<usize>,
    dims: Vec<u8>,
    store: Store,
    relation: Option<Relation>,
    disjoint: OnceLock<Vec<FixedBitSet>>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("spec", &self.spec())
            .field("n", &self.n)
            .field("levels", &self.level_sizes())
            .finish()
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.spec() == other.spec()
            && self.level_start == other.level_start
            && match (&self.store, &other.store) {
                (Store::Boolean(a), Store::Boolean(b)) => a == b,
                (Store::Linear { rows: a, .. }, Store::Linear { rows: b, .. }) => a == b,
                _ => false,
            }
    }
}

fn cmp_boolean(a: u32, b: u32) -> Ordering {
    // Same popcount assumed. The lowest differing bit decides: the set that
    // has it carries the larger unit row at the first differing position.
    if a == b {
        Ordering::Equal
    } else if a & (a ^ b) & (a ^ b).wrapping_neg() != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All k×n RREF matrices over the field, as encoded row lists.
fn rref_level(field: &FieldSpec, n: usize, k: usize) -> Vec<Vec<u64>> {
    let q = field.q() as u64;
    let mut out = Vec::new();
    for pivots in combinations(n, k) {
        // free slots: (row r, column c) with c > pivot_r and c not a pivot
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| {
                let pivots = &pivots;
                ((pivots[r] + 1)..n)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let total = q.pow(free.len() as u32);
        for code in 0..total {
            let mut m = vec![vec![0u8; n]; k];
            for (r, &p) in pivots.iter().enumerate() {
                m[r][p] = 1;
            }
            let mut c = code;
            for &(r, col) in &free {
                m[r][col] = (c % q) as u8;
                c /= q;
            }
            out.push(m.iter().map(|row| field.encode(row)).collect());
        }
    }
    out.sort();
    out
}

impl Lattice {
    pub fn build(spec: LatticeSpec, n: usize, caps: &LatticeCaps) -> Result<Self> {
        match spec {
            LatticeSpec::Boolean => Self::build_boolean(n, caps),
            LatticeSpec::Linear(q) => {
                let field = FieldSpec::with_max_q(q, caps.max_q)?;
                Self::build_linear(field, n, caps)
            }
        }
    }

    pub fn boolean(n: usize) -> Result<Self> {
        Self::build(LatticeSpec::Boolean, n, &LatticeCaps::default())
    }

    pub fn linear(q: u32, n: usize) -> Result<Self> {
        Self::build(LatticeSpec::Linear(q), n, &LatticeCaps::default())
    }

    fn build_boolean(n: usize, caps: &LatticeCaps) -> Result<Self> {
        if n > caps.max_boolean_n {
            return Err(Error::resource("boolean lattice rank n", n, caps.max_boolean_n));
        }
        let mut level_start = vec![0usize];
        let mut masks = Vec::with_capacity(1 << n);
        for k in 0..=n {
            let mut level: Vec<u32> = (0..(1u64 << n))
                .map(|m| m as u32)
                .filter(|m| m.count_ones() as usize == k)
                .collect();
            level.sort_by(|&a, &b| cmp_boolean(a, b));
            masks.extend(level);
            level_start.push(masks.len());
        }
        Ok(Self::assemble(n, level_start, Store::Boolean(masks), caps))
    }

    fn build_linear(field: FieldSpec, n: usize, caps: &LatticeCaps) -> Result<Self> {
        for k in 0..=n {
            let size = gauss_binom(n as i64, k as i64, field.q())?;
            if size.to_u64().is_none_or(|s| s > caps.max_level_size) {
                return Err(Error::resource(
                    format!("level {k} of L_{n}({})", field.q()),
                    size,
                    caps.max_level_size,
                ));
            }
        }
        if field.q() > 1 && (n as f64) * (field.q() as f64).log2() > 63.0 {
            return Err(Error::resource("vector encoding bits", n, "63 bits"));
        }
        let mut level_start = vec![0usize];
        let mut row_start = vec![0usize];
        let mut rows = Vec::new();
        for k in 0..=n {
            let level = rref_level(&field, n, k);
            let count = level.len();
            for r in level {
                rows.extend(r);
            }
            level_start.push(level_start[k] + count);
            row_start.push(rows.len());
        }
        Ok(Self::assemble(n, level_start, Store::Linear { field, rows, row_start }, caps))
    }

    fn assemble(n: usize, level_start: Vec<usize>, store: Store, caps: &LatticeCaps) -> Self {
        let size = *level_start.last().unwrap();
        let mut dims = vec![0u8; size];
        for k in 0..=n {
            for d in &mut dims[level_start[k]..level_start[k + 1]] {
                *d = k as u8;
            }
        }
        let mut lattice = Lattice {
            id: NEXT_LATTICE_ID.fetch_add(1, AtomicOrdering::Relaxed),
            n,
            level_start,
            dims,
            store,
            relation: None,
            disjoint: OnceLock::new(),
        };
        if size <= caps.relation_threshold {
            lattice.relation = Some(lattice.tabulate_relation());
        }
        lattice
    }

    fn tabulate_relation(&self) -> Relation {
        let size = self.size();
        let mut up = vec![FixedBitSet::with_capacity(size); size];
        let mut down = vec![FixedBitSet::with_capacity(size); size];
        for a in 0..size {
            for b in self.level_start[self.dim(a)]..size {
                if self.compute_le(a, b) {
                    up[a].insert(b);
                    down[b].insert(a);
                }
            }
        }
        Relation { up, down }
    }

    pub fn spec(&self) -> LatticeSpec {
        match &self.store {
            Store::Boolean(_) => LatticeSpec::Boolean,
            Store::Linear { field, .. } => LatticeSpec::Linear(field.q()),
        }
    }

    pub fn is_boolean(&self) -> bool {
        matches!(self.store, Store::Boolean(_))
    }

    pub fn field(&self) -> Option<&FieldSpec> {
        match &self.store {
            Store::Boolean(_) => None,
            Store::Linear { field, .. } => Some(field),
        }
    }

    /// The digit base used for rows: q, or 2 for the Boolean lattice.
    pub fn row_base(&self) -> u32 {
        self.field().map_or(2, FieldSpec::q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        *self.level_start.last().unwrap()
    }

    pub fn level(&self, i: usize) -> Range<usize> {
        self.level_start[i]..self.level_start[i + 1]
    }

    pub fn level_size(&self, i: usize) -> usize {
        self.level_start[i + 1] - self.level_start[i]
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        (0..=self.n).map(|i| self.level_size(i)).collect()
    }

    /// Exact level size as a number: C(n, i) or [n, i]_q.
    pub fn level_count(&self, i: usize) -> num_bigint::BigUint {
        match self.spec() {
            LatticeSpec::Boolean => binomial(self.n as i64, i as i64).unwrap(),
            LatticeSpec::Linear(q) => gauss_binom(self.n as i64, i as i64, q).unwrap(),
        }
    }

    #[inline]
    pub fn dim(&self, h: usize) -> usize {
        self.dims[h] as usize
    }

    pub fn zero(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.size() - 1
    }

    pub fn has_relation_table(&self) -> bool {
        self.relation.is_some()
    }

    /// Subset mask of a Boolean element (bit x for element x).
    pub fn set_mask(&self, h: usize) -> Option<u32> {
        match &self.store {
            Store::Boolean(m) => Some(m[h]),
            Store::Linear { .. } => None,
        }
    }

    pub fn rows(&self, h: usize) -> Vec<u64> {
        match &self.store {
            Store::Boolean(m) => {
                let mask = m[h];
                (0..self.n)
                    .filter(|x| mask >> x & 1 == 1)
                    .map(|x| 1u64 << (self.n - 1 - x))
                    .collect()
            }
            Store::Linear { rows, row_start, .. } => {
                let k = self.dim(h);
                let start = row_start[k] + (h - self.level_start[k]) * k;
                rows[start..start + k].to_vec()
            }
        }
    }

    pub fn subspace(&self, h: usize) -> Subspace {
        Subspace { dim: self.dim(h), rows: self.rows(h) }
    }

    /// Row digits of the canonical basis.
    pub fn digits(&self, h: usize) -> Vec<Vec<u8>> {
        let base = self.row_base() as u64;
        self.rows(h)
            .into_iter()
            .map(|mut code| {
                let mut v = vec![0u8; self.n];
                for slot in v.iter_mut().rev() {
                    *slot = (code % base) as u8;
                    code /= base;
                }
                v
            })
            .collect()
    }

    /// Rows rendered as digit strings, e.g. `["100", "011"]`.
    pub fn row_strings(&self, h: usize) -> Vec<String> {
        self.digits(h)
            .iter()
            .map(|row| row.iter().map(|&d| char::from_digit(d as u32, 36).unwrap()).collect())
            .collect()
    }

    fn lookup_linear(&self, key: &[u64]) -> Option<usize> {
        let Store::Linear { rows, row_start, .. } = &self.store else {
            return None;
        };
        let k = key.len();
        if k > self.n {
            return None;
        }
        let count = self.level_size(k);
        if k == 0 {
            return Some(self.level_start[0]);
        }
        let slice = &rows[row_start[k]..row_start[k + 1]];
        let (mut lo, mut hi) = (0usize, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match slice[mid * k..(mid + 1) * k].cmp(key) {
                Ordering::Equal => return Some(self.level_start[k] + mid),
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
            }
        }
        None
    }

    pub fn handle_of_set(&self, mask: u32) -> Option<usize> {
        let Store::Boolean(masks) = &self.store else {
            return None;
        };
        if self.n < 32 && mask >> self.n != 0 {
            return None;
        }
        let k = mask.count_ones() as usize;
        let level = &masks[self.level(k)];
        level
            .binary_search_by(|&m| cmp_boolean(m, mask))
            .ok()
            .map(|i| self.level_start[k] + i)
    }

    /// Handle of a canonical RREF row list, if it is one.
    pub fn handle_of_rows(&self, rows: &[u64]) -> Option<usize> {
        match &self.store {
            Store::Boolean(_) => {
                let mut mask = 0u32;
                for &r in rows {
                    if !r.is_power_of_two() || r >= 1u64 << self.n {
                        return None;
                    }
                    mask |= 1 << (self.n - 1 - r.trailing_zeros() as usize);
                }
                let h = self.handle_of_set(mask)?;
                (self.rows(h) == rows).then_some(h)
            }
            Store::Linear { .. } => self.lookup_linear(rows),
        }
    }

    /// Handle of the span of arbitrary vectors given as digit rows.
    pub fn handle_of_span(&self, vectors: &[Vec<u8>]) -> Result<usize> {
        if vectors.iter().any(|v| v.len() != self.n) {
            return Err(Error::usage(format!("vectors must have length {}", self.n)));
        }
        match &self.store {
            Store::Boolean(_) => {
                // a span of unit vectors is a coordinate subspace; other spans
                // are not Boolean elements
                let mut mask = 0u32;
                for v in vectors {
                    let ones: Vec<usize> = (0..self.n).filter(|&x| v[x] != 0).collect();
                    match ones.as_slice() {
                        [] => {}
                        [x] if v[*x] == 1 => mask |= 1 << x,
                        _ => return Err(Error::usage("vector is not a unit vector of B_n")),
                    }
                }
                Ok(self.handle_of_set(mask).expect("every subset is present"))
            }
            Store::Linear { field, .. } => {
                let mut m = vectors.to_vec();
                field.rref(&mut m);
                let key: Vec<u64> = m.iter().map(|r| field.encode(r)).collect();
                Ok(self.lookup_linear(&key).expect("every RREF matrix is enumerated"))
            }
        }
    }

    fn compute_le(&self, a: usize, b: usize) -> bool {
        if self.dim(a) > self.dim(b) {
            return false;
        }
        match &self.store {
            Store::Boolean(m) => m[a] & !m[b] == 0,
            Store::Linear { field, .. } => {
                let basis = self.digits(b);
                let pivots: Vec<usize> =
                    basis.iter().map(|r| r.iter().position(|&d| d != 0).unwrap()).collect();
                self.digits(a).into_iter().all(|mut v| {
                    for (row, &p) in basis.iter().zip(&pivots) {
                        if v[p] != 0 {
                            let f = field.neg(crate::algebra::FieldElement(v[p]));
                            field.axpy(f, row, &mut v);
                        }
                    }
                    v.iter().all(|&d| d == 0)
                })
            }
        }
    }

    /// a ⊆ b.
    #[inline]
    pub fn le(&self, a: usize, b: usize) -> bool {
        match &self.relation {
            Some(rel) => rel.up[a].contains(b),
            None => self.compute_le(a, b),
        }
    }

    /// a ⊊ b.
    #[inline]
    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.le(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.le(a, b) || self.le(b, a)
    }

    /// Elements containing `h` (including `h`), when tabulated.
    pub fn up_set(&self, h: usize) -> Option<&FixedBitSet> {
        self.relation.as_ref().map(|r| &r.up[h])
    }

    /// Elements contained in `h` (including `h`), when tabulated.
    pub fn down_set(&self, h: usize) -> Option<&FixedBitSet> {
        self.relation.as_ref().map(|r| &r.down[h])
    }

    /// Dimension of a ∩ b (size of the intersection on the Boolean side).
    pub fn meet_dim(&self, a: usize, b: usize) -> usize {
        match &self.store {
            Store::Boolean(m) => (m[a] & m[b]).count_ones() as usize,
            Store::Linear { field, .. } => {
                let mut stacked = self.digits(a);
                stacked.extend(self.digits(b));
                self.dim(a) + self.dim(b) - field.rank(&stacked)
            }
        }
    }

    /// a + b (union on the Boolean side).
    pub fn join(&self, a: usize, b: usize) -> usize {
        match &self.store {
            Store::Boolean(m) => self.handle_of_set(m[a] | m[b]).unwrap(),
            Store::Linear { .. } => {
                let mut stacked = self.digits(a);
                stacked.extend(self.digits(b));
                self.handle_of_span(&stacked).unwrap()
            }
        }
    }

    /// Sum of several elements.
    pub fn join_all(&self, items: &[usize]) -> usize {
        items.iter().fold(self.zero(), |acc, &h| self.join(acc, h))
    }

    #[inline]
    pub fn disjoint(&self, a: usize, b: usize) -> bool {
        match self.disjoint.get() {
            Some(table) => table[a].contains(b),
            None => self.meet_dim(a, b) == 0,
        }
    }

    /// Tabulates pairwise disjointness. Cheap for desk-scale lattices and
    /// makes the pattern detectors much faster.
    pub fn tabulate_disjointness(&self) {
        if self.size() > 4096 {
            return;
        }
        self.disjoint.get_or_init(|| {
            let size = self.size();
            let mut table = vec![FixedBitSet::with_capacity(size); size];
            for a in 0..size {
                for b in a..size {
                    if self.dim(a) + self.dim(b) > self.n && self.dim(a) > 0 {
                        continue;
                    }
                    if self.meet_dim(a, b) == 0 {
                        table[a].insert(b);
                        table[b].insert(a);
                    }
                }
            }
            table
        });
    }

    pub(crate) fn check_same(&self, family: &Family) -> Result<()> {
        if family.lattice_id() != self.id {
            return Err(Error::usage("family belongs to a different lattice"));
        }
        Ok(())
    }

    /// Short human-readable name, e.g. `L_3(2)` or `B_4`.
    pub fn name(&self) -> String {
        match self.spec() {
            LatticeSpec::Boolean => format!("B_{}", self.n),
            LatticeSpec::Linear(q) => format!("L_{}({q})", self.n),
        }
    }

    /// SHA-256 of the cache serialization (without its trailing digest line).
    pub fn digest(&self) -> String {
        cache::digest_hex(&cache::body_bytes(self))
    }
}
