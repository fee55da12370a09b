use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{rref_level, Lattice, Store};
use crate::algebra::FieldElement;
use crate::error::{Error, Result};

/// A set of lattice elements, tied to the lattice that produced it.
#[derive(Clone)]
pub struct Family {
    lattice_id: u64,
    members: FixedBitSet,
    profile: Vec<usize>,
}

impl PartialEq for Family {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for Family {}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.ones()).finish()
    }
}

impl Family {
    pub(crate) fn lattice_id(&self) -> u64 {
        self.lattice_id
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn contains(&self, h: usize) -> bool {
        self.members.contains(h)
    }

    /// Handles in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    pub fn handles(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.members
    }

    /// Number of members on each level 0..=n.
    pub fn profile(&self) -> &[usize] {
        &self.profile
    }

    /// Levels with at least one member.
    pub fn levels(&self) -> Vec<usize> {
        (0..self.profile.len()).filter(|&i| self.profile[i] > 0).collect()
    }

    fn check(&self, other: &Family) -> Result<()> {
        if self.lattice_id != other.lattice_id {
            return Err(Error::usage("families belong to different lattices"));
        }
        Ok(())
    }

    fn rebuilt(&self, members: FixedBitSet, lattice: &Lattice) -> Family {
        lattice.family_from_bits(members)
    }

    pub fn union(&self, other: &Family, lattice: &Lattice) -> Result<Family> {
        self.check(other)?;
        let mut m = self.members.clone();
        m.union_with(&other.members);
        Ok(self.rebuilt(m, lattice))
    }

    pub fn intersection(&self, other: &Family, lattice: &Lattice) -> Result<Family> {
        self.check(other)?;
        let mut m = self.members.clone();
        m.intersect_with(&other.members);
        Ok(self.rebuilt(m, lattice))
    }

    pub fn is_subfamily_of(&self, other: &Family) -> Result<bool> {
        self.check(other)?;
        Ok(self.members.is_subset(&other.members))
    }
}

impl Lattice {
    pub fn family_from_bits(&self, mut members: FixedBitSet) -> Family {
        members.grow(self.size());
        let mut profile = vec![0usize; self.n + 1];
        for h in members.ones() {
            profile[self.dim(h)] += 1;
        }
        Family { lattice_id: self.id, members, profile }
    }

    pub fn family<I: IntoIterator<Item = usize>>(&self, handles: I) -> Result<Family> {
        let mut bits = FixedBitSet::with_capacity(self.size());
        for h in handles {
            if h >= self.size() {
                return Err(Error::usage(format!("handle {h} out of range for {}", self.name())));
            }
            bits.insert(h);
        }
        Ok(self.family_from_bits(bits))
    }

    /// Each element kept with probability 1/2, from a seeded stream.
    pub fn random_family(&self, seed: u64, stream: u64) -> Family {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut bits = FixedBitSet::with_capacity(self.size());
        for h in 0..self.size() {
            if rng.gen_bool(0.5) {
                bits.insert(h);
            }
        }
        self.family_from_bits(bits)
    }

    pub fn empty_family(&self) -> Family {
        self.family_from_bits(FixedBitSet::with_capacity(self.size()))
    }

    pub fn full_family(&self) -> Family {
        let mut bits = FixedBitSet::with_capacity(self.size());
        bits.insert_range(..);
        self.family_from_bits(bits)
    }

    /// All elements whose dimension lies in `levels`.
    pub fn levels_family(&self, levels: &[usize]) -> Result<Family> {
        let mut bits = FixedBitSet::with_capacity(self.size());
        for &i in levels {
            if i > self.n {
                return Err(Error::usage(format!("level {i} exceeds rank {}", self.n)));
            }
            bits.insert_range(self.level(i));
        }
        Ok(self.family_from_bits(bits))
    }

    pub fn complement(&self, family: &Family) -> Result<Family> {
        self.check_same(family)?;
        let mut bits = family.members.clone();
        bits.toggle_range(..);
        Ok(self.family_from_bits(bits))
    }

    /// Elements of dimension dim(h) - 1 inside h.
    pub fn lower_covers(&self, h: usize) -> Vec<usize> {
        let k = self.dim(h);
        if k == 0 {
            return Vec::new();
        }
        if let Some(down) = self.down_set(h) {
            return down.ones().filter(|&x| self.dim(x) + 1 == k).collect();
        }
        match &self.store {
            Store::Boolean(m) => {
                let mask = m[h];
                let mut out: Vec<usize> = (0..self.n)
                    .filter(|x| mask >> x & 1 == 1)
                    .map(|x| self.handle_of_set(mask & !(1 << x)).unwrap())
                    .collect();
                out.sort_unstable();
                out
            }
            Store::Linear { field, .. } => {
                // hyperplanes of h are images of hyperplanes of F_q^k
                let basis = self.digits(h);
                let mut out: Vec<usize> = rref_level(field, k, k - 1)
                    .into_iter()
                    .map(|coeffs| {
                        let vectors: Vec<Vec<u8>> = coeffs
                            .iter()
                            .map(|&code| {
                                let c = field.decode(code, k);
                                let mut v = vec![0u8; self.n];
                                for (ci, row) in c.iter().zip(&basis) {
                                    field.axpy(FieldElement(*ci), row, &mut v);
                                }
                                v
                            })
                            .collect();
                        self.handle_of_span(&vectors).unwrap()
                    })
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// Elements of dimension dim(h) + 1 containing h.
    pub fn upper_covers(&self, h: usize) -> Vec<usize> {
        let k = self.dim(h);
        if k == self.n {
            return Vec::new();
        }
        if let Some(up) = self.up_set(h) {
            return up.ones().filter(|&x| self.dim(x) == k + 1).collect();
        }
        match &self.store {
            Store::Boolean(m) => {
                let mask = m[h];
                let mut out: Vec<usize> = (0..self.n)
                    .filter(|x| mask >> x & 1 == 0)
                    .map(|x| self.handle_of_set(mask | 1 << x).unwrap())
                    .collect();
                out.sort_unstable();
                out
            }
            Store::Linear { field, .. } => {
                let basis = self.digits(h);
                let q = field.q() as u64;
                let mut out = BTreeSet::new();
                for code in 1..q.pow(self.n as u32) {
                    let v = field.decode(code, self.n);
                    // only vectors with leading digit 1 to skip scalar multiples
                    if v.iter().find(|&&d| d != 0) != Some(&1) {
                        continue;
                    }
                    let mut stacked = basis.clone();
                    stacked.push(v);
                    if field.rank(&stacked) == k + 1 {
                        out.insert(self.handle_of_span(&stacked).unwrap());
                    }
                }
                out.into_iter().collect()
            }
        }
    }

    /// The (k-1)-shadow of a family whose members all have dimension k.
    pub fn shadow(&self, family: &Family) -> Result<Family> {
        self.check_same(family)?;
        let levels = family.levels();
        if levels.len() > 1 {
            return Err(Error::usage("shadow needs a family on a single level"));
        }
        if levels == [0] {
            return Err(Error::usage("the zero element has no shadow"));
        }
        let mut bits = FixedBitSet::with_capacity(self.size());
        for h in family.iter() {
            for x in self.lower_covers(h) {
                bits.insert(x);
            }
        }
        Ok(self.family_from_bits(bits))
    }

    /// The (k+1)-shade of a family on one level.
    pub fn shade(&self, family: &Family) -> Result<Family> {
        self.check_same(family)?;
        if family.levels().len() > 1 {
            return Err(Error::usage("shade needs a family on a single level"));
        }
        let mut bits = FixedBitSet::with_capacity(self.size());
        for h in family.iter() {
            for x in self.upper_covers(h) {
                bits.insert(x);
            }
        }
        Ok(self.family_from_bits(bits))
    }

    /// No member strictly contains another.
    pub fn is_antichain(&self, family: &Family) -> Result<bool> {
        self.check_same(family)?;
        let members = family.handles();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if self.comparable(a, b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Closed under taking subspaces (subsets).
    pub fn is_complex(&self, family: &Family) -> Result<bool> {
        self.check_same(family)?;
        Ok(family.iter().all(|h| self.lower_covers(h).into_iter().all(|x| family.contains(x))))
    }

    /// Closed under taking superspaces (supersets).
    pub fn is_upset(&self, family: &Family) -> Result<bool> {
        self.check_same(family)?;
        Ok(family.iter().all(|h| self.upper_covers(h).into_iter().all(|x| family.contains(x))))
    }

    pub fn upset_of(&self, family: &Family) -> Result<Family> {
        self.check_same(family)?;
        self.close(family, true)
    }

    pub fn downset_of(&self, family: &Family) -> Result<Family> {
        self.check_same(family)?;
        self.close(family, false)
    }

    fn close(&self, family: &Family, upward: bool) -> Result<Family> {
        let mut bits = family.members.clone();
        if let Some(rel) = &self.relation {
            let table = if upward { &rel.up } else { &rel.down };
            for h in family.iter() {
                bits.union_with(&table[h]);
            }
            return Ok(self.family_from_bits(bits));
        }
        let mut stack: Vec<usize> = family.handles();
        while let Some(h) = stack.pop() {
            let next = if upward { self.upper_covers(h) } else { self.lower_covers(h) };
            for x in next {
                if !bits.put(x) {
                    stack.push(x);
                }
            }
        }
        Ok(self.family_from_bits(bits))
    }
}

#[cfg(test)]
mod tests {
    use super::super::LatticeCaps;
    use super::*;
    use crate::lattice::LatticeSpec;

    #[test]
    fn shadow_of_planes_is_all_lines() {
        let l = Lattice::linear(2, 3).unwrap();
        let planes = l.levels_family(&[2]).unwrap();
        let sh = l.shadow(&planes).unwrap();
        assert_eq!(sh, l.levels_family(&[1]).unwrap());
        let one = l.family([l.level(2).start]).unwrap();
        assert_eq!(l.shadow(&one).unwrap().len(), 3);
    }

    #[test]
    fn shadow_rejects_mixed_levels() {
        let l = Lattice::linear(2, 3).unwrap();
        let mixed = l.family([1, 8]).unwrap();
        assert!(matches!(l.shadow(&mixed), Err(Error::Usage(_))));
    }

    #[test]
    fn covers_without_table_match_table() {
        let caps = LatticeCaps { relation_threshold: 0, ..Default::default() };
        for spec in [LatticeSpec::Linear(2), LatticeSpec::Linear(3), LatticeSpec::Boolean] {
            let raw = Lattice::build(spec, 3, &caps).unwrap();
            let tab = Lattice::build(spec, 3, &LatticeCaps::default()).unwrap();
            for h in 0..raw.size() {
                assert_eq!(raw.lower_covers(h), tab.lower_covers(h), "{spec} {h}");
                assert_eq!(raw.upper_covers(h), tab.upper_covers(h), "{spec} {h}");
            }
        }
    }

    #[test]
    fn complexes_and_upsets() {
        let l = Lattice::linear(2, 3).unwrap();
        let top = l.family([l.top()]).unwrap();
        assert_eq!(l.downset_of(&top).unwrap().len(), 16);
        let lines = l.levels_family(&[0, 1]).unwrap();
        assert!(l.is_complex(&lines).unwrap());
        assert!(!l.is_complex(&l.levels_family(&[1]).unwrap()).unwrap());
        let up = l.upset_of(&l.family([1]).unwrap()).unwrap();
        assert_eq!(up.profile(), &[0, 1, 3, 1]);
        assert!(l.is_upset(&up).unwrap());
        let comp = l.complement(&up).unwrap();
        assert!(l.is_complex(&comp).unwrap());
    }

    #[test]
    fn families_from_other_lattice_rejected() {
        let a = Lattice::linear(2, 2).unwrap();
        let b = Lattice::linear(2, 2).unwrap();
        let f = b.full_family();
        assert!(matches!(a.is_antichain(&f), Err(Error::Usage(_))));
        assert!(a.family([99]).is_err());
    }

    #[test]
    fn antichain_check() {
        let b = Lattice::boolean(3).unwrap();
        assert!(b.is_antichain(&b.levels_family(&[1]).unwrap()).unwrap());
        assert!(!b.is_antichain(&b.levels_family(&[1, 2]).unwrap()).unwrap());
        assert!(b.is_antichain(&b.empty_family()).unwrap());
    }
}
