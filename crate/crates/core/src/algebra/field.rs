//! Arithmetic in GF(q) for small prime powers q.
//!
//! Elements are encoded by an index in `[0, q)`. For a prime field the index is
//! the residue. For q = p^e with e > 1 the index is the coefficient vector of a
//! polynomial of degree < e read in base p (constant term least significant),
//! reduced modulo a fixed monic irreducible polynomial from [`MODULI`].

use std::fmt;

use crate::error::{Error, Result};

/// Default upper limit on q.
pub const DEFAULT_MAX_Q: u32 = 16;

/// Built-in moduli for the non-prime fields, coefficients from the constant
/// term upwards. Each polynomial is monic and irreducible over GF(p).
pub const MODULI: &[(u32, u32, &[u32])] = &[
    (4, 2, &[1, 1, 1]),     // x^2 + x + 1
    (8, 2, &[1, 1, 0, 1]),  // x^3 + x + 1
    (9, 3, &[1, 0, 1]),     // x^2 + 1
    (16, 2, &[1, 1, 0, 0, 1]), // x^4 + x + 1
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(pub u8);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite field GF(p^e) with precomputed operation tables.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Splits q into (p, e) with q = p^e, or `None` if q is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

impl FieldSpec {
    /// GF(q) with the default desk-scale limit q ≤ 16.
    pub fn new(q: u32) -> Result<Self> {
        Self::with_max_q(q, DEFAULT_MAX_Q)
    }

    /// GF(q) with a caller-chosen limit. Prime fields work up to 251; prime
    /// powers need an entry in [`MODULI`].
    pub fn with_max_q(q: u32, max_q: u32) -> Result<Self> {
        if q > max_q {
            return Err(Error::resource("field size q", q, max_q));
        }
        if q > 251 {
            return Err(Error::domain(format!("q = {q} does not fit the u8 element encoding")));
        }
        let (p, e) = prime_power(q)
            .ok_or_else(|| Error::domain(format!("q = {q} is not a prime power")))?;
        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            MODULI
                .iter()
                .find(|(mq, _, _)| *mq == q)
                .map(|(_, _, m)| m.to_vec())
                .ok_or_else(|| Error::domain(format!("no built-in modulus for GF({q})")))?
        };
        Ok(Self::from_parts(p, e, modulus))
    }

    fn from_parts(p: u32, e: u32, modulus: Vec<u32>) -> Self {
        let q = p.pow(e);
        let qs = q as usize;
        let digits = |mut x: u32| {
            let mut d = vec![0u32; e as usize];
            for slot in d.iter_mut() {
                *slot = x % p;
                x /= p;
            }
            d
        };
        let undigits = |d: &[u32]| d.iter().rev().fold(0u32, |acc, &c| acc * p + c);

        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = undigits(&sum) as u8;

                // schoolbook product, then reduce by the monic modulus
                let mut prod = vec![0u32; 2 * e as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                if e > 1 {
                    for deg in (e as usize..prod.len()).rev() {
                        let c = prod[deg];
                        if c == 0 {
                            continue;
                        }
                        for (k, m) in modulus.iter().enumerate() {
                            let idx = deg - e as usize + k;
                            prod[idx] = (prod[idx] + (p - c) * m) % p;
                        }
                    }
                }
                mul[a as usize * qs + b as usize] = undigits(&prod[..e as usize]) as u8;
            }
        }
        let mut neg = vec![0u8; qs];
        let mut inv = vec![0u8; qs];
        for a in 0..qs {
            for b in 0..qs {
                if add[a * qs + b] == 0 {
                    neg[a] = b as u8;
                }
                if mul[a * qs + b] == 1 {
                    inv[a] = b as u8;
                }
            }
        }
        FieldSpec { p, e, q, modulus, add, mul, neg, inv }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q as u8).map(FieldElement)
    }

    pub fn element(&self, index: u32) -> Result<FieldElement> {
        if index < self.q {
            Ok(FieldElement(index as u8))
        } else {
            Err(Error::domain(format!("{index} is not an element of GF({})", self.q)))
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add[a.index() * self.q as usize + b.index()])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.index()])
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul[a.index() * self.q as usize + b.index()])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a == FieldElement::ZERO {
            Err(Error::domain("inverse of zero"))
        } else {
            Ok(FieldElement(self.inv[a.index()]))
        }
    }

    // Raw digit versions used by the matrix routines.
    #[inline]
    pub(crate) fn add_raw(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    #[inline]
    pub(crate) fn inv_raw(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    /// `a·x + y` componentwise.
    pub fn axpy(&self, a: FieldElement, x: &[u8], y: &mut [u8]) {
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = self.add_raw(*yi, self.mul_raw(a.0, xi));
        }
    }

    pub fn scale(&self, a: FieldElement, x: &mut [u8]) {
        for xi in x.iter_mut() {
            *xi = self.mul_raw(a.0, *xi);
        }
    }

    /// Encodes a vector as a base-q integer, first coordinate most significant.
    pub fn encode(&self, v: &[u8]) -> u64 {
        v.iter().fold(0u64, |acc, &d| acc * self.q as u64 + d as u64)
    }

    pub fn decode(&self, mut code: u64, n: usize) -> Vec<u8> {
        let mut v = vec![0u8; n];
        for slot in v.iter_mut().rev() {
            *slot = (code % self.q as u64) as u8;
            code /= self.q as u64;
        }
        v
    }

    /// Reduces `rows` in place to reduced row echelon form and drops zero
    /// rows. Returns the pivot columns.
    pub fn rref(&self, rows: &mut Vec<Vec<u8>>) -> Vec<usize> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            let Some(found) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
                continue;
            };
            rows.swap(r, found);
            let lead = rows[r][c];
            if lead != 1 {
                let li = FieldElement(self.inv_raw(lead));
                self.scale(li, &mut rows[r]);
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row[c] != 0 {
                    let f = FieldElement(self.neg_raw(row[c]));
                    self.axpy(f, &pivot_row, row);
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        pivots
    }

    pub fn rank(&self, rows: &[Vec<u8>]) -> usize {
        let mut m = rows.to_vec();
        self.rref(&mut m).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUPPORTED: [u32; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

    #[test]
    fn builtin_moduli_are_irreducible() {
        // degree ≤ 4: reducible iff it has a factor of degree ≤ 2; check by
        // trial division against all monic polynomials of degree 1 and 2
        for &(q, p, m) in MODULI {
            let e = m.len() - 1;
            assert_eq!(p.pow(e as u32), q);
            for deg in 1..=e / 2 {
                let count = p.pow(deg as u32);
                for low in 0..count {
                    let mut div: Vec<u32> = (0..deg).map(|i| (low / p.pow(i as u32)) % p).collect();
                    div.push(1);
                    let mut rem: Vec<u32> = m.to_vec();
                    for top in (deg..rem.len()).rev() {
                        let c = rem[top];
                        for (k, d) in div.iter().enumerate() {
                            let idx = top - deg + k;
                            rem[idx] = (rem[idx] + (p - c) * d) % p;
                        }
                    }
                    assert!(rem[..deg].iter().any(|&c| c != 0), "GF({q}) modulus divisible");
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in SUPPORTED.into_iter().filter(|&q| q <= 9) {
            let f = FieldSpec::new(q).unwrap();
            let els: Vec<_> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, FieldElement::ZERO), a);
                assert_eq!(f.mul(a, FieldElement::ONE), a);
                assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
                if a != FieldElement::ZERO {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn larger_fields_have_inverses() {
        for q in [11, 13, 16] {
            let f = FieldSpec::new(q).unwrap();
            for a in f.elements().skip(1) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            }
        }
    }

    #[test]
    fn inverse_of_zero_is_domain_error() {
        let f = FieldSpec::new(4).unwrap();
        assert!(matches!(f.inv(FieldElement::ZERO), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_unsupported_q() {
        assert!(matches!(FieldSpec::new(6), Err(Error::Domain(_))));
        assert!(matches!(FieldSpec::new(17), Err(Error::Resource { .. })));
        assert!(FieldSpec::with_max_q(17, 32).is_ok());
        assert!(matches!(FieldSpec::with_max_q(25, 32), Err(Error::Domain(_))));
    }

    #[test]
    fn rref_rank_and_canonical_form() {
        let f = FieldSpec::new(3).unwrap();
        let mut m = vec![vec![0, 2, 1], vec![1, 1, 0], vec![1, 0, 2]];
        let piv = f.rref(&mut m);
        assert_eq!(piv.len(), f.rank(&[vec![0, 2, 1], vec![1, 1, 0], vec![1, 0, 2]]));
        for (r, &c) in piv.iter().enumerate() {
            assert_eq!(m[r][c], 1);
            for (i, row) in m.iter().enumerate() {
                if i != r {
                    assert_eq!(row[c], 0);
                }
            }
        }
    }

    #[test]
    fn encode_roundtrip() {
        let f = FieldSpec::new(5).unwrap();
        let v = vec![4, 0, 3, 1];
        assert_eq!(f.decode(f.encode(&v), 4), v);
        assert_eq!(f.encode(&[1, 0]), 5);
    }
}
