//! Guarded real numbers: a rational enclosure `[lo, hi]` of an irrational
//! value, produced by integer root extraction on scaled big integers.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Fraction bits carried by default (53 for the double mantissa plus a
/// margin of well over 50 bits).
pub const DEFAULT_PREC_BITS: u32 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedReal {
    lo: BigRational,
    hi: BigRational,
    prec_bits: u32,
}

impl GuardedReal {
    pub fn exact(value: BigRational, prec_bits: u32) -> Self {
        GuardedReal { lo: value.clone(), hi: value, prec_bits }
    }

    pub fn from_bounds(lo: BigRational, hi: BigRational, prec_bits: u32) -> Self {
        assert!(lo <= hi, "inverted enclosure");
        GuardedReal { lo, hi, prec_bits }
    }

    /// Enclosure of x^(1/k) for a non-negative rational x.
    pub fn root(x: &BigRational, k: u32, prec_bits: u32) -> Self {
        assert!(!x.is_negative(), "root of a negative number");
        assert!(k >= 1);
        if x.is_zero() {
            return Self::exact(BigRational::zero(), prec_bits);
        }
        let numer = x.numer().to_biguint().unwrap();
        let denom = x.denom().to_biguint().unwrap();
        // floor(x · 2^{prec·k}) then its integer k-th root a satisfies
        // a ≤ x^{1/k}·2^prec < a + 1
        let scaled = (numer << (prec_bits as usize * k as usize)) / denom;
        let a = scaled.nth_root(k);
        let exact = a.pow(k) == scaled && (x * BigRational::from_integer(BigInt::one() << (prec_bits as usize * k as usize))).is_integer();
        let scale = BigRational::from_integer(BigInt::one() << prec_bits as usize);
        let lo = BigRational::from_integer(BigInt::from(a.clone())) / &scale;
        let hi = if exact {
            lo.clone()
        } else {
            BigRational::from_integer(BigInt::from(a + BigUint::one())) / &scale
        };
        GuardedReal { lo, hi, prec_bits }
    }

    /// Enclosure of base^(p/k) for rational base ≥ 0 and p ≥ 0.
    pub fn rational_power(base: &BigRational, p: u32, k: u32, prec_bits: u32) -> Self {
        let powered = num_traits::pow(base.clone(), p as usize);
        Self::root(&powered, k, prec_bits)
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    /// Upper end; comparisons against a bound use this so they stay conservative.
    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn prec_bits(&self) -> u32 {
        self.prec_bits
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn approx(&self) -> f64 {
        let mid = (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2));
        rational_to_f64(&mid)
    }

    /// Product of two non-negative enclosures.
    pub fn mul(&self, other: &GuardedReal) -> GuardedReal {
        assert!(!self.lo.is_negative() && !other.lo.is_negative());
        GuardedReal {
            lo: &self.lo * &other.lo,
            hi: &self.hi * &other.hi,
            prec_bits: self.prec_bits.min(other.prec_bits),
        }
    }

    pub fn scale(&self, factor: &BigRational) -> GuardedReal {
        assert!(!factor.is_negative());
        GuardedReal {
            lo: &self.lo * factor,
            hi: &self.hi * factor,
            prec_bits: self.prec_bits,
        }
    }

    pub fn add_rational(&self, term: &BigRational) -> GuardedReal {
        GuardedReal {
            lo: &self.lo + term,
            hi: &self.hi + term,
            prec_bits: self.prec_bits,
        }
    }

    /// `Some(ordering)` when the enclosure decides the comparison.
    pub fn cmp_rational(&self, x: &BigRational) -> Option<Ordering> {
        if &self.hi < x {
            Some(Ordering::Less)
        } else if &self.lo > x {
            Some(Ordering::Greater)
        } else if self.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Decimal rendering of the upper end with `digits` fractional digits,
    /// rounded up.
    pub fn to_decimal_upper(&self, digits: usize) -> String {
        decimal(&self.hi, digits, true)
    }

    pub fn to_decimal_lower(&self, digits: usize) -> String {
        decimal(&self.lo, digits, false)
    }

    pub fn to_json(&self) -> RealJson {
        RealJson {
            real: self.approx(),
            lo: self.to_decimal_lower(40),
            hi: self.to_decimal_upper(40),
            prec: self.prec_bits,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RealJson {
    pub real: f64,
    pub lo: String,
    pub hi: String,
    pub prec: u32,
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    // scale so the integer division keeps ~64 significant bits
    if x.is_zero() {
        return 0.0;
    }
    let n_bits = x.numer().bits() as i64;
    let d_bits = x.denom().bits() as i64;
    let shift = 64 - (n_bits - d_bits);
    let q = if shift >= 0 {
        (x.numer() << shift as usize) / x.denom()
    } else {
        x.numer() / (x.denom() << (-shift) as usize)
    };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

fn decimal(x: &BigRational, digits: usize, round_up: bool) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = x * BigRational::from_integer(scale.clone());
    let int = if round_up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let neg = int.is_negative();
    let s = int.abs().to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (whole, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

/// Rational enclosure of ln 2 to 40 decimal places.
pub fn ln2_bounds() -> (BigRational, BigRational) {
    let digits = "6931471805599453094172321214581765680755";
    let num: BigInt = digits.parse().unwrap();
    let den = BigInt::from(10u32).pow(digits.len() as u32);
    let lo = BigRational::new(num.clone(), den.clone());
    let hi = BigRational::new(num + 1, den);
    (lo, hi)
}
