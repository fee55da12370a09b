//! Exact arithmetic: finite fields, (Gaussian) binomials, basis counts and
//! guarded reals.

pub mod field;
pub mod gauss;
pub mod real;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

pub use field::{FieldElement, FieldSpec};
pub use gauss::{alpha, binomial, covering_multiplicity, gauss_binom, sigma_sets, sigma_spaces};
pub use real::GuardedReal;

use crate::error::{Error, Result};

/// Exact rational; always stored in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

pub fn rat(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: &BigUint) -> ExactRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// Level weights β_0..β_n of a weighted Lubell function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector(Vec<ExactRational>);

impl WeightVector {
    pub fn new(beta: Vec<ExactRational>) -> Self {
        WeightVector(beta)
    }

    pub fn ones(n: usize) -> Self {
        WeightVector(vec![BigRational::one(); n + 1])
    }

    pub fn indicator(n: usize, level: usize) -> Self {
        WeightVector(
            (0..=n)
                .map(|i| if i == level { BigRational::one() } else { rat(0, 1) })
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[ExactRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn check_rank(&self, n: usize) -> Result<()> {
        if self.0.len() != n + 1 {
            return Err(Error::usage(format!(
                "weight vector has length {}, lattice rank {n} needs {}",
                self.0.len(),
                n + 1
            )));
        }
        Ok(())
    }
}
