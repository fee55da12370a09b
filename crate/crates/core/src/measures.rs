//! Lubell-type functionals on families, in exact rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::algebra::{int, ExactRational, WeightVector};
use crate::error::{Error, Result};
use crate::lattice::{Family, Lattice};

/// Normalized level profile φ(i) = |F_i| / |level i| and, for complexes,
/// the differences α(j) = φ(j) - φ(j+1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileVector {
    pub phi: Vec<ExactRational>,
    pub alpha: Option<Vec<ExactRational>>,
}

pub fn normalized_profile(lattice: &Lattice, family: &Family) -> Result<Vec<ExactRational>> {
    lattice.check_same(family)?;
    Ok(family
        .profile()
        .iter()
        .enumerate()
        .map(|(i, &c)| BigRational::new(BigInt::from(c), int(&lattice.level_count(i)).to_integer()))
        .collect())
}

/// Σ_i |F_i| / |level i|.
pub fn lubell(lattice: &Lattice, family: &Family) -> Result<ExactRational> {
    Ok(normalized_profile(lattice, family)?.into_iter().sum())
}

/// Σ_i β_i |F_i| / |level i|.
pub fn weighted_lubell(lattice: &Lattice, family: &Family, beta: &WeightVector) -> Result<ExactRational> {
    beta.check_rank(lattice.n())?;
    Ok(normalized_profile(lattice, family)?
        .into_iter()
        .zip(beta.as_slice())
        .map(|(phi, b)| phi * b)
        .sum())
}

/// ϱ_n = lubell / (n + 1).
pub fn rho(lattice: &Lattice, family: &Family) -> Result<ExactRational> {
    Ok(lubell(lattice, family)? / BigRational::from_integer(BigInt::from(lattice.n() + 1)))
}

/// Longest chain inside the family through each member.
pub fn chain_participation(lattice: &Lattice, family: &Family) -> Result<BTreeMap<usize, usize>> {
    lattice.check_same(family)?;
    // handles are sorted by dimension, so this is a topological order
    let members = family.handles();
    let m = members.len();
    let mut down = vec![1usize; m];
    for j in 0..m {
        for i in 0..j {
            if lattice.lt(members[i], members[j]) {
                down[j] = down[j].max(down[i] + 1);
            }
        }
    }
    let mut up = vec![1usize; m];
    for i in (0..m).rev() {
        for j in i + 1..m {
            if lattice.lt(members[i], members[j]) {
                up[i] = up[i].max(up[j] + 1);
            }
        }
    }
    Ok(members.into_iter().enumerate().map(|(i, h)| (h, down[i] + up[i] - 1)).collect())
}

/// Longest chain contained in the family.
pub fn longest_chain(lattice: &Lattice, family: &Family) -> Result<usize> {
    Ok(chain_participation(lattice, family)?.values().copied().max().unwrap_or(0))
}

/// φ and its α-decomposition for a complex that does not contain the top element.
pub fn profile_decompose(lattice: &Lattice, family: &Family) -> Result<ProfileVector> {
    if !lattice.is_complex(family)? {
        return Err(Error::usage("profile decomposition needs a complex"));
    }
    if family.contains(lattice.top()) {
        return Err(Error::usage("profile decomposition needs a complex without the full space"));
    }
    let phi = normalized_profile(lattice, family)?;
    let alpha: Vec<ExactRational> = (0..lattice.n()).map(|j| &phi[j] - &phi[j + 1]).collect();
    debug_assert!(alpha.iter().all(|a| !a.is_negative()));
    Ok(ProfileVector { phi, alpha: Some(alpha) })
}

/// Rebuilds φ(j) = Σ_{k ≥ j} α(k); φ(n) is zero.
pub fn reconstruct_profile(alpha: &[ExactRational]) -> Vec<ExactRational> {
    let mut phi = vec![BigRational::zero(); alpha.len() + 1];
    for j in (0..alpha.len()).rev() {
        phi[j] = &phi[j + 1] + &alpha[j];
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn lubell_examples() {
        let l = Lattice::linear(2, 3).unwrap();
        assert_eq!(lubell(&l, &l.full_family()).unwrap(), rat(4, 1));
        let b4 = Lattice::boolean(4).unwrap();
        assert_eq!(lubell(&b4, &b4.levels_family(&[2]).unwrap()).unwrap(), rat(1, 1));
        let b2 = Lattice::boolean(2).unwrap();
        let f = b2.family([0, b2.handle_of_set(0b01).unwrap()]).unwrap();
        assert_eq!(lubell(&b2, &f).unwrap(), rat(3, 2));
    }

    #[test]
    fn weighted_examples() {
        let l = Lattice::linear(3, 2).unwrap();
        let f = l.family([0, 1, 2]).unwrap();
        assert_eq!(weighted_lubell(&l, &f, &WeightVector::ones(2)).unwrap(), lubell(&l, &f).unwrap());
        assert_eq!(weighted_lubell(&l, &f, &WeightVector::indicator(2, 1)).unwrap(), rat(1, 2));
        assert!(matches!(weighted_lubell(&l, &f, &WeightVector::ones(3)), Err(Error::Usage(_))));
    }

    #[test]
    fn rho_examples() {
        let b4 = Lattice::boolean(4).unwrap();
        assert_eq!(rho(&b4, &b4.full_family()).unwrap(), rat(1, 1));
        assert_eq!(rho(&b4, &b4.empty_family()).unwrap(), rat(0, 1));
        assert_eq!(rho(&b4, &b4.levels_family(&[2]).unwrap()).unwrap(), rat(1, 5));
    }

    #[test]
    fn chain_participation_examples() {
        let b2 = Lattice::boolean(2).unwrap();
        let c = chain_participation(&b2, &b2.full_family()).unwrap();
        assert!(c.values().all(|&v| v == 3));
        let b3 = Lattice::boolean(3).unwrap();
        let anti = b3.levels_family(&[1]).unwrap();
        assert!(chain_participation(&b3, &anti).unwrap().values().all(|&v| v == 1));
        let chain = b3.family([0, 1, 4, 7]).unwrap();
        assert!(b3.lt(1, 4));
        assert!(chain_participation(&b3, &chain).unwrap().values().all(|&v| v == 4));
    }

    #[test]
    fn decomposition_examples() {
        let l = Lattice::linear(2, 3).unwrap();
        let low = l.levels_family(&[0, 1]).unwrap();
        let p = profile_decompose(&l, &low).unwrap();
        assert_eq!(p.phi, vec![rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(p.alpha.clone().unwrap(), vec![rat(0, 1), rat(1, 1), rat(0, 1)]);
        assert_eq!(reconstruct_profile(&p.alpha.unwrap()), p.phi);
        let zero = l.family([0]).unwrap();
        assert_eq!(profile_decompose(&l, &zero).unwrap().alpha.unwrap(), vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert!(matches!(profile_decompose(&l, &l.levels_family(&[1]).unwrap()), Err(Error::Usage(_))));
        assert!(matches!(profile_decompose(&l, &l.full_family()), Err(Error::Usage(_))));
    }
}
