//! Binomial and Gaussian binomial coefficients and the basis-counting
//! quantities built from them. Everything here is an exact integer.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

fn pow(q: u32, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

fn exact_div(num: BigUint, den: &BigUint, what: &str) -> BigUint {
    let (quot, rem) = num.div_rem(den);
    assert!(rem.is_zero(), "{what}: non-integral quotient");
    quot
}

fn check_range(n: i64, k: i64) -> Result<(usize, usize)> {
    if k < 0 || k > n {
        return Err(Error::domain(format!("k = {k} outside 0..={n}")));
    }
    Ok((n as usize, k as usize))
}

/// Ordinary binomial coefficient C(n, k).
pub fn binomial(n: i64, k: i64) -> Result<BigUint> {
    let (n, k) = check_range(n, k)?;
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= (n - i) as u64;
        acc = exact_div(acc, &BigUint::from((i + 1) as u64), "binomial");
    }
    Ok(acc)
}

/// Number of k-dimensional subspaces of F_q^n:
/// ∏_{0≤i<k} (q^{n-i} - 1) / (q^{k-i} - 1).
///
/// The factors are folded in as (q^{n-i} - 1)/(q^{i+1} - 1) so that every
/// partial product is itself a Gaussian binomial and each division is exact.
pub fn gauss_binom(n: i64, k: i64, q: u32) -> Result<BigUint> {
    if q < 2 {
        return Err(Error::domain(format!("q = {q} < 2")));
    }
    let (n, k) = check_range(n, k)?;
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= pow(q, n - i) - 1u32;
        acc = exact_div(acc, &(pow(q, i + 1) - 1u32), "gauss_binom");
    }
    Ok(acc)
}

/// Number of unordered bases of F_q^n:
/// (q^n - 1)(q^n - q)···(q^n - q^{n-1}) / n!.
pub fn alpha(q: u32, n: usize) -> Result<BigUint> {
    if q < 2 || n < 1 {
        return Err(Error::domain(format!("alpha needs q ≥ 2, n ≥ 1 (got q={q}, n={n})")));
    }
    let qn = pow(q, n);
    let ordered = (0..n).fold(BigUint::one(), |acc, i| acc * (&qn - pow(q, i)));
    Ok(exact_div(ordered, &factorial(n), "alpha"))
}

/// t_i: the number of basis sublattices G_B that contain a fixed
/// i-dimensional subspace. It is (unordered bases of that subspace) times
/// (unordered completions to a basis of F_q^n).
pub fn covering_multiplicity(q: u32, n: usize, i: usize) -> Result<BigUint> {
    if q < 2 || i > n {
        return Err(Error::domain(format!("covering_multiplicity needs q ≥ 2, 0 ≤ i ≤ n (got q={q}, n={n}, i={i})")));
    }
    let qi = pow(q, i);
    let qn = pow(q, n);
    let inner = (0..i).fold(BigUint::one(), |acc, j| acc * (&qi - pow(q, j)));
    let outer = (i..n).fold(BigUint::one(), |acc, j| acc * (&qn - pow(q, j)));
    Ok(exact_div(inner * outer, &(factorial(i) * factorial(n - i)), "covering_multiplicity"))
}

fn sigma_start(n: usize, k: usize) -> Result<i64> {
    if k < 1 || k > n + 1 {
        return Err(Error::domain(format!("k = {k} outside 1..={}", n + 1)));
    }
    Ok((n as i64 - k as i64).div_euclid(2))
}

/// Σ(n, k): the sum of the k largest binomial coefficients of order n.
pub fn sigma_sets(n: usize, k: usize) -> Result<BigUint> {
    let start = sigma_start(n, k)?;
    (1..=k as i64).map(|i| binomial(n as i64, start + i)).sum()
}

/// Σ[n, k]: the sum of the k largest Gaussian binomials of order n.
pub fn sigma_spaces(n: usize, k: usize, q: u32) -> Result<BigUint> {
    let start = sigma_start(n, k)?;
    (1..=k as i64).map(|i| gauss_binom(n as i64, start + i, q)).sum()
}

/// Levels used by the Σ*-type constructions: one list for n + k odd, two
/// for n + k even (both halves of the shifted window).
pub fn sigma_star_levels(n: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let start = sigma_start(n, k)?;
    let upper: Vec<usize> = (1..=k as i64).map(|i| (start + i) as usize).collect();
    if (n + k) % 2 == 1 {
        Ok(vec![upper])
    } else {
        let lower: Vec<usize> = (0..k as i64).map(|i| (start + i) as usize).collect();
        Ok(vec![lower, upper])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gb(n: i64, k: i64, q: u32) -> BigUint {
        gauss_binom(n, k, q).unwrap()
    }

    #[test]
    fn gauss_binom_examples() {
        assert_eq!(gb(4, 2, 2), BigUint::from(35u32));
        assert_eq!(gb(3, 0, 5), BigUint::one());
        assert_eq!(gb(3, 1, 2), BigUint::from(7u32));
        assert_eq!(gb(3, 2, 2), BigUint::from(7u32));
        assert!(matches!(gauss_binom(3, 4, 2), Err(Error::Domain(_))));
        assert!(matches!(gauss_binom(3, -1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn symmetry_unimodality_pascal() {
        for q in [2, 3, 4, 5] {
            for n in 0..=12i64 {
                for k in 0..=n {
                    assert_eq!(gb(n, k, q), gb(n, n - k, q));
                    if k < (n + 1) / 2 {
                        assert!(gb(n, k, q) <= gb(n, k + 1, q));
                    }
                    if n >= 1 && k >= 1 {
                        let rhs = gb(n - 1, k - 1, q)
                            + if k < n { pow(q, k as usize) * gb(n - 1, k, q) } else { BigUint::zero() };
                        assert_eq!(gb(n, k, q), rhs, "pascal n={n} k={k} q={q}");
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(2, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(alpha(2, 3).unwrap(), BigUint::from(28u32));
        assert_eq!(alpha(2, 1).unwrap(), BigUint::one());
        assert_eq!(alpha(3, 2).unwrap(), BigUint::from(24u32));
        assert!(alpha(1, 2).is_err());
    }

    #[test]
    fn covering_multiplicity_examples() {
        assert_eq!(covering_multiplicity(2, 3, 1).unwrap(), BigUint::from(12u32));
        assert_eq!(covering_multiplicity(2, 3, 0).unwrap(), BigUint::from(28u32));
        assert_eq!(covering_multiplicity(2, 2, 1).unwrap(), BigUint::from(2u32));
        assert_eq!(covering_multiplicity(3, 2, 1).unwrap(), BigUint::from(12u32));
        for q in [2, 3, 4] {
            for n in 1..=5 {
                assert_eq!(covering_multiplicity(q, n, 0).unwrap(), alpha(q, n).unwrap());
                assert_eq!(covering_multiplicity(q, n, n).unwrap(), alpha(q, n).unwrap());
            }
        }
    }

    #[test]
    fn double_counting_identity() {
        // Σ_i t_i [n,i]_q = |Γ| 2^n: each G_B has 2^n members
        for q in [2, 3, 5] {
            for n in 1..=6usize {
                let lhs: BigUint = (0..=n)
                    .map(|i| covering_multiplicity(q, n, i).unwrap() * gb(n as i64, i as i64, q))
                    .sum();
                assert_eq!(lhs, alpha(q, n).unwrap() << n);
            }
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_sets(3, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(sigma_sets(4, 1).unwrap(), BigUint::from(6u32));
        assert_eq!(sigma_sets(2, 3).unwrap(), BigUint::from(4u32));
        assert_eq!(sigma_spaces(3, 2, 2).unwrap(), BigUint::from(14u32));
        assert_eq!(sigma_spaces(3, 1, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(sigma_spaces(2, 3, 2).unwrap(), BigUint::from(5u32));
        assert!(sigma_sets(3, 0).is_err());
        assert!(sigma_sets(3, 5).is_err());
    }

    #[test]
    fn sigma_is_sum_of_largest() {
        for n in 0..=9usize {
            let mut levels: Vec<BigUint> =
                (0..=n as i64).map(|i| binomial(n as i64, i).unwrap()).collect();
            levels.sort_by(|a, b| b.cmp(a));
            for k in 1..=n + 1 {
                let top: BigUint = levels[..k].iter().sum();
                assert_eq!(sigma_sets(n, k).unwrap(), top);
            }
        }
    }

    #[test]
    fn sigma_star_window() {
        assert_eq!(sigma_star_levels(3, 2).unwrap(), vec![vec![1, 2]]);
        assert_eq!(sigma_star_levels(4, 2).unwrap(), vec![vec![1, 2], vec![2, 3]]);
        assert_eq!(sigma_star_levels(4, 1).unwrap(), vec![vec![2]]);
    }
}
