//! Basis sublattices G_B = { span(U) : U ⊆ B } and the covering they form.

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{alpha, binomial, covering_multiplicity, int, ExactRational, FieldSpec, WeightVector};
use crate::error::{Error, Result};
use crate::lattice::{Family, Lattice};
use crate::measures::weighted_lubell;

pub const DEFAULT_BASIS_CAP: u64 = 1_000_000;

/// An unordered basis, stored as its vectors' codes in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis(pub Vec<u64>);

/// The image of B_n inside L_n(q) spanned by one basis. `mapping[mask]` is
/// the handle of span{v_x : bit x of mask set}.
#[derive(Clone, Debug)]
pub struct BasisSublattice {
    pub basis: Basis,
    pub mapping: Vec<usize>,
}

fn linear_field(lattice: &Lattice) -> Result<&FieldSpec> {
    lattice
        .field()
        .ok_or_else(|| Error::usage("basis sublattices live in a linear lattice"))
}

fn check_cap(q: u32, n: usize, cap: u64) -> Result<u64> {
    let total = alpha(q, n)?;
    match total.to_u64() {
        Some(t) if t <= cap => Ok(t),
        _ => Err(Error::resource(format!("number of bases of F_{q}^{n}"), total, cap)),
    }
}

/// Adds `v` to a span given as a membership table over all q^n codes.
fn extend_span(field: &FieldSpec, n: usize, span: &FixedBitSet, v: u64) -> FixedBitSet {
    let vd = field.decode(v, n);
    let mut out = span.clone();
    for s in span.ones() {
        let sd = field.decode(s as u64, n);
        for c in field.elements().skip(1) {
            let mut w = sd.clone();
            field.axpy(c, &vd, &mut w);
            out.insert(field.encode(&w) as usize);
        }
    }
    out
}

fn bases_from(field: &FieldSpec, n: usize, first: u64) -> Vec<Basis> {
    let total = (field.q() as usize).pow(n as u32);
    let mut span = FixedBitSet::with_capacity(total);
    span.insert(0);
    let span = extend_span(field, n, &span, first);
    let mut out = Vec::new();
    let mut cur = vec![first];
    fn rec(field: &FieldSpec, n: usize, total: usize, span: &FixedBitSet, cur: &mut Vec<u64>, out: &mut Vec<Basis>) {
        if cur.len() == n {
            out.push(Basis(cur.clone()));
            return;
        }
        let last = *cur.last().unwrap();
        for v in (last + 1)..total as u64 {
            if span.contains(v as usize) {
                continue;
            }
            let next = extend_span(field, n, span, v);
            cur.push(v);
            rec(field, n, total, &next, cur, out);
            cur.pop();
        }
    }
    rec(field, n, total, &span, &mut cur, &mut out);
    out
}

/// All unordered bases of F_q^n in increasing lexicographic order.
pub fn enumerate_bases(q: u32, n: usize, cap: u64) -> Result<Vec<Basis>> {
    let field = FieldSpec::new(q)?;
    check_cap(q, n, cap)?;
    let total = (q as u64).pow(n as u32);
    let chunks: Vec<Vec<Basis>> = (1..total).into_par_iter().map(|first| bases_from(&field, n, first)).collect();
    Ok(chunks.into_iter().flatten().collect())
}

impl BasisSublattice {
    pub fn new(lattice: &Lattice, basis: Basis) -> Result<Self> {
        let field = linear_field(lattice)?;
        let n = lattice.n();
        if basis.0.len() != n {
            return Err(Error::usage("basis must have n vectors"));
        }
        let vectors: Vec<Vec<u8>> = basis.0.iter().map(|&v| field.decode(v, n)).collect();
        let mapping: Vec<usize> = (0..1usize << n)
            .map(|mask| {
                let chosen: Vec<Vec<u8>> =
                    (0..n).filter(|x| mask >> x & 1 == 1).map(|x| vectors[x].clone()).collect();
                lattice.handle_of_span(&chosen)
            })
            .collect::<Result<_>>()?;
        if (0..n).any(|x| lattice.dim(mapping[1 << x]) != 1) || lattice.dim(mapping[(1 << n) - 1]) != n {
            return Err(Error::usage("vectors are not a basis"));
        }
        Ok(BasisSublattice { basis, mapping })
    }

    /// Handles of G_B.
    pub fn members(&self, lattice: &Lattice) -> Result<Family> {
        lattice.family(self.mapping.iter().copied())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelCoverage {
    pub dim: usize,
    pub expected_t: String,
    pub min_observed: u64,
    pub max_observed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    pub q: u32,
    pub n: usize,
    pub gamma_size: u64,
    pub expected_gamma: String,
    pub per_level: Vec<LevelCoverage>,
    /// Handles whose observed multiplicity differs from t_dim.
    pub violations: Vec<usize>,
}

impl CoveringReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.gamma_size.to_string() == self.expected_gamma
    }
}

/// Streams every basis sublattice and counts how many contain each element.
pub fn verify_covering(lattice: &Lattice, cap: u64) -> Result<CoveringReport> {
    let field = linear_field(lattice)?;
    let (q, n) = (field.q(), lattice.n());
    check_cap(q, n, cap)?;
    let total = (q as u64).pow(n as u32);
    let size = lattice.size();
    let (gamma, counts) = (1..total)
        .into_par_iter()
        .map(|first| -> Result<(u64, Vec<u64>)> {
            let mut counts = vec![0u64; size];
            let mut seen = 0u64;
            for basis in bases_from(field, n, first) {
                let sub = BasisSublattice::new(lattice, basis)?;
                seen += 1;
                for &h in &sub.mapping {
                    counts[h] += 1;
                }
            }
            Ok((seen, counts))
        })
        .try_reduce(
            || (0, vec![0u64; size]),
            |(ga, mut ca), (gb, cb)| {
                for (a, b) in ca.iter_mut().zip(cb) {
                    *a += b;
                }
                Ok((ga + gb, ca))
            },
        )?;
    let mut per_level = Vec::new();
    let mut violations = Vec::new();
    for i in 0..=n {
        let t = covering_multiplicity(q, n, i)?;
        let observed = &counts[lattice.level(i)];
        for (off, &c) in observed.iter().enumerate() {
            if BigUint::from(c) != t {
                violations.push(lattice.level(i).start + off);
            }
        }
        per_level.push(LevelCoverage {
            dim: i,
            expected_t: t.to_string(),
            min_observed: observed.iter().copied().min().unwrap_or(0),
            max_observed: observed.iter().copied().max().unwrap_or(0),
        });
    }
    Ok(CoveringReport {
        q,
        n,
        gamma_size: gamma,
        expected_gamma: alpha(q, n)?.to_string(),
        per_level,
        violations,
    })
}

#[derive(Clone, Debug)]
pub struct TransferReport {
    /// Σ_i β_i t_i |V_i| / C(n,i).
    pub weighted_sum: ExactRational,
    /// l*_q(V, β) · |Γ|.
    pub lubell_times_gamma: ExactRational,
    /// Σ over all G_B of the Boolean weighted Lubell value of V ∩ G_B,
    /// when the bases were enumerated.
    pub sublattice_sum: Option<ExactRational>,
}

impl TransferReport {
    pub fn holds(&self) -> bool {
        self.weighted_sum == self.lubell_times_gamma
            && self.sublattice_sum.as_ref().is_none_or(|s| s == &self.weighted_sum)
    }
}

/// Checks w̄(V) = l*_q(V, β)·|Γ|. With `sublattices` given, w̄ is also
/// summed directly over the restrictions V ∩ G_B.
pub fn verify_transfer_identity(
    lattice: &Lattice,
    family: &Family,
    beta: Option<&WeightVector>,
    sublattices: Option<&[BasisSublattice]>,
) -> Result<TransferReport> {
    let field = linear_field(lattice)?;
    lattice.check_same(family)?;
    let (q, n) = (field.q(), lattice.n());
    let ones = WeightVector::ones(n);
    let beta = beta.unwrap_or(&ones);
    beta.check_rank(n)?;
    let mut weighted_sum = BigRational::zero();
    for (i, &count) in family.profile().iter().enumerate() {
        let w = &beta.as_slice()[i] * int(&covering_multiplicity(q, n, i)?) / int(&binomial(n as i64, i as i64)?);
        weighted_sum += w * BigRational::from_integer(BigInt::from(count));
    }
    let lubell_times_gamma = weighted_lubell(lattice, family, beta)? * int(&alpha(q, n)?);
    let sublattice_sum = sublattices.map(|subs| {
        subs.iter()
            .map(|sub| {
                let mut profile = vec![0usize; n + 1];
                for (mask, &h) in sub.mapping.iter().enumerate() {
                    if family.contains(h) {
                        profile[mask.count_ones() as usize] += 1;
                    }
                }
                profile
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        &beta.as_slice()[i] * BigRational::new(BigInt::from(c), BigInt::from(binomial(n as i64, i as i64).unwrap()))
                    })
                    .sum::<BigRational>()
            })
            .sum()
    });
    Ok(TransferReport { weighted_sum, lubell_times_gamma, sublattice_sum })
}

/// Outcome of the transfer identity over seeded random families.
#[derive(Clone, Debug, Serialize)]
pub struct TransferSample {
    pub samples: u64,
    pub seed: u64,
    pub unweighted_ok: u64,
    pub weighted_ok: u64,
    /// Whether each identity was also summed directly over all sublattices.
    pub direct: bool,
    /// Sample indices where some identity failed.
    pub failures: Vec<u64>,
}

impl TransferSample {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random weights a/b with 0 ≤ a ≤ 20 and 1 ≤ b ≤ 10.
fn random_weights(n: usize, seed: u64, stream: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    WeightVector::new(
        (0..=n)
            .map(|_| BigRational::new(BigInt::from(rng.gen_range(0..=20)), BigInt::from(rng.gen_range(1..=10))))
            .collect(),
    )
}

/// Checks the transfer identity, plain and with random weights, on
/// `samples` random families. Sample i uses streams 2i (family) and 2i+1
/// (weights) of `seed`.
pub fn verify_transfer_sample(lattice: &Lattice, samples: u64, seed: u64, direct: bool, cap: u64) -> Result<TransferSample> {
    let field = linear_field(lattice)?;
    let subs = if direct {
        let bases = enumerate_bases(field.q(), lattice.n(), cap)?;
        Some(bases.into_iter().map(|b| BasisSublattice::new(lattice, b)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    let results: Vec<(bool, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let family = lattice.random_family(seed, 2 * i);
            let beta = random_weights(lattice.n(), seed, 2 * i + 1);
            let plain = verify_transfer_identity(lattice, &family, None, subs.as_deref())?.holds();
            let weighted = verify_transfer_identity(lattice, &family, Some(&beta), subs.as_deref())?.holds();
            Ok((plain, weighted))
        })
        .collect::<Result<_>>()?;
    Ok(TransferSample {
        samples,
        seed,
        unweighted_ok: results.iter().filter(|r| r.0).count() as u64,
        weighted_ok: results.iter().filter(|r| r.1).count() as u64,
        direct,
        failures: (0..samples).filter(|&i| !(results[i as usize].0 && results[i as usize].1)).collect(),
    })
}

/// Pulls V ∩ G_B back to a family of the Boolean lattice `boolean`.
pub fn sublattice_restriction(
    lattice: &Lattice,
    family: &Family,
    sub: &BasisSublattice,
    boolean: &Lattice,
) -> Result<Family> {
    lattice.check_same(family)?;
    if !boolean.is_boolean() || boolean.n() != lattice.n() {
        return Err(Error::usage("restriction target must be B_n of the same rank"));
    }
    boolean.family(
        sub.mapping
            .iter()
            .enumerate()
            .filter(|(_, &h)| family.contains(h))
            .map(|(mask, _)| boolean.handle_of_set(mask as u32).unwrap()),
    )
}
