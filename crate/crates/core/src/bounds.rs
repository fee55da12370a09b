//! Closed-form bounds and the extremal constructions that go with them.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::real::{ln2_bounds, DEFAULT_PREC_BITS};
use crate::algebra::{binomial, gauss_binom, gauss::sigma_star_levels, int, sigma_sets, sigma_spaces, ExactRational, GuardedReal};
use crate::error::{Error, Result};
use crate::lattice::{Family, Lattice, LatticeSpec};
use crate::patterns::{are_cross_dependent, has_chain, has_s_disjoint, Witness};

#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    Exact(ExactRational),
    Real(GuardedReal),
}

impl BoundValue {
    /// A rational at least as large as the bound.
    pub fn upper(&self) -> ExactRational {
        match self {
            BoundValue::Exact(x) => x.clone(),
            BoundValue::Real(r) => r.hi().clone(),
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            BoundValue::Exact(x) => crate::algebra::real::rational_to_f64(x),
            BoundValue::Real(r) => r.approx(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            BoundValue::Exact(x) => json!({"num": x.numer().to_string(), "den": x.denom().to_string()}),
            BoundValue::Real(r) => serde_json::to_value(r.to_json()).unwrap(),
        }
    }
}

/// A construction attached to a bound, with the outcome of running the
/// matching detector on it.
#[derive(Clone, Debug)]
pub struct Construction {
    pub kind: String,
    pub families: Vec<Family>,
    /// `Some(true)` when the forbidden configuration is absent.
    pub valid: Option<bool>,
    pub witness: Option<Witness>,
}

impl Construction {
    pub fn sizes(&self) -> Vec<usize> {
        self.families.iter().map(Family::len).collect()
    }

    pub fn total(&self) -> usize {
        self.sizes().iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub theorem_id: String,
    pub params: BTreeMap<String, Value>,
    pub bound: BoundValue,
    pub construction: Option<Construction>,
    pub flags: Vec<String>,
    pub note: Option<String>,
}

impl BoundReport {
    fn new(id: &str, params: &[(&str, Value)], bound: BoundValue) -> Self {
        BoundReport {
            theorem_id: id.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            bound,
            construction: None,
            flags: Vec::new(),
            note: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.bound, BoundValue::Exact(_))
    }

    /// Largest integer not above the bound (family sizes are integers).
    pub fn floor(&self) -> BigInt {
        match &self.bound {
            BoundValue::Exact(x) => x.floor().to_integer(),
            BoundValue::Real(r) => r.lo().floor().to_integer(),
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "theorem_id": self.theorem_id,
            "params": self.params,
            "bound": self.bound.to_json(),
            "exact": self.is_exact(),
            "floor": self.floor().to_string(),
            "flags": self.flags,
        });
        if let Some(note) = &self.note {
            v["note"] = json!(note);
        }
        if let Some(c) = &self.construction {
            let mut cj = json!({
                "kind": c.kind,
                "sizes": c.sizes(),
                "total": c.total(),
                "valid": c.valid,
            });
            if c.total() <= 64 {
                cj["handles"] = json!(c.families.iter().map(Family::handles).collect::<Vec<_>>());
            }
            if let Some(w) = &c.witness {
                cj["witness"] = serde_json::to_value(w).unwrap();
            }
            v["construction"] = cj;
        }
        v
    }
}

fn r(n: &BigUint) -> ExactRational {
    int(n)
}

fn frac(a: i64, b: i64) -> ExactRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn level(n: usize, i: usize, q: Option<u32>) -> Result<BigUint> {
    match q {
        None => binomial(n as i64, i as i64),
        Some(q) => gauss_binom(n as i64, i as i64, q),
    }
}

fn sum_levels(n: usize, range: impl Iterator<Item = usize>, q: Option<u32>) -> Result<BigUint> {
    range.map(|i| level(n, i, q)).sum()
}

fn lattice_param(q: Option<u32>) -> (&'static str, Value) {
    match q {
        None => ("lattice", json!("B")),
        Some(q) => ("q", json!(q)),
    }
}

/// Largest antichain: C(n, ⌊n/2⌋) or [n, ⌊n/2⌋]_q.
pub fn bound_sperner(n: usize, q: Option<u32>) -> Result<BoundReport> {
    let id = if q.is_none() { "T1.1" } else { "T1.3" };
    let v = level(n, n / 2, q)?;
    Ok(BoundReport::new(id, &[("n", json!(n)), lattice_param(q)], BoundValue::Exact(r(&v))))
}

/// Largest k-Sperner family: Σ(n,k) or Σ[n,k].
pub fn bound_k_sperner(n: usize, k: usize, q: Option<u32>) -> Result<BoundReport> {
    let id = if q.is_none() { "T1.2" } else { "T1.4" };
    let v = match q {
        None => sigma_sets(n, k)?,
        Some(q) => sigma_spaces(n, k, q)?,
    };
    Ok(BoundReport::new(id, &[("n", json!(n)), ("k", json!(k)), lattice_param(q)], BoundValue::Exact(r(&v))))
}

/// Split n = sk - 1 (case i) or n = sk + r with 0 ≤ r ≤ s - 2 (case ii).
fn kleitman_case(n: usize, s: usize) -> Result<(bool, usize, usize)> {
    if s < 3 || n < s {
        return Err(Error::usage(format!("need n ≥ s ≥ 3 (got n={n}, s={s})")));
    }
    if (n + 1).is_multiple_of(s) {
        Ok((true, (n + 1) / s, 0))
    } else {
        Ok((false, n / s, n % s))
    }
}

/// Largest family without s pairwise disjoint members.
pub fn bound_kleitman(n: usize, s: usize, q: Option<u32>) -> Result<BoundReport> {
    let (first, k, rem) = kleitman_case(n, s)?;
    let base = if q.is_none() { "T1.12" } else { "T1.13" };
    let (id, value) = if first {
        (format!("{base}i"), r(&sum_levels(n, k..=n, q)?))
    } else {
        let tail = r(&sum_levels(n, k + 1..=n, q)?);
        let part = frac((s - rem - 1) as i64, s as i64) * r(&level(n, k, q)?);
        (format!("{base}ii"), tail + part)
    };
    let mut rep = BoundReport::new(
        &id,
        &[("n", json!(n)), ("s", json!(s)), ("k", json!(k)), ("r", json!(rem)), lattice_param(q)],
        BoundValue::Exact(value),
    );
    if !rep.bound.upper().is_integer() {
        rep.note = Some("fractional bound; floor reported alongside".into());
    }
    Ok(rep)
}

/// Largest total size of s cross-dependent families, n = sl + r.
pub fn bound_cross_dependent(n: usize, s: usize, q: u32) -> Result<BoundReport> {
    if s < 3 {
        return Err(Error::usage(format!("need s ≥ 3 (got {s})")));
    }
    let (l, rem) = (n / s, n % s);
    let tail = sum_levels(n, l + 1..=n, Some(q))? * BigUint::from(s);
    let value = tail + gauss_binom(n as i64, l as i64, q)? * BigUint::from(s - rem - 1);
    let mut rep = BoundReport::new(
        "T1.14",
        &[("n", json!(n)), ("s", json!(s)), ("l", json!(l)), ("r", json!(rem)), ("q", json!(q))],
        BoundValue::Exact(r(&value)),
    );
    if rem == s - 1 {
        rep.note = Some("r = s - 1: second term vanishes".into());
    }
    Ok(rep)
}

/// Norm bound for one family without s pairwise disjoint members: (s-1)(n+1)/s.
pub fn bound_frankl_norm(n: usize, s: usize, linear: bool) -> Result<BoundReport> {
    if s < 2 {
        return Err(Error::usage("need s ≥ 2"));
    }
    let id = if linear { "T4.6" } else { "C4.3" };
    Ok(BoundReport::new(
        id,
        &[("n", json!(n)), ("s", json!(s))],
        BoundValue::Exact(frac(((s - 1) * (n + 1)) as i64, s as i64)),
    ))
}

/// Norm bound for the sum over s cross-dependent families: (s-1)(n+1).
pub fn bound_frankl_norm_sum(n: usize, s: usize, linear: bool) -> Result<BoundReport> {
    if s < 2 {
        return Err(Error::usage("need s ≥ 2"));
    }
    let id = if linear { "T4.5" } else { "T4.2" };
    Ok(BoundReport::new(
        id,
        &[("n", json!(n)), ("s", json!(s))],
        BoundValue::Exact(frac(((s - 1) * (n + 1)) as i64, 1)),
    ))
}

/// Σ_{i<l} |level i| + (value - l)·|level l|.
pub fn bound_qperfect_rhs(lattice: &Lattice, l: usize, lubell_value: &ExactRational) -> Result<ExactRational> {
    let n = lattice.n();
    if l >= n {
        return Err(Error::domain(format!("need 0 ≤ l < n (got l={l}, n={n})")));
    }
    if lubell_value >= &frac((n + 1) as i64, 1) {
        return Err(Error::domain("Lubell value must be below n + 1"));
    }
    let below: BigUint = (0..l).map(|i| lattice.level_count(i)).sum();
    Ok(r(&below) + (lubell_value - frac(l as i64, 1)) * r(&lattice.level_count(l)))
}

/// Σ_{l≤j≤k} [n,j]_q ≥ (k-l+1)[n,l]_q, compared exactly.
pub fn check_lemma_4_9(q: u32, l: usize, k: usize, n: usize) -> Result<bool> {
    if q < 2 || l >= k || k + 1 > n || n < 3 * l {
        return Err(Error::domain(format!("need l < k ≤ n-1, n ≥ 3l, q ≥ 2 (got q={q}, l={l}, k={k}, n={n})")));
    }
    let lhs = sum_levels(n, l..=k, Some(q))?;
    let rhs = gauss_binom(n as i64, l as i64, q)? * BigUint::from(k - l + 1);
    Ok(lhs >= rhs)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma49Row {
    pub q: u32,
    pub l: usize,
    pub k: usize,
    pub n: usize,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

/// Every valid (q, l, k, n) with q in `qs`, l ≤ max_l, 3l ≤ n ≤ 3l + span.
pub fn lemma_4_9_grid(qs: &[u32], max_l: usize, span: usize) -> Result<Vec<Lemma49Row>> {
    let mut rows = Vec::new();
    for &q in qs {
        for l in 0..=max_l {
            for n in 3 * l..=3 * l + span {
                for k in l + 1..n {
                    let lhs = sum_levels(n, l..=k, Some(q))?;
                    let rhs = gauss_binom(n as i64, l as i64, q)? * BigUint::from(k - l + 1);
                    rows.push(Lemma49Row {
                        q,
                        l,
                        k,
                        n,
                        holds: lhs >= rhs && check_lemma_4_9(q, l, k, n)?,
                        lhs: lhs.to_string(),
                        rhs: rhs.to_string(),
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn diamond_constant(prec: u32) -> GuardedReal {
    // (√2 + 3) / 2
    GuardedReal::root(&frac(2, 1), 2, prec).add_rational(&frac(3, 1)).scale(&frac(1, 2))
}

/// The diamond-free constant (√2+3)/2 on the Lubell function, which carries an
/// unquantified o(1) term.
pub fn bound_diamond_lubell(n: usize, q: Option<u32>) -> BoundReport {
    let id = if q.is_none() { "P3.4" } else { "P3.5" };
    let mut rep = BoundReport::new(id, &[("n", json!(n)), lattice_param(q)], BoundValue::Real(diamond_constant(DEFAULT_PREC_BITS)));
    rep.flags.push("asymptotic".into());
    rep.note = Some("leading constant only; not valid for finite n".into());
    rep
}

/// (√2+3)/2 · [n, ⌊n/2⌋]_q, flagged asymptotic.
pub fn bound_diamond_size(n: usize, q: Option<u32>) -> Result<BoundReport> {
    let id = if q.is_none() { "T3.3" } else { "T3.6" };
    let middle = r(&level(n, n / 2, q)?);
    let mut rep = BoundReport::new(
        id,
        &[("n", json!(n)), lattice_param(q)],
        BoundValue::Real(diamond_constant(DEFAULT_PREC_BITS).scale(&middle)),
    );
    rep.flags.push("asymptotic".into());
    rep.note = Some("asymptotic; not valid for finite n".into());
    Ok(rep)
}

/// Whether n ≥ (2^d - 2/ln 2)², decided with rational enclosures of ln 2.
pub fn qalgebra_hypothesis(n: usize, d: usize) -> bool {
    let (lo, hi) = ln2_bounds();
    let two_d = frac(1i64 << d, 1);
    let two = frac(2, 1);
    // 2/ln2 is in [2/hi, 2/lo]; 2^d exceeds it for d ≥ 2
    let x_hi = &two_d - &two / &hi;
    let x_lo = &two_d - &two / &lo;
    let n = frac(n as i64, 1);
    if x_lo.is_negative() {
        return true;
    }
    if n >= &x_hi * &x_hi {
        true
    } else if n < &x_lo * &x_lo {
        false
    } else {
        unreachable!("integer n inside a 1e-39 enclosure of the threshold")
    }
}

fn qalgebra_lubell_value(n: usize, d: usize, prec: u32) -> GuardedReal {
    // 2 (n+1)^{1 - 2^{1-d}} = 2 (n+1)^{(2^{d-1} - 1) / 2^{d-1}}
    let k = 1u32 << (d - 1);
    GuardedReal::rational_power(&frac((n + 1) as i64, 1), k - 1, k, prec).scale(&frac(2, 1))
}

fn check_d(d: usize) -> Result<()> {
    if !(3..=20).contains(&d) {
        return Err(Error::domain(format!("need 3 ≤ d ≤ 20 (got {d})")));
    }
    Ok(())
}

/// Lubell bound 2(n+1)^{1-2^{1-d}} for algebra-free families.
pub fn bound_qalgebra_lubell(n: usize, d: usize, q: Option<u32>) -> Result<BoundReport> {
    check_d(d)?;
    let id = if q.is_none() { "T5.5" } else { "T5.8" };
    let mut rep = BoundReport::new(
        id,
        &[("n", json!(n)), ("d", json!(d)), lattice_param(q)],
        BoundValue::Real(qalgebra_lubell_value(n, d, DEFAULT_PREC_BITS)),
    );
    if !qalgebra_hypothesis(n, d) {
        rep.flags.push("hypothesis unmet".into());
    }
    Ok(rep)
}

/// Size bound 2(n+1)^{1-2^{1-d}} [n, ⌈n/2⌉]_q.
pub fn bound_qalgebra_size(n: usize, d: usize, q: u32) -> Result<BoundReport> {
    check_d(d)?;
    let middle = r(&gauss_binom(n as i64, n.div_ceil(2) as i64, q)?);
    let mut rep = BoundReport::new(
        "T5.9",
        &[("n", json!(n)), ("d", json!(d)), ("q", json!(q))],
        BoundValue::Real(qalgebra_lubell_value(n, d, DEFAULT_PREC_BITS).scale(&middle)),
    );
    if !qalgebra_hypothesis(n, d) {
        rep.flags.push("hypothesis unmet".into());
    }
    Ok(rep)
}

/// (25/n)^{1/2^d} 2^n for Boolean-algebra-free families of subsets.
pub fn bound_polymath(n: usize, d: usize) -> Result<BoundReport> {
    if n == 0 || d == 0 || d > 20 {
        return Err(Error::domain("need n ≥ 1 and 1 ≤ d ≤ 20"));
    }
    let root = GuardedReal::root(&frac(25, n as i64), 1 << d, DEFAULT_PREC_BITS);
    let value = root.scale(&BigRational::from_integer(BigInt::one() << n));
    Ok(BoundReport::new("T5.3", &[("n", json!(n)), ("d", json!(d))], BoundValue::Real(value)))
}

/// ⌊n^{2/2^d} / 2⌋, computed with an integer root.
pub fn ramsey_lower(n: u64, d: usize) -> Result<u64> {
    check_d(d)?;
    // n^{2/2^d} = n^{1/2^{d-1}} and ⌊x/2⌋ = ⌊⌊x⌋/2⌋
    let root = num_integer::Roots::nth_root(&n, 1u32 << (d - 1));
    Ok(root / 2)
}

/// Ramsey-type lower bound as a report with the hypothesis flag.
pub fn bound_ramsey(n: u64, d: usize) -> Result<BoundReport> {
    let v = ramsey_lower(n, d)?;
    let mut rep = BoundReport::new("T5.10", &[("n", json!(n)), ("d", json!(d))], BoundValue::Exact(frac(v as i64, 1)));
    if !qalgebra_hypothesis(n as usize, d) {
        rep.flags.push("hypothesis unmet".into());
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstructionKind {
    /// The k largest levels (the upper family of Σ*).
    MiddleLevels(usize),
    /// All elements of dimension ≥ k.
    TopDims(usize),
    /// Every family of Σ*(n,k) / Σ*[n,k].
    SpernerStar(usize),
    /// TopDims(k) on a lattice of rank sk - 1.
    KleitmanSharp { s: usize, k: usize },
    /// r+1 copies of {dim > l} and s-r-1 copies of {dim ≥ l}.
    CrossDependentSharp { s: usize, l: usize, r: usize },
}

pub fn make_construction(lattice: &Lattice, kind: ConstructionKind) -> Result<Vec<Family>> {
    let n = lattice.n();
    match kind {
        ConstructionKind::MiddleLevels(k) => {
            let windows = sigma_star_levels(n, k)?;
            Ok(vec![lattice.levels_family(windows.last().unwrap())?])
        }
        ConstructionKind::TopDims(k) => {
            if k > n {
                return Err(Error::usage("k exceeds the rank"));
            }
            Ok(vec![lattice.levels_family(&(k..=n).collect::<Vec<_>>())?])
        }
        ConstructionKind::SpernerStar(k) => {
            sigma_star_levels(n, k)?.iter().map(|w| lattice.levels_family(w)).collect()
        }
        ConstructionKind::KleitmanSharp { s, k } => {
            if s * k != n + 1 {
                return Err(Error::usage(format!("sharp case needs n = sk - 1 (n={n}, s={s}, k={k})")));
            }
            make_construction(lattice, ConstructionKind::TopDims(k))
        }
        ConstructionKind::CrossDependentSharp { s, l, r } => {
            if s < 3 || r >= s || s * l + r != n {
                return Err(Error::usage(format!("need n = sl + r, 0 ≤ r < s, s ≥ 3 (n={n}, s={s}, l={l}, r={r})")));
            }
            let above = lattice.levels_family(&(l + 1..=n).collect::<Vec<_>>())?;
            let at_least = lattice.levels_family(&(l..=n).collect::<Vec<_>>())?;
            let mut out = vec![above; r + 1];
            out.extend(std::iter::repeat_n(at_least, s - r - 1));
            Ok(out)
        }
    }
}

fn check_lattice(lattice: &Lattice, rep: &BoundReport) -> Result<()> {
    let n = rep.params.get("n").and_then(Value::as_u64).unwrap_or(0) as usize;
    let q = rep.params.get("q").and_then(Value::as_u64).map(|q| q as u32);
    let expected = match q {
        Some(q) => LatticeSpec::Linear(q),
        None => LatticeSpec::Boolean,
    };
    if lattice.n() != n || lattice.spec() != expected {
        return Err(Error::usage(format!("bound parameters do not match {}", lattice.name())));
    }
    Ok(())
}

/// Builds the sharpness construction for the report's theorem on `lattice`
/// and runs the matching detector on it.
pub fn attach_construction(rep: &mut BoundReport, lattice: &Lattice) -> Result<()> {
    check_lattice(lattice, rep)?;
    let p = |k: &str| rep.params.get(k).and_then(Value::as_u64).unwrap_or(0) as usize;
    lattice.tabulate_disjointness();
    let construction = match rep.theorem_id.as_str() {
        "T1.1" | "T1.3" | "T1.2" | "T1.4" => {
            let k = if rep.theorem_id == "T1.1" || rep.theorem_id == "T1.3" { 1 } else { p("k") };
            let families = make_construction(lattice, ConstructionKind::SpernerStar(k))?;
            let mut witness = None;
            for f in &families {
                if let Some(w) = has_chain(lattice, f, k + 1)? {
                    witness = Some(w);
                    break;
                }
            }
            Construction { kind: format!("sperner_star({k})"), families, valid: Some(witness.is_none()), witness }
        }
        "T1.12i" | "T1.13i" => {
            let (s, k) = (p("s"), p("k"));
            let families = make_construction(lattice, ConstructionKind::KleitmanSharp { s, k })?;
            let witness = has_s_disjoint(lattice, &families[0], s)?;
            Construction { kind: format!("kleitman_sharp({s},{k})"), families, valid: Some(witness.is_none()), witness }
        }
        "T1.14" => {
            let (s, l, r) = (p("s"), p("l"), p("r"));
            let families = make_construction(lattice, ConstructionKind::CrossDependentSharp { s, l, r })?;
            let cd = are_cross_dependent(lattice, &families)?;
            let witness = cd.transversal.map(|t| Witness {
                kind: "transversal".into(),
                roles: t.iter().enumerate().map(|(i, &h)| (format!("V{}", i + 1), h)).collect(),
                handles: t,
            });
            Construction { kind: format!("cross_dependent_sharp({s},{l},{r})"), families, valid: Some(cd.dependent), witness }
        }
        other => return Err(Error::usage(format!("no construction for {other}"))),
    };
    if construction.valid == Some(false) {
        rep.flags.push("construction contains the forbidden configuration".into());
    }
    rep.construction = Some(construction);
    Ok(())
}
