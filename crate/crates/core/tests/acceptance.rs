//! Acceptance run: one line per criterion.
//!
//! Criteria 9 and 10 ask for constructions that the detectors show to contain
//! the forbidden configuration. They are reported as FAIL; the run itself only
//! fails if any criterion's outcome differs from what is recorded here.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use qlat_core::algebra::{alpha, covering_multiplicity, gauss_binom, rat, sigma_sets, sigma_spaces};
use qlat_core::bounds::{
    attach_construction, bound_cross_dependent, bound_kleitman, bound_qalgebra_lubell, lemma_4_9_grid, BoundValue,
};
use qlat_core::covering::{verify_covering, verify_transfer_sample, DEFAULT_BASIS_CAP};
use qlat_core::lattice::Lattice;
use qlat_core::patterns::Forbidden;
use qlat_core::search::{
    max_family, verify_theorem, Scope, SearchMode, SearchResult, SearchTask, TheoremParams, TheoremReport,
};

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the criterion fails for a documented reason; `pass` must then be false.
    known_failure: Option<&'static str>,
}

fn ok(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, known_failure: None }
}

fn theorem(id: &str, l: &Lattice, scope: Scope, params: TheoremParams) -> TheoremReport {
    verify_theorem(id, l, &scope, &params).unwrap_or_else(|e| panic!("{id} on {}: {e}", l.name()))
}

fn exact_max(l: &Lattice, f: Forbidden) -> SearchResult {
    max_family(&SearchTask::new(l, f, SearchMode::Exact)).unwrap()
}

fn k(k: usize) -> TheoremParams {
    TheoremParams { k: Some(k), ..Default::default() }
}

fn c1() -> Outcome {
    let mut pass = true;
    for q in [2u32, 3, 4] {
        for n in 1..=4usize {
            let l = Lattice::linear(q, n).unwrap();
            for i in 0..=n {
                pass &= BigUint::from(l.level_size(i)) == gauss_binom(n as i64, i as i64, q).unwrap();
            }
        }
    }
    let s32 = Lattice::linear(2, 3).unwrap().size();
    let s42 = Lattice::linear(2, 4).unwrap().size();
    ok(pass && s32 == 16 && s42 == 67, format!("level sizes exact for q<=4, n<=4; |L_3(2)|={s32}, |L_4(2)|={s42}"))
}

fn c2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (q, n) in [(2u32, 2usize), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)] {
        let l = Lattice::linear(q, n).unwrap();
        let rep = verify_covering(&l, DEFAULT_BASIS_CAP).unwrap();
        let mut good = rep.ok() && BigUint::from(rep.gamma_size) == alpha(q, n).unwrap();
        for lv in &rep.per_level {
            let t = covering_multiplicity(q, n, lv.dim).unwrap().to_u64().unwrap();
            good &= lv.min_observed == t && lv.max_observed == t;
        }
        pass &= good;
        parts.push(format!("({q},{n}):|G|={}", rep.gamma_size));
    }
    ok(pass, parts.join(" "))
}

fn c3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (q, n) in [(2u32, 3usize), (3, 2)] {
        let l = Lattice::linear(q, n).unwrap();
        let rep = verify_transfer_sample(&l, 1000, 2024, true, DEFAULT_BASIS_CAP).unwrap();
        pass &= rep.ok() && rep.unweighted_ok == 1000 && rep.weighted_ok == 1000;
        parts.push(format!("{}: {}/{} plain, {}/{} weighted", l.name(), rep.unweighted_ok, 1000, rep.weighted_ok, 1000));
    }
    ok(pass, parts.join("; "))
}

fn c4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [Lattice::linear(2, 3).unwrap(), Lattice::linear(3, 2).unwrap()] {
        let rep = theorem("T3.1", &l, Scope::Antichains, TheoremParams::default());
        let eq = rep.stats.get("equality").copied().unwrap_or(0);
        pass &= rep.violation_count == 0 && rep.max_lhs_value() == Some(rat(1, 1)) && eq == (l.n() + 1) as u64;
        parts.push(format!("{}: {} antichains, max l_q={}, {} equality cases (all full levels)", l.name(), rep.checked, rep.max_lhs.unwrap().lhs, eq));
    }
    ok(pass, parts.join("; "))
}

fn c5() -> Outcome {
    let mut pass = true;
    let mut sizes = Vec::new();
    let b4 = Lattice::boolean(4).unwrap();
    let l32 = Lattice::linear(2, 3).unwrap();
    for kk in 1..=3 {
        for (l, lubell_id, size_id, sigma) in [
            (&b4, "T1.6", "T1.2", sigma_sets(4, kk).unwrap()),
            (&l32, "T3.2", "T1.4", sigma_spaces(3, kk, 2).unwrap()),
        ] {
            let a = theorem(lubell_id, l, Scope::Exhaustive, k(kk));
            let b = theorem(size_id, l, Scope::Exhaustive, k(kk));
            let m = exact_max(l, Forbidden::Chain(kk + 1));
            pass &= a.violation_count == 0 && b.violation_count == 0 && BigUint::from(m.best_size) == sigma && m.optimal;
            sizes.push(format!("{}:k={kk}->{}", l.name(), m.best_size));
        }
    }
    ok(pass, format!("no Lubell or size violations; max sizes {}", sizes.join(" ")))
}

fn c6() -> Outcome {
    let a = theorem("T3.10", &Lattice::boolean(4).unwrap(), Scope::Exhaustive, TheoremParams::default());
    let b = theorem("T3.11", &Lattice::linear(2, 3).unwrap(), Scope::Exhaustive, TheoremParams::default());
    ok(
        a.violation_count == 0 && b.violation_count == 0 && a.checked == 65536 && b.checked == 65536,
        format!("B_4 max {}, L_3(2) max {}, over 2^16 families each", a.max_lhs.unwrap().lhs, b.max_lhs.unwrap().lhs),
    )
}

fn c7() -> Outcome {
    let a = theorem("T3.8", &Lattice::boolean(4).unwrap(), Scope::Antichains, TheoremParams::default());
    let b = theorem("T3.9", &Lattice::linear(2, 3).unwrap(), Scope::Antichains, TheoremParams::default());
    ok(
        a.violation_count == 0 && b.violation_count == 0 && a.in_hypothesis > 0 && b.in_hypothesis > 0,
        format!(
            "B_4: {} antichains with k, max {}; L_3(2): {} with k, max {}",
            a.in_hypothesis,
            a.max_lhs.unwrap().lhs,
            b.in_hypothesis,
            b.max_lhs.unwrap().lhs
        ),
    )
}

fn c8() -> Outcome {
    let l = Lattice::linear(2, 3).unwrap();
    let s3 = TheoremParams { s: Some(3), ..Default::default() };
    let single = theorem("T4.6", &l, Scope::Exhaustive, s3.clone());
    let tuples = theorem("T4.5", &l, Scope::Exhaustive, s3);
    let distinct = single.stats.get("distinct_reading_violation").copied().unwrap_or(0);
    ok(
        single.violation_count == 0 && tuples.violation_count == 0 && single.max_lhs_value().unwrap() <= rat(8, 3),
        format!(
            "max norm {} <= 8/3 over {} families; triples: {} checked, max sum {} <= 8 (families containing 0 with distinct members only: {} exceed 8/3)",
            single.max_lhs.as_ref().unwrap().lhs,
            single.in_hypothesis,
            tuples.in_hypothesis,
            tuples.max_lhs.as_ref().unwrap().lhs,
            distinct
        ),
    )
}

fn c9() -> Outcome {
    let l5 = Lattice::linear(2, 5).unwrap();
    let mut rep = bound_kleitman(5, 3, Some(2)).unwrap();
    let bound = match &rep.bound {
        BoundValue::Exact(x) => x.clone(),
        BoundValue::Real(_) => unreachable!(),
    };
    attach_construction(&mut rep, &l5).unwrap();
    let c = rep.construction.as_ref().unwrap();
    let size_ok = rat(c.total() as i64, 1) == bound && c.total() == 342;
    let valid = c.valid == Some(true);
    let l3 = Lattice::linear(2, 3).unwrap();
    let m = exact_max(&l3, Forbidden::Disjoint(3));
    let small_ok = m.best_size <= 12 && m.optimal;
    let witness = c.witness.as_ref().map(|w| {
        w.handles.iter().map(|&h| format!("<{}>", l5.row_strings(h).join(","))).collect::<Vec<_>>().join(" ")
    });
    let detail = format!(
        "size {} = bound {}; construction free of 3 pairwise disjoint members: {}{}; exact max on L_3(2) = {} <= 12",
        c.total(),
        bound,
        valid,
        witness.map(|w| format!(" (witness {w})")).unwrap_or_default(),
        m.best_size
    );
    let pass = size_ok && valid && small_ok;
    let expected = size_ok && !valid && small_ok;
    Outcome {
        pass,
        detail,
        known_failure: expected.then_some("the dim>=2 family of L_5(2) contains three pairwise disjoint planes"),
    }
}

fn c10() -> Outcome {
    let l = Lattice::linear(2, 3).unwrap();
    let mut rep = bound_cross_dependent(3, 3, 2).unwrap();
    attach_construction(&mut rep, &l).unwrap();
    let c = rep.construction.as_ref().unwrap();
    let total_ok = c.total() == 38 && rep.bound.upper() == rat(38, 1);
    let dependent = c.valid == Some(true);
    let best = theorem("T1.14", &l, Scope::Exhaustive, TheoremParams { s: Some(3), ..Default::default() });
    let transversal = c.witness.as_ref().map(|w| {
        w.handles.iter().map(|&h| format!("<{}>", l.row_strings(h).join(","))).collect::<Vec<_>>().join(" ")
    });
    let detail = format!(
        "sizes {:?} total {} = bound 38; cross-dependent: {}{}; largest cross-dependent triple total {}",
        c.sizes(),
        c.total(),
        dependent,
        transversal.map(|t| format!(" (transversal {t})")).unwrap_or_default(),
        best.max_lhs.unwrap().lhs
    );
    let expected = total_ok && !dependent && best.violation_count == 0;
    Outcome {
        pass: total_ok && dependent,
        detail,
        known_failure: expected.then_some("pairwise disjoint lines and a plane form a transversal"),
    }
}

fn c11() -> Outcome {
    let l = Lattice::linear(2, 3).unwrap();
    let shadow = theorem("T4.7", &l, Scope::Level(2), k(2));
    let profile = theorem("L4.8", &l, Scope::Complexes, TheoremParams::default());
    let profile_b = theorem("L4.8", &Lattice::boolean(4).unwrap(), Scope::Complexes, TheoremParams::default());
    ok(
        shadow.checked == 128 && shadow.violation_count == 0 && profile.violation_count == 0 && profile_b.violation_count == 0,
        format!(
            "{} plane families, tightest slack {}; {} complexes of L_3(2) and {} of B_4 monotone",
            shadow.checked,
            shadow.tightest.unwrap().slack,
            profile.checked,
            profile_b.checked
        ),
    )
}

fn c12() -> Outcome {
    let rows = lemma_4_9_grid(&[2, 3, 4, 5], 4, 8).unwrap();
    let all = rows.iter().all(|r| r.holds);
    let boundary = rows.iter().find(|r| (r.q, r.l, r.k, r.n) == (2, 2, 5, 6));
    ok(
        all && boundary.is_some_and(|r| r.holds),
        format!(
            "{} rows all hold; (q,l,k,n)=(2,2,5,6): {} >= {}",
            rows.len(),
            boundary.map(|r| r.lhs.as_str()).unwrap_or("?"),
            boundary.map(|r| r.rhs.as_str()).unwrap_or("?")
        ),
    )
}

fn c13() -> Outcome {
    let l = Lattice::linear(2, 3).unwrap();
    let rep = theorem("P4.11", &l, Scope::Complexes, TheoremParams { l: Some(1), ..Default::default() });
    ok(
        rep.violation_count == 0 && !rep.informational && rep.in_hypothesis > 0,
        format!("{} complexes with norm < 4, tightest slack {}", rep.in_hypothesis, rep.tightest.unwrap().slack),
    )
}

fn c14() -> Outcome {
    let l22 = Lattice::linear(2, 2).unwrap();
    let l32 = Lattice::linear(2, 3).unwrap();
    let small = exact_max(&l22, Forbidden::Diamond);
    let big = exact_max(&l32, Forbidden::Diamond);
    let d3 = TheoremParams { d: Some(3), ..Default::default() };
    let a = theorem("T5.8", &l22, Scope::Exhaustive, d3.clone());
    let b = theorem("T5.8", &l32, Scope::Exhaustive, d3);
    let rep = bound_qalgebra_lubell(64, 3, Some(2)).unwrap();
    let reference = 2.0 * 65f64.powf(0.75);
    let value = rep.bound.approx();
    let rel = ((value - reference) / reference).abs();
    let enclosed = match &rep.bound {
        BoundValue::Real(r) => r.lo().to_f64().unwrap() <= reference * (1.0 + 1e-15) && r.hi().to_f64().unwrap() >= reference * (1.0 - 1e-15),
        BoundValue::Exact(_) => false,
    };
    ok(
        small.best_size == 4 && a.informational && b.informational && rel <= 1e-12 && enclosed,
        format!(
            "L_2(2) max 4 = {}; L_3(2) diamond-free max {} (data); T5.8 d=3 informational on L_2(2) ({} violations) and L_3(2) ({} violations); 2*65^(3/4) = {value:.12} (rel err {rel:.1e})",
            small.best_size, big.best_size, a.violation_count, b.violation_count
        ),
    )
}

fn c15() -> Outcome {
    let mut pass = true;
    let mut count = 0;
    for l in common::small_lattices() {
        l.tabulate_disjointness();
        for (pattern, f) in [
            ("P2", Forbidden::Chain(2)),
            ("P3", Forbidden::Chain(3)),
            ("Q2", Forbidden::Diamond),
            ("disjoint:3", Forbidden::Disjoint(3)),
        ] {
            let naive = common::naive_max(&l, pattern);
            let got = exact_max(&l, f);
            let same = got.best_size == naive.0 && got.witness_family.handles() == naive.1;
            if !same {
                println!("    mismatch on {} {pattern}: {} vs {}", l.name(), got.best_size, naive.0);
            }
            pass &= same;
            count += 1;
        }
    }
    ok(pass, format!("{count} (lattice, pattern) pairs agree with the all-subsets filter"))
}

fn reports_under(workers: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
    pool.install(|| {
        let l = Lattice::linear(2, 3).unwrap();
        let b4 = Lattice::boolean(4).unwrap();
        let mut out = String::new();
        out += &theorem("T3.11", &l, Scope::Exhaustive, TheoremParams::default()).to_json().to_string();
        out += &theorem("T4.5", &l, Scope::Exhaustive, TheoremParams { s: Some(3), ..Default::default() }).to_json().to_string();
        out += &theorem("T3.2", &l, Scope::Sample { count: 500, seed: 9 }, k(2)).to_json().to_string();
        out += &exact_max(&l, Forbidden::Diamond).to_json().to_string();
        out += &max_family(&SearchTask::new(&b4, Forbidden::Chain(2), SearchMode::Sample { count: 200, seed: 5 }))
            .unwrap()
            .to_json()
            .to_string();
        out += &max_family(&SearchTask::new(&l, Forbidden::Disjoint(3), SearchMode::BranchBound)).unwrap().to_json().to_string();
        out += &serde_json::to_string(&verify_transfer_sample(&l, 200, 3, false, DEFAULT_BASIS_CAP).unwrap()).unwrap();
        out += &serde_json::to_string(&verify_covering(&Lattice::linear(2, 4).unwrap(), DEFAULT_BASIS_CAP).unwrap()).unwrap();
        out
    })
}

fn c16() -> Outcome {
    let one = reports_under(1);
    let two = reports_under(2);
    let eight = reports_under(8);
    ok(one == two && two == eight, format!("{} report bytes identical under 1, 2 and 8 workers", one.len()))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 16] = [
        (1, "counting exactness", c1, Duration::from_secs(5)),
        (2, "covering machinery", c2, Duration::from_secs(120)),
        (3, "transfer identity", c3, Duration::from_secs(60)),
        (4, "q-LYM on antichains", c4, Duration::from_secs(60)),
        (5, "k-Sperner", c5, Duration::from_secs(300)),
        (6, "chain-participation LYM", c6, Duration::from_secs(600)),
        (7, "sharpened LYM", c7, Duration::from_secs(120)),
        (8, "matching and norm bounds", c8, Duration::from_secs(900)),
        (9, "Kleitman q-bounds", c9, Duration::from_secs(600)),
        (10, "cross-dependent sharpness", c10, Duration::from_secs(60)),
        (11, "shadows and profiles", c11, Duration::from_secs(60)),
        (12, "Lemma 4.9 grid", c12, Duration::from_secs(60)),
        (13, "q-perfectness", c13, Duration::from_secs(120)),
        (14, "diamond search and algebra bounds", c14, Duration::from_secs(600)),
        (15, "oracle equivalence", c15, Duration::from_secs(300)),
        (16, "determinism", c16, Duration::from_secs(600)),
    ];
    let mut unexpected = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = out.pass && in_time;
        let status = if pass { "PASS" } else { "FAIL" };
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
        println!("criterion {id:>2} [{status}] {name}: {} ({timing})", out.detail);
        match (pass, out.known_failure) {
            (true, None) => {}
            (false, Some(reason)) if in_time => println!("             known failure: {reason}"),
            _ => unexpected += 1,
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria deviated from their recorded outcome");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
