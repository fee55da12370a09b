mod common;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use qlat_core::algebra::{alpha, binomial, gauss_binom};
use qlat_core::covering::enumerate_bases;
use qlat_core::lattice::Lattice;
use qlat_core::patterns::{contains_strong, contains_weak, has_boolean_algebra, PosetPattern};
use qlat_core::search::{enumerate_antichains, enumerate_complexes, DEFAULT_ENUM_CAP};

use common::{is_antichain, is_down_closed, members};

type Vector = Vec<u32>;

fn span(p: u32, gens: &[Vector], n: usize) -> BTreeSet<Vector> {
    let mut out = BTreeSet::new();
    out.insert(vec![0; n]);
    for g in gens {
        let current: Vec<Vector> = out.iter().cloned().collect();
        for v in current {
            for c in 1..p {
                out.insert((0..n).map(|i| (v[i] + c * g[i]) % p).collect());
            }
        }
    }
    out
}

fn all_vectors(p: u32, n: usize) -> Vec<Vector> {
    (0..p.pow(n as u32))
        .map(|mut code| {
            let mut v = vec![0; n];
            for i in (0..n).rev() {
                v[i] = code % p;
                code /= p;
            }
            v
        })
        .collect()
}

fn handle_span(l: &Lattice, p: u32, h: usize) -> BTreeSet<Vector> {
    let rows: Vec<Vector> = l.digits(h).iter().map(|r| r.iter().map(|&d| d as u32).collect()).collect();
    span(p, &rows, l.n())
}

#[test]
fn subspaces_match_span_closure() {
    for (p, n) in [(2u32, 2usize), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2)] {
        let l = Lattice::linear(p, n).unwrap();
        let vectors = all_vectors(p, n);
        let mut naive = BTreeSet::new();
        let mut stack: Vec<(Vec<Vector>, usize)> = vec![(Vec::new(), 0)];
        while let Some((gens, start)) = stack.pop() {
            naive.insert(span(p, &gens, n));
            if gens.len() < n {
                for i in start..vectors.len() {
                    let mut g = gens.clone();
                    g.push(vectors[i].clone());
                    stack.push((g, i + 1));
                }
            }
        }
        let spans: Vec<BTreeSet<Vector>> = (0..l.size()).map(|h| handle_span(&l, p, h)).collect();
        let distinct: BTreeSet<_> = spans.iter().cloned().collect();
        assert_eq!(distinct.len(), l.size(), "duplicate handles in L_{n}({p})");
        assert_eq!(distinct, naive, "L_{n}({p})");
        for a in 0..l.size() {
            assert_eq!(spans[a].len(), p.pow(l.dim(a) as u32) as usize);
            for b in 0..l.size() {
                assert_eq!(l.le(a, b), spans[a].is_subset(&spans[b]));
                let meet = spans[a].intersection(&spans[b]).count();
                assert_eq!(l.disjoint(a, b), meet == 1);
                assert_eq!(p.pow(l.meet_dim(a, b) as u32) as usize, meet);
                let both: Vec<Vector> = spans[a].iter().chain(spans[b].iter()).cloned().collect();
                assert_eq!(spans[l.join(a, b)], span(p, &both, n));
            }
        }
    }
}

#[test]
fn gaussian_binomial_product_formula() {
    for q in [2u32, 3, 4, 5] {
        let big = BigUint::from(q);
        let one = BigUint::from(1u32);
        for n in 0..=12u32 {
            for k in 0..=n {
                let mut num = one.clone();
                let mut den = one.clone();
                for i in 0..k {
                    num *= big.pow(n - i) - &one;
                    den *= big.pow(i + 1) - &one;
                }
                assert_eq!(&num % &den, BigUint::from(0u32));
                assert_eq!(gauss_binom(n as i64, k as i64, q).unwrap(), num / den, "[{n},{k}]_{q}");
            }
        }
    }
    assert_eq!(binomial(10, 3).unwrap(), BigUint::from(120u32));
}

#[test]
fn bases_counted_directly() {
    for (p, n) in [(2u32, 2usize), (2, 3), (3, 2), (2, 4), (3, 3)] {
        let vectors: Vec<Vector> = all_vectors(p, n).into_iter().skip(1).collect();
        let full = p.pow(n as u32) as usize;
        let mut count = 0u64;
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
        while let Some((chosen, start)) = stack.pop() {
            if chosen.len() == n {
                let gens: Vec<Vector> = chosen.iter().map(|&i| vectors[i].clone()).collect();
                if span(p, &gens, n).len() == full {
                    count += 1;
                }
                continue;
            }
            for i in start..vectors.len() {
                let mut c = chosen.clone();
                c.push(i);
                stack.push((c, i + 1));
            }
        }
        assert_eq!(alpha(p, n).unwrap(), BigUint::from(count), "alpha({p},{n})");
        assert_eq!(enumerate_bases(p, n, 1 << 20).unwrap().len() as u64, count);
    }
}

#[test]
fn antichains_and_complexes_match_filters() {
    let cases = [
        Lattice::boolean(2).unwrap(),
        Lattice::boolean(3).unwrap(),
        Lattice::linear(2, 2).unwrap(),
        Lattice::linear(3, 2).unwrap(),
    ];
    for l in &cases {
        let size = l.size();
        let mut anti = BTreeSet::new();
        let mut down = BTreeSet::new();
        for mask in 0..1u64 << size {
            let m = members(mask, size);
            if is_antichain(l, &m) {
                anti.insert(m.clone());
            }
            if is_down_closed(l, &m) {
                down.insert(m);
            }
        }
        let got_anti: Vec<Vec<usize>> =
            enumerate_antichains(l, DEFAULT_ENUM_CAP).unwrap().iter().map(|f| f.handles()).collect();
        let got_down: Vec<Vec<usize>> =
            enumerate_complexes(l, DEFAULT_ENUM_CAP).unwrap().iter().map(|f| f.handles()).collect();
        assert_eq!(got_anti.len(), anti.len(), "{}", l.name());
        assert_eq!(got_anti.iter().cloned().collect::<BTreeSet<_>>(), anti);
        assert_eq!(got_down.iter().cloned().collect::<BTreeSet<_>>(), down);
        assert_eq!(got_down.len(), down.len());
    }
    assert_eq!(enumerate_antichains(&Lattice::boolean(2).unwrap(), DEFAULT_ENUM_CAP).unwrap().len(), 6);
}

fn embeds(l: &Lattice, m: &[usize], p: &PosetPattern, strong: bool) -> bool {
    fn rec(l: &Lattice, m: &[usize], p: &PosetPattern, strong: bool, image: &mut Vec<usize>) -> bool {
        let u = image.len();
        if u == p.size() {
            return true;
        }
        for &x in m {
            if image.contains(&x) {
                continue;
            }
            let ok = (0..u).all(|v| {
                let y = image[v];
                let weak = (!p.less(v, u) || l.lt(y, x)) && (!p.less(u, v) || l.lt(x, y));
                let exact = p.less(v, u) == l.lt(y, x) && p.less(u, v) == l.lt(x, y);
                if strong { exact } else { weak }
            });
            if ok {
                image.push(x);
                if rec(l, m, p, strong, image) {
                    return true;
                }
                image.pop();
            }
        }
        false
    }
    rec(l, m, p, strong, &mut Vec::new())
}

fn patterns() -> Vec<PosetPattern> {
    vec![
        PosetPattern::chain(1),
        PosetPattern::chain(2),
        PosetPattern::chain(3),
        PosetPattern::chain(4),
        PosetPattern::antichain(2),
        PosetPattern::antichain(3),
        PosetPattern::diamond(),
        PosetPattern::from_relations("V", 3, &[(0, 1), (0, 2)]).unwrap(),
        PosetPattern::from_relations("Lambda", 3, &[(0, 2), (1, 2)]).unwrap(),
        PosetPattern::from_relations("N", 4, &[(0, 2), (1, 2), (1, 3)]).unwrap(),
        PosetPattern::from_relations("P2+P1", 3, &[(0, 1)]).unwrap(),
        PosetPattern::from_relations("Butterfly", 4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap(),
    ]
}

#[test]
fn containment_matches_embedding_enumerator_on_b3() {
    let l = Lattice::boolean(3).unwrap();
    let pats = patterns();
    for mask in 0..1u64 << l.size() {
        let m = members(mask, l.size());
        let f = l.family(m.clone()).unwrap();
        for p in &pats {
            let weak = contains_weak(&l, &f, p).unwrap();
            let strong = contains_strong(&l, &f, p).unwrap();
            assert_eq!(weak.is_some(), embeds(&l, &m, p, false), "weak {} in {m:?}", p.name());
            assert_eq!(strong.is_some(), embeds(&l, &m, p, true), "strong {} in {m:?}", p.name());
            assert!(strong.is_none() || weak.is_some());
        }
    }
}

#[test]
fn one_dimensional_boolean_algebra_is_a_comparable_pair() {
    let l = Lattice::boolean(3).unwrap();
    let p2 = PosetPattern::chain(2);
    for mask in 0..1u64 << l.size() {
        let f = l.family(members(mask, l.size())).unwrap();
        assert_eq!(
            has_boolean_algebra(&l, &f, 1).unwrap().is_some(),
            contains_weak(&l, &f, &p2).unwrap().is_some()
        );
    }
}
