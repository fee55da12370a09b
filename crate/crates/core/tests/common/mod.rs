//! Brute-force reference implementations, written against nothing but the
//! order relation and disjointness of a built lattice.

#![allow(dead_code)]

use qlat_core::lattice::Lattice;

pub fn members(mask: u64, size: usize) -> Vec<usize> {
    (0..size).filter(|&i| mask >> i & 1 == 1).collect()
}

pub fn longest_chain(l: &Lattice, m: &[usize]) -> usize {
    fn from(l: &Lattice, m: &[usize], i: usize, memo: &mut Vec<usize>) -> usize {
        if memo[i] > 0 {
            return memo[i];
        }
        let mut best = 1;
        for j in 0..m.len() {
            if l.lt(m[i], m[j]) {
                best = best.max(1 + from(l, m, j, memo));
            }
        }
        memo[i] = best;
        best
    }
    let mut memo = vec![0; m.len()];
    (0..m.len()).map(|i| from(l, m, i, &mut memo)).max().unwrap_or(0)
}

/// Four distinct members x < y, x < z, y < w, z < w.
pub fn has_diamond(l: &Lattice, m: &[usize]) -> bool {
    for &y in m {
        for &z in m {
            if y == z {
                continue;
            }
            let below = m.iter().any(|&x| x != y && x != z && l.lt(x, y) && l.lt(x, z));
            let above = m.iter().any(|&w| w != y && w != z && l.lt(y, w) && l.lt(z, w));
            if below && above {
                return true;
            }
        }
    }
    false
}

/// s distinct pairwise disjoint members.
pub fn has_disjoint(l: &Lattice, m: &[usize], s: usize) -> bool {
    fn rec(l: &Lattice, m: &[usize], start: usize, chosen: &mut Vec<usize>, s: usize) -> bool {
        if chosen.len() == s {
            return true;
        }
        for i in start..m.len() {
            if chosen.iter().all(|&c| l.disjoint(c, m[i])) {
                chosen.push(m[i]);
                if rec(l, m, i + 1, chosen, s) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(l, m, 0, &mut Vec::new(), s)
}

pub fn is_antichain(l: &Lattice, m: &[usize]) -> bool {
    m.iter().all(|&a| m.iter().all(|&b| a == b || !l.le(a, b)))
}

pub fn is_down_closed(l: &Lattice, m: &[usize]) -> bool {
    m.iter().all(|&v| (0..l.size()).all(|u| !l.le(u, v) || m.contains(&u)))
}

pub fn contains_pattern(l: &Lattice, m: &[usize], pattern: &str) -> bool {
    match pattern {
        "P2" => longest_chain(l, m) >= 2,
        "P3" => longest_chain(l, m) >= 3,
        "Q2" => has_diamond(l, m),
        "disjoint:3" => has_disjoint(l, m, 3),
        other => panic!("no oracle for {other}"),
    }
}

/// Largest pattern-free family; ties go to the smallest sorted handle list.
pub fn naive_max(l: &Lattice, pattern: &str) -> (usize, Vec<usize>) {
    let size = l.size();
    assert!(size <= 20);
    let mut best: (usize, Vec<usize>) = (0, Vec::new());
    for mask in 0..1u64 << size {
        let m = members(mask, size);
        if m.len() < best.0 || m.len() == best.0 && m >= best.1 {
            continue;
        }
        if !contains_pattern(l, &m, pattern) {
            best = (m.len(), m);
        }
    }
    best
}

/// Every lattice with at most 16 elements that the tools can build.
pub fn small_lattices() -> Vec<Lattice> {
    let mut out: Vec<Lattice> = (1..=4).map(|n| Lattice::boolean(n).unwrap()).collect();
    for q in 2..=16 {
        for n in 1..=3 {
            if let Ok(l) = Lattice::linear(q, n) {
                if l.size() <= 16 {
                    out.push(l);
                }
            }
        }
    }
    out
}
