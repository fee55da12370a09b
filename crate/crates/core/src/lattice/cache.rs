//! Plain-text lattice cache.
//!
//! ```text
//! QLAT 1 <q|B> <n> <count>
//! <dim>:<row>,<row>,...      one line per element, in handle order
//! SHA256:<hex of every byte above>
//! ```
//!
//! Rows are written as base-q digit strings (digits ≥ 10 as lowercase letters).

use std::fs;
use std::path::Path;

use num_traits::ToPrimitive;
use sha2::{Digest, Sha256};

use super::{cmp_boolean, Lattice, LatticeCaps, LatticeSpec, Store};
use crate::algebra::FieldSpec;
use crate::error::{Error, Result};

pub const CACHE_VERSION: u32 = 1;

pub(super) fn body_bytes(lattice: &Lattice) -> Vec<u8> {
    let mut out = format!("QLAT {CACHE_VERSION} {} {} {}\n", lattice.spec(), lattice.n(), lattice.size());
    for h in 0..lattice.size() {
        out.push_str(&lattice.dim(h).to_string());
        out.push(':');
        out.push_str(&lattice.row_strings(h).join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub(super) fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn save_lattice(lattice: &Lattice, path: &Path) -> Result<()> {
    let mut bytes = body_bytes(lattice);
    let digest = digest_hex(&bytes);
    bytes.extend_from_slice(format!("SHA256:{digest}\n").as_bytes());
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_header(line: &str) -> Result<(LatticeSpec, usize, usize)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "QLAT" {
        return Err(Error::format("missing QLAT header"));
    }
    let version: u32 = parts[1].parse().map_err(|_| Error::format("bad version field"))?;
    if version != CACHE_VERSION {
        return Err(Error::format(format!("unsupported cache version {version}")));
    }
    let spec = match parts[2] {
        "B" => LatticeSpec::Boolean,
        q => LatticeSpec::Linear(q.parse().map_err(|_| Error::format("bad q field"))?),
    };
    let n = parts[3].parse().map_err(|_| Error::format("bad n field"))?;
    let count = parts[4].parse().map_err(|_| Error::format("bad count field"))?;
    Ok((spec, n, count))
}

pub fn load_lattice(path: &Path) -> Result<Lattice> {
    load_lattice_with_caps(path, &LatticeCaps::default())
}

pub fn load_lattice_with_caps(path: &Path, caps: &LatticeCaps) -> Result<Lattice> {
    let bytes = fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::format("cache is not UTF-8"))?;
    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| Error::format("truncated cache"))?;
    let (body, trailer) = text.split_at(body_end);
    let stored = trailer
        .trim_end()
        .strip_prefix("SHA256:")
        .ok_or_else(|| Error::format("missing digest line"))?;
    if digest_hex(body.as_bytes()) != stored {
        return Err(Error::format("digest mismatch"));
    }

    let mut lines = body.lines();
    let (spec, n, count) = parse_header(lines.next().ok_or_else(|| Error::format("empty cache"))?)?;
    let field = match spec {
        LatticeSpec::Boolean => None,
        LatticeSpec::Linear(q) => Some(FieldSpec::with_max_q(q, caps.max_q)?),
    };
    let base = field.as_ref().map_or(2, FieldSpec::q);
    if spec == LatticeSpec::Boolean && n > caps.max_boolean_n {
        return Err(Error::resource("boolean lattice rank n", n, caps.max_boolean_n));
    }
    let expected: Vec<usize> = (0..=n)
        .map(|k| match spec {
            LatticeSpec::Boolean => crate::algebra::binomial(n as i64, k as i64),
            LatticeSpec::Linear(q) => crate::algebra::gauss_binom(n as i64, k as i64, q),
        })
        .map(|r| r.map(|v| v.to_usize().unwrap_or(usize::MAX)))
        .collect::<Result<_>>()?;
    if expected.iter().sum::<usize>() != count {
        return Err(Error::format("element count does not match the lattice"));
    }

    let mut level_start = vec![0usize];
    let mut row_start = vec![0usize];
    let mut rows: Vec<u64> = Vec::new();
    let mut masks: Vec<u32> = Vec::new();
    let mut prev: Option<Vec<u64>> = None;
    let mut level = 0usize;
    let mut in_level = 0usize;
    for line in lines {
        let (dim, row_text) = line.split_once(':').ok_or_else(|| Error::format("bad element line"))?;
        let dim: usize = dim.parse().map_err(|_| Error::format("bad dimension"))?;
        while level <= n && in_level == expected[level] {
            level += 1;
            in_level = 0;
            level_start.push(level_start.last().unwrap() + expected[level - 1]);
            row_start.push(rows.len());
            prev = None;
        }
        if level > n || dim != level {
            return Err(Error::format("elements out of order"));
        }
        let mut digits: Vec<Vec<u8>> = Vec::new();
        if !row_text.is_empty() {
            for r in row_text.split(',') {
                let v: Option<Vec<u8>> = r
                    .chars()
                    .map(|c| c.to_digit(36).filter(|&d| d < base).map(|d| d as u8))
                    .collect();
                match v {
                    Some(v) if v.len() == n => digits.push(v),
                    _ => return Err(Error::format("bad row")),
                }
            }
        }
        if digits.len() != dim {
            return Err(Error::format("row count differs from dimension"));
        }
        let key: Vec<u64> = match &field {
            Some(f) => {
                let mut check = digits.clone();
                f.rref(&mut check);
                if check != digits {
                    return Err(Error::format("row list is not in canonical form"));
                }
                digits.iter().map(|r| f.encode(r)).collect()
            }
            None => {
                let mut mask = 0u32;
                for r in &digits {
                    let ones: Vec<usize> = (0..n).filter(|&x| r[x] != 0).collect();
                    if ones.len() != 1 {
                        return Err(Error::format("boolean row is not a unit vector"));
                    }
                    mask |= 1 << ones[0];
                }
                if mask.count_ones() as usize != dim {
                    return Err(Error::format("repeated boolean row"));
                }
                if let Some(&last) = masks.last().filter(|_| in_level > 0) {
                    if cmp_boolean(last, mask) != std::cmp::Ordering::Less {
                        return Err(Error::format("elements out of order"));
                    }
                }
                masks.push(mask);
                in_level += 1;
                continue;
            }
        };
        if prev.as_ref().is_some_and(|p| p >= &key) {
            return Err(Error::format("elements out of order"));
        }
        rows.extend_from_slice(&key);
        prev = Some(key);
        in_level += 1;
    }
    while level <= n && in_level == expected[level] {
        level += 1;
        in_level = 0;
        level_start.push(level_start.last().unwrap() + expected[level - 1]);
        row_start.push(rows.len());
    }
    if level != n + 1 {
        return Err(Error::format("truncated element list"));
    }
    let store = match field {
        Some(field) => Store::Linear { field, rows, row_start },
        None => Store::Boolean(masks),
    };
    Ok(Lattice::assemble(n, level_start, store, caps))
}
