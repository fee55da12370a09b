//! Report envelopes and their JSON / CSV serializations.
//!
//! JSON output is canonical: object keys are sorted (serde_json's default map
//! is ordered) and no wall-clock data is included unless asked for.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::bounds::Lemma49Row;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const TOOL: &str = "qlat";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::usage(format!("unknown format '{s}' (json, csv)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Self-describing wrapper around a command's result.
#[derive(Clone, Debug, Default)]
pub struct Envelope {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub caps: BTreeMap<String, Value>,
    pub lattices: Vec<(String, String)>,
    pub result: Value,
    pub runtime_ms: Option<u128>,
}

impl Envelope {
    pub fn new(command: &str, result: Value) -> Self {
        Envelope { command: command.to_string(), result, ..Default::default() }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn cap(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.caps.insert(key.to_string(), value.into());
        self
    }

    pub fn lattice(mut self, lattice: &Lattice) -> Self {
        self.lattices.push((lattice.name(), lattice.digest()));
        self
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "params": self.params,
            "caps": self.caps,
            "seed": self.seed,
            "result": self.result,
        });
        if !self.lattices.is_empty() {
            v["lattices"] = self
                .lattices
                .iter()
                .map(|(name, digest)| json!({"name": name, "digest": digest}))
                .collect();
        }
        if let Some(ms) = self.runtime_ms {
            v["runtime_ms"] = json!(ms as u64);
        }
        v
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(&self.to_value())
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn lemma_4_9_csv(rows: &[Lemma49Row]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.q.to_string(), r.l.to_string(), r.k.to_string(), r.n.to_string(), r.lhs.clone(), r.rhs.clone(), r.holds.to_string()])
        .collect();
    to_csv(&["q", "l", "k", "n", "lhs", "rhs", "holds"], &body)
}
