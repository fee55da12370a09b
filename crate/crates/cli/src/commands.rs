use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use qlat_core::algebra::{alpha, binomial, gauss_binom};
use qlat_core::bounds::{
    attach_construction, bound_cross_dependent, bound_diamond_lubell, bound_diamond_size, bound_frankl_norm,
    bound_frankl_norm_sum, bound_k_sperner, bound_kleitman, bound_polymath, bound_qalgebra_lubell, bound_qalgebra_size,
    bound_ramsey, bound_sperner, lemma_4_9_grid, BoundReport,
};
use qlat_core::covering::{verify_covering, verify_transfer_sample};
use qlat_core::lattice::{load_lattice_with_caps, save_lattice, Lattice, LatticeCaps, LatticeSpec};
use qlat_core::patterns::Forbidden;
use qlat_core::report::{lemma_4_9_csv, to_csv, Envelope};
use qlat_core::search::{max_family, ramsey_color_check, verify_theorem, Scope, SearchMode, SearchTask, TheoremParams};
use qlat_core::{Error, Result};

use crate::{BoundsArgs, Cli, Command, Global, LatticeArgs, LatticeCmd, SearchCmd, ShadowCmd, TheoremArgs, VerifyCmd};

pub struct Output {
    pub text: String,
    pub violations: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fmt {
    Plain,
    Json,
    Csv,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn format_of(g: &Global, default: Fmt) -> Result<Fmt> {
    match g.format.as_deref() {
        None => Ok(default),
        Some("json") => Ok(Fmt::Json),
        Some("csv") => Ok(Fmt::Csv),
        Some(other) => Err(usage(format!("unknown format '{other}' (json, csv)"))),
    }
}

fn no_csv(fmt: Fmt) -> Result<()> {
    if fmt == Fmt::Csv {
        return Err(usage("csv output is not available for this command"));
    }
    Ok(())
}

fn caps(g: &Global) -> LatticeCaps {
    LatticeCaps { max_level_size: g.max_level_size, ..LatticeCaps::default() }
}

fn spec_of(args: &LatticeArgs) -> Result<LatticeSpec> {
    match (args.q, args.boolean) {
        (Some(q), false) => Ok(LatticeSpec::Linear(q)),
        (None, true) => Ok(LatticeSpec::Boolean),
        _ => Err(usage("give exactly one of --q Q or --boolean")),
    }
}

fn cache_path(dir: &std::path::Path, spec: LatticeSpec, n: usize) -> PathBuf {
    match spec {
        LatticeSpec::Boolean => dir.join(format!("B_n{n}.qlat")),
        LatticeSpec::Linear(q) => dir.join(format!("L_q{q}_n{n}.qlat")),
    }
}

/// Loads the lattice from the cache directory when a file is there,
/// otherwise enumerates it.
fn obtain(g: &Global, spec: LatticeSpec, n: usize) -> Result<(Lattice, &'static str)> {
    if let Some(dir) = &g.cache {
        let path = cache_path(dir, spec, n);
        if path.exists() {
            return Ok((load_lattice_with_caps(&path, &caps(g))?, "cache"));
        }
    }
    Ok((Lattice::build(spec, n, &caps(g))?, "built"))
}

fn envelope(g: &Global, command: &str, result: Value) -> Envelope {
    let mut e = Envelope::new(command, result)
        .cap("max_level_size", g.max_level_size)
        .cap("basis_cap", g.basis_cap)
        .cap("node_cap", g.node_cap);
    e.seed = Some(g.seed);
    e
}

fn theorem_params(p: &TheoremArgs, tuple_cap: Option<usize>) -> TheoremParams {
    TheoremParams { s: p.s, k: p.k, l: p.l, d: p.d, tuple_size_cap: tuple_cap }
}

fn lattice_params(e: Envelope, args: &LatticeArgs) -> Envelope {
    let e = e.param("n", args.n);
    match args.q {
        Some(q) => e.param("q", q),
        None => e.param("lattice", "B"),
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.global.workers {
        if w == 0 {
            return Err(usage("--workers must be positive"));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| usage(e.to_string()))?;
    let start = Instant::now();
    let (envelope, fmt_text, violations) = pool.install(|| dispatch(cli))?;
    let text = match envelope {
        Some(mut e) => {
            if cli.global.timing {
                e.runtime_ms = Some(start.elapsed().as_millis());
            }
            e.to_json()
        }
        None => fmt_text,
    };
    Ok(Output { text, violations })
}

type Dispatched = (Option<Envelope>, String, bool);

fn dispatch(cli: &Cli) -> Result<Dispatched> {
    let g = &cli.global;
    match &cli.command {
        Command::Binom { n, k, q } => {
            let fmt = format_of(g, Fmt::Plain)?;
            no_csv(fmt)?;
            let v = match q {
                Some(q) => gauss_binom(*n, *k, *q)?,
                None => binomial(*n, *k)?,
            };
            if fmt == Fmt::Plain {
                return Ok((None, format!("{v}\n"), false));
            }
            let mut e = envelope(g, "binom", json!({"value": v.to_string()})).param("n", *n).param("k", *k);
            if let Some(q) = q {
                e = e.param("q", *q);
            }
            Ok((Some(e), String::new(), false))
        }
        Command::Alpha { q, n } => {
            let fmt = format_of(g, Fmt::Plain)?;
            no_csv(fmt)?;
            let v = alpha(*q, *n)?;
            if fmt == Fmt::Plain {
                return Ok((None, format!("{v}\n"), false));
            }
            let e = envelope(g, "alpha", json!({"value": v.to_string()})).param("q", *q).param("n", *n);
            Ok((Some(e), String::new(), false))
        }
        Command::Lattice { action } => lattice_cmd(g, action),
        Command::Verify { what } => verify_cmd(g, what),
        Command::Bounds(args) => bounds_cmd(g, args),
        Command::Search { what } => search_cmd(g, what),
        Command::Shadow { what } => {
            let ShadowCmd::Check { q, n, k } = what;
            no_csv(format_of(g, Fmt::Json)?)?;
            let (lattice, _) = obtain(g, LatticeSpec::Linear(*q), *n)?;
            let params = TheoremParams { k: Some(*k), ..Default::default() };
            let rep = verify_theorem("T4.7", &lattice, &Scope::Level(*k), &params)?;
            let bad = !rep.passed();
            let e = envelope(g, "shadow check", rep.to_json()).param("q", *q).param("n", *n).param("k", *k).lattice(&lattice);
            Ok((Some(e), String::new(), bad))
        }
    }
}

fn lattice_info(lattice: &Lattice) -> Value {
    json!({
        "name": lattice.name(),
        "n": lattice.n(),
        "spec": lattice.spec().to_string(),
        "size": lattice.size(),
        "level_sizes": lattice.level_sizes(),
        "digest": lattice.digest(),
    })
}

fn lattice_cmd(g: &Global, action: &LatticeCmd) -> Result<Dispatched> {
    let fmt = format_of(g, Fmt::Json)?;
    let (args, building) = match action {
        LatticeCmd::Build(a) => (a, true),
        LatticeCmd::Info(a) => (a, false),
    };
    let spec = spec_of(args)?;
    let (lattice, source) = if building {
        (Lattice::build(spec, args.n, &caps(g))?, "built")
    } else {
        obtain(g, spec, args.n)?
    };
    if fmt == Fmt::Csv {
        let rows: Vec<Vec<String>> =
            lattice.level_sizes().iter().enumerate().map(|(i, s)| vec![i.to_string(), s.to_string()]).collect();
        return Ok((None, to_csv(&["dim", "count"], &rows), false));
    }
    let mut info = lattice_info(&lattice);
    info["source"] = json!(source);
    if building {
        match &g.cache {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = cache_path(dir, spec, args.n);
                save_lattice(&lattice, &path)?;
                info["cache_file"] = json!(path.file_name().unwrap().to_string_lossy());
            }
            None => info["cache_file"] = Value::Null,
        }
    }
    let cmd = if building { "lattice build" } else { "lattice info" };
    let e = lattice_params(envelope(g, cmd, info), args).lattice(&lattice);
    Ok((Some(e), String::new(), false))
}

fn verify_cmd(g: &Global, what: &VerifyCmd) -> Result<Dispatched> {
    let fmt = format_of(g, Fmt::Json)?;
    match what {
        VerifyCmd::Covering { q, n } => {
            let (lattice, _) = obtain(g, LatticeSpec::Linear(*q), *n)?;
            let rep = verify_covering(&lattice, g.basis_cap)?;
            let bad = !rep.ok();
            if fmt == Fmt::Csv {
                let rows: Vec<Vec<String>> = rep
                    .per_level
                    .iter()
                    .map(|l| vec![l.dim.to_string(), l.expected_t.clone(), l.min_observed.to_string(), l.max_observed.to_string()])
                    .collect();
                return Ok((None, to_csv(&["dim", "expected_t", "min_observed", "max_observed"], &rows), bad));
            }
            let mut v = serde_json::to_value(&rep).expect("serializable");
            v["ok"] = json!(!bad);
            let e = envelope(g, "verify covering", v).param("q", *q).param("n", *n).lattice(&lattice);
            Ok((Some(e), String::new(), bad))
        }
        VerifyCmd::Transfer { q, n, samples, direct } => {
            no_csv(fmt)?;
            let (lattice, _) = obtain(g, LatticeSpec::Linear(*q), *n)?;
            let rep = verify_transfer_sample(&lattice, *samples, g.seed, *direct, g.basis_cap)?;
            let bad = !rep.ok();
            let mut v = serde_json::to_value(&rep).expect("serializable");
            v["ok"] = json!(!bad);
            let e = envelope(g, "verify transfer", v)
                .param("q", *q)
                .param("n", *n)
                .param("samples", *samples)
                .param("direct", *direct)
                .lattice(&lattice);
            Ok((Some(e), String::new(), bad))
        }
        VerifyCmd::Theorem { id, lattice: largs, scope, params, tuple_cap } => {
            let scope: Scope = scope.parse()?;
            let spec = spec_of(largs)?;
            let (lattice, _) = obtain(g, spec, largs.n)?;
            let rep = verify_theorem(id, &lattice, &scope, &theorem_params(params, *tuple_cap))?;
            let bad = !rep.passed();
            if fmt == Fmt::Csv {
                let row = vec![
                    rep.theorem_id.clone(),
                    rep.lattice.clone(),
                    rep.scope.clone(),
                    rep.checked.to_string(),
                    rep.in_hypothesis.to_string(),
                    rep.violation_count.to_string(),
                    rep.max_lhs.as_ref().map(|m| m.lhs.clone()).unwrap_or_default(),
                    rep.informational.to_string(),
                ];
                let headers = ["theorem_id", "lattice", "scope", "checked", "in_hypothesis", "violations", "max_lhs", "informational"];
                return Ok((None, to_csv(&headers, &[row]), bad));
            }
            let e = lattice_params(envelope(g, "verify theorem", rep.to_json()), largs)
                .param("id", id.as_str())
                .param("scope", scope.to_string())
                .lattice(&lattice);
            Ok((Some(e), String::new(), bad))
        }
    }
}

fn need(v: Option<usize>, name: &str, id: &str) -> Result<usize> {
    v.ok_or_else(|| usage(format!("{id} needs --{name}")))
}

fn bound_for(args: &BoundsArgs) -> Result<BoundReport> {
    let id = args.theorem.as_str();
    let n = need(args.n, "n", id)?;
    let p = &args.params;
    let q = args.q;
    let need_q = || q.ok_or_else(|| usage(format!("{id} needs --q")));
    let rep = match id {
        "T1.1" | "T1.3" => bound_sperner(n, q)?,
        "T1.2" | "T1.4" => bound_k_sperner(n, need(p.k, "k", id)?, q)?,
        _ if id.starts_with("T1.12") || id.starts_with("T1.13") => bound_kleitman(n, need(p.s, "s", id)?, q)?,
        "T1.14" => bound_cross_dependent(n, need(p.s, "s", id)?, need_q()?)?,
        "C4.3" | "T4.6" => bound_frankl_norm(n, need(p.s, "s", id)?, q.is_some())?,
        "T4.2" | "T4.5" => bound_frankl_norm_sum(n, need(p.s, "s", id)?, q.is_some())?,
        "P3.4" | "P3.5" => bound_diamond_lubell(n, q),
        "T3.3" | "T3.6" => bound_diamond_size(n, q)?,
        "T5.5" | "T5.8" => bound_qalgebra_lubell(n, need(p.d, "d", id)?, q)?,
        "T5.9" => bound_qalgebra_size(n, need(p.d, "d", id)?, need_q()?)?,
        "T5.3" => bound_polymath(n, need(p.d, "d", id)?)?,
        "T5.10" => bound_ramsey(n as u64, need(p.d, "d", id)?)?,
        other => return Err(usage(format!("unknown theorem id '{other}'"))),
    };
    if !rep.theorem_id.starts_with(id) {
        let side = if q.is_some() { "--boolean" } else { "--q Q" };
        return Err(usage(format!("{id} needs {side} (these parameters give {})", rep.theorem_id)));
    }
    Ok(rep)
}

fn bounds_cmd(g: &Global, args: &BoundsArgs) -> Result<Dispatched> {
    let fmt = format_of(g, Fmt::Json)?;
    if args.q.is_some() && args.boolean {
        return Err(usage("give at most one of --q and --boolean"));
    }
    if args.theorem == "L4.9" {
        let rows = lemma_4_9_grid(&args.qs, args.max_l, args.span)?;
        let bad = rows.iter().any(|r| !r.holds);
        if fmt == Fmt::Csv {
            return Ok((None, lemma_4_9_csv(&rows), bad));
        }
        let result = json!({
            "rows": rows,
            "all_hold": !bad,
        });
        let e = envelope(g, "bounds", result)
            .param("theorem", "L4.9")
            .param("qs", args.qs.clone())
            .param("max_l", args.max_l)
            .param("span", args.span);
        return Ok((Some(e), String::new(), bad));
    }
    no_csv(fmt)?;
    let mut rep = bound_for(args)?;
    let mut lattice = None;
    if args.construct {
        let spec = match args.q {
            Some(q) => LatticeSpec::Linear(q),
            None => LatticeSpec::Boolean,
        };
        let (l, _) = obtain(g, spec, args.n.unwrap_or(0))?;
        attach_construction(&mut rep, &l)?;
        lattice = Some(l);
    }
    let bad = rep.construction.as_ref().is_some_and(|c| c.valid == Some(false));
    let mut e = envelope(g, "bounds", rep.to_json()).param("theorem", args.theorem.as_str());
    if let Some(l) = &lattice {
        e = e.lattice(l);
    }
    Ok((Some(e), String::new(), bad))
}

fn search_cmd(g: &Global, what: &SearchCmd) -> Result<Dispatched> {
    no_csv(format_of(g, Fmt::Json)?)?;
    match what {
        SearchCmd::Max { lattice: largs, forbid, mode, samples, prune_bound } => {
            let (lattice, _) = obtain(g, spec_of(largs)?, largs.n)?;
            let forbidden: Forbidden = forbid.parse()?;
            let mode = match mode.as_str() {
                "exact" => SearchMode::Exact,
                "branch_bound" | "bb" => SearchMode::BranchBound,
                "sample" => SearchMode::Sample { count: *samples, seed: g.seed },
                other => return Err(usage(format!("unknown mode '{other}' (exact, branch_bound, sample)"))),
            };
            let mut task = SearchTask::new(&lattice, forbidden.clone(), mode.clone());
            task.prune_bound = *prune_bound;
            task.node_cap = g.node_cap;
            let res = max_family(&task)?;
            let clean = forbidden.find(&lattice, &res.witness_family)?.is_none();
            let mut v = res.to_json();
            v["task"] = json!({"forbid": forbidden.to_string(), "mode": mode.to_string()});
            v["witness_clean"] = json!(clean);
            let e = lattice_params(envelope(g, "search max", v), largs)
                .param("forbid", forbidden.to_string())
                .param("mode", mode.to_string())
                .lattice(&lattice);
            Ok((Some(e), String::new(), !clean))
        }
        SearchCmd::Ramsey { lattice: largs, r, d, cap, samples } => {
            let (lattice, _) = obtain(g, spec_of(largs)?, largs.n)?;
            let res = ramsey_color_check(&lattice, *r, *d, *cap, *samples, g.seed)?;
            let v = serde_json::to_value(&res).expect("serializable");
            let e = lattice_params(envelope(g, "search ramsey", v), largs)
                .param("r", *r)
                .param("d", *d)
                .param("samples", *samples)
                .cap("coloring_cap", *cap)
                .lattice(&lattice);
            Ok((Some(e), String::new(), false))
        }
    }
}
