//! `hdx`: expansion invariants of finite polyhedral complexes.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hdx_core::arith::{parse_q, Q};
use hdx_core::constructors::{
    build_fibration, cycle_graph, hypercube_skeleton, leray_serre_check, named_complex, random_complex, random_connected_graph, simplex_boundary,
    Hypercube, FIXTURES,
};
use hdx_core::filling::{cheeger, min_filling, tilde_h2, CheegerOptions, Side, Variant};
use hdx_core::homology::{chain_contraction_probe, homology_all, torsdiameter_report, universal_abelian_cover};
use hdx_core::par::{self, Execution};
use hdx_core::report::{analyze, hash_bytes, AnalyzeConfig, ComplexSummary, Envelope};
use hdx_core::spectral::{spectral_report, tilde_h2_l2};
use hdx_core::surgery::{meridian_contraction, min_dominant_slope, presentation_matrix, surgery_h1, torsion_growth_table, FramedLink};
use hdx_core::transport::{decomposition_map, hypercube_contract_word, hypercube_decompose, verify_certificate, HypercubeWord};
use hdx_core::verify::run_suite;
use hdx_core::{CellComplex, Norm, QChain};
use output::{emit, normalize, render, Format};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hdx", version, about = "Cheeger constants, Hodge gaps, torsion homology, covers and surgery models of cell complexes")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (overrides HDX_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run data-parallel loops sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    /// Attach wall-clock timings to the output.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Input {
    /// Complex JSON file, or a built-in such as rp2-6, zn-presentation(5),
    /// simplex-boundary(3), hypercube(4,2), cycle(6).
    #[arg(value_name = "INPUT")]
    positional: Option<String>,
    #[arg(short, long = "input", value_name = "INPUT")]
    flag: Option<String>,
}

#[derive(Args, Clone)]
struct Caps {
    /// Maximum cells for brute enumeration.
    #[arg(long, default_value_t = 30)]
    cap: usize,
    /// Maximum enumeration work before giving up.
    #[arg(long, default_value_t = 10_000_000)]
    work_limit: u128,
    /// Samples for the heuristic method.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Cheeger constants in every dimension with homology and spectral summaries.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// Norms, comma separated (1, 2, inf).
        #[arg(long, default_value = "1", value_delimiter = ',')]
        p: Vec<String>,
        #[arg(long, default_value = "brute")]
        method: String,
        #[arg(long)]
        no_spectral: bool,
        #[command(flatten)]
        caps: Caps,
    },
    /// Re-check module invariants: all, spectral, filling, transport, homology, surgery, fibration.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Emit a complex as JSON.
    Generate {
        #[arg(long, value_name = "DEG")]
        hypercube: Option<usize>,
        #[arg(long, default_value_t = 2)]
        skeleton: usize,
        #[arg(long, value_name = "N")]
        simplex_boundary: Option<usize>,
        #[arg(long, value_name = "NAME")]
        named: Option<String>,
        /// Random complex on N vertices (with --dim and --prob).
        #[arg(long, value_name = "N")]
        random: Option<usize>,
        /// Random connected graph on N vertices (with --prob).
        #[arg(long, value_name = "N")]
        graph: Option<usize>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Drop the augmentation.
        #[arg(long)]
        unaugmented: bool,
    },
    /// Minimal filling of a chain given as {"dim": i, "coeffs": [[cell, "a/b"], ...]}.
    Fill {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value = "1")]
        p: String,
    },
    /// One Cheeger constant with witness.
    Cheeger {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value = "chain")]
        side: String,
        /// plain, exact (chain side) or coexact (cochain side).
        #[arg(long, default_value = "plain")]
        variant: String,
        /// brute, lp-enum or heuristic.
        #[arg(long, default_value = "brute")]
        method: String,
        #[command(flatten)]
        caps: Caps,
    },
    /// The modified second coboundary constant h̃².
    Tilde {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value = "brute")]
        method: String,
        #[command(flatten)]
        caps: Caps,
    },
    /// Integer homology groups.
    Homology {
        #[command(flatten)]
        input: Input,
    },
    /// Universal abelian cover as complex JSON, or a diameter table with --torsdiameter.
    Cover {
        #[command(flatten)]
        input: Input,
        /// Further inputs for the diameter table.
        #[arg(long, value_delimiter = ',')]
        torsdiameter: Vec<String>,
        /// Print the structural checks instead of the cover.
        #[arg(long)]
        checks: bool,
    },
    /// Chain-contraction probe of a rational homology 3-sphere.
    Probe {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100_000)]
        lp_cap: usize,
    },
    /// Slope-q surgery on a framed link given by its linking matrix (JSON or CSV).
    Surgery {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        q: Option<i64>,
        /// Inclusive range A:B for the torsion growth table.
        #[arg(long)]
        q_range: Option<String>,
        /// Meridian vector a, comma separated rationals.
        #[arg(long, value_delimiter = ',')]
        contract: Option<Vec<String>>,
        #[arg(long, default_value = "1/1000000000")]
        tol: String,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
    },
    /// Certified hypercube fillings.
    Hypercube {
        #[command(subcommand)]
        action: HypercubeAction,
    },
    /// Hodge spectra, gaps and L² Cheeger constants.
    Spectral {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        full_spectrum: bool,
    },
    /// Comparison inequalities for a graph fibration.
    Fibration {
        /// prism, identity, point, product or collapse.
        #[arg(long, default_value = "prism")]
        kind: String,
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[arg(long, default_value = "1")]
        p: String,
        #[command(flatten)]
        caps: Caps,
    },
    /// List the built-in fixtures.
    Fixtures,
}

#[derive(Subcommand)]
enum HypercubeAction {
    /// Fill a closed edge word by squares.
    Contract {
        /// Word JSON: {"deg": d, "letters": [[coord, ±1], ...]}.
        #[arg(long)]
        word: Option<PathBuf>,
        /// Random closed word of this length (with --deg).
        #[arg(long)]
        random_length: Option<usize>,
        #[arg(long)]
        deg: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        emit_certificate: bool,
    },
    /// Split a 2-chain into coexact and closed parts.
    Decompose {
        #[arg(long)]
        deg: usize,
        /// Unit 2-cell index.
        #[arg(long)]
        cell: Option<usize>,
        /// 2-chain JSON instead of a unit cell.
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long, default_value = "1/1000000000")]
        tol: String,
        #[arg(long, default_value_t = 10_000)]
        max_rounds: usize,
        #[arg(long)]
        emit_certificate: bool,
    },
}

/// Usage errors exit with 2, input and computation errors with 3.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

struct Run {
    doc: Value,
    table: Option<Value>,
    ok: bool,
}

struct Ctx {
    exec: Execution,
    timings: bool,
    started: Instant,
}

impl Ctx {
    fn envelope<T: Serialize>(&self, command: &str, hash: String, result: T) -> Result<Value> {
        let mut env = Envelope::new(command, hash, result);
        if self.timings {
            env.timings = Some(vec![("total_ms".into(), self.started.elapsed().as_secs_f64() * 1e3)]);
        }
        Ok(normalize(serde_json::to_value(env)?))
    }

    fn options(&self, caps: &Caps) -> Result<CheegerOptions> {
        if caps.cap == 0 || caps.work_limit == 0 || caps.samples == 0 {
            return Err(usage("--cap, --work-limit and --samples must be positive"));
        }
        Ok(CheegerOptions { cap: caps.cap, work_limit: caps.work_limit, samples: caps.samples, seed: caps.seed, exec: self.exec })
    }
}

fn parse_norm(s: &str) -> Result<Norm> {
    s.parse::<Norm>().map_err(|e| usage(e.to_string()))
}

fn parse_enum<T: std::str::FromStr<Err = hdx_core::Error>>(s: &str) -> Result<T> {
    s.parse::<T>().map_err(|e| usage(e.to_string()))
}

fn parse_rational(s: &str) -> Result<Q> {
    parse_q(s).ok_or_else(|| usage(format!("bad rational {s:?}")))
}

fn parse_tol(s: &str) -> Result<Q> {
    let t = parse_rational(s)?;
    if t <= Q::from_integer(0.into()) {
        return Err(usage("tolerances must be positive"));
    }
    Ok(t)
}

fn call_args(s: &str, name: &str) -> Option<Vec<usize>> {
    let inner = s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|t| t.trim().parse().ok()).collect()
}

fn builtin(spec: &str) -> Option<hdx_core::Result<CellComplex>> {
    let spec = spec.strip_prefix("named:").unwrap_or(spec).replace('_', "-");
    let spec = spec.as_str();
    if let Some(a) = call_args(spec, "simplex-boundary") {
        return Some(simplex_boundary(*a.first()?));
    }
    if let Some(a) = call_args(spec, "hypercube") {
        return Some(hypercube_skeleton(*a.first()?, *a.get(1).unwrap_or(&2)));
    }
    if let Some(a) = call_args(spec, "cycle") {
        return Some(cycle_graph(*a.first()?));
    }
    match named_complex(spec) {
        Err(hdx_core::Error::UnknownName(_)) => None,
        r => Some(r),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_spec(spec: &str) -> Result<CellComplex> {
    let path = Path::new(spec);
    if path.exists() {
        let text = read(path)?;
        return CellComplex::from_json(&text).with_context(|| format!("parsing {}", path.display()));
    }
    match builtin(spec) {
        Some(r) => Ok(r?),
        None => bail!("input {spec:?} is neither a file nor a built-in complex (see `hdx fixtures`)"),
    }
}

fn load(input: &Input) -> Result<CellComplex> {
    match (&input.positional, &input.flag) {
        (Some(s), None) | (None, Some(s)) => load_spec(s),
        (Some(_), Some(_)) => Err(usage("give the input either positionally or with --input, not both")),
        (None, None) => Err(usage("missing input complex")),
    }
}

fn run(cli: &Cli, ctx: &Ctx) -> Result<Run> {
    let plain = |doc: Value| Run { doc, table: None, ok: true };
    Ok(match &cli.command {
        Command::Analyze { input, p, method, no_spectral, caps } => {
            let x = load(input)?;
            let cfg = AnalyzeConfig {
                norms: p.iter().map(|s| parse_norm(s)).collect::<Result<_>>()?,
                method: parse_enum(method)?,
                options: ctx.options(caps)?,
                timings: ctx.timings,
                spectral: !no_spectral,
            };
            let report = analyze(&x, &cfg)?;
            let rows: Vec<Value> = report
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "side": e.side, "dim": e.dim, "p": e.norm, "variant": e.variant, "method": e.method,
                        "value": e.value.as_ref().map(|v| v.value.render()),
                        "inverse": e.value.as_ref().map(|v| v.inverse.render()),
                        "error": e.error,
                    })
                })
                .collect();
            Run { doc: ctx.envelope("analyze", x.content_hash(), report)?, table: Some(Value::Array(rows)), ok: true }
        }
        Command::Verify { suite } => {
            let r = run_suite(suite, ctx.exec).map_err(|e| usage(e.to_string()))?;
            let rows: Vec<Value> = r.checks.iter().map(|c| json!({"id": c.id, "suite": c.suite, "passed": c.passed, "detail": c.detail})).collect();
            let ok = r.passed;
            Run { doc: ctx.envelope("verify", hash_bytes(suite.as_bytes()), r)?, table: Some(Value::Array(rows)), ok }
        }
        Command::Generate { hypercube, skeleton, simplex_boundary: sb, named, random, graph, dim, prob, seed, unaugmented } => {
            let chosen = [hypercube.is_some(), sb.is_some(), named.is_some(), random.is_some(), graph.is_some()].iter().filter(|b| **b).count();
            if chosen != 1 {
                return Err(usage("choose exactly one of --hypercube, --simplex-boundary, --named, --random, --graph"));
            }
            let mut x = if let Some(d) = hypercube {
                hypercube_skeleton(*d, *skeleton)?
            } else if let Some(n) = sb {
                simplex_boundary(*n)?
            } else if let Some(name) = named {
                named_complex(name)?
            } else if let Some(n) = random {
                random_complex(*n, *dim, *prob, *seed)?
            } else {
                random_connected_graph(graph.unwrap_or(1), *prob, *seed)?
            };
            if *unaugmented {
                x = x.with_augmentation(false);
            }
            let prov = json!({"schema_version": hdx_core::report::SCHEMA_VERSION, "command": "generate", "cells_total": x.total_cells()});
            let text = x.to_json_pretty(Some(prov));
            plain(serde_json::from_str(&text)?)
        }
        Command::Fill { input, chain, p } => {
            let x = load(input)?;
            let text = read(chain)?;
            let rec: hdx_core::chain::ChainRecord = serde_json::from_str(&text).with_context(|| format!("parsing chain {}", chain.display()))?;
            let alpha = QChain::from_record(&rec)?;
            let r = min_filling(&x, &alpha, parse_norm(p)?)?;
            plain(ctx.envelope("fill", hash_bytes(format!("{}{}", x.content_hash(), text).as_bytes()), r)?)
        }
        Command::Cheeger { input, dim, p, side, variant, method, caps } => {
            let x = load(input)?;
            let side: Side = parse_enum(side)?;
            let variant: Variant = parse_enum(variant)?;
            let v = cheeger(&x, *dim, parse_norm(p)?, side, variant, parse_enum(method)?, &ctx.options(caps)?).map_err(|e| match e {
                hdx_core::Error::Argument(m) => usage(m),
                other => other.into(),
            })?;
            let row = json!([{"side": v.side, "dim": v.dim, "p": v.norm, "variant": v.variant, "method": v.method,
                "value": v.value.render(), "inverse": v.inverse.render(), "candidates": v.candidates, "upper_bound": v.upper_bound}]);
            Run { doc: ctx.envelope("cheeger", x.content_hash(), v)?, table: Some(row), ok: true }
        }
        Command::Tilde { input, p, method, caps } => {
            let x = load(input)?;
            let p = parse_norm(p)?;
            let v = tilde_h2(&x, p, parse_enum(method)?, &ctx.options(caps)?)?;
            let spectral = (p == Norm::L2).then(|| tilde_h2_l2(&x)).transpose()?;
            plain(ctx.envelope("tilde", x.content_hash(), json!({"value": v, "spectral": spectral}))?)
        }
        Command::Homology { input } => {
            let x = load(input)?;
            let groups = homology_all(&x);
            let rows: Vec<Value> =
                groups.iter().enumerate().map(|(i, g)| json!({"dim": i, "group": g.to_string(), "betti": g.betti, "torsion": g.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")})).collect();
            let doc = json!({"complex": ComplexSummary::of(&x), "groups": groups, "display": groups.iter().map(ToString::to_string).collect::<Vec<_>>()});
            Run { doc: ctx.envelope("homology", x.content_hash(), doc)?, table: Some(Value::Array(rows)), ok: true }
        }
        Command::Cover { input, torsdiameter, checks } => {
            let x = load(input)?;
            if !torsdiameter.is_empty() {
                let mut xs = vec![x];
                for s in torsdiameter {
                    xs.push(load_spec(s)?);
                }
                let hash = hash_bytes(xs.iter().map(|x| x.content_hash()).collect::<String>().as_bytes());
                let r = torsdiameter_report(&xs)?;
                let table = serde_json::to_value(&r.rows)?;
                let ok = r.all_within_fiber_bound;
                Run { doc: ctx.envelope("cover", hash, r)?, table: Some(normalize(table)), ok }
            } else {
                let c = universal_abelian_cover(&x)?;
                if *checks {
                    let v = c.verify();
                    let ok = v.all();
                    Run { doc: ctx.envelope("cover", x.content_hash(), json!({"order": c.order(), "deck_group": c.group, "checks": v}))?, table: None, ok }
                } else {
                    let mut doc: Value = serde_json::from_str(&c.to_json())?;
                    doc["provenance"]["input_hash"] = json!(x.content_hash());
                    doc["provenance"]["schema_version"] = json!(hdx_core::report::SCHEMA_VERSION);
                    plain(doc)
                }
            }
        }
        Command::Probe { input, lp_cap } => {
            let x = load(input)?;
            let r = chain_contraction_probe(&x, *lp_cap)?;
            let table = serde_json::to_value(&r.tets)?;
            let ok = r.partial || (r.sum_check && r.homotopy_check);
            Run { doc: ctx.envelope("probe", x.content_hash(), r)?, table: Some(normalize(table)), ok }
        }
        Command::Surgery { matrix, q, q_range, contract, tol, max_iter } => {
            let text = read(matrix)?;
            let link = FramedLink::parse(&text).with_context(|| format!("parsing {}", matrix.display()))?;
            let hash = hash_bytes(text.as_bytes());
            let mut doc = serde_json::Map::new();
            doc.insert("link".into(), serde_json::to_value(&link)?);
            doc.insert("min_dominant_slope".into(), json!(min_dominant_slope(&link)));
            let mut table = None;
            if let Some(s) = q {
                doc.insert("presentation".into(), json!(presentation_matrix(&link, *s)));
                doc.insert("homology".into(), serde_json::to_value(surgery_h1(&link, *s))?);
            }
            if let Some(r) = q_range {
                let (a, b) = r.split_once(':').ok_or_else(|| usage("--q-range expects A:B"))?;
                let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| usage("bad --q-range start"))?, b.trim().parse().map_err(|_| usage("bad --q-range end"))?);
                if a > b {
                    return Err(usage("--q-range start exceeds end"));
                }
                let rows = torsion_growth_table(&link, a..=b, ctx.exec);
                let v = serde_json::to_value(&rows)?;
                table = Some(Value::Array(rows.iter().map(|r| json!({"q": r.slope, "h1_order": r.order, "h1": r.h1, "determinant": r.determinant.to_string(), "rhs_flag": r.rhs_flag})).collect()));
                doc.insert("table".into(), v);
            }
            let mut ok = true;
            if let Some(a) = contract {
                let s = q.ok_or_else(|| usage("--contract needs --q"))?;
                let a: Vec<Q> = a.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
                let r = meridian_contraction(&link, s, &a, &parse_tol(tol)?, *max_iter).map_err(|e| usage(e.to_string()))?;
                ok = r.factor_bounds_ratios;
                doc.insert("contraction".into(), serde_json::to_value(r)?);
            }
            if q.is_none() && q_range.is_none() {
                return Err(usage("surgery needs --q or --q-range"));
            }
            Run { doc: ctx.envelope("surgery", hash, Value::Object(doc))?, table, ok }
        }
        Command::Hypercube { action } => hypercube(action, ctx)?,
        Command::Spectral { input, dim, full_spectrum } => {
            let x = load(input)?;
            let dims: Vec<usize> = match dim {
                Some(d) => vec![*d],
                None => (0..=x.dims()).collect(),
            };
            let reports = dims.iter().map(|&i| spectral_report(&x, i, *full_spectrum)).collect::<hdx_core::Result<Vec<_>>>()?;
            let table = reports
                .iter()
                .map(|r| json!({"dim": r.dim, "cells": r.cells, "hodge_gap": r.hodge_gap, "gap_exact": r.gap_exact, "gap_coexact": r.gap_coexact, "h_down": hdx_core::arith::fmt_f64(r.cheeger_down), "h_up": hdx_core::arith::fmt_f64(r.cheeger_up), "solver": r.solver}))
                .collect();
            let ok = reports.iter().all(|r| r.residual_ok);
            Run { doc: ctx.envelope("spectral", x.content_hash(), reports)?, table: Some(normalize(Value::Array(table))), ok }
        }
        Command::Fibration { kind, size, p, caps } => {
            let f = build_fibration(kind, *size, caps.seed).map_err(|e| match e {
                hdx_core::Error::UnknownName(m) => usage(m),
                other => other.into(),
            })?;
            let r = leray_serre_check(&f, parse_norm(p)?, &ctx.options(caps)?)?;
            let ok = r.holds;
            let hash = hash_bytes(format!("{kind}:{size}:{}:{}", caps.seed, f.e.content_hash()).as_bytes());
            Run { doc: ctx.envelope("fibration", hash, r)?, table: None, ok }
        }
        Command::Fixtures => {
            let rows = serde_json::to_value(FIXTURES)?;
            Run { doc: ctx.envelope("fixtures", hash_bytes(b"fixtures"), FIXTURES)?, table: Some(rows), ok: true }
        }
    })
}

fn hypercube(action: &HypercubeAction, ctx: &Ctx) -> Result<Run> {
    match action {
        HypercubeAction::Contract { word, random_length, deg, seed, emit_certificate } => {
            let w = match (word, random_length) {
                (Some(path), None) => {
                    let w: HypercubeWord = serde_json::from_str(&read(path)?).with_context(|| format!("parsing word {}", path.display()))?;
                    w
                }
                (None, Some(len)) => {
                    let d = deg.ok_or_else(|| usage("--random-length needs --deg"))?;
                    if len % 2 == 1 {
                        return Err(usage("closed words have even length"));
                    }
                    HypercubeWord::random_closed(d, *len, *seed)
                }
                _ => return Err(usage("give exactly one of --word or --random-length")),
            };
            if w.deg == 0 || w.deg > 20 {
                bail!("deg must lie in 1..=20");
            }
            let h = Hypercube::new(w.deg, w.deg.min(2))?;
            let r = hypercube_contract_word(&h, &w)?;
            let check = verify_certificate(&r.certificate, &h.complex.boundary_or_zero(2));
            let ok = check.ok;
            let mut doc = json!({
                "word": w, "squares": r.squares, "cancellations": r.cancellations, "length": r.length,
                "measured_constant": r.measured_constant, "filling_norm_l1": r.filling.norm_l1().to_string(),
                "filling": r.filling.to_record(), "certificate_verified": check,
            });
            if *emit_certificate {
                doc["certificate"] = serde_json::to_value(&r.certificate)?;
            }
            let hash = hash_bytes(serde_json::to_string(&w)?.as_bytes());
            Ok(Run { doc: ctx.envelope("hypercube contract", hash, doc)?, table: None, ok })
        }
        HypercubeAction::Decompose { deg, cell, chain, tol, max_rounds, emit_certificate } => {
            let h = Hypercube::new(*deg, 3)?;
            let c = match (cell, chain) {
                (Some(k), None) => {
                    if *k >= h.complex.num_cells(2) {
                        return Err(usage(format!("cell {k} out of range ({} squares)", h.complex.num_cells(2))));
                    }
                    QChain::unit(2, *k)
                }
                (None, Some(path)) => {
                    let rec: hdx_core::chain::ChainRecord = serde_json::from_str(&read(path)?).with_context(|| format!("parsing chain {}", path.display()))?;
                    QChain::from_record(&rec)?
                }
                _ => return Err(usage("give exactly one of --cell or --chain")),
            };
            let r = hypercube_decompose(&h, &c, &parse_tol(tol)?, *max_rounds)?;
            let check = verify_certificate(&r.certificate, &decomposition_map(&h));
            let ok = check.ok;
            let mut doc = serde_json::to_value(&r)?;
            if !*emit_certificate {
                doc.as_object_mut().map(|o| o.remove("certificate"));
            }
            doc["certificate_verified"] = serde_json::to_value(check)?;
            let hash = hash_bytes(format!("{deg}:{}", serde_json::to_string(&c.to_record())?).as_bytes());
            Ok(Run { doc: ctx.envelope("hypercube decompose", hash, doc)?, table: None, ok })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.threads {
        Some(n) => par::configure_threads(Some(n)),
        None => par::configure_from_env(),
    };
    let ctx = Ctx { exec: if cli.sequential { Execution::Sequential } else { Execution::default() }, timings: cli.timings, started: Instant::now() };
    let result = run(&cli, &ctx).and_then(|r| {
        let text = render(&r.doc, cli.format, r.table.as_ref()).map_err(|e| usage(e.to_string()))?;
        emit(&text, cli.output.as_deref())?;
        Ok(r.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<Usage>().is_some() { 2 } else { 3 };
            ExitCode::from(code)
        }
    }
}
