//! skewmat: analyze, fuzz, split and descend skew matrix algebras.

mod analyze;
mod fuzz;
mod ops;
mod report;
mod suite;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};
use skewmat::json::{skewset_from_json_in, skewset_to_json};

use crate::report::{digest, parse_field, read_input, validation, CliError, Report};

#[derive(Parser)]
#[command(name = "skewmat", version, about = "Exact computations with skew matrix and semiassociative algebras")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Upper bound on enumerated ideals; exceeding it exits with status 3.
    #[arg(long, global = true, default_value_t = 4096)]
    cap_ideals: usize,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Field: Q, p, GF(p), p^k or GF(p^k). Used when the input names none.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Compact JSON output (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON output.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Structure report for one or more skew set files.
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Invariant battery on random (or all) skew sets.
    Fuzz {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Every zero pattern (every set when small enough) instead of random sets.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Golden cases for the worked examples.
    PaperSuite {
        /// Run a single case by id.
        #[arg(long)]
        only: Option<String>,
        /// Read cases from this directory instead of the built-in set.
        #[arg(long)]
        golden_dir: Option<PathBuf>,
    },
    /// Equivalence of two skew sets, with a witness.
    Equiv { a: PathBuf, b: PathBuf },
    /// Tensor product of two skew sets.
    Tensor { a: PathBuf, b: PathBuf },
    /// Split an algebra over an extension into a skew matrix algebra.
    Split { spec: PathBuf },
    /// Galois descent of a skew set along a permutation.
    Descend { spec: PathBuf },
    /// Build an algebra with prescribed semisimple nucleus quotient.
    RealizeSigma { spec: PathBuf },
}

fn configure_threads() {
    if let Some(n) = std::env::var("SKEWMAT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn analyze_cmd(g: &Global, paths: &[PathBuf]) -> Result<Report, CliError> {
    let default_field = match &g.field {
        Some(f) => parse_field(f)?,
        None => skewmat::field::Field::rational(),
    };
    let inputs: Vec<(Vec<u8>, Value)> = paths.iter().map(|p| read_input(p)).collect::<Result<_, _>>()?;
    let sets = inputs
        .iter()
        .map(|(_, v)| skewset_from_json_in(v, &default_field))
        .collect::<Result<Vec<_>, _>>()?;
    let analyses: Vec<_> = sets.par_iter().map(|c| analyze::analyze(c, g.cap_ideals)).collect();
    let truncated: Vec<String> =
        paths.iter().zip(&analyses).filter(|(_, a)| a.truncated).map(|(p, _)| p.display().to_string()).collect();
    let results = if analyses.len() == 1 {
        analyses[0].value.clone()
    } else {
        Value::Array(
            paths
                .iter()
                .zip(&analyses)
                .map(|(p, a)| json!({"path": p.display().to_string(), "analysis": a.value}))
                .collect(),
        )
    };
    let bytes: Vec<&[u8]> = inputs.iter().map(|(b, _)| b.as_slice()).collect();
    let report = Report::new("analyze", digest(&bytes), None, results);
    if truncated.is_empty() {
        Ok(report)
    } else {
        let msg = format!("more than {} ideals in {}", g.cap_ideals, truncated.join(", "));
        Err(CliError::Cap(msg, Box::new(report)))
    }
}

fn fuzz_cmd(g: &Global, n: usize, density: f64, count: usize, exhaustive: bool) -> Result<Report, CliError> {
    if n == 0 {
        return Err(validation("n must be at least 1"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(validation("density must lie in [0, 1]"));
    }
    if exhaustive && n > fuzz::EXHAUSTIVE_MAX_N {
        return Err(validation(format!("exhaustive mode supports n ≤ {}", fuzz::EXHAUSTIVE_MAX_N)));
    }
    let field = parse_field(g.field.as_deref().unwrap_or("Q"))?;
    let params = fuzz::FuzzParams { n, field, density, count, seed: g.seed, exhaustive, cap: g.cap_ideals };
    let key = json!({"n": n, "field": skewmat::json::field_to_json(&params.field), "density": density,
                     "count": count, "exhaustive": exhaustive, "cap": g.cap_ideals});
    let out = fuzz::run(&params);
    let report = Report::new("fuzz", digest(&[key.to_string().as_bytes()]), Some(g.seed), out.results);
    match out.violation {
        None => Ok(report),
        Some((name, _)) => Err(CliError::Invariant(name.to_string(), Box::new(report))),
    }
}

fn suite_cmd(g: &Global, only: Option<&str>, dir: Option<&PathBuf>) -> Result<Report, CliError> {
    let mut cases = suite::load(dir.map(|d| d.as_path()))?;
    if let Some(id) = only {
        cases.retain(|c| c.id == id);
        if cases.is_empty() {
            return Err(validation(format!("no golden case with id \"{id}\"")));
        }
    }
    let rows: Vec<Value> = cases.par_iter().map(|c| suite::run_case(c, g.cap_ideals)).collect();
    for r in &rows {
        let mark = if r["pass"] == json!(true) { "pass" } else { "FAIL" };
        eprintln!("{:<36} {mark}", r["id"].as_str().unwrap_or_default());
        for m in r["mismatches"].as_array().into_iter().flatten() {
            eprintln!("    {}", m.as_str().unwrap_or_default());
        }
    }
    let failing: Vec<String> =
        rows.iter().filter(|r| r["pass"] != json!(true)).map(|r| r["id"].as_str().unwrap_or_default().to_string()).collect();
    let inputs: Vec<String> = cases.iter().map(|c| json!({"id": c.id, "input": c.input, "expect": c.expect}).to_string()).collect();
    let bytes: Vec<&[u8]> = inputs.iter().map(|s| s.as_bytes()).collect();
    let results = json!({"cases": rows, "passed": rows.len() - failing.len(), "failed": failing.len()});
    let report = Report::new("paper-suite", digest(&bytes), None, results);
    if failing.is_empty() {
        Ok(report)
    } else {
        Err(CliError::Suite(failing, Box::new(report)))
    }
}

fn pair_cmd(g: &Global, name: &str, a: &Path, b: &Path) -> Result<Report, CliError> {
    let default_field = match &g.field {
        Some(f) => parse_field(f)?,
        None => skewmat::field::Field::rational(),
    };
    let (ba, va) = read_input(a)?;
    let (bb, vb) = read_input(b)?;
    // normalize both inputs so a default field applies to each
    let va = skewset_to_json(&skewset_from_json_in(&va, &default_field)?);
    let vb = skewset_to_json(&skewset_from_json_in(&vb, &default_field)?);
    let results = if name == "equiv" { ops::equiv(&va, &vb)? } else { ops::tensor(&va, &vb)? };
    Ok(Report::new(name, digest(&[&ba, &bb]), None, results))
}

fn spec_cmd(g: &Global, name: &str, path: &Path) -> Result<Report, CliError> {
    let (bytes, spec) = read_input(path)?;
    let seed = spec.get("seed").and_then(Value::as_u64).unwrap_or(g.seed);
    let results = match name {
        "split" => ops::split(&spec, seed)?,
        "descend" => ops::descend(&spec, seed)?,
        _ => ops::realize(&spec, seed)?,
    };
    Ok(Report::new(name, digest(&[&bytes]), Some(seed), results))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let g = &cli.global;
    let start = Instant::now();
    let (name, outcome) = match &cli.command {
        Command::Analyze { paths } => ("analyze", analyze_cmd(g, paths)),
        Command::Fuzz { n, density, count, exhaustive } => ("fuzz", fuzz_cmd(g, *n, *density, *count, *exhaustive)),
        Command::PaperSuite { only, golden_dir } => ("paper-suite", suite_cmd(g, only.as_deref(), golden_dir.as_ref())),
        Command::Equiv { a, b } => ("equiv", pair_cmd(g, "equiv", a, b)),
        Command::Tensor { a, b } => ("tensor", pair_cmd(g, "tensor", a, b)),
        Command::Split { spec } => ("split", spec_cmd(g, "split", spec)),
        Command::Descend { spec } => ("descend", spec_cmd(g, "descend", spec)),
        Command::RealizeSigma { spec } => ("realize-sigma", spec_cmd(g, "realize-sigma", spec)),
    };
    eprintln!("{name}: {:.3} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(report) => {
            println!("{}", report.render(g.pretty));
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(report) = e.report() {
                println!("{}", report.render(g.pretty));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
