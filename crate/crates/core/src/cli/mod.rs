//! Command-line front end: configuration, tabular output and the subcommands.

mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::affine::{enumerate_pc, in_alcove};
use crate::error::{Error, Result};
use crate::nodes::{bethe_residual, closed_form_nodes, solve_all};
use crate::pieri::{fusion_ring, lr_pieri, negative_fusion_weights, structure_constants};
use crate::rootdata::{PairKind, RootDatum, RootType, Weight};
use crate::tring::{parse_rational, TParams};

pub use verify::{run_checks, Check};

#[derive(Debug, Parser)]
#[command(
    name = "affine-fusion",
    version,
    about = "Deformed WZW fusion rings: nodes, Pieri coefficients, structure constants"
)]
pub struct Cli {
    /// Root system, e.g. A2, B3, C2, G2
    #[arg(long = "type", global = true)]
    pub type_label: Option<String>,
    #[arg(long, global = true, default_value = "untwisted")]
    pub pair: String,
    #[arg(long, global = true)]
    pub level: Option<i64>,
    /// Uniform parameter (decimal or p/q)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long = "t-short", global = true, allow_hyphen_values = true)]
    pub t_short: Option<String>,
    #[arg(long = "t-long", global = true, allow_hyphen_values = true)]
    pub t_long: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance for the floating-point checks of `verify`
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Include wall-clock timings in the verify report (makes output non-reproducible)
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Spectral nodes xi_mu for every mu in hat P_c
    Nodes,
    /// Affine Pieri coefficients c^nu_{lambda,omega}
    Pieri {
        /// lambda in fundamental coordinates, e.g. 1,0
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// minuscule or quasi-minuscule omega; defaults to vartheta
        #[arg(long)]
        omega: Option<String>,
    },
    /// Fusion ring at t = 0
    Fusion,
    /// Structure constants at the given t
    Structure,
    /// Runs the invariant suite for the configuration
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Validated job configuration.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub label: RootType,
    pub pair: PairKind,
    pub level: i64,
    pub t_short: String,
    pub t_long: String,
    pub t_exact: TParams<BigRational>,
    pub command: Command,
    pub format: Format,
    pub seed: u64,
    pub tol: Option<f64>,
    pub timings: bool,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl JobConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let label: RootType = cli
            .type_label
            .as_deref()
            .ok_or_else(|| config_error("--type is required"))?
            .parse()?;
        let pair: PairKind = cli.pair.parse()?;
        let level = cli
            .level
            .ok_or_else(|| config_error("--level is required"))?;
        crate::affine::check_level(level)?;
        let zero_allowed = matches!(
            cli.command,
            Command::Fusion | Command::Nodes | Command::Pieri { .. }
        );
        let default = if matches!(cli.command, Command::Fusion) {
            Some("0".to_string())
        } else {
            None
        };
        let uniform = cli.t.clone().or(default);
        let t_short = cli
            .t_short
            .clone()
            .or_else(|| uniform.clone())
            .ok_or_else(|| config_error("--t or --t-short is required"))?;
        let t_long = cli
            .t_long
            .clone()
            .or(uniform)
            .ok_or_else(|| config_error("--t or --t-long is required"))?;
        let t_exact = TParams {
            short: parse_rational(&t_short)?,
            long: parse_rational(&t_long)?,
        };
        let both_zero = t_exact.short.is_zero() && t_exact.long.is_zero();
        if matches!(cli.command, Command::Fusion) && !both_zero {
            return Err(config_error("fusion is the t = 0 ring; drop --t"));
        }
        if !(both_zero && zero_allowed) {
            t_exact.validate()?;
        }
        if let Some(tol) = cli.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(config_error(format!("--tol must be positive, got {tol}")));
            }
        }
        Ok(JobConfig {
            label,
            pair,
            level,
            t_short,
            t_long,
            t_exact,
            command: cli.command.clone(),
            format: cli.format,
            seed: cli.seed,
            tol: cli.tol,
            timings: cli.timings,
        })
    }

    pub fn datum(&self) -> Result<RootDatum> {
        RootDatum::new(self.label, self.pair)
    }

    pub fn t(&self) -> TParams<f64> {
        self.t_exact.to_f64()
    }

    pub fn t_is_zero(&self) -> bool {
        self.t_exact.short.is_zero() && self.t_exact.long.is_zero()
    }

    fn meta(&self, command: &str) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("command".into(), json!(command));
        m.insert("type".into(), json!(self.label.to_string()));
        m.insert("pair".into(), json!(self.pair.to_string()));
        m.insert("level".into(), json!(self.level));
        m.insert("t_short".into(), json!(self.t_short));
        m.insert("t_long".into(), json!(self.t_long));
        m.insert("seed".into(), json!(self.seed));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m
    }

    /// Stable hash of the configuration echo, for the verify report.
    pub fn config_hash(&self) -> String {
        use std::hash::{DefaultHasher, Hash, Hasher};
        let mut h = DefaultHasher::new();
        (
            self.label.to_string(),
            self.pair.to_string(),
            self.level,
            &self.t_short,
            &self.t_long,
            self.seed,
            self.tol.map(f64::to_bits),
        )
            .hash(&mut h);
        format!("{:016x}", h.finish())
    }
}

/// Shortest round-trip form, matching the JSON output.
fn csv_float(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else {
        x.to_string()
    }
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Complex(Complex64),
    Weight(Vec<i64>),
    Floats(Vec<f64>),
    Text(String),
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Int(k) => json!(k),
            Cell::Float(x) => json!(x),
            Cell::Complex(z) => json!([z.re, z.im]),
            Cell::Weight(w) => json!(w),
            Cell::Floats(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }

    fn csv(&self) -> Vec<String> {
        match self {
            Cell::Int(k) => vec![k.to_string()],
            Cell::Float(x) => vec![csv_float(*x)],
            Cell::Complex(z) => vec![csv_float(z.re), csv_float(z.im)],
            Cell::Weight(w) => vec![serde_json::to_string(w).expect("integers serialize")],
            Cell::Floats(v) => vec![serde_json::to_string(v).expect("floats serialize")],
            Cell::Text(s) => vec![s.clone()],
        }
    }
}

/// A table with metadata: JSON `{meta, rows}` or CSV with a header row.
#[derive(Debug, Clone)]
pub struct Output {
    pub meta: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Output {
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(k, c)| (k.to_string(), c.json()))
                        .collect(),
                )
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "meta": self.meta, "rows": rows }))
            .expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let mut header = Vec::new();
        let first = self.rows.first();
        for (i, col) in self.columns.iter().enumerate() {
            match first.map(|r| &r[i]) {
                Some(Cell::Complex(_)) => {
                    header.push(format!("{col}_re"));
                    header.push(format!("{col}_im"));
                }
                _ => header.push(col.to_string()),
            }
        }
        let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().flat_map(Cell::csv)).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Result of running a command: the table plus whether any check failed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub output: Output,
    pub failed: bool,
}

fn parse_weight(s: &str, rank: usize) -> Result<Weight> {
    let parts: std::result::Result<Vec<i64>, _> =
        s.split(',').map(|p| p.trim().parse::<i64>()).collect();
    let v = parts.map_err(|_| {
        config_error(format!(
            "cannot parse weight {s:?}; expected comma-separated integers"
        ))
    })?;
    if v.len() != rank {
        return Err(config_error(format!(
            "weight {s:?} has {} coordinates, rank is {rank}",
            v.len()
        )));
    }
    Ok(Weight(v))
}

pub fn cmd_nodes(cfg: &JobConfig) -> Result<Outcome> {
    let d = cfg.datum()?;
    let t = cfg.t();
    let nodes = if cfg.t_is_zero() {
        closed_form_nodes(&d, cfg.level)?
    } else {
        solve_all(&d, cfg.level, &t)?
    };
    let mut meta = cfg.meta("nodes");
    meta.insert("closed_form".into(), json!(cfg.t_is_zero()));
    let rows = nodes
        .iter()
        .map(|n| {
            let bethe = if cfg.t_is_zero() {
                0.0
            } else {
                bethe_residual(&d, &n.xi, cfg.level, &t)
            };
            vec![
                Cell::Weight(n.mu.0.clone()),
                Cell::Floats(n.xi.clone()),
                Cell::Float(n.grad_residual),
                Cell::Float(bethe),
                Cell::Int(n.iterations as i64),
            ]
        })
        .collect();
    Ok(Outcome {
        output: Output {
            meta,
            columns: vec!["mu", "xi", "grad_residual", "bethe_residual", "iterations"],
            rows,
        },
        failed: false,
    })
}

pub fn cmd_pieri(cfg: &JobConfig, lambda: &str, omega: Option<&str>) -> Result<Outcome> {
    let d = cfg.datum()?;
    let c = cfg.level;
    let lambda = parse_weight(lambda, d.rank)?;
    if !in_alcove(&d, &lambda, c) {
        return Err(config_error(format!(
            "lambda = {lambda} is not in P_{c}: need nonnegative coordinates with sum_j {:?}_j lambda_j <= {c}",
            d.marks
        )));
    }
    let omega = match omega {
        Some(s) => parse_weight(s, d.rank)?,
        None => d.quasi_minuscule_weight(),
    };
    let table = lr_pieri(&d, &lambda, &omega, c)?;
    let mut meta = cfg.meta("pieri");
    meta.insert("lambda".into(), json!(lambda.0));
    meta.insert("omega".into(), json!(omega.0));
    meta.insert("minuscule".into(), json!(d.is_minuscule(&omega)));
    let mut rows = Vec::new();
    for (nu, p) in &table {
        let value = if cfg.t_is_zero() {
            p.limit_at_zero()?.to_f64().unwrap_or(f64::NAN)
        } else {
            p.eval_exact(&cfg.t_exact)?.to_f64().unwrap_or(f64::NAN)
        };
        rows.push(vec![
            Cell::Weight(nu.0.clone()),
            Cell::Text(p.to_string()),
            Cell::Float(value),
        ]);
    }
    Ok(Outcome {
        output: Output {
            meta,
            columns: vec!["nu", "coefficient", "value"],
            rows,
        },
        failed: false,
    })
}

pub fn cmd_fusion(cfg: &JobConfig) -> Result<Outcome> {
    let d = cfg.datum()?;
    let c = cfg.level;
    let table = fusion_ring(&d, c)?;
    let ints = table.integers.as_ref().expect("fusion tables are integral");
    let n = table.size();
    let mut meta = cfg.meta("fusion");
    let negatives: Vec<Value> = (0..n * n * n)
        .filter(|&i| ints[i] < 0)
        .map(|i| {
            json!([
                table.weights[i / (n * n)].0,
                table.weights[(i / n) % n].0,
                table.weights[i % n].0,
                ints[i]
            ])
        })
        .collect();
    meta.insert("residual".into(), json!(table.residual));
    meta.insert("negative_expected".into(), json!(table.negative_expected));
    meta.insert("negative_entries".into(), Value::Array(negatives));
    if table.negative_expected {
        let predicted: Vec<Vec<i64>> = negative_fusion_weights(&d, c)?
            .into_iter()
            .map(|w| w.0)
            .collect();
        meta.insert("negative_predicted_lambda".into(), json!(predicted));
    }
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = ints[(i * n + j) * n + k];
                if v != 0 {
                    rows.push(vec![
                        Cell::Weight(table.weights[i].0.clone()),
                        Cell::Weight(table.weights[j].0.clone()),
                        Cell::Weight(table.weights[k].0.clone()),
                        Cell::Int(v),
                    ]);
                }
            }
        }
    }
    Ok(Outcome {
        output: Output {
            meta,
            columns: vec!["lambda", "mu", "nu", "coefficient"],
            rows,
        },
        failed: false,
    })
}

/// Entries with modulus below this are omitted from the structure table dump, and smaller
/// real or imaginary parts are printed as zero.
pub const STRUCTURE_ZERO: f64 = 1e-12;

pub fn cmd_structure(cfg: &JobConfig) -> Result<Outcome> {
    let d = cfg.datum()?;
    let table = structure_constants(&d, cfg.level, &cfg.t())?;
    let n = table.size();
    let mut meta = cfg.meta("structure");
    meta.insert("residual".into(), json!(table.residual));
    meta.insert("dimension".into(), json!(n));
    meta.insert("omitted_below".into(), json!(STRUCTURE_ZERO));
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = table.at(i, j, k);
                if v.norm() >= STRUCTURE_ZERO {
                    let snap = |x: f64| if x.abs() < STRUCTURE_ZERO { 0.0 } else { x };
                    let v = Complex64::new(snap(v.re), snap(v.im));
                    rows.push(vec![
                        Cell::Weight(table.weights[i].0.clone()),
                        Cell::Weight(table.weights[j].0.clone()),
                        Cell::Weight(table.weights[k].0.clone()),
                        Cell::Complex(v),
                    ]);
                }
            }
        }
    }
    Ok(Outcome {
        output: Output {
            meta,
            columns: vec!["lambda", "mu", "nu", "value"],
            rows,
        },
        failed: false,
    })
}

pub fn cmd_verify(cfg: &JobConfig) -> Result<Outcome> {
    let d = cfg.datum()?;
    let checks = run_checks(&d, cfg)?;
    let failed = checks.iter().any(|c| !c.passed);
    let mut meta = cfg.meta("verify");
    meta.insert("config_hash".into(), json!(cfg.config_hash()));
    meta.insert(
        "dimension".into(),
        json!(enumerate_pc(&d, cfg.level)?.len()),
    );
    meta.insert("all_passed".into(), json!(!failed));
    let mut columns = vec!["check", "status", "residual", "tolerance", "detail"];
    if cfg.timings {
        columns.push("runtime_ms");
    }
    let rows = checks
        .iter()
        .map(|c| {
            let mut r = vec![
                Cell::Text(c.name.clone()),
                Cell::Text(if c.passed { "PASS" } else { "FAIL" }.into()),
                Cell::Float(c.residual),
                Cell::Float(c.tolerance),
                Cell::Text(c.detail.clone()),
            ];
            if cfg.timings {
                r.push(Cell::Float(c.runtime_ms));
            }
            r
        })
        .collect();
    Ok(Outcome {
        output: Output {
            meta,
            columns,
            rows,
        },
        failed,
    })
}

pub fn run(cfg: &JobConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Nodes => cmd_nodes(cfg),
        Command::Pieri { lambda, omega } => cmd_pieri(cfg, lambda, omega.as_deref()),
        Command::Fusion => cmd_fusion(cfg),
        Command::Structure => cmd_structure(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

/// Exit code for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::UnknownType(_)
        | Error::RankOutOfRange { .. }
        | Error::InvalidLevel(_)
        | Error::InvalidParameter { .. }
        | Error::NotInAlcove { .. }
        | Error::NotQuasiMinuscule(_)
        | Error::NotDominant(_) => 2,
        _ => 1,
    }
}

/// Parses arguments, runs the command and writes the output; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match JobConfig::from_cli(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = match outcome.output.render(cfg.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    if outcome.failed {
        eprintln!("verification failed");
        1
    } else {
        0
    }
}
