//! `frogbound` command-line interface.

mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frogbound::certify::{certify_params, CertifyConfig, Verdict};
use frogbound::genfun::{build_g, g_derivative};
use frogbound::search::{
    approx_bound_from, approx_start, figure_rows, q_crit, rigorous_bound, ApproxConfig, FigureConfig, DEFAULT_WINDOW,
};
use frogbound::serde_util::{parse_rational, rational_to_string};
use frogbound::sim::{empirical_u_pmf, simulate_fm, simulate_sfm, InitMeasure, SimConfig, Walk};
use frogbound::u_dist::u_pmf;
use frogbound::{derive_params, Error, Rational};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use manifest::RunManifest;

/// Exit status for command-line usage errors (sysexits `EX_USAGE`).
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "frogbound", version, about = "Certified drift bounds for the frog model on d-ary trees")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Write a run manifest to this path.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact distribution of the activation count U(d, p, λ).
    Pmf {
        #[arg(long)]
        d: u32,
        /// Drift as `a/b`.
        #[arg(long)]
        p: String,
        #[arg(long)]
        lambda: f64,
    },
    /// Coefficients of g(y) as JSON.
    Gpoly {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: String,
        /// Differentiate this many times.
        #[arg(long, default_value_t = 0)]
        derivative: u32,
    },
    /// Certify sup g < 1 on [0, 1].
    Certify {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: String,
        /// Write the certificate to this path.
        #[arg(long, value_name = "PATH")]
        emit_cert: Option<PathBuf>,
        /// Also verify that g has a unique interior maximum.
        #[arg(long)]
        unique_max: bool,
        #[command(flatten)]
        certify: CertifyArgs,
    },
    /// Search the simplest rational drift with a certified sup in (window, 1).
    Bound {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: f64,
        /// Certificate output path (default `bound-d<N>.json`).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[command(flatten)]
        certify: CertifyArgs,
    },
    /// Approximate bound from the λ-grid check.
    ApproxBound {
        #[arg(long)]
        d: u32,
        /// Starting drift (`a/b` or decimal); default from the published table.
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value = "1/100")]
        lambda_step: String,
        #[arg(long, default_value = "1/10000")]
        p_step: String,
        /// Check only the first λ chunk {0, step, ..., 1 - step}.
        #[arg(long)]
        no_extend: bool,
    },
    /// Bracket for the threshold q_d (numeric).
    Qcrit {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// CSV of bounds against arity: `m,bound,mode`.
    Figure {
        #[arg(long, default_value_t = 2)]
        dmin: u32,
        #[arg(long, default_value_t = 60)]
        dmax: u32,
        /// Use published values up to this arity.
        #[arg(long, default_value_t = 13)]
        rigorous_max: u32,
        /// Skip certifying published values.
        #[arg(long)]
        no_certify: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Monte Carlo root-visit statistics.
    Simulate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        d: u32,
        /// Drift as `a/b` or decimal.
        #[arg(long)]
        p: String,
        /// Initial measure: `one` or `poi:MEAN`.
        #[arg(long, default_value = "one")]
        nu: String,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 200)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000_000)]
        max_steps: u64,
    },
    /// Empirical distribution of U from the star process.
    SampleU {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: String,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Model {
    Fm,
    Sfm,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// JSON file with certification settings; flags below override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    initial_precision: Option<u32>,
    #[arg(long)]
    max_precision: Option<u32>,
    #[arg(long)]
    max_boxes: Option<u64>,
}

impl CertifyArgs {
    fn resolve(&self) -> Result<CertifyConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
            }
            None => CertifyConfig::default(),
        };
        if let Some(v) = self.initial_precision {
            cfg.initial_precision_bits = v;
        }
        if let Some(v) = self.max_precision {
            cfg.max_precision_bits = v;
        }
        if let Some(v) = self.max_boxes {
            cfg.max_boxes = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Done,
    Inconclusive,
    Failed,
}

struct Ctx {
    json: bool,
    manifest: Option<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    fn print<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
        } else {
            println!("{}", text());
        }
    }

    /// Writes JSON to `path`, tagged with the manifest path when there is one.
    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<(), Error> {
        let mut v = serde_json::to_value(value).expect("serializable");
        if let (Some(m), Value::Object(map)) = (&self.manifest, &mut v) {
            map.insert("manifest".into(), json!(m.display().to_string()));
        }
        self.write_text(path, &(serde_json::to_string_pretty(&v).expect("serializable") + "\n"))
    }

    fn write_text(&mut self, path: &Path, text: &str) -> Result<(), Error> {
        fs::write(path, text).map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }
}

/// Exact drift from an `a/b` (or integer) literal.
fn exact_drift(s: &str) -> Result<Rational, Error> {
    if s.contains('.') || s.contains(['e', 'E']) {
        return Err(Error::Parse(format!("exact drift expected as a/b, got {s:?}")));
    }
    parse_rational(s)
}

/// Drift for numeric commands: `a/b` or a decimal.
fn real_drift(s: &str) -> Result<f64, Error> {
    if s.contains('/') {
        return Ok(parse_rational(s)?.to_f64().unwrap_or(f64::NAN));
    }
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

fn verdict_outcome(v: Verdict) -> Outcome {
    match v {
        Verdict::CertifiedBelowOne => Outcome::Done,
        Verdict::FailedExceedsOne => Outcome::Failed,
        Verdict::Inconclusive => Outcome::Inconclusive,
    }
}

fn run(cmd: &Command, ctx: &mut Ctx) -> Result<Outcome, Error> {
    match cmd {
        Command::Pmf { d, p, lambda } => {
            let pmf = u_pmf(&derive_params(*d, &exact_drift(p)?)?, *lambda)?;
            ctx.print(&pmf, || {
                let mut s = format!("U({d}, {}, {lambda})", rational_to_string(&pmf.p));
                for (u, q) in pmf.probs.iter().enumerate() {
                    s += &format!("\n{u}\t{q:.15e}");
                }
                s
            });
        }
        Command::Gpoly { d, p, derivative } => {
            let mut g = build_g(&derive_params(*d, &exact_drift(p)?)?)?;
            for _ in 0..*derivative {
                g = g_derivative(&g);
            }
            // the coefficient dump is JSON in either mode
            println!("{}", serde_json::to_string_pretty(&g).expect("serializable"));
        }
        Command::Certify { d, p, emit_cert, unique_max, certify } => {
            let mut cfg = certify.resolve()?;
            cfg.check_unique_max |= *unique_max;
            let cert = certify_params(&derive_params(*d, &exact_drift(p)?)?, &cfg)?;
            if let Some(path) = emit_cert {
                ctx.write_json(path, &cert)?;
            }
            ctx.print(&cert, || {
                let mut s = format!(
                    "{}\nsup g in [{:.12}, {:.12}] at y ~ {:.9}\nprecision {} bits, {} boxes",
                    cert.verdict,
                    cert.sup_lower_f64(),
                    cert.sup_upper_f64(),
                    cert.argmax_f64(),
                    cert.precision_bits,
                    cert.boxes_processed
                );
                if cfg.check_unique_max {
                    s += &format!("\nunique maximum verified: {}", cert.unique_max_verified);
                }
                s
            });
            return Ok(verdict_outcome(cert.verdict));
        }
        Command::Bound { d, window, out, certify } => {
            let cfg = certify.resolve()?;
            let res = rigorous_bound(*d, &cfg, *window)?;
            let path = out.clone().unwrap_or_else(|| PathBuf::from(format!("bound-d{d}.json")));
            ctx.write_json(&path, &res)?;
            let path_str = path.display().to_string();
            let mut v = serde_json::to_value(&res).expect("serializable");
            v["certificate_path"] = json!(path_str);
            ctx.print(&v, || format!("{}\n{path_str}", rational_to_string(&res.p)));
        }
        Command::ApproxBound { d, start, lambda_step, p_step, no_extend } => {
            let start = match start {
                Some(s) => parse_rational(s)?,
                None => approx_start(*d),
            };
            let cfg = ApproxConfig {
                lambda_step: parse_rational(lambda_step)?,
                p_step: parse_rational(p_step)?,
                extend_grid: !no_extend,
                ..ApproxConfig::default()
            };
            let res = approx_bound_from(*d, &start, &cfg)?;
            ctx.print(&res, || format!("{:.4}", res.p_f64));
        }
        Command::Qcrit { d, tol } => {
            let q = q_crit(*d, *tol)?;
            ctx.print(&q, || format!("q_{d} in [{:.6}, {:.6}] ({})", q.lower, q.upper, q.label));
        }
        Command::Figure { dmin, dmax, rigorous_max, no_certify, out } => {
            let cfg = FigureConfig { rigorous_max: *rigorous_max, certify: !no_certify, ..FigureConfig::default() };
            let rows = figure_rows(*dmin, *dmax, &cfg)?;
            let mut csv = String::from("m,bound,mode\n");
            for r in &rows {
                csv += &format!("{},{},{}\n", r.m, r.bound, r.mode);
            }
            match out {
                Some(path) => {
                    ctx.write_text(path, &csv)?;
                    ctx.print(&json!({ "rows": rows.len(), "path": path.display().to_string() }), || {
                        path.display().to_string()
                    });
                }
                None if ctx.json => ctx.print(&rows, String::new),
                None => print!("{csv}"),
            }
        }
        Command::Simulate { model, d, p, nu, depth, reps, seed, max_steps } => {
            let walk = Walk::new(*d, real_drift(p)?)?;
            let nu: InitMeasure = nu.parse()?;
            let cfg = SimConfig { depth: *depth, max_steps: *max_steps, seed: *seed, replications: *reps };
            let summary = match model {
                Model::Fm => simulate_fm(&walk, nu, &cfg)?,
                Model::Sfm => simulate_sfm(&walk, nu, &cfg)?,
            };
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
        }
        Command::SampleU { d, p, lambda, n, seed } => {
            let params = derive_params(*d, &exact_drift(p)?)?;
            if !(*lambda >= 0.0) || *n == 0 {
                return Err(Error::InvalidConfig("need lambda >= 0 and n > 0".into()));
            }
            let probs = empirical_u_pmf(&Walk::from_params(&params), *lambda, *n, *seed);
            let out = json!({
                "d": d,
                "p": rational_to_string(&params.p),
                "lambda": lambda,
                "n": n,
                "seed": seed,
                "probs": probs,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
    }
    Ok(Outcome::Done)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Pmf { .. } => "pmf",
        Command::Gpoly { .. } => "gpoly",
        Command::Certify { .. } => "certify",
        Command::Bound { .. } => "bound",
        Command::ApproxBound { .. } => "approx-bound",
        Command::Qcrit { .. } => "qcrit",
        Command::Figure { .. } => "figure",
        Command::Simulate { .. } => "simulate",
        Command::SampleU { .. } => "sample-u",
    }
}

fn seed_of(cmd: &Command) -> Option<u64> {
    match cmd {
        Command::Simulate { seed, .. } | Command::SampleU { seed, .. } => Some(*seed),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "error": { "kind": "InvalidConfig", "message": e.to_string() } }));
            return ExitCode::from(1);
        }
    }

    let mut manifest = RunManifest::start(command_name(&cli.command), std::env::args().collect(), seed_of(&cli.command));
    let mut ctx = Ctx { json: cli.json, manifest: cli.manifest.clone(), outputs: Vec::new() };
    let result = run(&cli.command, &mut ctx);
    let _ = std::io::stdout().flush();

    if let Some(path) = &cli.manifest {
        manifest.finish(&ctx.outputs);
        if let Err(e) = manifest.write(path) {
            eprintln!("{}", json!({ "error": { "kind": "InvalidConfig", "message": e.to_string() } }));
            return ExitCode::from(1);
        }
    }
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Ok(Outcome::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::from(1)
        }
    }
}
