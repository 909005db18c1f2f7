//! Command-line front end. [`run`] parses arguments, dispatches to the library
//! and maps errors to exit codes: 0 success, 1 verification failure, 2 bad
//! input, 3 numerical failure.

use crate::checks::{
    check_names, conjecture_scan, render_table, run_all, run_check, theorems_pass, to_jsonl,
    EnsembleSpec,
};
use crate::closed::{
    chernoff, chi2_logmean, hellinger_fractional_trace, hellinger_trace, jensen_shannon, lecam,
    petz, renyi_trace, sandwiched, umegaki,
};
use crate::error::{Error, Result};
use crate::generator::{parse_generator, ChiPower, LeCam, RelativeEntropy};
use crate::integral::{f_divergence, hellinger, hockey_stick, renyi_from_hellinger, DivergenceValue, Method};
use crate::operator::{load_state, max_divergence, StatePair};
use crate::quad::QuadratureSpec;
use crate::sweep::{parse_range, sweep, to_csv};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qfdiv", version, about = "Quantum f-divergences from hockey-stick integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Auto,
    Integral,
    Trace,
    Closed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one divergence of a pair of state files.
    Compute {
        /// f:relative-entropy, f:hellinger:A, f:lecam:L, f:lecam-equivalent:L, f:chipow:K,
        /// renyi:A, hellinger:A, petz:A, sandwiched:A, chi2, lecam:L, js, chernoff,
        /// e-gamma:G, dmax, umegaki
        #[arg(long, short = 'd')]
        divergence: String,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Absolute and relative quadrature tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
        method: MethodChoice,
        /// Report logarithmic quantities in bits.
        #[arg(long)]
        bits: bool,
        #[arg(long)]
        json: bool,
    },
    /// Rényi divergences over a range of orders as CSV.
    Sweep {
        /// start:stop:step
        #[arg(long)]
        alphas: String,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        bits: bool,
    },
    /// Run the property suite on a seeded random ensemble.
    Verify {
        /// `all` or a check name (with or without the check_ prefix).
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated dimensions.
        #[arg(long, default_value = "2,3")]
        dims: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        tol: Option<f64>,
        /// Write one JSON report per line to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print JSON lines instead of the table.
        #[arg(long)]
        jsonl: bool,
    },
    /// Compare the integral and trace forms of H_alpha at orders above 1.
    Conjecture {
        /// Comma-separated orders, all > 1.
        #[arg(long, default_value = "1.25,1.5,1.75,2.5,3.5")]
        alphas: String,
        #[arg(long, default_value = "2,3")]
        dims: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the full scan as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::NonFinite(_) | Error::Budget { .. } => EXIT_NUMERIC,
        _ => EXIT_INPUT,
    }
}

fn quad_spec(tol: Option<f64>) -> Result<QuadratureSpec> {
    match tol {
        None => Ok(QuadratureSpec::default()),
        Some(t) if t > 0.0 && t.is_finite() => Ok(QuadratureSpec::with_tol(t, t)),
        Some(t) => Err(Error::InvalidParameter(format!("tolerance {t} must be positive"))),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| Error::Parse(format!("{what} '{s}': {e}")))
        })
        .collect()
}

fn load_pair(rho: &PathBuf, sigma: &PathBuf) -> Result<StatePair> {
    StatePair::new(load_state(rho)?, load_state(sigma)?)
}

/// A computed divergence plus whether it is a logarithmic quantity.
#[derive(Debug, Clone)]
pub struct Computed {
    pub value: DivergenceValue,
    pub logarithmic: bool,
}

fn param(arg: Option<&str>, name: &str) -> Result<f64> {
    arg.ok_or_else(|| Error::Parse(format!("{name} needs a parameter, e.g. {name}:2")))?
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{name} parameter: {e}")))
}

fn unsupported(name: &str, method: MethodChoice) -> Error {
    Error::Capability(format!("method {method:?} is not available for {name}"))
}

/// Evaluate `divergence` as named on the command line.
pub fn compute(divergence: &str, pair: &StatePair, method: MethodChoice, spec: &QuadratureSpec) -> Result<Computed> {
    use MethodChoice::*;
    let (name, arg) = match divergence.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (divergence.trim(), None),
    };
    let closed = |v: f64| DivergenceValue::exact(v, Method::Closed);
    let (value, logarithmic) = match name {
        "f" => {
            let g = parse_generator(arg.unwrap_or(""))?;
            match method {
                Auto | Integral => (f_divergence(g.as_ref(), pair, spec)?, g.name() == "relative-entropy"),
                m => return Err(unsupported(divergence, m)),
            }
        }
        "renyi" | "hellinger" => {
            let a = param(arg, name)?;
            if !(a > 0.0) {
                return Err(Error::InvalidParameter(format!("order {a} must be positive")));
            }
            let h = match method {
                Auto | Integral => hellinger(a, pair, spec)?,
                Trace if a > 1.0 => hellinger_trace(a, pair, spec)?,
                Trace if a < 1.0 => hellinger_fractional_trace(a, pair, spec)?,
                Closed | Trace if a == 1.0 => umegaki(pair),
                m => return Err(unsupported(divergence, m)),
            };
            if name == "renyi" {
                let v = match (method, a > 1.0) {
                    (Trace, true) => renyi_trace(a, pair, spec)?,
                    _ => renyi_from_hellinger(a, h),
                };
                (v, true)
            } else {
                (h, a == 1.0)
            }
        }
        "petz" | "sandwiched" => {
            let a = param(arg, name)?;
            match method {
                Auto | Closed => {
                    let q = if name == "petz" { petz(a, pair)? } else { sandwiched(a, pair)? };
                    (closed(q.renyi), true)
                }
                m => return Err(unsupported(divergence, m)),
            }
        }
        "chi2" => match method {
            Auto | Closed => (chi2_logmean(pair), false),
            Integral => (f_divergence(&ChiPower::new(2)?, pair, spec)?, false),
            Trace => (hellinger_trace(2.0, pair, spec)?, false),
        },
        "lecam" => {
            let l = param(arg, name)?;
            match method {
                Auto | Closed => (closed(lecam(l, pair)?), false),
                Integral => (f_divergence(&LeCam::new(l)?, pair, spec)?, false),
                m => return Err(unsupported(divergence, m)),
            }
        }
        "umegaki" => match method {
            Auto | Closed => (umegaki(pair), true),
            Integral => (f_divergence(&RelativeEntropy, pair, spec)?, true),
            m => return Err(unsupported(divergence, m)),
        },
        "js" => match method {
            Auto | Closed => (closed(jensen_shannon(pair)?), true),
            m => return Err(unsupported(divergence, m)),
        },
        "chernoff" => match method {
            Auto | Closed => (closed(chernoff(pair)?.value), true),
            m => return Err(unsupported(divergence, m)),
        },
        "e-gamma" => {
            let g = param(arg, name)?;
            match method {
                Auto | Closed => (closed(hockey_stick(g, &pair.rho, &pair.sigma)?), false),
                m => return Err(unsupported(divergence, m)),
            }
        }
        "dmax" => match method {
            Auto | Closed => (closed(max_divergence(&pair.rho, &pair.sigma)?), true),
            m => return Err(unsupported(divergence, m)),
        },
        other => return Err(Error::Parse(format!("unknown divergence '{other}'"))),
    };
    Ok(Computed { value, logarithmic })
}

fn number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

/// Parse `args` (including the program name) and execute; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            if let Error::NonConvergence { partial, est_error } = &e {
                let _ = writeln!(out, "value: {partial}");
                let _ = writeln!(out, "est_error: {est_error:e}");
                let _ = writeln!(out, "method: partial");
            }
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Compute {
            divergence,
            rho,
            sigma,
            tol,
            method,
            bits,
            json,
        } => {
            let spec = quad_spec(tol)?;
            let pair = load_pair(&rho, &sigma)?;
            let c = compute(&divergence, &pair, method, &spec)?;
            let k = if bits && c.logarithmic { std::f64::consts::LOG2_E } else { 1.0 };
            let (value, est) = (c.value.value * k, c.value.est_error * k);
            let unit = if c.logarithmic {
                if bits { "bits" } else { "nats" }
            } else {
                "none"
            };
            if json {
                let obj = json!({
                    "divergence": divergence,
                    "value": number(value),
                    "est_error": est,
                    "method": c.value.method.as_str(),
                    "unit": unit,
                    "note": c.value.note,
                });
                writeln!(out, "{obj}")?;
            } else {
                writeln!(out, "value: {value}")?;
                writeln!(out, "est_error: {est:e}")?;
                writeln!(out, "method: {}", c.value.method.as_str())?;
                if let Some(n) = &c.value.note {
                    writeln!(out, "note: {n}")?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Sweep {
            alphas,
            rho,
            sigma,
            out: path,
            tol,
            bits,
        } => {
            let spec = quad_spec(tol)?;
            let grid = parse_range(&alphas)?;
            let pair = load_pair(&rho, &sigma)?;
            let csv = to_csv(&sweep(&grid, &pair, &spec, bits)?);
            match path {
                Some(p) => std::fs::write(p, csv)?,
                None => write!(out, "{csv}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            suite,
            seed,
            dims,
            trials,
            tol,
            out: path,
            jsonl,
        } => {
            let spec = quad_spec(tol)?;
            let ens = EnsembleSpec::default()
                .with_dims(parse_list(&dims, "dimension")?)
                .with_trials(trials)
                .with_seed(seed);
            let reports = if suite == "all" {
                run_all(&ens, &spec)?
            } else {
                let known = check_names();
                let bare = suite.strip_prefix("check_").unwrap_or(&suite);
                if !known.contains(&bare) {
                    writeln!(err, "unknown suite '{suite}'; known: all, {}", known.join(", "))?;
                    return Ok(EXIT_INPUT);
                }
                run_check(&suite, &ens, &spec)?
            };
            let lines = to_jsonl(&reports)?;
            if let Some(p) = path {
                std::fs::write(p, &lines)?;
            }
            if jsonl {
                write!(out, "{lines}")?;
            } else {
                write!(out, "{}", render_table(&reports))?;
            }
            Ok(if theorems_pass(&reports) { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Conjecture {
            alphas,
            dims,
            trials,
            seed,
            out: path,
        } => {
            let alphas: Vec<f64> = parse_list(&alphas, "order")?;
            let ens = EnsembleSpec::default()
                .with_dims(parse_list(&dims, "dimension")?)
                .with_trials(trials)
                .with_seed(seed);
            let scan = conjecture_scan(&alphas, &ens, &QuadratureSpec::default())?;
            writeln!(out, "{:>6}  {:>8}  {:>12}  {:>12}  flagged", "alpha", "rows", "max_mixed", "max_pure")?;
            for &a in &alphas {
                let rows: Vec<_> = scan.rows.iter().filter(|r| r.alpha == a).collect();
                let max = |pure: bool| {
                    rows.iter()
                        .filter(|r| r.pure == pure)
                        .map(|r| r.deviation)
                        .fold(0.0, f64::max)
                };
                let flagged = rows.iter().filter(|r| r.flagged).count();
                writeln!(out, "{a:>6}  {:>8}  {:>12.3e}  {:>12.3e}  {flagged}", rows.len(), max(false), max(true))?;
            }
            writeln!(out, "max deviation {:.3e} (threshold {:.0e} relative), flagged {}", scan.max_deviation, scan.threshold, scan.flagged)?;
            if let Some(p) = path {
                std::fs::write(p, serde_json::to_string_pretty(&scan)?)?;
            }
            Ok(EXIT_OK)
        }
    }
}
