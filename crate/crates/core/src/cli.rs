//! The `epr` command-line surface.
//!
//! Every command writes exactly one JSON document (default) or one CSV table
//! to stdout. JSON documents have the shape
//! `{"command": ..., "inputs": {...}, "result": {...}}`, matrices are
//! row-major nested arrays and complex numbers are `{"re": .., "im": ..}`.
//! Numbers are rounded to 12 significant digits.
//!
//! [`run`] does all the work and returns the streams and exit status, so the
//! binary is a thin wrapper and tests need no subprocess.

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::bell::{self, ChshSettings};
use crate::epr::{self, Side};
use crate::spin::{self, AngleDeg};
use crate::statistics;
use crate::{Error, Result};

/// Deviation above which `nosignal` fails.
pub const NOSIGNAL_TOL: f64 = 1e-10;

const EXIT_FAIL: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "epr",
    version,
    about = "Relative-state EPR simulator: joint probabilities, K-matrix, CHSH, branch statistics"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint probability matrix of singlet outcomes along z and z'.
    Probs {
        /// Angle between z and z' in degrees.
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
    /// K-matrix of the singlet after both measurements.
    Kmatrix {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
    /// CHSH score against the local deterministic bound.
    Chsh {
        #[arg(long, allow_negative_numbers = true, required_unless_present = "optimal")]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "optimal")]
        ap: Option<f64>,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "optimal")]
        b: Option<f64>,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "optimal")]
        bp: Option<f64>,
        /// Use (0°, 90°, 45°, 135°).
        #[arg(long, conflicts_with_all = ["a", "ap", "b", "bp"])]
        optimal: bool,
    },
    /// Deviant branch weight for N in {n/100, n/10, n}.
    Branches {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        epsilon: f64,
        /// Outcome pair as `p,p'`.
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
    },
    /// Seeded random no-signaling sweep; exits 1 if any deviation exceeds 1e-10.
    Nosignal {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
    },
    /// Monte Carlo pair counts per trial.
    Sample {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (p, q) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `p,p'`, got `{s}`"))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad pair index `{x}`: {e}"))
    };
    Ok((parse(p)?, parse(q)?))
}

/// Captured result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub status: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            status: 0,
        }
    }

    fn usage(message: String) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: message,
            status: EXIT_USAGE,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome::ok(text)
                }
                _ => Outcome::usage(text),
            };
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => outcome,
        Err(e) => Outcome::usage(format!("error: {e}\n")),
    }
}

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn num(x: f64) -> Value {
    json!(sig12(x))
}

fn complex(z: Complex64) -> Value {
    json!({"re": sig12(z.re), "im": sig12(z.im)})
}

fn document(command: &str, inputs: Value, result: Value) -> String {
    let doc = json!({"command": command, "inputs": inputs, "result": result});
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn cell(x: f64) -> String {
    sig12(x).to_string()
}

fn angle(deg: f64) -> Result<AngleDeg> {
    AngleDeg::new(deg)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let format = cli.format;
    match &cli.command {
        Command::Probs { theta } => cmd_probs(angle(*theta)?, format),
        Command::Kmatrix { theta } => cmd_kmatrix(angle(*theta)?, format),
        Command::Chsh {
            a,
            ap,
            b,
            bp,
            optimal,
        } => {
            let settings = if *optimal {
                ChshSettings::optimal()
            } else {
                match (a, ap, b, bp) {
                    (Some(a), Some(ap), Some(b), Some(bp)) => ChshSettings::new(*a, *ap, *b, *bp)?,
                    _ => {
                        return Err(Error::InvalidArgument(
                            "chsh needs --a --ap --b --bp or --optimal".into(),
                        ))
                    }
                }
            };
            cmd_chsh(&settings, format)
        }
        Command::Branches {
            n,
            theta,
            epsilon,
            pair,
        } => cmd_branches(*n, angle(*theta)?, *epsilon, *pair, format),
        Command::Nosignal { trials, seed, dim } => cmd_nosignal(*trials, *seed, *dim, format),
        Command::Sample {
            n,
            trials,
            seed,
            theta,
        } => cmd_sample(*n, *trials, *seed, angle(*theta)?, format),
    }
}

pub fn cmd_probs(theta: AngleDeg, format: OutputFormat) -> Result<Outcome> {
    let p = spin::singlet_joint_probability(theta);
    let out = match format {
        OutputFormat::Json => document(
            "probs",
            json!({"theta_deg": theta.degrees()}),
            json!({
                "row_labels": ["S_z=0", "S_z=1"],
                "col_labels": ["S_z'=0", "S_z'=1"],
                "P": p.to_rows().iter().map(|r| r.iter().map(|&x| num(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "marginal_1": epr::marginal(&p, Side::First).into_iter().map(num).collect::<Vec<_>>(),
                "marginal_2": epr::marginal(&p, Side::Second).into_iter().map(num).collect::<Vec<_>>(),
            }),
        ),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = p
                .to_rows()
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    std::iter::once(i.to_string())
                        .chain(r.iter().map(|&x| cell(x)))
                        .collect()
                })
                .collect();
            csv_table(&["s_z", "s_zp_0", "s_zp_1"], &rows)
        }
    };
    Ok(Outcome::ok(out))
}

pub fn cmd_kmatrix(theta: AngleDeg, format: OutputFormat) -> Result<Outcome> {
    let k = spin::singlet_k_matrix(theta);
    let out = match format {
        OutputFormat::Json => {
            let grid: Vec<Vec<Value>> = (0..k.rows())
                .map(|i| (0..k.cols()).map(|j| complex(k.get(i, j))).collect())
                .collect();
            document(
                "kmatrix",
                json!({"theta_deg": theta.degrees()}),
                json!({"row_labels": ["S_z=0", "S_z=1"], "col_labels": ["S_z'=0", "S_z'=1"], "K": grid}),
            )
        }
        OutputFormat::Csv => {
            let mut rows = Vec::new();
            for i in 0..k.rows() {
                for j in 0..k.cols() {
                    let z = k.get(i, j);
                    rows.push(vec![i.to_string(), j.to_string(), cell(z.re), cell(z.im)]);
                }
            }
            csv_table(&["s_z", "s_zp", "re", "im"], &rows)
        }
    };
    Ok(Outcome::ok(out))
}

pub fn cmd_chsh(settings: &ChshSettings, format: OutputFormat) -> Result<Outcome> {
    let r = bell::violation_report(settings);
    let s = settings;
    let out = match format {
        OutputFormat::Json => document(
            "chsh",
            json!({
                "a_deg": s.a.degrees(), "a_prime_deg": s.a_prime.degrees(),
                "b_deg": s.b.degrees(), "b_prime_deg": s.b_prime.degrees(),
            }),
            json!({
                "convention": "S = E(a,b) - E(a,b') + E(a',b) + E(a',b')",
                "quantum_s": num(r.quantum_score),
                "classical_bound": num(r.classical_bound),
                "violated": r.violated,
                "margin": num(r.margin),
            }),
        ),
        OutputFormat::Csv => csv_table(
            &[
                "a_deg",
                "a_prime_deg",
                "b_deg",
                "b_prime_deg",
                "quantum_s",
                "classical_bound",
                "violated",
                "margin",
            ],
            &[vec![
                cell(s.a.degrees()),
                cell(s.a_prime.degrees()),
                cell(s.b.degrees()),
                cell(s.b_prime.degrees()),
                cell(r.quantum_score),
                cell(r.classical_bound),
                r.violated.to_string(),
                cell(r.margin),
            ]],
        ),
    };
    Ok(Outcome::ok(out))
}

/// `{n/100, n/10, n}` clamped to at least 1, duplicates removed.
pub fn branch_sizes(n: u64) -> Vec<u64> {
    let mut sizes: Vec<u64> = [n / 100, n / 10, n].iter().map(|&x| x.max(1)).collect();
    sizes.dedup();
    sizes
}

pub fn cmd_branches(
    n: u64,
    theta: AngleDeg,
    epsilon: f64,
    pair: (usize, usize),
    format: OutputFormat,
) -> Result<Outcome> {
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    let p = spin::singlet_joint_probability(theta);
    let q = if pair.0 < p.rows() && pair.1 < p.cols() {
        p.get(pair.0, pair.1)
    } else {
        f64::NAN
    };
    let rows = branch_sizes(n)
        .into_iter()
        .map(|size| Ok((size, statistics::deviation_weight(&p, size, pair, epsilon)?)))
        .collect::<Result<Vec<_>>>()?;
    let out = match format {
        OutputFormat::Json => document(
            "branches",
            json!({
                "n": n, "theta_deg": theta.degrees(), "epsilon": epsilon,
                "pair": [pair.0, pair.1],
            }),
            json!({
                "q": num(q),
                "rows": rows.iter().map(|(size, w)| json!({"n": size, "deviant_weight": num(*w)})).collect::<Vec<_>>(),
            }),
        ),
        OutputFormat::Csv => csv_table(
            &["n", "deviant_weight"],
            &rows
                .iter()
                .map(|(size, w)| vec![size.to_string(), cell(*w)])
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome::ok(out))
}

pub fn cmd_nosignal(trials: usize, seed: u64, dim: usize, format: OutputFormat) -> Result<Outcome> {
    if !(2..=8).contains(&dim) {
        return Err(Error::InvalidArgument(format!("--dim must lie in [2, 8], got {dim}")));
    }
    let r = epr::no_signaling_sweep(trials, dim, seed, NOSIGNAL_TOL)?;
    let out = match format {
        OutputFormat::Json => document(
            "nosignal",
            json!({"trials": trials, "seed": seed, "dim": dim}),
            json!({
                "max_deviation": num(r.max_deviation),
                "max_identity_deviation": num(r.max_identity_deviation),
                "tol": r.tol,
                "pass": r.pass,
            }),
        ),
        OutputFormat::Csv => csv_table(
            &["trials", "seed", "dim", "max_deviation", "max_identity_deviation", "tol", "pass"],
            &[vec![
                trials.to_string(),
                seed.to_string(),
                dim.to_string(),
                cell(r.max_deviation),
                cell(r.max_identity_deviation),
                r.tol.to_string(),
                r.pass.to_string(),
            ]],
        ),
    };
    Ok(Outcome {
        stdout: out,
        stderr: if r.pass {
            String::new()
        } else {
            format!("no-signaling deviation {:e} exceeds {:e}\n", r.max_deviation, r.tol)
        },
        status: if r.pass { 0 } else { EXIT_FAIL },
    })
}

pub fn cmd_sample(
    n: u64,
    trials: usize,
    seed: u64,
    theta: AngleDeg,
    format: OutputFormat,
) -> Result<Outcome> {
    let p = spin::singlet_joint_probability(theta);
    let table = statistics::sample_records(&p, n, trials, seed)?;
    let out = match format {
        OutputFormat::Json => {
            let mean: Vec<Vec<Value>> = (0..p.rows())
                .map(|i| (0..p.cols()).map(|j| num(table.mean_frequency((i, j)))).collect())
                .collect();
            document(
                "sample",
                json!({"n": n, "trials": trials, "seed": seed, "theta_deg": theta.degrees()}),
                json!({
                    "counts": table.trials.iter().map(|t| t.counts().to_vec()).collect::<Vec<_>>(),
                    "mean_frequency": mean,
                }),
            )
        }
        OutputFormat::Csv => {
            let mut header = vec!["trial".to_string()];
            for i in 0..p.rows() {
                for j in 0..p.cols() {
                    header.push(format!("n_{i}_{j}"));
                }
            }
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = table
                .trials
                .iter()
                .enumerate()
                .map(|(t, v)| {
                    std::iter::once(t.to_string())
                        .chain(v.counts().iter().map(u64::to_string))
                        .collect()
                })
                .collect();
            csv_table(&header, &rows)
        }
    };
    Ok(Outcome::ok(out))
}
