//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bands::{band_set, norm_identity, widom_factor, BandSet, GapZero, NormIdentity, WidomRecord};
use crate::error::{Error, Result};
use crate::examples::run_examples;
use crate::orbit::{orbit_data, widom_sweep, NearReturnCheck, SweepOptions, SweepSummary};
use crate::output::{to_json, write_csv};
use crate::potential::{self, CriticalPoint, PoleData};
use crate::realset::{locate, NormalizedProblem, SetSpec};
use crate::solver::{solve_residual, Method, SolveOptions};
use crate::verify::{run_verify, suite_instances, Instance, Suite, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "respoly", version, about = "Residual polynomials on finite unions of real intervals")]
#[command(args_conflicts_with_subcommands = false, allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Set spec `{"intervals": [[a,b],...], "x0": ...}`, inline or a file path.
    #[arg(long, global = true)]
    pub set: Option<String>,
    /// Normalization point; overrides `x0` in the set spec.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Levelling tolerance of the exchange solver.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Oracle grid points per band.
    #[arg(long, global = true, default_value_t = crate::oracle::DEFAULT_PER_BAND)]
    pub grid: usize,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and suites.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residual polynomial of degree at most n.
    Solve {
        #[arg(long)]
        n: usize,
    },
    /// Green's function at x0, capacity, critical points and PW constant.
    Green,
    /// Band set of the residual polynomial and the norm identity defect.
    Bands {
        #[arg(long)]
        n: usize,
    },
    /// Widom factors for n = 1..n_max.
    WidomSweep {
        #[arg(long)]
        n_max: usize,
        /// Near-return radius for the character orbit.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Character vector and its near returns to the lattice.
    Orbit {
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Invariant suite with oracle comparison; exit 3 on any failure.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        suite: SuiteArg,
        /// Largest n when checking the instance given by --set.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Closed-form instances and their defects.
    Examples,
}

fn load_problem(common: &Common) -> Result<NormalizedProblem> {
    let raw = common
        .set
        .as_deref()
        .ok_or_else(|| Error::invalid("--set is required for this command"))?;
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw).map_err(|e| Error::invalid(format!("cannot read set spec {raw}: {e}")))?
    };
    let spec = SetSpec::parse(&text)?;
    let x0 = common
        .x0
        .or(spec.x0)
        .ok_or_else(|| Error::invalid("x0 missing: pass --x0 or put it in the set spec"))?;
    locate(&spec.to_set(0.0)?, x0)
}

fn solve_options(common: &Common) -> Result<SolveOptions> {
    if !(common.tol > 0.0 && common.tol.is_finite()) {
        return Err(Error::invalid("--tol must be positive"));
    }
    Ok(SolveOptions::with_tol(common.tol))
}

#[derive(Serialize)]
struct Basis {
    kind: &'static str,
    interval: [f64; 2],
}

#[derive(Serialize)]
struct SolveOut {
    intervals: Vec<[f64; 2]>,
    x0: f64,
    n: usize,
    d_n: usize,
    r: f64,
    basis: Basis,
    coefficients: Vec<f64>,
    alternation_points: Vec<f64>,
    k: usize,
    method: Method,
    iterations: usize,
    levelling_defect: f64,
}

#[derive(Serialize)]
struct GreenOut {
    intervals: Vec<[f64; 2]>,
    x0: f64,
    g: f64,
    capacity: f64,
    band_masses: Vec<f64>,
    critical_points: Vec<CriticalPoint>,
    pw: f64,
}

#[derive(Serialize)]
struct BandsOut {
    n: usize,
    d_n: usize,
    r: f64,
    band_set: BandSet,
    harmonic_measures: Vec<f64>,
    gap_zeros: Vec<GapZero>,
    norm_identity: NormIdentity,
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    d_n: Option<usize>,
    r: Option<f64>,
    w_n: Option<f64>,
    is_near_return: bool,
    lattice_distance: f64,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepOut {
    omega: Vec<f64>,
    near_returns: Vec<usize>,
    summary: SweepSummary,
    near_return_check: Option<NearReturnCheck>,
    constant_check: Option<bool>,
    failures: usize,
    series: Vec<SweepRow>,
}

#[derive(Serialize)]
struct OrbitOut {
    n_max: usize,
    eps: f64,
    omega: Vec<f64>,
    returns: Vec<(usize, f64)>,
}

fn intervals(p: &NormalizedProblem) -> Vec<[f64; 2]> {
    p.set.intervals().iter().map(|iv| [iv.lo, iv.hi]).collect()
}

enum Artifact {
    Json(String),
    Csv {
        table: &'static str,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
        trailer: Vec<String>,
    },
}

fn emit(common: &Common, artifact: Artifact) -> Result<()> {
    let io = |e: std::io::Error| Error::invalid(format!("cannot write output: {e}"));
    let mut sink: Box<dyn Write> = match &common.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match artifact {
        Artifact::Json(text) => sink.write_all(text.as_bytes()).map_err(io)?,
        Artifact::Csv {
            table,
            header,
            rows,
            trailer,
        } => write_csv(&mut sink, table, &header, &rows, &trailer)?,
    }
    sink.flush().map_err(io)
}

fn no_csv(format: Option<Format>, what: &str) -> Result<()> {
    if format == Some(Format::Csv) {
        return Err(Error::invalid(format!("{what} has no CSV form; use --format json")));
    }
    Ok(())
}

/// Runs one command. Returns the process exit code for outcomes that are
/// not errors but still signal failure (a failing suite).
pub fn run(cli: &Cli) -> Result<i32> {
    let common = &cli.common;
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(Error::invalid("--jobs must be at least 1"));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match &cli.command {
        Command::Solve { n } => {
            no_csv(common.format, "solve")?;
            let prob = load_problem(common)?;
            let sol = solve_residual(&prob, *n, &solve_options(common)?)?;
            let hull = prob.set.hull();
            let out = SolveOut {
                intervals: intervals(&prob),
                x0: prob.x0,
                n: sol.n,
                d_n: sol.d_n,
                r: sol.r,
                basis: Basis {
                    kind: "chebyshev",
                    interval: [hull.lo, hull.hi],
                },
                coefficients: sol.poly.coeffs().to_vec(),
                alternation_points: sol.reference.points().to_vec(),
                k: sol.reference.k(),
                method: sol.method,
                iterations: sol.iterations,
                levelling_defect: sol.levelling_defect,
            };
            emit(common, Artifact::Json(to_json(&out)?))?;
        }
        Command::Green => {
            no_csv(common.format, "green")?;
            let prob = load_problem(common)?;
            let green = potential::equilibrium(&prob.set)?;
            let pd = PoleData::new(&prob.set, prob.x0)?;
            let out = GreenOut {
                intervals: intervals(&prob),
                x0: prob.x0,
                g: pd.green_at_infinity()?,
                capacity: green.capacity(),
                band_masses: green.band_masses().to_vec(),
                critical_points: pd.critical_points().to_vec(),
                pw: pd.pw(),
            };
            emit(common, Artifact::Json(to_json(&out)?))?;
        }
        Command::Bands { n } => {
            let prob = load_problem(common)?;
            let sol = solve_residual(&prob, *n, &solve_options(common)?)?;
            if common.format == Some(Format::Csv) {
                let pd = PoleData::new(&prob.set, prob.x0)?;
                let rec = widom_factor(&prob, &sol, &pd)?;
                emit(
                    common,
                    Artifact::Csv {
                        table: "widom-record",
                        header: WidomRecord::CSV_HEADER.iter().map(|s| s.to_string()).collect(),
                        rows: vec![rec.csv_row()],
                        trailer: Vec::new(),
                    },
                )?;
            } else {
                let bs = band_set(&sol)?;
                let harmonic_measures = if bs.bands.is_empty() {
                    Vec::new()
                } else {
                    bs.harmonic_measures()?
                };
                let out = BandsOut {
                    n: sol.n,
                    d_n: sol.d_n,
                    r: sol.r,
                    gap_zeros: crate::bands::gap_zeros(&sol, &prob.set)?,
                    harmonic_measures,
                    band_set: bs,
                    norm_identity: norm_identity(&sol),
                };
                emit(common, Artifact::Json(to_json(&out)?))?;
            }
        }
        Command::WidomSweep { n_max, eps } => {
            let prob = load_problem(common)?;
            let opts = SweepOptions {
                solve: solve_options(common)?,
                eps: *eps,
                ..SweepOptions::default()
            };
            let res = widom_sweep(&prob, *n_max, &opts)?;
            let series = res
                .entries
                .iter()
                .map(|e| SweepRow {
                    n: e.n,
                    d_n: e.record.as_ref().map(|r| r.d_n),
                    r: e.record.as_ref().map(|r| r.r),
                    w_n: e.w_n,
                    is_near_return: e.near_return,
                    lattice_distance: e.lattice_distance,
                    error: e.error.clone(),
                })
                .collect();
            let out = SweepOut {
                omega: res.omega.clone(),
                near_returns: res.near_returns.clone(),
                summary: res.summary,
                near_return_check: res.near_return_check,
                constant_check: res.constant_check,
                failures: res.failures,
                series,
            };
            if common.format == Some(Format::Json) {
                emit(common, Artifact::Json(to_json(&out)?))?;
            } else {
                let summary = to_json(&out.summary)?;
                let compact: String = summary.lines().map(str::trim).collect::<Vec<_>>().join(" ");
                emit(
                    common,
                    Artifact::Csv {
                        table: "widom-sweep",
                        header: res.csv_header(0),
                        rows: res.csv_rows(),
                        trailer: vec![format!("summary {compact}")],
                    },
                )?;
            }
            if res.failures > 0 {
                return Err(Error::numerical(format!("{} of {n_max} solves failed", res.failures)));
            }
        }
        Command::Orbit { n_max, eps } => {
            no_csv(common.format, "orbit")?;
            let prob = load_problem(common)?;
            let green = potential::equilibrium(&prob.set)?;
            let od = orbit_data(&green, *n_max, *eps)?;
            let out = OrbitOut {
                n_max: *n_max,
                eps: *eps,
                omega: od.omega,
                returns: od.returns,
            };
            emit(common, Artifact::Json(to_json(&out)?))?;
        }
        Command::Verify { suite, n_max } => {
            no_csv(common.format, "verify")?;
            let suite = match suite {
                SuiteArg::Quick => Suite::Quick,
                SuiteArg::Full => Suite::Full,
            };
            let instances = if common.set.is_some() {
                vec![Instance {
                    name: "user".into(),
                    problem: load_problem(common)?,
                    n_max: n_max.unwrap_or(8),
                }]
            } else {
                suite_instances(suite)?
            };
            if common.grid < 2 {
                return Err(Error::invalid("--grid must be at least 2"));
            }
            let opts = VerifyOptions {
                solve: solve_options(common)?,
                grid: common.grid,
                ..VerifyOptions::default()
            };
            let rep = run_verify(suite, &instances, &opts)?;
            emit(common, Artifact::Json(to_json(&rep)?))?;
            if !rep.pass {
                log::error!("verify: {} failing checks", rep.failures);
                return Ok(3);
            }
        }
        Command::Examples => {
            let rep = run_examples(&solve_options(common)?)?;
            if common.format == Some(Format::Csv) {
                let cell = |x: f64| crate::output::csv_cell(Some(x));
                let rows = rep
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.name.clone(),
                            r.n.to_string(),
                            cell(r.x0),
                            cell(r.r),
                            cell(r.r_expected),
                            cell(r.r_defect),
                            cell(r.shape_defect),
                            r.d_n.to_string(),
                            r.d_expected.to_string(),
                            r.pass.to_string(),
                        ]
                    })
                    .collect();
                let header = [
                    "name", "n", "x0", "r", "r_expected", "r_defect", "shape_defect", "d_n", "d_expected", "pass",
                ];
                emit(
                    common,
                    Artifact::Csv {
                        table: "examples",
                        header: header.iter().map(|s| s.to_string()).collect(),
                        rows,
                        trailer: Vec::new(),
                    },
                )?;
            } else {
                emit(common, Artifact::Json(to_json(&rep)?))?;
            }
            if !rep.all_pass {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

/// Message printed on standard error for a failed run. Numerical failures
/// carry their diagnostic as JSON.
pub fn error_report(e: &Error) -> String {
    let kind = match e {
        Error::InvalidInput(_) => "invalid_input",
        Error::Numerical { .. } => "numerical",
        Error::Invariant(_) => "invariant",
    };
    let diagnostic = match e {
        Error::Numerical { diagnostic, .. } => diagnostic.clone(),
        _ => None,
    };
    let v = serde_json::json!({
        "error": kind,
        "message": e.to_string(),
        "diagnostic": diagnostic,
    });
    serde_json::to_string(&v).expect("error report serializes")
}
