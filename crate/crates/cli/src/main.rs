//! Command-line front end: entropy evaluation, estimation on user data,
//! risk and PRI tables, confidence intervals and coverage, oracle
//! checks, and figure-data emission.
//!
//! This binary is a thin adapter over the `tsentropy` library: it parses
//! flags, validates them against the configuration rules, and formats
//! results; no numeric logic lives here.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tsentropy::error::Error;
use tsentropy::estimators::{confidence_interval, BoxBound, IgPrior, Method};
use tsentropy::model::{
    read_sample_csv, summarize, tsallis_joint, EntropicConfig, PopulationParams,
};
use tsentropy::oracle::{comparison_table, QuadratureSpec};
use tsentropy::sim::{
    ci_coverage, export_table, figure_data, large_sample_grid, mc_risk, run_grid,
    small_sample_grid, FigureKind, TableFormat,
};

#[derive(Parser)]
#[command(
    name = "tsentropy",
    version,
    about = "Tsallis entropy of shifted-exponential populations: estimators, risk tables, coverage and oracle checks",
    after_help = "Exit codes: 0 success, 1 runtime error, 2 usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Mle,
    Baee,
    Stein,
    BzFinite,
    BzSmooth,
    Bayes,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TablePreset {
    /// Small-sample PRI grid: n in {4, 6, 8}, 108 cells.
    Table1,
    /// Large-sample PRI grid: n in {10, 15, 20, 30}, 144 cells.
    Table2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigPreset {
    /// PRI of the smooth Brewster-Zidek estimator over a q grid.
    Fig1,
    /// Per-sample losses of BAEE/Stein/Brewster-Zidek at n = 4.
    Fig3,
    /// Per-sample losses of BAEE/Stein/Brewster-Zidek at n = 8.
    Fig4,
    /// PRI of both improved estimators as n runs from 2 to 50.
    Fig5,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Joint Tsallis entropy of k exponential populations at scale sigma.
    Entropy {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the scale function from a CSV sample (one population per row).
    Estimate {
        /// CSV file: k rows, n comma-separated observations each.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        q: f64,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Prior scale (bayes only; no default on purpose).
        #[arg(long)]
        alpha: Option<f64>,
        /// Prior shape (bayes only; no default on purpose).
        #[arg(long)]
        beta: Option<f64>,
        /// Comma-separated box bounds (bz-finite only).
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo risk of each estimator for one configuration.
    RiskTable {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Comma-separated location parameters (k values).
        #[arg(long)]
        u: String,
        #[arg(long = "M", default_value_t = 100_000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the Bayes estimator with this prior scale.
        #[arg(long)]
        alpha: Option<f64>,
        /// Include the Bayes estimator with this prior shape.
        #[arg(long)]
        beta: Option<f64>,
        /// Include the finite-box Brewster-Zidek estimator with these bounds.
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// PRI table over a preset experiment grid.
    PriTable {
        #[arg(long, value_enum)]
        preset: TablePreset,
        #[arg(long = "M", default_value_t = 100_000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Confidence interval for the scale function from a CSV sample.
    Ci {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        q: f64,
        /// Significance level alpha; the interval has confidence 1 - alpha.
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical coverage of the confidence interval by simulation.
    CiCoverage {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Comma-separated location parameters (k values).
        #[arg(long)]
        u: String,
        /// Significance level alpha.
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long = "M", default_value_t = 50_000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare every closed form against the quadrature oracle.
    OracleCheck {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the data series behind the comparison figures.
    PlotData {
        #[arg(long, value_enum)]
        preset: FigPreset,
        #[arg(long = "M", default_value_t = 10_000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                // Bad user input: invalid parameter combinations or
                // unparseable data files.
                Error::Domain(_) | Error::MalformedCsv(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

/// Writes `body` to `--out` if given, otherwise to standard output.
fn emit(out: Option<&Path>, body: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(body.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{body}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}

fn parse_f64_list(input: &str, what: &str) -> Result<Vec<f64>, Error> {
    input
        .split(',')
        .map(|field| {
            field.trim().parse::<f64>().map_err(|_| {
                Error::Domain(format!(
                    "{what}: cannot parse {:?} as a number",
                    field.trim()
                ))
            })
        })
        .collect()
}

fn parse_locations(input: &str, k: usize) -> Result<Vec<f64>, Error> {
    let u = parse_f64_list(input, "--u")?;
    if u.len() != k {
        return Err(Error::Domain(format!(
            "--u must list exactly k = {k} values, got {}",
            u.len()
        )));
    }
    Ok(u)
}

fn build_method(
    method: MethodArg,
    alpha: Option<f64>,
    beta: Option<f64>,
    r: Option<&str>,
    k: usize,
) -> Result<Method, Error> {
    if method != MethodArg::Bayes && (alpha.is_some() || beta.is_some()) {
        return Err(Error::Domain(
            "--alpha/--beta only apply to --method bayes".into(),
        ));
    }
    if method != MethodArg::BzFinite && r.is_some() {
        return Err(Error::Domain(
            "--r only applies to --method bz-finite".into(),
        ));
    }
    Ok(match method {
        MethodArg::Mle => Method::Mle,
        MethodArg::Baee => Method::Baee,
        MethodArg::Stein => Method::Stein,
        MethodArg::BzSmooth => Method::BzSmooth,
        MethodArg::BzFinite => {
            let r = r.ok_or_else(|| {
                Error::Domain("--method bz-finite requires --r (comma-separated bounds)".into())
            })?;
            let bounds = parse_f64_list(r, "--r")?;
            if bounds.len() != k {
                return Err(Error::Domain(format!(
                    "--r must list exactly k = {k} bounds, got {}",
                    bounds.len()
                )));
            }
            Method::BzFinite(BoxBound::new(bounds)?)
        }
        MethodArg::Bayes => {
            let (alpha, beta) = match (alpha, beta) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Domain(
                        "--method bayes requires both --alpha and --beta (a silent default \
                         prior would be a statistical decision this tool must not make)"
                            .into(),
                    ))
                }
            };
            Method::Bayes(IgPrior::new(alpha, beta)?)
        }
    })
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Entropy { k, q, sigma, out } => {
            let s = tsallis_joint(k, q, sigma)?;
            emit(out.as_deref(), &format!("{s}\n"))
        }

        Command::Estimate {
            data,
            q,
            method,
            alpha,
            beta,
            r,
            out,
        } => {
            let sample = read_sample_csv(BufReader::new(File::open(&data)?))?;
            let cfg = EntropicConfig::new(sample.k(), sample.n(), q)?;
            let method = build_method(method, alpha, beta, r.as_deref(), cfg.k())?;
            let stats = summarize(&sample)?;
            let est = method.estimate(&stats, &cfg)?;
            let body = format!(
                "method,value,multiplier,t\n{},{},{},{}\n",
                est.kind,
                est.value,
                est.multiplier,
                stats.t()
            );
            emit(out.as_deref(), &body)
        }

        Command::RiskTable {
            k,
            n,
            q,
            sigma,
            u,
            m,
            seed,
            alpha,
            beta,
            r,
            out,
        } => {
            let cfg = EntropicConfig::new(k, n, q)?;
            let params = PopulationParams::new(parse_locations(&u, k)?, sigma)?;
            let mut methods = vec![Method::Mle, Method::Baee, Method::Stein, Method::BzSmooth];
            if let Some(r) = r.as_deref() {
                let bounds = parse_f64_list(r, "--r")?;
                if bounds.len() != k {
                    return Err(Error::Domain(format!(
                        "--r must list exactly k = {k} bounds, got {}",
                        bounds.len()
                    )));
                }
                methods.push(Method::BzFinite(BoxBound::new(bounds)?));
            }
            match (alpha, beta) {
                (Some(a), Some(b)) => methods.push(Method::Bayes(IgPrior::new(a, b)?)),
                (None, None) => {}
                _ => {
                    return Err(Error::Domain(
                        "the Bayes row requires both --alpha and --beta".into(),
                    ))
                }
            }
            let mut body = String::from("estimator,risk,std_error,M,seed\n");
            for method in &methods {
                let report = mc_risk(&cfg, &params, method, m, seed)?;
                body.push_str(&format!(
                    "{},{},{},{},{}\n",
                    report.kind,
                    report.risk_mean,
                    report.std_error,
                    report.replications,
                    report.seed
                ));
            }
            emit(out.as_deref(), &body)
        }

        Command::PriTable {
            preset,
            m,
            seed,
            format,
            out,
        } => {
            let grid = match preset {
                TablePreset::Table1 => small_sample_grid(m, seed)?,
                TablePreset::Table2 => large_sample_grid(m, seed)?,
            };
            let cells = run_grid(&grid)?;
            let mut buf = Vec::new();
            let fmt = match format {
                FormatArg::Csv => TableFormat::Csv,
                FormatArg::Json => TableFormat::Json,
            };
            export_table(&cells, fmt, &mut buf)?;
            emit(
                out.as_deref(),
                std::str::from_utf8(&buf).expect("export is UTF-8"),
            )
        }

        Command::Ci {
            data,
            q,
            level,
            out,
        } => {
            let sample = read_sample_csv(BufReader::new(File::open(&data)?))?;
            let cfg = EntropicConfig::new(sample.k(), sample.n(), q)?;
            let stats = summarize(&sample)?;
            let (lo, hi) = confidence_interval(&stats, &cfg, level)?;
            emit(out.as_deref(), &format!("lower,upper\n{lo},{hi}\n"))
        }

        Command::CiCoverage {
            k,
            n,
            q,
            sigma,
            u,
            level,
            m,
            seed,
            out,
        } => {
            let cfg = EntropicConfig::new(k, n, q)?;
            let params = PopulationParams::new(parse_locations(&u, k)?, sigma)?;
            let coverage = ci_coverage(&cfg, &params, level, m, seed)?;
            emit(out.as_deref(), &format!("{coverage}\n"))
        }

        Command::OracleCheck { out } => {
            let rows = comparison_table(1e-8, &QuadratureSpec::default())?;
            let mut body =
                String::from("quantity,k,n,q,detail,closed_form,oracle,abs_gap,rel_gap,pass\n");
            let mut failures = 0usize;
            for row in &rows {
                if !row.pass {
                    failures += 1;
                }
                body.push_str(&format!(
                    "{},{},{},{},{},{:.15e},{:.15e},{:.3e},{:.3e},{}\n",
                    row.quantity,
                    row.k,
                    row.n,
                    row.q,
                    row.detail,
                    row.closed_form,
                    row.oracle,
                    row.abs_gap,
                    row.rel_gap,
                    row.pass
                ));
            }
            emit(out.as_deref(), &body)?;
            if failures > 0 {
                return Err(Error::Convergence(format!(
                    "{failures} of {} oracle comparisons failed",
                    rows.len()
                )));
            }
            Ok(())
        }

        Command::PlotData {
            preset,
            m,
            seed,
            out,
        } => {
            let kind = match preset {
                FigPreset::Fig1 => FigureKind::pri_vs_q_preset(),
                FigPreset::Fig3 => FigureKind::risk_per_sample_preset(4),
                FigPreset::Fig4 => FigureKind::risk_per_sample_preset(8),
                FigPreset::Fig5 => FigureKind::pri_vs_n_preset(),
            };
            let table = figure_data(&kind, m, seed)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(
                out.as_deref(),
                std::str::from_utf8(&buf).expect("export is UTF-8"),
            )
        }
    }
}
