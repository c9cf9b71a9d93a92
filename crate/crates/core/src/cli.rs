//! Command-line front end. Exit codes: 0 success/accept, 1 reject or failed
//! property, 2 usage or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::construction::{
    check_parameters, run_construction, verify_certificate, Certificate, ConfigFile, ConstructionError,
    SearchStrategy, Verdict,
};
use crate::diophantine::{scan_min_form, Matrix};
use crate::oracles::{run_suite, SUITES};
use crate::rational::{format_rational, parse_rational, to_f64, Rational, RationalString};
use crate::sums::{column_spread, growth_table, write_growth_csv};

#[derive(Debug, Parser)]
#[command(name = "madcert", version, about = "Finite-range certificates for multiplicatively badly approximable matrices")]
struct Cli {
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SearchArg {
    Full,
    Dfs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the construction and write a certificate
    Construct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "dfs")]
        mode: SearchArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check a certificate from scratch
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Minimum of the form over all q with prod_plus(q) <= budget
    Scan {
        /// JSON with "matrix" (and optional "gamma"), or a certificate
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value = "1/1000000", value_parser = parse_rational_arg)]
        precision: Rational,
    },
    /// Growth table of the reciprocal sums
    Sums {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        q_list: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized oracle suites
    Oracle {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissibility report for a configuration
    Params {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        horizon: usize,
    },
}

fn parse_rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Failure {
    /// Bad input: exit 2.
    Usage(anyhow::Error),
    /// Reject or failed property: exit 1.
    Failed(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Self {
        Failure::Usage(e.into())
    }
}

type Outcome = Result<(), Failure>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    matrix: Vec<Vec<RationalString>>,
    #[serde(default)]
    gamma: Option<Vec<RationalString>>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_config(path: &Path) -> anyhow::Result<crate::construction::ConstructionConfig> {
    let file: ConfigFile =
        serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    Ok(file.into_config()?)
}

/// A matrix file, or the witness and shift of a certificate.
fn load_matrix(path: &Path) -> anyhow::Result<(Matrix, Vec<Rational>)> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("witness").is_some() {
        let cert = Certificate::from_json(&text)?;
        return Ok((cert.witness, cert.config.gamma));
    }
    let file: MatrixFile = serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?;
    let rows = file.matrix.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect();
    let matrix = Matrix::from_rows(rows).map_err(|e| anyhow!("{e}"))?;
    let gamma = match file.gamma {
        Some(g) => g.into_iter().map(|x| x.0).collect(),
        None => vec![Rational::from_integer(0.into()); matrix.rows()],
    };
    Ok((matrix, gamma))
}

fn sink(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Construct { config, depth, mode, out: path } => {
            let config = load_config(&config)?;
            let search = match mode {
                SearchArg::Full => SearchStrategy::FullFrontier,
                SearchArg::Dfs => SearchStrategy::DfsWitness,
            };
            let cert = run_construction(&config, depth, search).map_err(|e| match e {
                ConstructionError::InvalidConfig(_) | ConstructionError::InvalidC(_) => Failure::Usage(e.into()),
                _ => Failure::Failed(e.into()),
            })?;
            fs::write(&path, cert.to_json()).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "certificate written to {}", path.display()).ok();
            writeln!(out, "chain: {:?}", cert.chain).ok();
            match &cert.finite_range_bound {
                Some(b) => writeln!(out, "finite-range bound: {} (~{:.6})", format_rational(b), to_f64(b)).ok(),
                None => writeln!(out, "finite-range bound: vacuous").ok(),
            };
            Ok(())
        }
        Command::Verify { cert } => {
            let cert = Certificate::from_json(&read(&cert)?)?;
            match verify_certificate(&cert) {
                Verdict::Accept => {
                    writeln!(out, "accept").ok();
                    Ok(())
                }
                Verdict::Reject(reason) => Err(Failure::Failed(anyhow!("reject: {reason}"))),
            }
        }
        Command::Scan { matrix, budget, precision } => {
            let (a, gamma) = load_matrix(&matrix)?;
            let (lower, q) = scan_min_form(&a, &gamma, budget, &precision).map_err(|e| anyhow!("{e}"))?;
            writeln!(out, "min lower bound {} (~{:.6e}) at q = {q}", format_rational(&lower), to_f64(&lower)).ok();
            Ok(())
        }
        Command::Sums { matrix, q_list, out: path } => {
            let (l, _) = load_matrix(&matrix)?;
            let rows = growth_table(&l, &q_list).map_err(|e| Failure::Failed(e.into()))?;
            write_growth_csv(&rows, sink(&path)?).context("writing CSV")?;
            let spread: Vec<_> = rows.iter().map(|r| r.upper_column.clone()).collect();
            eprintln!("upper-column max/min = {:.4}", column_spread(&spread));
            Ok(())
        }
        Command::Oracle { suite, trials, seed, out: path } => {
            let report = run_suite(&suite, trials, seed).ok_or_else(|| anyhow!("unknown suite {suite}"))?;
            report.write_csv(sink(&path)?).context("writing CSV")?;
            let failures = report.failures();
            eprintln!("{suite}: {} instances, {failures} failures", report.rows.len());
            if failures > 0 {
                return Err(Failure::Failed(anyhow!("{failures} oracle failures")));
            }
            Ok(())
        }
        Command::Params { config, horizon } => {
            let config = load_config(&config)?;
            let report = check_parameters(&config, horizon);
            write!(out, "{report}").ok();
            let failed = report
                .results
                .iter()
                .any(|r| r.status == crate::construction::params::ConditionStatus::Fail);
            if failed {
                return Err(Failure::Failed(anyhow!("some conditions fail")));
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            e.print().ok();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: --threads: {e}");
            return 2;
        }
    }
    let mut stdout = std::io::stdout();
    match dispatch(cli, &mut stdout) {
        Ok(()) => 0,
        Err(Failure::Failed(e)) => {
            eprintln!("{e:#}");
            1
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
