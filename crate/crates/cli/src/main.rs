use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use postselect::accept::max_acceptance;
use postselect::construct::{construct, is_error_minimizing, MembershipVerdict};
use postselect::examples::golden_report;
use postselect::io::{parse_measurement, parse_params, InstanceFile};
use postselect::lemmas::{check_lemma, Lemma, LemmaReport};
use postselect::metrics::{acceptance, min_postselected_error, postselected_error, MetricsReport};
use postselect::oracle::{oracle_reports, OracleConfig};
use postselect::sim::simulate;
use postselect::{Error, ProblemInstance, ThreeOutcomeMeasurement, Tolerances};

/// Minimum postselected error, error-minimizing measurements and maximum
/// acceptance for discriminating two quantum states.
#[derive(Parser)]
#[command(name = "postselect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,

    /// Override the instance's relative rank tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol_rank: Option<f64>,

    /// Override the instance's eigenvalue clustering tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol_cluster: Option<f64>,
}

#[derive(Args)]
struct InstanceArg {
    /// Problem instance (JSON).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
}

#[derive(Args)]
struct MeasurementArg {
    /// Three-outcome measurement (JSON).
    #[arg(long, value_name = "FILE")]
    measurement: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum postselected error, regime, critical prior and Thompson metric.
    Analyze {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Build the measurement described by a parameter file.
    Construct {
        #[command(flatten)]
        instance: InstanceArg,
        /// Construction parameters (JSON, tagged by "variant").
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
    },
    /// Error, acceptance and error-minimizing membership of a measurement.
    Check {
        #[command(flatten)]
        instance: InstanceArg,
        #[command(flatten)]
        measurement: MeasurementArg,
    },
    /// Largest acceptances among error-minimizing measurements.
    MaxAcceptance {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Randomized search compared against the closed forms.
    Oracle {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
    /// Monte Carlo estimate of error and acceptance.
    Simulate {
        #[command(flatten)]
        instance: InstanceArg,
        #[command(flatten)]
        measurement: MeasurementArg,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Randomized checks of the supporting matrix inequalities.
    VerifyLemmas {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Run a single lemma, e.g. MaxTraceBound.
        #[arg(long)]
        lemma: Option<String>,
    },
    /// Golden report for the worked examples.
    Examples,
}

enum Failure {
    Invalid(String),
    Undefined(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn render<T: Serialize>(value: &T, pretty: bool) -> Outcome {
    let text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) };
    let mut text = text.map_err(|e| Failure::Invalid(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn load_instance(cli: &Cli, arg: &InstanceArg) -> Result<ProblemInstance, Failure> {
    let text = read(&arg.input)?;
    let mut file: InstanceFile = serde_json::from_str(&text).map_err(Error::from)?;
    if let Some(x) = cli.tol_rank {
        file.tolerances.rank_tol = x;
    }
    if let Some(x) = cli.tol_cluster {
        file.tolerances.cluster_tol = x;
    }
    Ok(file.into_instance()?)
}

fn load_measurement(inst: &ProblemInstance, arg: &MeasurementArg) -> Result<ThreeOutcomeMeasurement, Failure> {
    Ok(parse_measurement(&read(&arg.measurement)?, Some(inst.dim()))?)
}

#[derive(Serialize)]
struct Analysis {
    #[serde(flatten)]
    metrics: MetricsReport,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct CheckReport {
    error: f64,
    e_s: f64,
    a_rho: f64,
    a_sigma: f64,
    membership: MembershipVerdict,
}

fn parse_lemma(name: &str) -> Result<Lemma, Failure> {
    Lemma::ALL
        .into_iter()
        .find(|l| format!("{l:?}").eq_ignore_ascii_case(name))
        .ok_or_else(|| Failure::Invalid(format!("unknown lemma {name:?}")))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Analyze { instance } => {
            let inst = load_instance(cli, instance)?;
            let metrics = min_postselected_error(&inst)?;
            render(&Analysis { metrics, tolerances: inst.tolerances }, cli.pretty)
        }
        Command::Construct { instance, params } => {
            let inst = load_instance(cli, instance)?;
            let p = parse_params(&read(params)?, Some(inst.dim()))?;
            render(&construct(&inst, &p)?, cli.pretty)
        }
        Command::Check { instance, measurement } => {
            let inst = load_instance(cli, instance)?;
            let m = load_measurement(&inst, measurement)?;
            let error = postselected_error(&inst, &m)
                .ok_or_else(|| Failure::Undefined("the measurement never accepts, so the error is undefined".into()))?;
            let (a_rho, a_sigma) = acceptance(&inst, &m);
            let report = CheckReport {
                error,
                e_s: min_postselected_error(&inst)?.e_s,
                a_rho,
                a_sigma,
                membership: is_error_minimizing(&inst, &m)?,
            };
            render(&report, cli.pretty)
        }
        Command::MaxAcceptance { instance } => {
            let inst = load_instance(cli, instance)?;
            render(&max_acceptance(&inst)?, cli.pretty)
        }
        Command::Oracle { instance, seed, trials } => {
            let inst = load_instance(cli, instance)?;
            let cfg = OracleConfig { trials: *trials, seed: *seed, ..OracleConfig::default() };
            render(&oracle_reports(&inst, &cfg)?, cli.pretty)
        }
        Command::Simulate { instance, measurement, n, seed } => {
            let inst = load_instance(cli, instance)?;
            let m = load_measurement(&inst, measurement)?;
            render(&simulate(&inst, &m, *n, *seed)?, cli.pretty)
        }
        Command::VerifyLemmas { dim, seed, trials, lemma } => {
            let lemmas = match lemma {
                Some(name) => vec![parse_lemma(name)?],
                None => Lemma::ALL.to_vec(),
            };
            let reports = lemmas
                .into_iter()
                .map(|l| check_lemma(l, *dim, *seed, *trials))
                .collect::<Result<Vec<LemmaReport>, Error>>()?;
            render(&reports, cli.pretty)
        }
        // Always pretty, so the output is a fixed byte string.
        Command::Examples => Ok(golden_report()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, text) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Undefined(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
