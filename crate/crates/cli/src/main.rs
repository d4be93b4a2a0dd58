//! `lancaster-lab`: build Lancaster sequences, run Gibbs chains, verify
//! moment representations and scan triple-product kernels.

mod commands;
mod params;
mod specs;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use params::{CliError, CliResult, Params, EXIT_VALIDATION};

#[derive(Parser, Debug)]
#[command(name = "lancaster-lab", version, about)]
struct Cli {
    /// JSON file whose keys override the command-line parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report argument parsing errors as JSON as well.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

/// Distribution and family parameters shared by all subcommands.
#[derive(Args, Serialize, Debug, Default)]
struct ModelArgs {
    /// Sequence family (build, verify).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    /// Conjugate model (chain, spectrum).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    /// Measure (scan, quadrature-dump).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    measure: Option<String>,
    /// Common margin of the geometric and explicit families.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<String>,
    /// Natural exponential family of the Eagleson construction.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    nef: Option<String>,
    /// Variant of the geometric-cross family.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    /// Truncation degree.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    truncation: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
    /// Prior location of a conjugate model, or the kernel normalization point.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    shape: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<f64>,
    /// Explicit sequence ρ_0, ρ_1, ... (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    rho: Vec<f64>,
}

#[derive(Args, Serialize, Debug)]
struct ChainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<u64>,
    /// Degree of the autocorrelation diagnostic.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_lag: Option<u64>,
    /// CSV file for the trace; defaults to the --out path with a .csv extension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<String>,
}

#[derive(Args, Serialize, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// C (margins on the line) or D (margins on a half-line); inferred by default.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    case: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<u64>,
}

#[derive(Args, Serialize, Debug)]
struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// partial or filtered.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    summation: Option<String>,
    /// Grid points per axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    /// CSV file for every scanned cell.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

#[derive(Args, Serialize, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<u64>,
    /// Grid size of the eigenfunction check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<u64>,
}

#[derive(Args, Serialize, Debug)]
struct QuadratureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a Lancaster sequence and its bivariate law.
    Build(ModelArgs),
    /// Run the x-marginal Gibbs chain of a conjugate model.
    Chain(ChainArgs),
    /// Test whether a sequence is a moment sequence of the right kind.
    Verify(VerifyArgs),
    /// Scan a triple-product kernel for negative values.
    Scan(ScanArgs),
    /// Check the eigenfunctions of a Gibbs transition operator.
    Spectrum(SpectrumArgs),
    /// Print recurrence coefficients and a Gauss rule.
    QuadratureDump(QuadratureArgs),
}

fn to_map<T: Serialize>(args: &T, seed: Option<u64>) -> Value {
    let mut v = serde_json::to_value(args).expect("argument structs serialize");
    if let (Some(s), Value::Object(m)) = (seed, &mut v) {
        m.insert("seed".into(), s.into());
    }
    v
}

fn read_config(path: &PathBuf) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<_> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let config = cli.config.as_ref().map(read_config).transpose()?;
    let cfg = config.as_ref();
    let seed = cli.seed;
    let out = match cli.command {
        Command::Build(a) => commands::build(Params::merge("build", to_map(&a, seed), cfg)?)?,
        Command::Chain(a) => commands::chain(Params::merge("chain", to_map(&a, seed), cfg)?, cli.out.as_deref())?,
        Command::Verify(a) => commands::verify(Params::merge("verify", to_map(&a, seed), cfg)?)?,
        Command::Scan(a) => commands::scan(Params::merge("scan", to_map(&a, seed), cfg)?)?,
        Command::Spectrum(a) => commands::spectrum(Params::merge("spectrum", to_map(&a, seed), cfg)?)?,
        Command::QuadratureDump(a) => {
            commands::quadrature_dump(Params::merge("quadrature-dump", to_map(&a, seed), cfg)?)?
        }
    };
    let text = serde_json::to_string_pretty(&sorted(out)).expect("json output") + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if json_errors && e.use_stderr() {
                let err = CliError {
                    code: EXIT_VALIDATION,
                    kind: "usage",
                    field: None,
                    message: e.to_string().trim().to_string(),
                };
                eprintln!("{}", err.to_json());
                return ExitCode::from(EXIT_VALIDATION as u8);
            }
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code as u8)
        }
    }
}
