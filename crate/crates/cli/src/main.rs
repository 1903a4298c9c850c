//! `qsysid`: identification of passive linear quantum systems from files.
//!
//! Every subcommand reads JSON, writes a JSON report on stdout, and exits
//! with 0 on success, 1 on a domain error and 2 on a usage or I/O error.
//! Errors are reported on stderr as `{"error": name, "detail": message}`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use passive_sysid::analysis::{structure_report, StructureReport};
use passive_sysid::identifiability::find_gauge;
use passive_sysid::json::{rows_to_matrix, Cx};
use passive_sysid::model::SystemFile;
use passive_sysid::network::{infection_closure, infection_identifiability_verdict, NetworkFile};
use passive_sysid::probe::{identify_pipeline, sample_response, DatasetFile, FrequencyGrid};
use passive_sysid::realization::{
    companion_realization, direct_reconstruction, reconstruct_passive, ReconstructOptions, TfFile,
};
use passive_sysid::{Error, NetworkModel, PassiveSystem, RationalTF};

#[derive(Parser)]
#[command(name = "qsysid", version, about = "Identification of passive linear quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Controllability, observability, minimality and stability of a system.
    Analyze {
        /// System file, or `-` for stdin.
        system: PathBuf,
        /// Singular-value threshold for the rank tests.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Decide whether two systems share a transfer function and recover the gauge.
    Equiv {
        sys1: PathBuf,
        sys2: PathBuf,
        /// Relative tolerance for the Markov comparison and the gauge residual.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Rebuild a passive system (and, for SISO, its canonical parameters) from a transfer function.
    Reconstruct {
        tf: PathBuf,
        /// Unitary selecting the representative of the equivalence class.
        #[arg(long)]
        gauge: Option<PathBuf>,
        /// Absolute passivity tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the infection closure on a network and report the identifiability verdict.
    Infect { network: PathBuf },
    /// Sample the frequency response of a system.
    Probe {
        system: PathBuf,
        /// Frequency grid `lo:hi:count:log|lin`; defaults to a log grid scaled to the system.
        #[arg(long)]
        freqs: Option<FrequencyGrid>,
        /// Standard deviation of the complex Gaussian measurement noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the dataset (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the plot-ready response table.
        #[arg(long, default_value = "response.csv")]
        csv: PathBuf,
    },
    /// Fit a rational transfer function to a dataset and reconstruct the system.
    Fit {
        dataset: PathBuf,
        /// Model order (number of modes).
        #[arg(long)]
        degree: usize,
        /// Also write the reconstructed system on its own, ready for `analyze`.
        #[arg(long)]
        system_out: Option<PathBuf>,
    },
}

enum Failure {
    Domain(Error),
    Usage { name: &'static str, detail: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn io_error(path: &Path, e: io::Error) -> Failure {
    Failure::Usage { name: "IoError", detail: format!("{}: {e}", path.display()) }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| io_error(path, e))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| io_error(path, e))
    }
}

/// Parses the raw file layout; schema violations are usage errors, while
/// the domain checks happen in the `TryFrom` conversion afterwards.
fn read_json<F: DeserializeOwned>(path: &Path) -> Result<F, Failure> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage {
        name: "ParseError",
        detail: format!("{}: {e}", path.display()),
    })
}

fn load<F, T>(path: &Path) -> Result<T, Failure>
where
    F: DeserializeOwned,
    T: TryFrom<F, Error = Error>,
{
    Ok(T::try_from(read_json::<F>(path)?)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Analyze { system, tol } => {
            let sys: PassiveSystem = load::<SystemFile, _>(&system)?;
            let report: StructureReport = structure_report(&sys, tol)?;
            Ok(to_json(&report))
        }
        Command::Equiv { sys1, sys2, tol } => {
            let a: PassiveSystem = load::<SystemFile, _>(&sys1)?;
            let b: PassiveSystem = load::<SystemFile, _>(&sys2)?;
            Ok(to_json(&find_gauge(&a, &b, tol)?))
        }
        Command::Reconstruct { tf, gauge, tol } => {
            let tf: RationalTF = load::<TfFile, _>(&tf)?;
            let u = match gauge {
                Some(path) => {
                    let rows: Vec<Vec<Cx>> = read_json(&path)?;
                    let ncols = rows.first().map_or(0, Vec::len);
                    Some(rows_to_matrix(&rows, ncols)?)
                }
                None => None,
            };
            let opts = ReconstructOptions { passivity_tol: tol };
            let (system, factorization) = reconstruct_passive(&companion_realization(&tf)?, u.as_ref(), opts)?;
            let canonical = if tf.is_siso() { Some(direct_reconstruction(&tf, opts)?) } else { None };
            Ok(to_json(&json!({
                "system": system,
                "canonical": canonical,
                "lyapunov_eigenvalues": factorization.lambda,
            })))
        }
        Command::Infect { network } => {
            let net: NetworkModel = load::<NetworkFile, _>(&network)?;
            let trace = infection_closure(&net);
            let verdict = infection_identifiability_verdict(&net, None)?;
            Ok(to_json(&json!({ "trace": trace, "verdict": verdict })))
        }
        Command::Probe { system, freqs, noise, seed, out, csv } => {
            let sys: PassiveSystem = load::<SystemFile, _>(&system)?;
            let grid = match freqs {
                Some(g) => g,
                None => FrequencyGrid::default_for(&sys)?,
            };
            let data = sample_response(&sys, &grid.points(), noise, seed)?;
            write_file(&csv, &data.to_csv())?;
            let text = to_json(&data);
            match out {
                Some(path) => {
                    write_file(&path, &text)?;
                    Ok(to_json(&json!({ "dataset": path, "csv": csv, "samples": data.freqs.len() })))
                }
                None => Ok(text),
            }
        }
        Command::Fit { dataset, degree, system_out } => {
            let data = load::<DatasetFile, _>(&dataset)?;
            let out = identify_pipeline(&data, degree)?;
            if let Some(path) = system_out {
                write_file(&path, &to_json(&out.system))?;
            }
            Ok(to_json(&json!({
                "system": out.system,
                "canonical": out.canonical,
                "fit": out.fit,
                "omega_eigenvalues": out.omega_eigenvalues(),
            })))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(io::stdout(), "{report}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let (code, name, detail) = match failure {
                Failure::Domain(e) => (1, e.name(), e.to_string()),
                Failure::Usage { name, detail } => (2, name, detail),
            };
            eprintln!("{}", json!({ "error": name, "detail": detail }));
            ExitCode::from(code)
        }
    }
}
