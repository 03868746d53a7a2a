use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Parser, Subcommand};
use serde::Serialize;

use mpsvqe::bench::{fit_points, scaling_csv, time_chain_circuit};
use mpsvqe::dmet::{dmet_run, DmetConfig, SolverKind};
use mpsvqe::hamiltonian::{parse_fcidump, qubit_hamiltonian};
use mpsvqe::vqe::{energy_history_csv, run_vqe, MeasurementMode, VqeConfig};
use mpsvqe::Error;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_SCF: u8 = 4;
const EXIT_SOLVER: u8 = 5;
const EXIT_EMBEDDING: u8 = 6;
const EXIT_NOT_CONVERGED: u8 = 7;

/// MPS-simulated UCCSD-VQE and DMET for molecular Hamiltonians.
///
/// Exit codes: 0 success, 1 I/O, 2 invalid configuration, 3 parse error,
/// 4 SCF failure, 5 solver failure, 6 embedding failure, 7 not converged.
#[derive(Debug, Parser)]
#[command(name = "mpsvqe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads [default: available cores]
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Seed for randomized inputs (benchmark angles)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for result files
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Log more (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize a UCCSD ansatz for one integral bundle
    Vqe {
        #[arg(long)]
        config: PathBuf,
        /// direct or hadamard_test
        #[arg(long)]
        measurement_mode: Option<MeasurementMode>,
        #[arg(long)]
        max_bond: Option<usize>,
    },
    /// Single-shot DMET with chemical-potential fitting
    Dmet {
        #[arg(long)]
        config: PathBuf,
        /// fci or mps-vqe
        #[arg(long)]
        solver: Option<SolverKind>,
        #[arg(long)]
        measurement_mode: Option<MeasurementMode>,
        #[arg(long)]
        max_bond: Option<usize>,
    },
    /// Time ansatz evolution on hydrogen-chain circuits of growing size
    BenchScaling {
        /// Explicit qubit counts (multiples of 4); overrides the range
        #[arg(long, value_delimiter = ',')]
        qubits: Option<Vec<usize>>,
        #[arg(long, default_value_t = 12)]
        min_qubits: usize,
        #[arg(long, default_value_t = 60)]
        max_qubits: usize,
        #[arg(long, default_value_t = 8)]
        step: usize,
        #[arg(long, default_value_t = 64)]
        max_bond: usize,
        /// Timings per size; the fastest is kept
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
    /// Jordan-Wigner transform of an integral bundle
    Jw {
        #[arg(long)]
        bundle: PathBuf,
    },
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => EXIT_IO,
            Error::Validation(_) | Error::Argument(_) => EXIT_CONFIG,
            Error::Parse { .. } => EXIT_PARSE,
            Error::Scf { .. } => EXIT_SCF,
            Error::Embedding(_) => EXIT_EMBEDDING,
            _ => EXIT_SOLVER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("i/o error on {}: {e}", path.display()),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, Failure> {
    let text = serde_json::to_string_pretty(value).expect("results serialize");
    write(dir, name, &(text + "\n"))
}

fn workers(flag: Option<usize>, config: Option<usize>) -> Result<usize, Failure> {
    match flag.or(config) {
        Some(0) => Err(Failure {
            code: EXIT_CONFIG,
            message: "workers must be positive".into(),
        }),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

#[derive(Serialize)]
struct VqeOutput<'a> {
    config: &'a VqeConfig,
    seed: u64,
    #[serde(flatten)]
    run: mpsvqe::vqe::VqeRun,
}

fn cmd_vqe(
    cli: &Cli,
    config: &Path,
    mode: Option<MeasurementMode>,
    max_bond: Option<usize>,
) -> Result<bool, Failure> {
    let mut c = VqeConfig::load(config)?;
    if let Some(m) = mode {
        c.measurement_mode = m;
    }
    if let Some(d) = max_bond {
        c.max_bond = d;
    }
    let w = workers(cli.workers, c.workers)?;
    let start = Instant::now();
    let run = run_vqe(&c, w)?;
    let converged = run.result.converged;
    println!(
        "energy {:.12} Ha after {} iterations ({} evaluations), converged {converged}",
        run.result.energy, run.result.iterations, run.result.energy_evaluations
    );
    eprintln!("{:.2} s on {w} workers", start.elapsed().as_secs_f64());
    let csv = energy_history_csv(&run.result);
    let out = VqeOutput {
        config: &c,
        seed: cli.seed,
        run,
    };
    let p = write_json(&cli.out_dir, "vqe_result.json", &out)?;
    write(&cli.out_dir, "energy_history.csv", &csv)?;
    eprintln!("wrote {}", p.display());
    Ok(converged)
}

#[derive(Serialize)]
struct DmetOutput<'a> {
    config: &'a DmetConfig,
    seed: u64,
    #[serde(flatten)]
    state: mpsvqe::dmet::DmetState,
}

fn cmd_dmet(
    cli: &Cli,
    config: &Path,
    solver: Option<SolverKind>,
    mode: Option<MeasurementMode>,
    max_bond: Option<usize>,
) -> Result<bool, Failure> {
    let mut c = DmetConfig::load(config)?;
    if let Some(s) = solver {
        c.solver = s;
    }
    if let Some(m) = mode {
        c.vqe.measurement_mode = m;
    }
    if let Some(d) = max_bond {
        c.vqe.max_bond = d;
    }
    c.validate()?;
    let w = workers(cli.workers, c.workers)?;
    let b = parse_fcidump(&c.bundle)?;
    let fragments = c.fragments.resolve(b.n_orbitals)?;
    let start = Instant::now();
    let state = dmet_run(&b, &fragments, &c.settings(), w)?;
    println!(
        "energy {:.12} Ha, mu {:.8}, {:.8} electrons, converged {}",
        state.total_energy, state.chemical_potential, state.total_electron_count, state.converged
    );
    eprintln!("{:.2} s on {w} workers", start.elapsed().as_secs_f64());
    let converged = state.converged;
    let out = DmetOutput {
        config: &c,
        seed: cli.seed,
        state,
    };
    let p = write_json(&cli.out_dir, "dmet_result.json", &out)?;
    eprintln!("wrote {}", p.display());
    Ok(converged)
}

fn cmd_bench(cli: &Cli, sizes: Vec<usize>, max_bond: usize, repeats: usize) -> Result<bool, Failure> {
    if sizes.is_empty() || max_bond == 0 {
        return Err(Failure {
            code: EXIT_CONFIG,
            message: "need at least one size and a positive bond dimension".into(),
        });
    }
    let mut points = Vec::with_capacity(sizes.len());
    for n in sizes {
        let p = time_chain_circuit(n, max_bond, cli.seed, repeats)?;
        eprintln!("{n} qubits: {:.4} s, max bond {}", p.seconds, p.max_bond_dim);
        points.push(p);
    }
    write(&cli.out_dir, "scaling.csv", &scaling_csv(&points))?;
    match fit_points(&points) {
        Some(fit) => {
            println!(
                "seconds = {:.6e} * n_qubits + {:.6e}, R^2 = {:.6}",
                fit.slope, fit.intercept, fit.r_squared
            );
            write_json(&cli.out_dir, "scaling_fit.json", &fit)?;
        }
        None => println!("single size, no fit"),
    }
    Ok(true)
}

fn cmd_jw(cli: &Cli, bundle: &Path) -> Result<bool, Failure> {
    let b = parse_fcidump(bundle)?;
    let h = qubit_hamiltonian(&b)?;
    println!("{} terms on {} qubits", h.term_count(), h.n_qubits());
    let mut v = h.to_json();
    if let Some(obj) = v.as_object_mut() {
        obj.insert("term_count".into(), h.term_count().into());
    }
    write_json(&cli.out_dir, "pauli_sum.json", &v)?;
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Vqe {
            config,
            measurement_mode,
            max_bond,
        } => cmd_vqe(cli, config, *measurement_mode, *max_bond),
        Command::Dmet {
            config,
            solver,
            measurement_mode,
            max_bond,
        } => cmd_dmet(cli, config, *solver, *measurement_mode, *max_bond),
        Command::BenchScaling {
            qubits,
            min_qubits,
            max_qubits,
            step,
            max_bond,
            repeats,
        } => {
            let sizes = match qubits {
                Some(q) => q.clone(),
                None => (*min_qubits..=*max_qubits).step_by((*step).max(1)).collect(),
            };
            cmd_bench(cli, sizes, *max_bond, *repeats)
        }
        Command::Jw { bundle } => cmd_jw(cli, bundle),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: not converged");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
