//! `pag`: command-line front end for the power allocation game solver.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pag_core::exact::{enumerate_classes, EnumerationOptions, DEFAULT_CAP};
use pag_core::report::{EnumerationReport, ReportDocument, SimulationReport};
use pag_core::scenario::{parse_scenario, randomize_scenario, Scenario};
use pag_core::sim::{run_all, summarize, SimConfig, UpdateMode, DEFAULT_LATTICE, DEFAULT_ROUNDS};
use pag_core::{parse_rational, PagError};

/// Environment variable overriding the worker thread count.
const THREADS_VAR: &str = "PAG_THREADS";

const DEFAULT_Q: usize = 1000;

#[derive(Parser)]
#[command(
    name = "pag",
    version,
    about = "Equilibria of the power allocation game on signed networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Async,
    Sync,
}

impl From<Mode> for UpdateMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Async => UpdateMode::Asynchronous,
            Mode::Sync => UpdateMode::Synchronous,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scenario and check every preference order against the axioms.
    Validate { scenario: PathBuf },
    /// Enumerate equilibrium classes exactly.
    Enumerate {
        scenario: PathBuf,
        /// Largest number of countries to accept.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Monte Carlo samples per class volume (0 skips volumes).
        #[arg(long, default_value_t = 0)]
        volume_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run best-response dynamics from sampled starting allocations.
    Simulate {
        scenario: PathBuf,
        /// Number of sampled starting matrices.
        #[arg(long)]
        q: Option<usize>,
        /// Maximum rounds per process.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write a scenario with random relations.
    Randomize {
        #[arg(long)]
        n: usize,
        /// File holding the power values, separated by whitespace or commas.
        #[arg(long)]
        power: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-emit a JSON report document.
    Report {
        document: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] PagError),
    #[error("{0}")]
    Axioms(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Axioms(_) => 5,
            CliError::Core(PagError::InstanceTooLarge { .. }) => 6,
            CliError::Core(
                PagError::Parse { .. }
                | PagError::InvalidScenario(_)
                | PagError::InvalidGraph(_)
                | PagError::InvalidOrder { .. }
                | PagError::InvalidConfig(_)
                | PagError::CountryOutOfRange { .. }
                | PagError::Report(_),
            ) => 4,
            CliError::Core(_) => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(doc: &ReportDocument, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => doc.to_json()?,
        Format::Csv => doc.to_csv()?,
    })
}

/// Parses the scenario, prints normalization warnings and rejects orders
/// that break the preference axioms.
fn load(path: &Path) -> Result<Scenario, CliError> {
    let scenario = parse_scenario(&read(path)?)?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    let violations = scenario.axiom_violations()?;
    if !violations.is_empty() {
        let mut message = String::from("preference axioms violated");
        for (i, list) in &violations {
            for v in list {
                message.push_str(&format!("\n  country {}: {v}", i + 1));
            }
        }
        return Err(CliError::Axioms(message));
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { scenario } => {
            let s = load(&scenario)?;
            let source = if s.orders.is_some() {
                "explicit orders"
            } else {
                "utility-induced orders"
            };
            println!("ok: {} countries, {} relations, {source}", s.n(), s.graph.edge_count());
        }
        Command::Enumerate {
            scenario,
            cap,
            volume_samples,
            seed,
            format,
            output,
        } => {
            let s = load(&scenario)?;
            let options = EnumerationOptions {
                cap,
                volume_samples,
                seed,
            };
            let classes = enumerate_classes(&s.graph, &s.preference()?, &options)?;
            let mut doc = ReportDocument::new(&s);
            doc.enumeration = Some(EnumerationReport::new(&s, &options, &classes));
            emit(&render(&doc, format)?, output.as_deref())?;
        }
        Command::Simulate {
            scenario,
            q,
            rounds,
            mode,
            seed,
            format,
            output,
        } => {
            let s = load(&scenario)?;
            let config = SimConfig {
                q: q.or(s.sim.q).unwrap_or(DEFAULT_Q),
                rounds: rounds.or(s.sim.rounds).unwrap_or(DEFAULT_ROUNDS),
                mode: mode.map(UpdateMode::from).or(s.sim.mode).unwrap_or_default(),
                seed: seed.or(s.sim.seed).unwrap_or(0),
                lattice: DEFAULT_LATTICE,
            };
            let results = run_all(&s.graph, &s.preference()?, &config)?;
            let mut doc = ReportDocument::new(&s);
            doc.simulation = Some(SimulationReport {
                summary: summarize(&results)?,
                config,
            });
            emit(&render(&doc, format)?, output.as_deref())?;
        }
        Command::Randomize { n, power, seed, output } => {
            let text = read(&power)?;
            let values = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    parse_rational(t).ok_or_else(|| PagError::Parse {
                        line: 1,
                        message: format!("'{t}' is not a number"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let s = randomize_scenario(n, &values, seed)?;
            emit(&s.to_text(), output.as_deref())?;
        }
        Command::Report {
            document,
            format,
            output,
        } => {
            let doc = ReportDocument::from_json(&read(&document)?)?;
            emit(&render(&doc, format)?, output.as_deref())?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
