use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ifd::simulator::{
    convergence_sweep, load_config, run_direct, run_exact_reference, run_ifd, write_csv, write_json, write_report,
    ReportFormat, Scheme, Simulation, StepRecord,
};
use ifd::IfdError;

#[derive(Parser)]
#[command(
    name = "ifd",
    version,
    about = "Information field dynamics simulator for the 1-D Klein-Gordon field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scheme and write per-step records.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Convergence sweep over several step counts 2^N.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<u32>,
    },
    /// Noise-free reference trajectory from exact evolution of the posterior mean.
    CompareExact {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Data evolved by the matrix exponential of the update generator.
    Direct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn emit(records: &[StepRecord], out: Option<&Path>, format: Format) -> ifd::Result<()> {
    match out {
        Some(path) => write_report(records, path, format.into()),
        None => {
            let stdout = io::stdout().lock();
            match format {
                Format::Csv => write_csv(records, stdout),
                Format::Json => write_json(records, stdout),
            }
        }
    }
}

fn simulate(config: &Path, out: Option<&Path>, format: Format) -> ifd::Result<()> {
    let cfg = load_config(config)?;
    match cfg.scheme {
        Scheme::Iterated => emit(&run_ifd(&cfg)?, out, format),
        Scheme::Direct => emit(&run_direct(&cfg)?, out, format),
        Scheme::Both => {
            let sim = Simulation::new(&cfg)?;
            let iterated = sim.iterated_trajectory()?;
            let records = sim.records(&iterated, true)?;
            let direct = sim.direct_final()?;
            let gap = (&iterated[iterated.len() - 1] - direct).norm();
            log::info!("‖iterated − direct‖ at T = {gap:.6e}");
            emit(&records, out, format)
        }
    }
}

fn sweep(config: &Path, n_list: &[u32]) -> ifd::Result<()> {
    let cfg = load_config(config)?;
    let report = convergence_sweep(&cfg, n_list)?;
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &report).map_err(io::Error::from)?;
    writeln!(stdout)?;
    Ok(())
}

fn compare_exact(config: &Path, out: Option<&Path>, format: Format) -> ifd::Result<()> {
    let cfg = load_config(config)?;
    emit(&run_exact_reference(&cfg)?, out, format)
}

fn direct(config: &Path, out: Option<&Path>, format: Format) -> ifd::Result<()> {
    let cfg = load_config(config)?;
    emit(&run_direct(&cfg)?, out, format)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out, format } => simulate(config, out.as_deref(), *format),
        Command::Sweep { config, n_list } => sweep(config, n_list),
        Command::CompareExact { config, out, format } => compare_exact(config, out.as_deref(), *format),
        Command::Direct { config, out, format } => direct(config, out.as_deref(), *format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &IfdError) -> ExitCode {
    if e.is_numeric() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}
