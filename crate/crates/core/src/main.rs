use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdsim::cli::{cmd_model, cmd_oracle, cmd_sweep, cmd_tomo, Format, Outcome, RunConfig};

#[derive(Parser)]
#[command(name = "qdsim", version, about = "Quantum-dot entangled-pair source: model, oracle check, sweeps and tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted state and entanglement metrics.
    Model(Common),
    /// Compare closed-form matrices with the second-quantization oracle.
    Oracle(Common),
    /// Metrics over a grid of `axis` entries (CSV by default).
    Sweep(Common),
    /// Simulate tomography counts and reconstruct by maximum likelihood.
    Tomo(Common),
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config `seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QDSIM_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("QDSIM_THREADS=`{v}` is not a non-negative integer"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn run(cli: Cli) -> qdsim::Result<(Outcome, Option<PathBuf>)> {
    let (common, default_format): (&Common, Format) = match &cli.command {
        Command::Sweep(c) => (c, Format::Csv),
        Command::Model(c) | Command::Oracle(c) | Command::Tomo(c) => (c, Format::Json),
    };
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::parse("")?,
    };
    if let Some(seed) = common.seed {
        cfg.tomo.seed = seed;
    }
    let format = common.format.unwrap_or(default_format);
    let outcome = match cli.command {
        Command::Model(_) => cmd_model(&cfg, format)?,
        Command::Oracle(_) => cmd_oracle(&cfg, format)?,
        Command::Sweep(_) => cmd_sweep(&cfg, format)?,
        Command::Tomo(_) => cmd_tomo(&cfg, format)?,
    };
    Ok((outcome, common.out.clone()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("qdsim: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok((outcome, out)) => {
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, &outcome.text) {
                    eprintln!("qdsim: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", outcome.text);
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("qdsim: validation failed");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("qdsim: {e}");
            ExitCode::from(2)
        }
    }
}
