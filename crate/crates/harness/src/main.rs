use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wbnf_harness::experiments::{
    run_boundary_sweep, run_coherence_curve, run_grid, run_localize, run_music, run_nmse_sweep,
    write_artifacts, Artifact, BoundarySweep, MusicVariant,
};
use wbnf_harness::{desk_config, load_config, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(
    name = "wbnf",
    version,
    about = "Wideband near-field localization experiments"
)]
struct Cli {
    /// TOML experiment configuration; the built-in desk configuration is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature coherence versus zeta and the zeta threshold table.
    CoherenceCurve,
    /// Export the hybrid angle-distance grid.
    Grid,
    /// Sparse recovery of the configured targets.
    Localize,
    /// MUSIC benchmark spectrum and peaks.
    Music {
        #[arg(long, value_enum)]
        variant: Variant,
    },
    /// Regime boundaries over bandwidth or aperture.
    Boundary {
        #[arg(long, value_enum)]
        sweep: Sweep,
    },
    /// Monte-Carlo NMSE versus distance for all three methods.
    NmseSweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Nbnf,
    Wbff,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Bandwidth,
    Aperture,
}

fn run(cli: &Cli) -> Result<Vec<Artifact>, HarnessError> {
    let mut cfg: ExperimentConfig = match &cli.config {
        Some(path) => load_config(path)?,
        None => desk_config(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let artifacts = match cli.command {
        Command::CoherenceCurve => run_coherence_curve(&cfg)?,
        Command::Grid => run_grid(&cfg)?,
        Command::Localize => {
            let out = run_localize(&cfg)?;
            eprintln!("localize: nmse = {:e}", out.score.nmse);
            out.artifacts
        }
        Command::Music { variant } => {
            let v = match variant {
                Variant::Nbnf => MusicVariant::Nbnf,
                Variant::Wbff => MusicVariant::Wbff,
            };
            run_music(&cfg, v)?.artifacts
        }
        Command::Boundary { sweep } => {
            let s = match sweep {
                Sweep::Bandwidth => BoundarySweep::Bandwidth,
                Sweep::Aperture => BoundarySweep::Aperture,
            };
            let out = run_boundary_sweep(&cfg, s)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            out.artifacts
        }
        Command::NmseSweep => run_nmse_sweep(&cfg)?.artifacts,
    };
    for path in write_artifacts(&cli.out, &cfg, &artifacts)? {
        println!("{}", path.display());
    }
    Ok(artifacts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let HarnessError::Core(wbnf_core::Error::CapacityExceeded { .. }) = e {
                eprintln!(
                    "hint: reduce array.n_elements or wideband.n_subcarriers, see configs/desk.toml"
                );
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
