mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mudecay_core::asymptotics::DecayChannel;
use mudecay_core::ModelConfig;

use crate::error::{CliError, CliResult};
use crate::output::Outputs;

#[derive(Parser)]
#[command(
    name = "mudecay",
    version,
    about = "Finite Fock-space model of muon decay in a magnetic field"
)]
struct Cli {
    /// TOML configuration file; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed from the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CAR, Clifford and spinor normalisation suites
    Selftest,
    /// Kernel integrability and derivative conditions
    CheckKernels,
    /// Bound constants, coupling threshold and relative-bound sampling
    Bounds,
    /// Assemble H and export it as triplets
    Assemble,
    /// Full spectrum by charge sector
    Spectrum,
    /// Ground-state energy, gap and vacuum overlap
    GroundState,
    /// Commutators of the interaction with smeared fields
    Commutators,
    /// Decay of the stationary-phase integral for one channel
    DecayRate {
        #[arg(long, default_value = "electron")]
        channel: String,
        /// Use a test function whose support crosses p3 = 0
        #[arg(long)]
        negative_control: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Selftest => "selftest",
            Command::CheckKernels => "check-kernels",
            Command::Bounds => "bounds",
            Command::Assemble => "assemble",
            Command::Spectrum => "spectrum",
            Command::GroundState => "ground-state",
            Command::Commutators => "commutators",
            Command::DecayRate { .. } => "decay-rate",
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<ModelConfig> {
    let mut config = match &cli.config {
        Some(p) => ModelConfig::from_path(p)?,
        None => ModelConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    Ok(config)
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let config = load_config(cli)?;
    let mut out = Outputs::new(&cli.out, cli.command.name(), &config)?;
    let failure = match &cli.command {
        Command::Selftest => commands::selftest(&config, &mut out)?,
        Command::CheckKernels => commands::check_kernels(&config, &mut out)?,
        Command::Bounds => commands::bounds(&config, &mut out)?,
        Command::Assemble => commands::assemble(&config, &mut out)?,
        Command::Spectrum => commands::spectrum(&config, &mut out)?,
        Command::GroundState => commands::ground_state(&config, &mut out)?,
        Command::Commutators => commands::commutators(&config, &mut out)?,
        Command::DecayRate {
            channel,
            negative_control,
        } => {
            let ch: DecayChannel = channel.parse()?;
            commands::decay_rate(&config, &mut out, ch, *negative_control)?
        }
    };
    out.finish()?;
    match failure {
        Some(msg) => Err(CliError::Assertion(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mudecay {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
