use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use blockfade::StateModel;
use blockfade_cli::commands::{self, AnalyzeArgs, FitArgs, SimulateArgs, ValidateArgs};
use blockfade_cli::CliError;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "blockfade", version, about = "Pedestrian-blockage fading: analyze, fit, simulate, validate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Two,
    Four,
}

impl From<Kind> for StateModel {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Two => StateModel::TwoState,
            Kind::Four => StateModel::FourState,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Segment a trace into blockage events and per-sample state labels.
    Analyze {
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "four")]
        model: Kind,
        /// Peak attenuation a fade must reach, dB.
        #[arg(long, default_value_t = commands::DEFAULT_THRESHOLD_DB)]
        threshold_db: f64,
        /// Guard level used as the 0 dB crossing, dB (four-state only).
        #[arg(long, default_value_t = commands::DEFAULT_ZERO_CROSS_DB)]
        zero_cross_db: f64,
        /// Event CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// Label CSV to write [default: <out stem>.labels.csv].
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Fit a model file from events and labels.
    Fit {
        events: PathBuf,
        labels: PathBuf,
        /// Antenna half-power beamwidth, degrees.
        #[arg(long)]
        hpbw: f64,
        #[arg(long)]
        out: PathBuf,
        /// State model [default: inferred from the labels].
        #[arg(long, value_enum)]
        model: Option<Kind>,
        /// Upper-tail fraction left out of each fit.
        #[arg(long, default_value_t = commands::DEFAULT_TRIM)]
        trim: f64,
    },
    /// Generate a synthetic trace from a model file.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        duration_s: f64,
        #[arg(long, env = "BLOCKFADE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth event CSV to write.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Gaussian measurement noise, dB; 0 disables it.
        #[arg(long, default_value_t = commands::DEFAULT_NOISE_DB)]
        noise_db: f64,
        /// Sample interval, s [default: the model's].
        #[arg(long)]
        sample_interval_s: Option<f64>,
    },
    /// Compare a trace against a model, quantity by quantity.
    Validate {
        model: PathBuf,
        trace: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_THRESHOLD_DB)]
        threshold_db: f64,
        #[arg(long, default_value_t = commands::DEFAULT_ZERO_CROSS_DB)]
        zero_cross_db: f64,
        /// Write empirical and model CDF points for plotting.
        #[arg(long)]
        cdf_out: Option<PathBuf>,
    },
    /// Write a published reference model (7, 15 or 60 degrees).
    Golden {
        #[arg(long)]
        hpbw: f64,
        #[arg(long, value_enum, default_value = "four")]
        model: Kind,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Analyze { trace, model, threshold_db, zero_cross_db, out: events, labels } => commands::analyze(
            &AnalyzeArgs { trace, model: model.into(), threshold_db, zero_cross_db, out: events, labels },
            &mut out,
        ),
        Command::Fit { events, labels, hpbw, out: path, model, trim } => commands::fit(
            &FitArgs { events, labels, hpbw_deg: hpbw, out: path, model: model.map(Into::into), trim_fraction: trim },
            &mut out,
        )
        .map(|_| ()),
        Command::Simulate { model, duration_s, seed, out: path, truth, noise_db, sample_interval_s } => commands::simulate(
            &SimulateArgs { model, duration_s, seed, out: path, truth, noise_db, sample_interval_s },
            &mut out,
        ),
        Command::Validate { model, trace, threshold_db, zero_cross_db, cdf_out } => commands::validate(
            &ValidateArgs { model, trace, threshold_db, zero_cross_db, cdf_out },
            &mut out,
        )
        .map(|_| ()),
        Command::Golden { hpbw, model, out: path } => commands::export_golden(hpbw, model.into(), &path),
    }?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are invalid input; --help and --version succeed
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe on stdout (e.g. `| head`) is not a failure
        Err(CliError::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("blockfade: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
