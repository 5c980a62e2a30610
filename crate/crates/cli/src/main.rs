use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fct_core::harness::{self, RunConfig, SweepParameter};
use fct_core::Error;

#[derive(Parser)]
#[command(
    name = "fct",
    version,
    about = "Recurring-concept stream classification experiments",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its metrics.
    Run(RunArgs),
    /// Run one experiment per value of a parameter, in both modes.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value file; flags given on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// sea | rbf | hyperplane | file
    #[arg(long)]
    dataset: Option<String>,
    /// Delimited input for `--dataset file`.
    #[arg(long, value_name = "PATH")]
    file: Option<String>,
    /// Label flip probability.
    #[arg(long, value_name = "P")]
    noise: Option<String>,
    /// Energy threshold in (0, 1].
    #[arg(long, value_name = "E")]
    energy: Option<String>,
    /// Tie threshold for converting the best tree.
    #[arg(long, value_name = "T")]
    tau: Option<String>,
    /// Label delay in instances.
    #[arg(long, value_name = "N")]
    delay: Option<String>,
    #[arg(long = "repo-cap", value_name = "N")]
    repo_cap: Option<String>,
    #[arg(long = "adwin-delta", value_name = "D")]
    adwin_delta: Option<String>,
    #[arg(long, value_name = "S")]
    seed: Option<String>,
    /// Concept schedule, e.g. `8,7,9,9.5x25@5000`.
    #[arg(long, value_name = "SPEC")]
    segments: Option<String>,
    /// fct | cbdt
    #[arg(long)]
    mode: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    #[arg(long = "bits-per-attr", value_name = "B")]
    bits_per_attr: Option<String>,
    /// Leading instances used to fit the binarizer.
    #[arg(long = "calibration-len", value_name = "N")]
    calibration_len: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// energy | noise
    #[arg(long)]
    param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[command(flatten)]
    run: RunArgs,
}

impl RunArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 14] {
        [
            ("dataset", &self.dataset),
            ("file", &self.file),
            ("noise", &self.noise),
            ("energy", &self.energy),
            ("tau", &self.tau),
            ("delay", &self.delay),
            ("repo-cap", &self.repo_cap),
            ("adwin-delta", &self.adwin_delta),
            ("seed", &self.seed),
            ("segments", &self.segments),
            ("mode", &self.mode),
            ("out", &self.out),
            ("bits-per-attr", &self.bits_per_attr),
            ("calibration-len", &self.calibration_len),
        ]
    }

    fn to_config(&self) -> Result<RunConfig, Failure> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path).map_err(Failure::config)?;
        }
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                config.set(key, v).map_err(Failure::config)?;
            }
        }
        config.validate().map_err(Failure::config)?;
        Ok(config)
    }
}

/// An error and the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

impl Failure {
    /// Configuration problems exit with 2; unreadable config files count.
    fn config(error: Error) -> Self {
        Failure { code: 2, error }
    }

    fn runtime(error: Error) -> Self {
        let code = if matches!(error, Error::Config { .. }) {
            2
        } else {
            1
        };
        Failure { code, error }
    }
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let config = args.to_config()?;
    let report = harness::execute(&config).map_err(Failure::runtime)?;
    harness::emit_metrics(&report, &config.out).map_err(Failure::runtime)?;
    println!(
        "{} instances, overall accuracy {:.4}, {} drifts, {} spectra stored, written to {}",
        report.len(),
        report.overall_accuracy(),
        report.drifts().len(),
        report.repository_inserts(),
        config.out.display()
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let config = args.run.to_config()?;
    let param: SweepParameter = args.param.parse().map_err(Failure::config)?;
    let values = args
        .values
        .iter()
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| {
                Failure::config(Error::config("values", format!("`{v}` is not a number")))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let runs = harness::sensitivity_sweep(&config, param, &values).map_err(Failure::runtime)?;
    harness::emit_sweep(param, &runs, &config.out).map_err(Failure::runtime)?;
    for r in &runs {
        println!(
            "{}={} {}: overall accuracy {:.4}",
            param.as_str(),
            r.value,
            r.report.mode().as_str(),
            r.report.overall_accuracy()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            log::debug!("exit code {}", f.code);
            ExitCode::from(f.code)
        }
    }
}
