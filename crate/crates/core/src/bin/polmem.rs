use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polmem::experiment::{
    audit_run_dir, render_plots, run_tomography_on_counts, selfcheck_passed, Experiment,
    ExperimentConfig, RunReport,
};
use polmem::jones::StateLabel;
use polmem::tomography::CountRecord;
use polmem::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Polarization-qubit quantum memory simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV, count and plot files.
    #[arg(long, global = true, default_value = "polmem-out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,
    /// Override a config value, e.g. `--set arrangement.misalignment_deg=2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Optical depth against linear input polarization.
    DepthSweep,
    /// Storage efficiency against linear input polarization.
    EfficiencySweep,
    /// Intensity and phase along the crystal stack.
    Profile,
    /// Store, retrieve and reconstruct the configured states.
    Tomography {
        /// Analyze measured counts instead of simulating, as LABEL=PATH.
        #[arg(long, value_name = "LABEL=PATH")]
        counts: Vec<String>,
    },
    /// Heralded auto-correlation bounds from cross-correlations.
    Stats,
    /// Numerical health checks.
    Selfcheck,
    /// Check that all CSV files in the output directory share one config hash.
    Audit,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    match &cli.config {
        Some(path) => ExperimentConfig::load(path, &overrides),
        None => ExperimentConfig::from_toml_with_overrides("", &overrides),
    }
}

fn read_counts(spec: &str) -> Result<(StateLabel, CountRecord)> {
    let (label, path) = spec.split_once('=').ok_or_else(|| Error::Config {
        location: Some("--counts".into()),
        message: format!("expected LABEL=PATH, got '{spec}'"),
    })?;
    let label: StateLabel = label.parse()?;
    let text = std::fs::read_to_string(Path::new(path))?;
    Ok((label, text.parse()?))
}

fn write(report: &RunReport, cli: &Cli) -> Result<()> {
    let mut report = report.clone();
    if cli.plot {
        report.attachments.extend(render_plots(&report));
    }
    for path in report.write_to(&cli.out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let experiment = match &cli.command {
        Command::Audit => {
            match audit_run_dir(&cli.out) {
                Ok(Some(hash)) => println!(
                    "all CSV files in {} carry config hash {hash}",
                    cli.out.display()
                ),
                Ok(None) => println!("no CSV files in {}", cli.out.display()),
                Err(Error::InvalidInput(msg)) => {
                    eprintln!("audit failed: {msg}");
                    return Ok(false);
                }
                Err(e) => return Err(e),
            }
            return Ok(true);
        }
        Command::DepthSweep => Experiment::DepthSweep,
        Command::EfficiencySweep => Experiment::EfficiencySweep,
        Command::Profile => Experiment::Profile,
        Command::Tomography { .. } => Experiment::Tomography,
        Command::Stats => Experiment::Stats,
        Command::Selfcheck => Experiment::Selfcheck,
    };
    let config = load_config(cli)?;
    let report = match &cli.command {
        Command::Tomography { counts } if !counts.is_empty() => {
            let records = counts
                .iter()
                .map(|c| read_counts(c))
                .collect::<Result<Vec<_>>>()?;
            run_tomography_on_counts(&config, &records)?
        }
        _ => experiment.run(&config)?,
    };
    for line in &report.summary {
        println!("{line}");
    }
    write(&report, cli)?;
    Ok(experiment != Experiment::Selfcheck || selfcheck_passed(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
