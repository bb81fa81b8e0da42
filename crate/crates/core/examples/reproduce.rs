//! Run every experiment from the shipped configuration and write the CSV
//! files and plots, like the `polmem` binary does one subcommand at a time.
//!
//! ```text
//! cargo run --release --example reproduce -- [config.toml] [out-dir]
//! ```

use std::path::PathBuf;

use polmem::experiment::{audit_run_dir, render_plots, Experiment, ExperimentConfig};

fn main() -> polmem::Result<()> {
    let mut args = std::env::args().skip(1);
    let config_path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/configs/reference.toml"
        ))
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("polmem-out"));

    let config = ExperimentConfig::load(&config_path, &[])?;
    println!(
        "config {} (hash {}, seed {})",
        config_path.display(),
        config.hash(),
        config.seed
    );
    for experiment in Experiment::ALL {
        let mut report = experiment.run(&config)?;
        println!("\n[{}]", experiment.name());
        for line in &report.summary {
            println!("  {line}");
        }
        report.attachments.extend(render_plots(&report));
        report.write_to(&out)?;
    }
    if let Some(hash) = audit_run_dir(&out)? {
        println!("\nall tables in {} carry config hash {hash}", out.display());
    }
    Ok(())
}
