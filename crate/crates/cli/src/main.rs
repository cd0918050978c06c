use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chkp", version, about = "Wave-breaking laboratory for the generalized CH-KP equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write its artifacts and report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; must be absent or empty.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the report of a run and print it.
    Verify {
        #[arg(long)]
        run: PathBuf,
    },
    /// List built-in initial data and nonlinearities.
    Presets,
    /// Print the JSON schema of run configurations.
    Schema,
    /// Render the charts of a run as SVG.
    Plot {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<()> {
    chkp_cli::init_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let report = chkp_cli::run(&config, out.as_deref())?;
            let b = &report.breaking;
            println!(
                "stop: {} at t = {} after {} steps",
                report.stop.reason, report.stop.t_stop, report.stop.steps
            );
            println!("energy drift: {:e}", report.energy.max_rel_drift);
            println!("breaking verdict: {:?} (m0 = {}, K = {}, t* = {:?})", b.verdict, b.m0, b.k_emp, b.t_star);
        }
        Command::Verify { run } => print!("{}", chkp_cli::verify(&run)?),
        Command::Presets => print!("{}", chkp_cli::presets_listing()),
        Command::Schema => print!("{}", chkp_cli::config::JSON_SCHEMA),
        Command::Plot { run, out } => chkp_cli::plot(&run, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
