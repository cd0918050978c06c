//! Runner for the CH-KP laboratory: configuration, persistence, reports and
//! plots. The `chkp` binary is a thin clap front end over these functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod report;
pub mod store;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chkp_core::model::PRESET_NAMES;
use chkp_core::presets::{InitialData, INITIAL_DATA_NAMES};

use crate::config::RunConfig;
use crate::report::RunReport;

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "CHKP_THREADS";

/// Sizes the global rayon pool from `CHKP_THREADS`, if set.
pub fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("{THREADS_ENV} = {value:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

/// Runs the configured simulation into `out` (or the config's `output.dir`),
/// then writes the report computed from the persisted files.
pub fn run(config_path: &Path, out: Option<&Path>) -> Result<RunReport> {
    let cfg = RunConfig::load(config_path)?;
    let dir: PathBuf = match (out, &cfg.output.dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => d.clone(),
        (None, None) => bail!("no output directory: pass --out or set output.dir"),
    };
    let grid = cfg.grid()?;
    let u0 = cfg.initial_data()?.build(&grid)?;
    let sim = chkp_core::stepper::run(&u0, &cfg.model_params()?, &cfg.stepper_config())?;
    store::write_run(&dir, &cfg, &sim)?;
    let report = report::build_report(&store::load_run(&dir)?)?;
    fs::write(dir.join(store::REPORT_FILE), report::to_json(&report))?;
    Ok(report)
}

/// Recomputes the report from the run directory without writing to it.
/// Fails if a stored `report.json` disagrees with the recomputation.
pub fn verify(dir: &Path) -> Result<String> {
    let loaded = store::load_run(dir)?;
    let text = report::to_json(&report::build_report(&loaded)?);
    let stored_path = dir.join(store::REPORT_FILE);
    if stored_path.exists() {
        let stored = fs::read_to_string(&stored_path)?;
        if stored != text {
            bail!("{} differs from the recomputed report", stored_path.display());
        }
    }
    Ok(text)
}

/// Writes the run's charts to `out` as one SVG. Nothing is written on error.
pub fn plot(dir: &Path, out: &Path) -> Result<()> {
    let loaded = store::load_run(dir)?;
    let report_path = dir.join(store::REPORT_FILE);
    let report: RunReport = serde_json::from_str(
        &fs::read_to_string(&report_path)
            .with_context(|| format!("reading {}", report_path.display()))?,
    )
    .with_context(|| format!("parsing {}", report_path.display()))?;
    let svg = plot::render_svg(&plot::run_charts(&loaded.diagnostics, &report));
    write_atomic(out, svg.as_bytes())
}

/// Writes through a sibling temporary file and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?;
    let tmp = parent.join(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| -> Result<()> {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Text listing of built-in initial data and nonlinearities.
pub fn presets_listing() -> String {
    let mut out = String::from("initial data:\n");
    for name in INITIAL_DATA_NAMES {
        let data = InitialData::by_name(name).expect("built-in preset");
        let params: Vec<String> = data
            .parameters()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!("  {name:<16} {}\n", params.join(" ")));
    }
    out.push_str("nonlinearities g(u):\n");
    for name in PRESET_NAMES {
        let describe = match name {
            "classical" => "2 kappa u + 3 u^2",
            "quadratic" => "3 u^2",
            "cubic" => "u^3",
            "quartic" => "u^4",
            _ => "",
        };
        out.push_str(&format!("  {name:<16} {describe}\n"));
    }
    out
}
