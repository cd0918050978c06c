//! On-disk layout of a run directory.
//!
//! ```text
//! config.json           canonical copy of the configuration
//! run.json              stop reason, versions, snapshot index
//! diagnostics.csv       one row per diagnostic sample
//! snapshots/NNNNNN.f64  raw little-endian f64, row-major, y outer
//! snapshots/NNNNNN.json sidecar {nx, ny, lx, ly, t, dtype, layout}
//! report.json           verdicts recomputed from the files above
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use chkp_core::diagnostics::DiagnosticRecord;
use chkp_core::spectral::{Grid, SpectralField};
use chkp_core::stepper::{Snapshot, StopReason, Trajectory};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const CONFIG_FILE: &str = "config.json";
pub const RUN_FILE: &str = "run.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub const CSV_HEADER: &str = "t,dt,conserved,energy_E,xs_norm,grad_inf,min_ux,I";
pub const LAYOUT: &str = "row-major, y outer: index = iy * nx + ix";

/// One row of `diagnostics.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagRow {
    pub t: f64,
    pub dt: f64,
    pub conserved: f64,
    pub energy_e: f64,
    pub xs_norm: f64,
    pub grad_inf: f64,
    pub min_ux: f64,
    pub i: f64,
}

impl DiagRow {
    fn fields(&self) -> [f64; 8] {
        [
            self.t,
            self.dt,
            self.conserved,
            self.energy_e,
            self.xs_norm,
            self.grad_inf,
            self.min_ux,
            self.i,
        ]
    }
}

impl From<&DiagnosticRecord> for DiagRow {
    fn from(r: &DiagnosticRecord) -> Self {
        Self {
            t: r.t,
            dt: r.dt,
            conserved: r.conserved,
            energy_e: r.energy_e,
            xs_norm: r.xs_norm,
            grad_inf: r.grad_inf,
            min_ux: r.min_ux,
            i: r.i_integral,
        }
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn diagnostics_csv(rows: &[DiagRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.fields().iter().map(|v| format_f64(*v)).collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    out
}

pub fn parse_diagnostics(text: &str) -> Result<Vec<DiagRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => bail!("unexpected diagnostics header {other:?}"),
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("diagnostics row {}", n + 1))?;
            ensure!(v.len() == 8, "diagnostics row {} has {} fields", n + 1, v.len());
            Ok(DiagRow {
                t: v[0],
                dt: v[1],
                conserved: v[2],
                energy_e: v[3],
                xs_norm: v[4],
                grad_inf: v[5],
                min_ux: v[6],
                i: v[7],
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub t: f64,
    pub dtype: String,
    pub layout: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotEntry {
    pub file: String,
    pub step: usize,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopInfo {
    pub reason: String,
    pub t_stop: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub chkp_core: String,
    pub chkp_cli: String,
    pub config_sha256: String,
    pub stop: StopInfo,
    pub snapshots: Vec<SnapshotEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}

pub fn field_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn parse_field(bytes: &[u8], expected: usize) -> Result<Vec<f64>> {
    ensure!(
        bytes.len() == 8 * expected,
        "snapshot holds {} bytes, expected {}",
        bytes.len(),
        8 * expected
    );
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes every artifact except the report. `dir` must be absent or empty.
pub fn write_run(
    dir: &Path,
    cfg: &RunConfig,
    run: &chkp_core::stepper::Run,
) -> Result<()> {
    if dir.exists() {
        let nonempty = fs::read_dir(dir)
            .with_context(|| format!("listing {}", dir.display()))?
            .next()
            .is_some();
        ensure!(!nonempty, "output directory {} is not empty", dir.display());
    }
    let snap_dir = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snap_dir).with_context(|| format!("creating {}", snap_dir.display()))?;

    let config_text = cfg.to_canonical_json();
    fs::write(dir.join(CONFIG_FILE), &config_text)?;

    let rows: Vec<DiagRow> = run.diagnostics.iter().map(DiagRow::from).collect();
    fs::write(dir.join(DIAGNOSTICS_FILE), diagnostics_csv(&rows))?;

    let spec = *run.trajectory.grid().spec();
    let mut entries = Vec::with_capacity(run.trajectory.len());
    for (k, s) in run.trajectory.snapshots().iter().enumerate() {
        let stem = format!("{k:06}");
        fs::write(snap_dir.join(format!("{stem}.f64")), field_bytes(s.field.values()))?;
        let side = Sidecar {
            nx: spec.nx,
            ny: spec.ny,
            lx: spec.lx,
            ly: spec.ly,
            t: s.t,
            dtype: "f64-le".into(),
            layout: LAYOUT.into(),
        };
        fs::write(snap_dir.join(format!("{stem}.json")), to_json(&side))?;
        entries.push(SnapshotEntry {
            file: format!("{SNAPSHOT_DIR}/{stem}.f64"),
            step: s.step,
            t: s.t,
        });
    }

    let meta = RunMeta {
        chkp_core: chkp_core::VERSION.into(),
        chkp_cli: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        stop: StopInfo {
            reason: run.stop.reason.as_str().into(),
            t_stop: run.stop.t_stop,
            steps: run.stop.steps,
        },
        snapshots: entries,
    };
    fs::write(dir.join(RUN_FILE), to_json(&meta))?;
    Ok(())
}

/// A run directory read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub config_sha256: String,
    pub meta: RunMeta,
    pub stop_reason: StopReason,
    pub diagnostics: Vec<DiagRow>,
    pub trajectory: Trajectory,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    ensure!(dir.is_dir(), "run directory {} does not exist", dir.display());
    let config_path = dir.join(CONFIG_FILE);
    let config_text = fs::read_to_string(&config_path)
        .with_context(|| format!("{} is not a run directory", dir.display()))?;
    let config = RunConfig::from_json(&config_text)?;
    let meta: RunMeta = read_json(&dir.join(RUN_FILE))?;
    let sha = sha256_hex(config_text.as_bytes());
    ensure!(sha == meta.config_sha256, "config.json does not match the hash in run.json");
    let stop_reason = StopReason::parse(&meta.stop.reason)
        .with_context(|| format!("unknown stop reason {}", meta.stop.reason))?;
    let diag_text = fs::read_to_string(dir.join(DIAGNOSTICS_FILE))
        .with_context(|| format!("reading {DIAGNOSTICS_FILE}"))?;
    let diagnostics = parse_diagnostics(&diag_text)?;

    let grid = config.grid()?;
    let trajectory = load_snapshots(dir, &grid, &meta.snapshots)?;
    Ok(LoadedRun {
        dir: dir.to_path_buf(),
        config,
        config_sha256: sha,
        meta,
        stop_reason,
        diagnostics,
        trajectory,
    })
}

fn load_snapshots(dir: &Path, grid: &Arc<Grid>, entries: &[SnapshotEntry]) -> Result<Trajectory> {
    let spec = *grid.spec();
    let snaps = entries
        .iter()
        .map(|e| {
            let path = dir.join(&e.file);
            let side: Sidecar = read_json(&path.with_extension("json"))?;
            ensure!(
                side.nx == spec.nx && side.ny == spec.ny && side.lx == spec.lx && side.ly == spec.ly,
                "{}: sidecar grid disagrees with config",
                path.display()
            );
            ensure!(side.t == e.t, "{}: sidecar time disagrees with run.json", path.display());
            let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let values = parse_field(&bytes, spec.len())?;
            Ok(Snapshot {
                t: e.t,
                step: e.step,
                field: SpectralField::new(grid.clone(), values)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory::new(grid.clone(), snaps)?)
}
