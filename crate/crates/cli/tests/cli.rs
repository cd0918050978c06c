use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chkp_cli::store::{self, Sidecar};

const SMOOTH: &str = r#"{
  "schema": "chkp.run/1",
  "grid": { "nx": 32, "ny": 16, "lx": 6.283185307179586, "ly": 6.283185307179586 },
  "model": { "gamma": 1.0, "preset": "classical", "kappa": 1.0 },
  "stepper": { "dt0": 0.02, "t_end": 0.4 },
  "initial": { "preset": "smooth_small" },
  "analysis": { "weight_sigma": 0.5 },
  "output": { "snapshot_every": 2 }
}
"#;

fn chkp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chkp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.clone(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn smooth_run(tmp: &Path) -> PathBuf {
    let cfg = write_config(tmp, SMOOTH);
    let out = tmp.join("run");
    let o = chkp(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn run_writes_artifacts_and_verify_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let run = smooth_run(tmp.path());
    for f in [store::CONFIG_FILE, store::RUN_FILE, store::DIAGNOSTICS_FILE, store::REPORT_FILE] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join(store::REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(report["stop"]["reason"], "horizon_reached");
    assert_eq!(report["breaking"]["verdict"], "not_applicable");
    assert!(report["energy"]["max_rel_drift"].as_f64().unwrap() < 1e-10);
    assert!(report["weighted"]["ok"]["m1"].is_array());
    assert_eq!(report["config_sha256"].as_str().unwrap().len(), 64);

    let csv = fs::read_to_string(run.join(store::DIAGNOSTICS_FILE)).unwrap();
    assert!(csv.starts_with("t,dt,conserved,energy_E,xs_norm,grad_inf,min_ux,I\n"));
    assert_eq!(csv.lines().count(), 1 + 21);

    let before = tree(&run);
    let a = chkp(&["verify", "--run", run.to_str().unwrap()]);
    let b = chkp(&["verify", "--run", run.to_str().unwrap()]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, before[&run.join(store::REPORT_FILE)]);
    assert_eq!(tree(&run), before, "verify modified the run directory");
}

#[test]
fn snapshots_follow_the_documented_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let run = smooth_run(tmp.path());
    let side: Sidecar = serde_json::from_str(
        &fs::read_to_string(run.join("snapshots/000000.json")).unwrap(),
    )
    .unwrap();
    assert_eq!((side.nx, side.ny, side.dtype.as_str()), (32, 16, "f64-le"));
    let raw = fs::read(run.join("snapshots/000000.f64")).unwrap();
    assert_eq!(raw.len(), 32 * 16 * 8);
    // Value at (ix, iy) sits at index iy * nx + ix; smooth_small is
    // a (sin X cos Y + sin 2X / 2), so the sample at (ix = 4, iy = 0) is
    // a (sin(pi/4) + sin(pi/2)/2).
    let v = f64::from_le_bytes(raw[8 * 4..8 * 5].try_into().unwrap());
    let expected = 1e-2 * ((PI_4).sin() + 0.5);
    assert!((v - expected).abs() < 1e-15, "{v} vs {expected}");
    let last = run.join("snapshots/000010.json");
    let side: Sidecar = serde_json::from_str(&fs::read_to_string(last).unwrap()).unwrap();
    assert!((side.t - 0.4).abs() < 1e-12);
}

const PI_4: f64 = std::f64::consts::FRAC_PI_4;

#[test]
fn plot_writes_svg_and_fails_cleanly_on_empty_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let run = smooth_run(tmp.path());
    let svg = tmp.path().join("run.svg");
    let o = chkp(&["plot", "--run", run.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("<polyline"));

    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let target = tmp.path().join("empty.svg");
    let o = chkp(&["plot", "--run", empty.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!target.exists());
    let leftovers: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn bad_config_reports_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMOOTH.replace("\"t_end\"", "\"t_fin\""));
    let o = chkp(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("r").to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stepper") && err.contains("t_fin"), "{err}");
    assert!(!tmp.path().join("r").exists());
}

#[test]
fn missing_run_dir_and_bad_thread_count_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let o = chkp(&["verify", "--run", tmp.path().join("nope").to_str().unwrap()]);
    assert!(!o.status.success());

    let o = Command::new(env!("CARGO_BIN_EXE_chkp"))
        .arg("presets")
        .env("CHKP_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn run_refuses_nonempty_output() {
    let tmp = tempfile::tempdir().unwrap();
    let run = smooth_run(tmp.path());
    let cfg = tmp.path().join("config.json");
    let o = chkp(&["run", "--config", cfg.to_str().unwrap(), "--out", run.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn presets_and_schema_are_listed() {
    let o = chkp(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["smooth_small", "steep_front", "localized_bump", "y_modulated", "classical", "quadratic"] {
        assert!(text.contains(name), "{name}");
    }
    assert!(text.contains("m0=-5"));
    let o = chkp(&["schema"]);
    let schema: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(schema["properties"]["schema"]["const"], "chkp.run/1");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        chkp_cli::config::RunConfig::load(&p).unwrap();
        n += 1;
    }
    assert!(n >= 3);
}
