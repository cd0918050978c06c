//! Run configuration: a single JSON document, versioned by the `schema` key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use chkp_core::model::{ModelParams, Nonlinearity};
use chkp_core::presets::InitialData;
use chkp_core::spectral::{Grid, GridSpec};
use chkp_core::stepper::StepperConfig;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "chkp.run/1";

/// JSON Schema describing [`RunConfig`].
pub const JSON_SCHEMA: &str = include_str!("../schema/run_config.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub grid: GridConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub stepper: StepperSection,
    pub initial: InitialConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

/// Either a named preset or polynomial coefficients `a_k` of `u^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub dt0: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub c_g: f64,
    pub grad_stop: f64,
    pub dt_floor: f64,
    pub adaptive: bool,
    pub xs_order: f64,
}

impl Default for StepperSection {
    fn default() -> Self {
        let d = StepperConfig::default();
        Self {
            dt0: d.dt0,
            t_end: d.t_end,
            cfl: d.cfl,
            c_g: d.c_g,
            grad_stop: d.grad_stop,
            dt_floor: d.dt_floor,
            adaptive: d.adaptive,
            xs_order: d.xs_order,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub preset: String,
    /// Overrides of the preset's default parameters.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Track the characteristic through the steepest point of `u0`.
    pub characteristics: bool,
    /// Extra characteristic seeds `[x, y]`.
    pub seeds: Vec<[f64; 2]>,
    /// Gaussian weight width for `M1`; `None` disables the weighted analysis.
    pub weight_sigma: Option<f64>,
    pub c_user: f64,
    /// Relative tolerance of the slope identity that delimits the resolved interval.
    pub resolved_tol: f64,
    pub liouville: bool,
    pub liouville_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            characteristics: true,
            seeds: Vec::new(),
            weight_sigma: None,
            c_user: 0.0,
            resolved_tol: 1e-3,
            liouville: true,
            liouville_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Used when `run` is given no `--out`.
    pub dir: Option<PathBuf>,
    pub snapshot_every: usize,
    pub diag_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            snapshot_every: 1,
            diag_every: 1,
        }
    }
}

impl RunConfig {
    /// Parses and validates; errors name the offending path in the document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("config error at `{path}`: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Canonical serialization; the config hash is taken over these bytes.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!(
                "config error at `schema`: expected \"{SCHEMA_VERSION}\", found \"{}\"",
                self.schema
            );
        }
        self.grid_spec().validate().context("config error at `grid`")?;
        self.model_params().context("config error at `model`")?;
        self.stepper_config()
            .validate()
            .context("config error at `stepper`")?;
        self.initial_data().context("config error at `initial`")?;
        if self.output.snapshot_every == 0 || self.output.diag_every == 0 {
            bail!("config error at `output`: cadences must be positive");
        }
        let a = &self.analysis;
        if !(a.c_user >= 0.0 && a.c_user.is_finite()) {
            bail!("config error at `analysis.c_user`: must be finite and nonnegative");
        }
        if !(a.resolved_tol > 0.0) {
            bail!("config error at `analysis.resolved_tol`: must be positive");
        }
        if !(a.liouville_tol > 0.0) {
            bail!("config error at `analysis.liouville_tol`: must be positive");
        }
        if let Some(sigma) = a.weight_sigma {
            let ly = self.grid.ly;
            if !(sigma > 0.0 && sigma <= ly / 12.0) {
                bail!("config error at `analysis.weight_sigma`: {sigma} not in (0, ly/12]");
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly)
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Grid::new(self.grid_spec())?)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let g = match (&m.preset, &m.coefficients) {
            (Some(name), None) => Nonlinearity::preset(name, m.kappa)?,
            (None, Some(c)) => Nonlinearity::polynomial("polynomial", c.clone())?,
            _ => bail!("exactly one of `preset` and `coefficients` is required"),
        };
        Ok(ModelParams::new(m.gamma, g)?)
    }

    pub fn stepper_config(&self) -> StepperConfig {
        let s = &self.stepper;
        StepperConfig {
            dt0: s.dt0,
            t_end: s.t_end,
            cfl: s.cfl,
            c_g: s.c_g,
            grad_stop: s.grad_stop,
            dt_floor: s.dt_floor,
            snapshot_every: self.output.snapshot_every,
            diag_every: self.output.diag_every,
            adaptive: s.adaptive,
            xs_order: s.xs_order,
        }
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let base = InitialData::by_name(&self.initial.preset)?;
        let mut values: BTreeMap<&str, f64> = base.parameters().into_iter().collect();
        for (k, v) in &self.initial.params {
            match values.get_mut(k.as_str()) {
                Some(slot) => *slot = *v,
                None => bail!(
                    "unknown parameter `{k}` for preset {}; expected one of {:?}",
                    base.name(),
                    values.keys().collect::<Vec<_>>()
                ),
            }
        }
        Ok(match base {
            InitialData::SmoothSmall { .. } => InitialData::SmoothSmall {
                amplitude: values["amplitude"],
            },
            InitialData::SteepFront { .. } => InitialData::SteepFront {
                m0: values["m0"],
                sigma: values["sigma"],
                b: values["b"],
            },
            InitialData::LocalizedBump { .. } => InitialData::LocalizedBump {
                amplitude: values["amplitude"],
                sigma: values["sigma"],
            },
            InitialData::YModulated { .. } => InitialData::YModulated {
                amplitude: values["amplitude"],
                depth: values["depth"],
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": "chkp.run/1",
        "grid": {"nx": 32, "ny": 16, "lx": 6.283185307179586, "ly": 6.283185307179586},
        "model": {"gamma": 1.0, "preset": "classical"},
        "initial": {"preset": "smooth_small"}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.model.kappa, 1.0);
        assert_eq!(cfg.stepper, StepperSection::default());
        assert_eq!(cfg.output.snapshot_every, 1);
        let back = RunConfig::from_json(&cfg.to_canonical_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_names_its_path() {
        let bad = MINIMAL.replace("\"lx\"", "\"lz\": 1.0, \"lx\"");
        let err = format!("{:#}", RunConfig::from_json(&bad).unwrap_err());
        assert!(err.contains("grid"), "{err}");
        assert!(err.contains("lz"), "{err}");
    }

    #[test]
    fn model_needs_exactly_one_source() {
        let both = MINIMAL.replace("\"preset\": \"classical\"", "\"preset\": \"classical\", \"coefficients\": [0, 0, 3]");
        assert!(RunConfig::from_json(&both).is_err());
        let coeffs = MINIMAL.replace("\"preset\": \"classical\"", "\"coefficients\": [0, 0, 3]");
        let p = RunConfig::from_json(&coeffs).unwrap().model_params().unwrap();
        assert_eq!(p.nonlinearity.g(2.0), 12.0);
    }

    #[test]
    fn initial_overrides() {
        let cfg = MINIMAL.replace(
            "{\"preset\": \"smooth_small\"}",
            "{\"preset\": \"steep_front\", \"params\": {\"m0\": -3}}",
        );
        let data = RunConfig::from_json(&cfg).unwrap().initial_data().unwrap();
        assert_eq!(data, InitialData::SteepFront { m0: -3.0, sigma: 4.0, b: 0.04 });
        let typo = cfg.replace("\"m0\"", "\"m1\"");
        assert!(RunConfig::from_json(&typo).is_err());
    }

    #[test]
    fn wrong_schema_rejected() {
        let bad = MINIMAL.replace("chkp.run/1", "chkp.run/0");
        assert!(format!("{:#}", RunConfig::from_json(&bad).unwrap_err()).contains("schema"));
    }

    #[test]
    fn schema_document_lists_every_section() {
        let schema: serde_json::Value = serde_json::from_str(JSON_SCHEMA).unwrap();
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let value = serde_json::to_value(&cfg).unwrap();
        let props = schema["properties"].as_object().unwrap();
        for (key, section) in value.as_object().unwrap() {
            assert!(props.contains_key(key), "schema lacks `{key}`");
            if let Some(fields) = section.as_object() {
                let sub = props[key]["properties"].as_object().unwrap();
                for f in fields.keys() {
                    assert!(sub.contains_key(f), "schema lacks `{key}.{f}`");
                }
            }
        }
        assert_eq!(schema["properties"]["schema"]["const"], SCHEMA_VERSION);
    }
}
