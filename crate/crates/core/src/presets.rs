//! Built-in initial data. Every preset is dealiased and projected x-mean-free.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData {
    /// `a (sin X cos Y + sin(2X)/2)` with `X = 2 pi x / lx`, `Y = 2 pi y / ly`.
    SmoothSmall { amplitude: f64 },
    /// Odd front centred in the box, scaled so the grid minimum of `u_x`
    /// equals `m0`:
    ///
    /// ```text
    /// u = -A s(x~) exp(-(S(x~)^2 + b T(y~)^2) / sigma^2)
    /// s = lx/(2 pi) sin(2 pi x~/lx),  S = lx/pi sin(pi x~/lx),  T = ly/pi sin(pi y~/ly)
    /// ```
    ///
    /// `s`, `S` and `T` are periodic versions of the centred coordinates.
    SteepFront { m0: f64, sigma: f64, b: f64 },
    /// Periodized Gaussian `a exp(-(S^2 + T^2) / sigma^2)`.
    LocalizedBump { amplitude: f64, sigma: f64 },
    /// `a sin X (1 + depth cos Y)`.
    YModulated { amplitude: f64, depth: f64 },
}

pub const INITIAL_DATA_NAMES: [&str; 4] =
    ["smooth_small", "steep_front", "localized_bump", "y_modulated"];

impl InitialData {
    /// Preset with default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "smooth_small" => InitialData::SmoothSmall { amplitude: 1e-2 },
            "steep_front" => InitialData::SteepFront {
                m0: -5.0,
                sigma: 4.0,
                b: 0.04,
            },
            "localized_bump" => InitialData::LocalizedBump {
                amplitude: 0.5,
                sigma: 1.0,
            },
            "y_modulated" => InitialData::YModulated {
                amplitude: 0.5,
                depth: 0.5,
            },
            other => return Err(Error::UnknownPreset(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialData::SmoothSmall { .. } => "smooth_small",
            InitialData::SteepFront { .. } => "steep_front",
            InitialData::LocalizedBump { .. } => "localized_bump",
            InitialData::YModulated { .. } => "y_modulated",
        }
    }

    /// Parameter names and values, in declaration order.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            InitialData::SmoothSmall { amplitude } => vec![("amplitude", amplitude)],
            InitialData::SteepFront { m0, sigma, b } => {
                vec![("m0", m0), ("sigma", sigma), ("b", b)]
            }
            InitialData::LocalizedBump { amplitude, sigma } => {
                vec![("amplitude", amplitude), ("sigma", sigma)]
            }
            InitialData::YModulated { amplitude, depth } => {
                vec![("amplitude", amplitude), ("depth", depth)]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = self.parameters().iter().all(|(_, v)| v.is_finite());
        if !finite {
            return Err(Error::InvalidPreset(format!("{}: non-finite parameter", self.name())));
        }
        match *self {
            InitialData::SteepFront { m0, sigma, b } => {
                if m0 > 0.0 {
                    return Err(Error::InvalidPreset(format!("steep_front: m0 = {m0} must be <= 0")));
                }
                if !(sigma > 0.0) || b < 0.0 {
                    return Err(Error::InvalidPreset("steep_front: need sigma > 0, b >= 0".into()));
                }
            }
            InitialData::LocalizedBump { sigma, .. } if !(sigma > 0.0) => {
                return Err(Error::InvalidPreset("localized_bump: sigma must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn build(&self, grid: &Arc<Grid>) -> Result<SpectralField> {
        self.validate()?;
        let spec = *grid.spec();
        let (lx, ly) = (spec.lx, spec.ly);
        let big_x = |x: f64| 2.0 * PI * x / lx;
        let big_y = |y: f64| 2.0 * PI * y / ly;
        // Periodic stand-ins for the centred coordinates.
        let s_x = move |x: f64| lx / PI * (PI * (x - lx / 2.0) / lx).sin();
        let s_y = move |y: f64| ly / PI * (PI * (y - ly / 2.0) / ly).sin();

        let raw = match *self {
            InitialData::SmoothSmall { amplitude } => SpectralField::from_fn(grid.clone(), |x, y| {
                amplitude * (big_x(x).sin() * big_y(y).cos() + 0.5 * (2.0 * big_x(x)).sin())
            }),
            InitialData::SteepFront { m0, sigma, b } => {
                let shape = clean(&SpectralField::from_fn(grid.clone(), |x, y| {
                    let odd = lx / (2.0 * PI) * (2.0 * PI * (x - lx / 2.0) / lx).sin();
                    let r2 = s_x(x).powi(2) + b * s_y(y).powi(2);
                    -odd * (-r2 / (sigma * sigma)).exp()
                }));
                if m0 == 0.0 {
                    return Ok(SpectralField::zeros(grid.clone()));
                }
                // The map amplitude -> min u_x is linear, so one measurement fixes A.
                let unit = crate::spectral::ddx(&shape).min();
                return Ok(shape.scale(m0 / unit));
            }
            InitialData::LocalizedBump { amplitude, sigma } => {
                SpectralField::from_fn(grid.clone(), |x, y| {
                    amplitude * (-(s_x(x).powi(2) + s_y(y).powi(2)) / (sigma * sigma)).exp()
                })
            }
            InitialData::YModulated { amplitude, depth } => {
                SpectralField::from_fn(grid.clone(), |x, y| {
                    amplitude * big_x(x).sin() * (1.0 + depth * big_y(y).cos())
                })
            }
        };
        Ok(clean(&raw))
    }
}

fn clean(f: &SpectralField) -> SpectralField {
    let mut s = f.spectrum();
    s.dealias_mut();
    s.project_xmean_mut();
    s.to_field()
}
