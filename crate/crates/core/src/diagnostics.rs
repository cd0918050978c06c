//! Per-sample functionals tracked during a run, and empirical ratios for the
//! anisotropic interpolation inequalities.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::ops::xs_energy;
use crate::spectral::{Grid, SpectralField, Spectrum};

/// One time sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// Step that produced this state (0 for the initial record).
    pub dt: f64,
    /// `|u|^2 + |u_x|^2` in L2.
    pub conserved: f64,
    /// Half of `conserved`.
    pub energy_e: f64,
    pub xs_norm: f64,
    /// Grid max of `sqrt(u_x^2 + u_y^2)`.
    pub grad_inf: f64,
    /// Grid min of `u_x`.
    pub min_ux: f64,
    /// Grid max of `|u|`.
    pub u_inf: f64,
    /// Blow-up integral of `grad_inf^2` up to `t`.
    pub i_integral: f64,
    pub non_finite: bool,
}

/// Values supplied by the caller that are not functions of the state alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordContext {
    pub dt: f64,
    pub i_integral: f64,
    /// Sobolev order of the `X^s` norm.
    pub xs_order: f64,
}

impl Default for RecordContext {
    fn default() -> Self {
        Self {
            dt: 0.0,
            i_integral: 0.0,
            xs_order: 2.0,
        }
    }
}

pub fn record(u: &SpectralField, t: f64, ctx: &RecordContext) -> DiagnosticRecord {
    if !u.is_finite() {
        return non_finite_record(t, ctx);
    }
    record_spectrum(&u.spectrum(), t, ctx)
}

fn non_finite_record(t: f64, ctx: &RecordContext) -> DiagnosticRecord {
    DiagnosticRecord {
        t,
        dt: ctx.dt,
        conserved: f64::NAN,
        energy_e: f64::NAN,
        xs_norm: f64::NAN,
        grad_inf: f64::NAN,
        min_ux: f64::NAN,
        u_inf: f64::NAN,
        i_integral: ctx.i_integral,
        non_finite: true,
    }
}

/// Same as [`record`] from coefficients. The `xi = 0` column is ignored by
/// the `X^s` norm.
pub(crate) fn record_spectrum(spec: &Spectrum, t: f64, ctx: &RecordContext) -> DiagnosticRecord {
    if spec.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return non_finite_record(t, ctx);
    }
    let grid = spec.grid();
    let u = grid.inverse(spec.coeffs());
    let (ux, uy) = gradient(grid, spec);

    let mut grad2: f64 = 0.0;
    let mut min_ux = f64::INFINITY;
    for (a, b) in ux.iter().zip(&uy) {
        grad2 = grad2.max(a * a + b * b);
        min_ux = min_ux.min(*a);
    }
    let u_inf = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let conserved = spec.weighted_energy(|xi, _| 1.0 + xi * xi);
    let non_finite = !(grad2.is_finite() && u_inf.is_finite());
    DiagnosticRecord {
        t,
        dt: ctx.dt,
        conserved,
        energy_e: 0.5 * conserved,
        xs_norm: xs_energy(spec, ctx.xs_order).sqrt(),
        grad_inf: grad2.sqrt(),
        min_ux,
        u_inf,
        i_integral: ctx.i_integral,
        non_finite,
    }
}

fn gradient(grid: &Arc<Grid>, spec: &Spectrum) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::i();
    let ux = spec.multiply(true, |xi, _| i * xi);
    let uy = spec.multiply(true, |_, eta| i * eta);
    (grid.inverse(ux.coeffs()), grid.inverse(uy.coeffs()))
}

/// Trapezoidal blow-up integral `I(t_n) = int_0^{t_n} grad_inf^2` over a record
/// stream.
pub fn blowup_integral(records: &[DiagnosticRecord]) -> Vec<f64> {
    let mut out = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    for (n, r) in records.iter().enumerate() {
        if n > 0 {
            let prev = &records[n - 1];
            acc += 0.5 * (r.t - prev.t) * (prev.grad_inf.powi(2) + r.grad_inf.powi(2));
        }
        out.push(acc);
    }
    out
}

/// Left side over right side (without the constant) of each inequality
///
/// 1. `|u|_inf^2 <= C |u|^(1/2) |u_x|^(1/2) |u_y|^(1/2) |u_xy|^(1/2)`
/// 2. `|u|_inf^3 <= C |u| |u_x| |u_y|_inf`
/// 3. `|u|_inf <= C (|u| + |u_x| + |u_y|_inf)`
///
/// with unlabelled norms in L2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityRatios {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl InequalityRatios {
    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }
}

/// Sups are taken over the grid. Fields for which a right-hand-side norm
/// vanishes (for instance y-independent ones) are rejected as degenerate.
pub fn inequality_report(u: &SpectralField) -> Result<InequalityRatios> {
    let spec = u.spectrum();
    let grid = u.grid();
    let i = Complex64::i();
    let l2 = |s: &Spectrum| s.weighted_energy(|_, _| 1.0).sqrt();
    let ux = spec.multiply(true, |xi, _| i * xi);
    let uy = spec.multiply(true, |_, eta| i * eta);
    let uxy = ux.multiply(true, |_, eta| i * eta);

    let n_u = l2(&spec);
    let n_ux = l2(&ux);
    let n_uy = l2(&uy);
    let n_uxy = l2(&uxy);
    let sup_u = u.max_abs();
    let sup_uy = grid.inverse(uy.coeffs()).iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let small = 1e-300;
    for (name, v) in [
        ("u", n_u),
        ("u_x", n_ux),
        ("u_y", n_uy),
        ("u_xy", n_uxy),
        ("sup u_y", sup_uy),
    ] {
        if v <= small {
            return Err(Error::Degenerate(name));
        }
    }
    Ok(InequalityRatios {
        r1: sup_u * sup_u / (n_u * n_ux * n_uy * n_uxy).sqrt(),
        r2: sup_u.powi(3) / (n_u * n_ux * sup_uy),
        r3: sup_u / (n_u + n_ux + sup_uy),
    })
}
