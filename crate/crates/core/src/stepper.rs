//! Integrating-factor RK4 time stepping with adaptive steps and blow-up
//! stopping.
//!
//! The transverse term `-G * v_y` is linear and diagonal with a purely
//! imaginary symbol `L`; it is propagated exactly by `exp(L t)` while the rest
//! of the right-hand side goes through classical RK4 (Lawson's scheme).

use std::sync::Arc;

use num_complex::Complex64;

use crate::diagnostics::{record_spectrum, DiagnosticRecord, RecordContext};
use crate::error::{Error, Result};
use crate::model::{ModelParams, RhsEvaluator};
use crate::spectral::{Grid, SpectralField, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    /// Initial (and maximal) step.
    pub dt0: f64,
    pub t_end: f64,
    /// Courant factor for the advection bound `cfl dx / (gamma |u|_inf)`.
    pub cfl: f64,
    /// Gradient bound constant: `dt <= c_g / |grad u|_inf`.
    pub c_g: f64,
    /// Stop once `|grad u|_inf` reaches this level.
    pub grad_stop: f64,
    pub dt_floor: f64,
    /// Keep every n-th state (the initial and final ones are always kept).
    pub snapshot_every: usize,
    /// Emit every n-th diagnostic record (the last one is always emitted).
    pub diag_every: usize,
    /// With `false` every step is `dt0` (clamped to `t_end`).
    pub adaptive: bool,
    /// Sobolev order of the recorded `X^s` norm.
    pub xs_order: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt0: 1e-2,
            t_end: 1.0,
            cfl: 0.5,
            c_g: 0.5,
            grad_stop: 1e4,
            dt_floor: 1e-9,
            snapshot_every: 10,
            diag_every: 1,
            adaptive: true,
            xs_order: 2.0,
        }
    }
}

impl StepperConfig {
    /// Fixed step `dt` up to `t_end`.
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            dt0: dt,
            t_end,
            adaptive: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStepper(msg));
        if !(self.dt_floor > 0.0 && self.dt0 > self.dt_floor && self.dt0.is_finite()) {
            return bad(format!(
                "need dt0 > dt_floor > 0, got dt0 = {}, dt_floor = {}",
                self.dt0, self.dt_floor
            ));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be finite and nonnegative", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl = {} must lie in (0, 1]", self.cfl));
        }
        if !(self.c_g > 0.0) {
            return bad(format!("c_g = {} must be positive", self.c_g));
        }
        if !(self.grad_stop > 0.0) {
            return bad(format!("grad_stop = {} must be positive", self.grad_stop));
        }
        if self.snapshot_every == 0 || self.diag_every == 0 {
            return bad("cadences must be at least 1".into());
        }
        if !(self.xs_order >= 0.0) {
            return bad(format!("xs_order = {} must be nonnegative", self.xs_order));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    HorizonReached,
    GradientThreshold,
    StepFloor,
    NonFinite,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::HorizonReached => "horizon_reached",
            StopReason::GradientThreshold => "gradient_threshold",
            StopReason::StepFloor => "step_floor",
            StopReason::NonFinite => "non_finite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            StopReason::HorizonReached,
            StopReason::GradientThreshold,
            StopReason::StepFloor,
            StopReason::NonFinite,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stop {
    pub reason: StopReason,
    pub t_stop: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub field: SpectralField,
}

/// Stored states of a run, in increasing time.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Arc<Grid>,
    snapshots: Vec<Snapshot>,
}

impl Trajectory {
    /// Builds a trajectory from states at strictly increasing times.
    pub fn new(grid: Arc<Grid>, snapshots: Vec<Snapshot>) -> Result<Self> {
        for s in &snapshots {
            if s.field.grid().spec() != grid.spec() {
                return Err(Error::InvalidGrid("snapshot grid differs from trajectory grid".into()));
            }
        }
        if snapshots.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidStepper("snapshot times must increase".into()));
        }
        Ok(Self { grid, snapshots })
    }

    /// A time-independent trajectory holding `u` at `t = 0` and `t = t_end`.
    pub fn frozen(u: SpectralField, t_end: f64) -> Self {
        let grid = u.grid().clone();
        Self {
            grid,
            snapshots: vec![
                Snapshot {
                    t: 0.0,
                    step: 0,
                    field: u.clone(),
                },
                Snapshot {
                    t: t_end,
                    step: 1,
                    field: u,
                },
            ],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn get(&self, i: usize) -> Option<&Snapshot> {
        self.snapshots.get(i)
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> Option<&Snapshot> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// Index of the snapshot closest in time to `t`.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        (0..self.snapshots.len()).min_by(|&a, &b| {
            let da = (self.snapshots[a].t - t).abs();
            let db = (self.snapshots[b].t - t).abs();
            da.total_cmp(&db)
        })
    }
}

/// Output of [`run`].
#[derive(Clone, Debug)]
pub struct Run {
    pub trajectory: Trajectory,
    pub stop: Stop,
    pub diagnostics: Vec<DiagnosticRecord>,
}

/// One integrating-factor RK4 stepper bound to a grid and model.
#[derive(Debug)]
pub struct Stepper {
    eval: RhsEvaluator,
    /// Imaginary part of the linear symbol.
    omega: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: Arc<Grid>, params: ModelParams) -> Self {
        let eval = RhsEvaluator::new(grid, params);
        let omega = eval.linear_symbol().iter().map(|l| l.im).collect();
        Self { eval, omega }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.eval.grid()
    }

    pub fn params(&self) -> &ModelParams {
        self.eval.params()
    }

    fn factors(&self, dt: f64) -> Vec<Complex64> {
        self.omega.iter().map(|w| Complex64::cis(w * dt)).collect()
    }

    /// Exact propagation of the linear transverse term over `dt`.
    pub fn linear_substep(&self, u_hat: &[Complex64], dt: f64) -> Vec<Complex64> {
        u_hat
            .iter()
            .zip(self.factors(dt))
            .map(|(c, e)| c * e)
            .collect()
    }

    /// One step on coefficients. The result is dealiased and x-mean-free.
    pub fn step_hat(&self, u_hat: &[Complex64], dt: f64) -> Vec<Complex64> {
        let e = self.factors(dt);
        let e2 = self.factors(0.5 * dt);
        let h = dt;
        let n = |v: &[Complex64]| self.eval.nonlinear(v).n_hat;

        let k1 = n(u_hat);
        let a: Vec<Complex64> = (0..u_hat.len())
            .map(|i| e2[i] * (u_hat[i] + 0.5 * h * k1[i]))
            .collect();
        let k2 = n(&a);
        let b: Vec<Complex64> = (0..u_hat.len())
            .map(|i| e2[i] * u_hat[i] + 0.5 * h * k2[i])
            .collect();
        let k3 = n(&b);
        let c: Vec<Complex64> = (0..u_hat.len())
            .map(|i| e[i] * u_hat[i] + h * e2[i] * k3[i])
            .collect();
        let k4 = n(&c);

        let ny = self.grid().ny();
        let mask = self.eval.mask();
        (0..u_hat.len())
            .map(|i| {
                if i < ny || !mask[i] {
                    return Complex64::default();
                }
                e[i] * u_hat[i]
                    + h / 6.0 * (e[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i])
            })
            .collect()
    }

    /// Dealiased, x-mean-free coefficients of `u`.
    pub fn prepare(&self, u: &SpectralField) -> Vec<Complex64> {
        let mut s = u.spectrum();
        s.dealias_mut();
        s.project_xmean_mut();
        s.coeffs().to_vec()
    }
}

/// A single step of size `dt`.
pub fn step(u: &SpectralField, p: &ModelParams, dt: f64) -> Result<SpectralField> {
    if !u.has_zero_x_mean(crate::spectral::ops::MEAN_FREE_REL_TOL) {
        return Err(Error::NotMeanFree("step"));
    }
    let stepper = Stepper::new(u.grid().clone(), p.clone());
    let next = stepper.step_hat(&stepper.prepare(u), dt);
    Ok(Spectrum::new(u.grid().clone(), next)?.to_field())
}

/// Integrates from `u0` (dealiased and projected first) until a stop
/// condition holds. Failures during the run surface as a [`StopReason`].
pub fn run(u0: &SpectralField, p: &ModelParams, cfg: &StepperConfig) -> Result<Run> {
    cfg.validate()?;
    if !u0.is_finite() {
        return Err(Error::InvalidStepper("initial data is not finite".into()));
    }
    let grid = u0.grid().clone();
    let stepper = Stepper::new(grid.clone(), p.clone());
    let dx = grid.spec().dx();

    let mut u_hat = stepper.prepare(u0);
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut i_acc = 0.0;
    let ctx = |dt, i_integral| RecordContext {
        dt,
        i_integral,
        xs_order: cfg.xs_order,
    };
    let spectrum = |c: &[Complex64]| Spectrum::new(grid.clone(), c.to_vec()).expect("grid-sized");

    let mut rec = record_spectrum(&spectrum(&u_hat), t, &ctx(0.0, 0.0));
    let mut diagnostics = vec![rec];
    let mut snapshots = vec![Snapshot {
        t,
        step: 0,
        field: spectrum(&u_hat).to_field(),
    }];

    let reason = loop {
        if rec.non_finite {
            break StopReason::NonFinite;
        }
        if rec.grad_inf >= cfg.grad_stop {
            break StopReason::GradientThreshold;
        }
        let remaining = cfg.t_end - t;
        if remaining <= 1e-14 * cfg.t_end.max(1.0) {
            break StopReason::HorizonReached;
        }
        let mut dt = cfg.dt0;
        if cfg.adaptive {
            dt = dt.min(cfg.cfl * dx / (p.gamma * rec.u_inf + 1e-12));
            if rec.grad_inf > 0.0 {
                dt = dt.min(cfg.c_g / rec.grad_inf);
            }
            if dt < cfg.dt_floor {
                break StopReason::StepFloor;
            }
        }
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }

        u_hat = stepper.step_hat(&u_hat, dt);
        steps += 1;
        t = if last { cfg.t_end } else { t + dt };
        let prev_grad = rec.grad_inf;
        rec = record_spectrum(&spectrum(&u_hat), t, &ctx(dt, i_acc));
        if !rec.non_finite {
            i_acc += 0.5 * dt * (prev_grad * prev_grad + rec.grad_inf * rec.grad_inf);
            rec.i_integral = i_acc;
        }
        if steps.is_multiple_of(cfg.diag_every) {
            diagnostics.push(rec);
        }
        if steps.is_multiple_of(cfg.snapshot_every) && !rec.non_finite {
            snapshots.push(Snapshot {
                t,
                step: steps,
                field: spectrum(&u_hat).to_field(),
            });
        }
    };

    if diagnostics.last().is_none_or(|r| r.t != t) {
        diagnostics.push(rec);
    }
    if !rec.non_finite && snapshots.last().is_none_or(|s| s.t != t) {
        snapshots.push(Snapshot {
            t,
            step: steps,
            field: spectrum(&u_hat).to_field(),
        });
    }
    Ok(Run {
        trajectory: Trajectory { grid, snapshots },
        stop: Stop {
            reason,
            t_stop: t,
            steps,
        },
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::model::Nonlinearity;
    use crate::spectral::GridSpec;

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(GridSpec::square_2pi(n)).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let z = SpectralField::zeros(grid(16));
        let p = ModelParams::classical(1.0);
        assert_eq!(step(&z, &p, 0.3).unwrap().max_abs(), 0.0);
        let run = run(&z, &p, &StepperConfig::fixed(0.1, 0.5)).unwrap();
        assert_eq!(run.stop.reason, StopReason::HorizonReached);
        assert!(run.diagnostics.iter().all(|r| r.conserved == 0.0 && r.i_integral == 0.0));
    }

    #[test]
    fn zero_horizon_returns_immediately() {
        let u = SpectralField::from_fn(grid(16), |x, _| x.sin());
        let cfg = StepperConfig {
            t_end: 0.0,
            ..StepperConfig::default()
        };
        let run = run(&u, &ModelParams::classical(1.0), &cfg).unwrap();
        assert_eq!(run.stop.reason, StopReason::HorizonReached);
        assert_eq!(run.stop.t_stop, 0.0);
        assert_eq!(run.stop.steps, 0);
        assert_eq!(run.diagnostics.len(), 1);
        assert_eq!(run.trajectory.len(), 1);
    }

    #[test]
    fn linear_substep_is_isometry() {
        let g = grid(32);
        let u = SpectralField::from_fn(g.clone(), |x, y| {
            (x + 0.2).sin() * (2.0 * y).cos() + 0.3 * (3.0 * x).cos() * y.sin()
        });
        let p = ModelParams::classical(1.0);
        let st = Stepper::new(g.clone(), p);
        let before = st.prepare(&u);
        let after = st.linear_substep(&before, 0.77);
        let norm = |c: &[Complex64]| Spectrum::new(g.clone(), c.to_vec()).unwrap().weighted_energy(|_, _| 1.0);
        assert!((norm(&before) - norm(&after)).abs() < 1e-12 * norm(&before));
    }

    #[test]
    fn linear_mode_phase() {
        // A cos(x + y) travels as A cos(x + y - t) for kappa = 1.
        let g = grid(16);
        let amp = 1e-8;
        let u = SpectralField::from_fn(g.clone(), |x, y| amp * (x + y).cos());
        let p = ModelParams::classical(1.0);
        let t_end = 2.0 * PI;
        let run = run(&u, &p, &StepperConfig::fixed(t_end / 200.0, t_end)).unwrap();
        let last = &run.trajectory.last().unwrap().field;
        for iy in 0..16 {
            for ix in 0..16 {
                let want = amp * (g.x(ix) + g.y(iy) - t_end).cos();
                assert!((last.at(ix, iy) - want).abs() < 1e-8 * amp);
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        let bad = StepperConfig {
            cfl: 1.5,
            ..StepperConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidStepper(_))));
        let bad = StepperConfig {
            dt0: 1e-10,
            ..StepperConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn richardson_order_on_bump() {
        // y-independent Gaussian bump: successive step halvings shrink the
        // difference by about 2^4.
        let g = Grid::new(GridSpec::new(128, 8, 20.0, 4.0)).unwrap();
        let u0 = SpectralField::from_fn(g, |x, _| 0.5 * (-(x - 10.0).powi(2) / 2.0).exp());
        let p = ModelParams::new(1.0, Nonlinearity::classical(1.0)).unwrap();
        let end = |dt: f64| {
            let r = run(&u0, &p, &StepperConfig::fixed(dt, 1.0)).unwrap();
            r.trajectory.last().unwrap().field.clone()
        };
        let (a, b, c) = (end(0.1), end(0.05), end(0.025));
        let e1 = a.axpy(-1.0, &b).max_abs();
        let e2 = b.axpy(-1.0, &c).max_abs();
        let order = (e1 / e2).log2();
        assert!((3.5..=4.5).contains(&order), "order {order}");
    }

    #[test]
    fn stop_reason_round_trip() {
        for r in [
            StopReason::HorizonReached,
            StopReason::GradientThreshold,
            StopReason::StepFloor,
            StopReason::NonFinite,
        ] {
            assert_eq!(StopReason::parse(r.as_str()), Some(r));
        }
    }
}
