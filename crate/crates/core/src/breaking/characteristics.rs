use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelParams, RhsEvaluator};
use crate::spectral::{Interpolant, LineInterpolant, Spectrum};
use crate::stepper::{Snapshot, Trajectory};

/// State along one characteristic at a snapshot time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    /// Position, reduced to `[0, lx)`.
    pub q: f64,
    /// `u_x(t, q, y0)`.
    pub w: f64,
    /// `R(t, q, y0)`.
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicTrace {
    pub x0: f64,
    pub y0: f64,
    pub samples: Vec<TraceSample>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackOptions {
    /// RK4 substeps per snapshot interval.
    pub substeps: usize,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { substeps: 4 }
    }
}

/// Checks that no snapshot interval lets a characteristic move more than one
/// grid cell: `gamma |u|_inf dt <= dx`.
pub fn check_cadence(traj: &Trajectory, gamma: f64) -> Result<()> {
    let dx = traj.grid().spec().dx();
    for w in traj.snapshots().windows(2) {
        let speed = gamma * w[0].field.max_abs().max(w[1].field.max_abs());
        let spacing = w[1].t - w[0].t;
        if speed > 0.0 && speed * spacing > dx * (1.0 + 1e-12) {
            return Err(Error::SparseTrajectory {
                t: w[0].t,
                spacing,
                required: dx / speed,
            });
        }
    }
    Ok(())
}

/// Integrates `dq/dt = gamma u(t, q, y0)` from `q(0) = x0` through the stored
/// snapshots, with `u` linear in time between them.
pub fn track(traj: &Trajectory, p: &ModelParams, x0: f64, y0: f64) -> Result<CharacteristicTrace> {
    let mut family = track_family(traj, p, x0, &[y0], TrackOptions::default())?;
    Ok(family.remove(0))
}

struct Lines {
    u: LineInterpolant,
    r: LineInterpolant,
}

/// One characteristic per entry of `ys`, all seeded at `x0`. Lines are
/// independent and integrated in parallel; output order follows `ys`.
pub fn track_family(
    traj: &Trajectory,
    p: &ModelParams,
    x0: f64,
    ys: &[f64],
    opts: TrackOptions,
) -> Result<Vec<CharacteristicTrace>> {
    if traj.is_empty() {
        return Err(Error::ShortTrajectory { needed: 1, found: 0 });
    }
    check_cadence(traj, p.gamma)?;
    let grid = traj.grid().clone();
    let lx = grid.spec().lx;
    let eval = RhsEvaluator::new(grid.clone(), p.clone());
    let lines_at = |snap: &Snapshot| -> Vec<Lines> {
        let spec = snap.field.spectrum();
        let r_spec = Spectrum::new(grid.clone(), eval.residual_hat(spec.coeffs()))
            .expect("residual matches grid");
        let (ui, ri) = (Interpolant::new(&spec), Interpolant::new(&r_spec));
        ys.par_iter()
            .map(|&y| Lines {
                u: ui.line(y),
                r: ri.line(y),
            })
            .collect()
    };

    let substeps = opts.substeps.max(1);
    let gamma = p.gamma;
    let snaps = traj.snapshots();
    let mut current = lines_at(&snaps[0]);
    let mut q: Vec<f64> = vec![x0; ys.len()];
    let sample = |t: f64, q: f64, l: &Lines| TraceSample {
        t,
        q: q.rem_euclid(lx),
        w: l.u.eval_dx(q),
        r: l.r.eval(q),
    };
    let mut traces: Vec<CharacteristicTrace> = ys
        .iter()
        .zip(&current)
        .map(|(&y0, l)| CharacteristicTrace {
            x0,
            y0,
            samples: vec![sample(snaps[0].t, x0, l)],
        })
        .collect();

    for pair in snaps.windows(2) {
        let (t0, t1) = (pair[0].t, pair[1].t);
        let next = lines_at(&pair[1]);
        let span = t1 - t0;
        let h = span / substeps as f64;
        q.par_iter_mut()
            .zip(current.par_iter().zip(&next))
            .for_each(|(qj, (a, b))| {
                let vel = |theta: f64, x: f64| gamma * ((1.0 - theta) * a.u.eval(x) + theta * b.u.eval(x));
                for s in 0..substeps {
                    let th = s as f64 / substeps as f64;
                    let dth = 1.0 / substeps as f64;
                    let k1 = vel(th, *qj);
                    let k2 = vel(th + 0.5 * dth, *qj + 0.5 * h * k1);
                    let k3 = vel(th + 0.5 * dth, *qj + 0.5 * h * k2);
                    let k4 = vel(th + dth, *qj + h * k3);
                    *qj += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            });
        for ((trace, &qj), l) in traces.iter_mut().zip(&q).zip(&next) {
            trace.samples.push(sample(t1, qj, l));
        }
        current = next;
    }
    Ok(traces)
}

/// `dw/dt + gamma w^2 + r` along a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiResidual {
    pub t: Vec<f64>,
    pub residual: Vec<f64>,
    /// Per-sample `max(|gamma w^2|, |r|, 1)`.
    pub local_scale: Vec<f64>,
    pub max_abs: f64,
    /// `max(|gamma w^2|, |r|, 1)` over the trace.
    pub scale: f64,
}

impl RiccatiResidual {
    pub fn relative(&self) -> f64 {
        self.max_abs / self.scale
    }

    /// End of the longest initial stretch on which every sample satisfies
    /// `|residual| <= tol * local_scale`. `None` if the first sample fails.
    pub fn resolved_until(&self, tol: f64) -> Option<f64> {
        let mut last = None;
        for ((t, r), s) in self.t.iter().zip(&self.residual).zip(&self.local_scale) {
            if !(r.abs() <= tol * s) {
                break;
            }
            last = Some(*t);
        }
        last
    }
}

/// Second-order finite-difference derivative on a nonuniform grid.
pub(crate) fn derivative(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    assert!(n >= 3 && v.len() == n);
    // Three-point Lagrange derivative at node `at` using nodes i, i+1, i+2.
    let d3 = |i: usize, at: usize| -> f64 {
        let (x0, x1, x2) = (t[i], t[i + 1], t[i + 2]);
        let x = t[at];
        let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        l0 * v[i] + l1 * v[i + 1] + l2 * v[i + 2]
    };
    (0..n)
        .map(|k| match k {
            0 => d3(0, 0),
            k if k == n - 1 => d3(n - 3, n - 1),
            k => d3(k - 1, k),
        })
        .collect()
}

pub fn verify_riccati_ode(trace: &CharacteristicTrace, gamma: f64) -> Result<RiccatiResidual> {
    let s = &trace.samples;
    if s.len() < 3 {
        return Err(Error::ShortTrajectory {
            needed: 3,
            found: s.len(),
        });
    }
    let t: Vec<f64> = s.iter().map(|x| x.t).collect();
    let w: Vec<f64> = s.iter().map(|x| x.w).collect();
    let dw = derivative(&t, &w);
    let residual: Vec<f64> = s
        .iter()
        .zip(&dw)
        .map(|(x, d)| d + gamma * x.w * x.w + x.r)
        .collect();
    let local_scale: Vec<f64> = s
        .iter()
        .map(|x| (gamma * x.w * x.w).abs().max(x.r.abs()).max(1.0))
        .collect();
    let max_abs = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let scale = local_scale.iter().fold(1.0f64, |m, &x| m.max(x));
    Ok(RiccatiResidual {
        t,
        residual,
        local_scale,
        max_abs,
        scale,
    })
}

/// `sup |r|` over the samples of a trace.
pub fn empirical_k(trace: &CharacteristicTrace) -> f64 {
    trace.samples.iter().fold(0.0, |m, s| m.max(s.r.abs()))
}

/// `sup |R|` over the grid for one state.
pub fn residual_sup(u: &crate::spectral::SpectralField, p: &ModelParams) -> f64 {
    let eval = RhsEvaluator::new(u.grid().clone(), p.clone());
    let r = Spectrum::new(u.grid().clone(), eval.residual_hat(u.spectrum().coeffs()))
        .expect("residual matches grid")
        .to_field();
    r.max_abs()
}

/// `sup |R|` over the grid and every snapshot.
pub fn empirical_k_field(traj: &Trajectory, p: &ModelParams) -> f64 {
    traj.snapshots()
        .iter()
        .map(|s| residual_sup(&s.field, p))
        .fold(0.0, f64::max)
}

/// Solution `W` of the comparison equation `W' = -gamma W^2 + K`, `W(0) = w(0)`,
/// at the sample times of `trace`, and the largest excess `w - W` over the
/// samples where `W` is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonCheck {
    pub k: f64,
    pub bound: Vec<f64>,
    pub max_excess: f64,
}

pub fn comparison_check(trace: &CharacteristicTrace, gamma: f64, k: f64) -> Result<ComparisonCheck> {
    let Some(first) = trace.samples.first() else {
        return Err(Error::ShortTrajectory { needed: 1, found: 0 });
    };
    // psi = -W solves psi' = gamma psi^2 - K.
    let psi0 = -first.w;
    let mut bound = Vec::with_capacity(trace.samples.len());
    let mut max_excess = f64::NEG_INFINITY;
    for s in &trace.samples {
        let psi = super::riccati::integrate_riccati(psi0, k, gamma, s.t - first.t)?;
        let w_bound = -psi;
        if w_bound.is_finite() {
            max_excess = max_excess.max(s.w - w_bound);
        }
        bound.push(w_bound);
    }
    Ok(ComparisonCheck {
        k,
        bound,
        max_excess,
    })
}
