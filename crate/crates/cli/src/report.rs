//! Verdicts recomputed from a persisted run.
//!
//! Everything here reads only what [`crate::store`] wrote, so `run` and
//! `verify` produce the same bytes.

use anyhow::Result;
use chkp_core::breaking::{
    comparison_check, empirical_d, empirical_k, empirical_k_field, residual_sup,
    steepest_weighted_column, t0_bound, t_star, track, verify_riccati_ode, weighted_m1, c3_and_t0,
    CharacteristicTrace, M1Series, TrackOptions, WeightSpec,
};
use chkp_core::liouville::{p_functional, q_functional, vanish_scan, PVerdict};
use chkp_core::model::{check_liouville_condition, LiouvilleVerdict, ModelParams};
use chkp_core::spectral::{ddx, SpectralField};
use chkp_core::stepper::Trajectory;
use serde::{Deserialize, Serialize};

use crate::store::{DiagRow, LoadedRun, StopInfo};

pub const REPORT_SCHEMA: &str = "chkp.report/1";

/// Factor by which an observed time may exceed a bound and still count as
/// "before the bound".
pub const BOUND_SLACK: f64 = 1.10;

/// Samples of `g(u) - gamma u^2` for the Liouville condition.
const LIOUVILLE_SAMPLES: usize = 2001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    Skipped(String),
    Error(String),
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            _ => None,
        }
    }

    fn from_result(r: Result<T>) -> Self {
        r.map_or_else(|e| Outcome::Error(format!("{e:#}")), Outcome::Ok)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The hypothesis holds and the event happened before the bound.
    Yes,
    /// The hypothesis holds, the run reached past the bound, and the event did not happen.
    No,
    /// The hypothesis holds but the run ended before the bound without the event.
    Inconclusive,
    /// The hypothesis does not hold.
    NotApplicable,
}

fn bound_verdict(bound: Option<f64>, event: Option<f64>, run_end: f64) -> Verdict {
    match (bound, event) {
        (None, _) => Verdict::NotApplicable,
        (Some(b), Some(t)) if t <= BOUND_SLACK * b => Verdict::Yes,
        (Some(b), None) if run_end < BOUND_SLACK * b => Verdict::Inconclusive,
        _ => Verdict::No,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub chkp_core: String,
    pub chkp_cli: String,
    pub config_sha256: String,
    pub bound_slack: f64,
    pub stop: StopInfo,
    pub energy: EnergyReport,
    pub blowup: BlowupReport,
    pub breaking: BreakingReport,
    pub characteristics: Outcome<Vec<CharacteristicReport>>,
    pub weighted: Outcome<WeightedReport>,
    pub liouville: Outcome<LiouvilleReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub conserved_0: f64,
    pub conserved_end: f64,
    /// `max_t |C(t) - C(0)| / C(0)`.
    pub max_rel_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub i_end: f64,
    pub grad_0: f64,
    pub grad_end: f64,
    /// Last sample with `grad_inf <= grad_end / 10`, when the gradient grew
    /// by more than a decade.
    pub decade_start_t: Option<f64>,
    /// `I(end) / I(decade_start)`.
    pub decade_growth: Option<f64>,
    /// `sup_{t > 0} I(t) / (t grad_0^2)`; near 1 for a run whose gradient stays put.
    pub linear_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakingReport {
    pub gamma: f64,
    pub m0: f64,
    /// `sup |R(u0)|`.
    pub k_emp: f64,
    /// `sup |R|` over every snapshot, for reference.
    pub k_run: f64,
    /// `-sqrt(K_emp / gamma)`.
    pub threshold: f64,
    pub t_star: Option<f64>,
    /// First time `min u_x <= 10 m0`.
    pub t_cross: Option<f64>,
    /// First time `grad_inf >= grad_stop`.
    pub t_grad_stop: Option<f64>,
    pub grad_stop: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    pub x0: f64,
    pub y0: f64,
    pub samples: usize,
    pub w_0: f64,
    pub w_end: f64,
    /// `sup |r|` along the trace.
    pub k_trace: f64,
    /// `max |dw/dt + gamma w^2 + r| / max(gamma w^2, |r|, 1)`.
    pub riccati_relative: f64,
    pub resolved_until: Option<f64>,
    /// Largest `w - W` where `W` is the comparison solution with `K_emp`.
    pub comparison_max_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedReport {
    pub sigma: f64,
    pub x0: f64,
    pub m1_0: f64,
    /// Minimum over the weight's characteristics of their resolved intervals.
    pub resolved_until: Option<f64>,
    pub d_max_resolved: Option<f64>,
    pub d_max_full: f64,
    /// `sqrt(max(D_max_resolved, 0))`.
    pub c3_emp: Option<f64>,
    pub t0: Option<f64>,
    /// First time `M1 <= -10 |M1(0)|`.
    pub t_cross: Option<f64>,
    pub verdict: Verdict,
    /// Constant built from the norms of `u0` and the weight.
    pub c3_a_priori: f64,
    pub c_user: f64,
    pub t0_a_priori: Option<f64>,
    pub t: Vec<f64>,
    pub m1: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    /// `holds_strict`, `holds_weak` or `fails`.
    pub condition: String,
    pub condition_at: Option<f64>,
    pub condition_value: Option<f64>,
    pub u_range: f64,
    pub vanish_tol: f64,
    pub windows: usize,
    pub largest_cells: usize,
    pub largest_area: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub p: Option<PSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PSummary {
    pub t: f64,
    pub c: f64,
    pub d: f64,
    pub min_gap: f64,
    /// `monotone`, `violated` or `descriptive`.
    pub verdict: String,
}

pub fn build_report(run: &LoadedRun) -> Result<RunReport> {
    let cfg = &run.config;
    let p = cfg.model_params()?;
    let rows = &run.diagnostics;
    anyhow::ensure!(!rows.is_empty(), "diagnostics.csv has no rows");
    let traj = &run.trajectory;
    let u0 = &traj
        .first()
        .ok_or_else(|| anyhow::anyhow!("run has no snapshots"))?
        .field;

    let breaking = breaking_report(rows, traj, &p, cfg.stepper.grad_stop)?;
    let characteristics = if cfg.analysis.characteristics {
        Outcome::from_result(characteristic_reports(run, &p, u0, breaking.k_emp))
    } else {
        Outcome::Skipped("disabled in config".into())
    };
    let weighted = match cfg.analysis.weight_sigma {
        Some(sigma) => Outcome::from_result(weighted_report(run, &p, u0, sigma)),
        None => Outcome::Skipped("no weight_sigma in config".into()),
    };
    let liouville = if cfg.analysis.liouville {
        Outcome::from_result(liouville_report(traj, &p, cfg.analysis.liouville_tol))
    } else {
        Outcome::Skipped("disabled in config".into())
    };

    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        chkp_core: run.meta.chkp_core.clone(),
        chkp_cli: run.meta.chkp_cli.clone(),
        config_sha256: run.config_sha256.clone(),
        bound_slack: BOUND_SLACK,
        stop: run.meta.stop.clone(),
        energy: energy_report(rows),
        blowup: blowup_report(rows),
        breaking,
        characteristics,
        weighted,
        liouville,
    })
}

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn energy_report(rows: &[DiagRow]) -> EnergyReport {
    let c0 = rows[0].conserved;
    let drift = rows
        .iter()
        .map(|r| (r.conserved - c0).abs())
        .fold(0.0, f64::max);
    EnergyReport {
        conserved_0: c0,
        conserved_end: rows[rows.len() - 1].conserved,
        max_rel_drift: if c0 > 0.0 { drift / c0 } else { drift },
    }
}

fn blowup_report(rows: &[DiagRow]) -> BlowupReport {
    let first = rows[0];
    let last = rows[rows.len() - 1];
    let decade_start = (last.grad_inf >= 10.0 * first.grad_inf && first.grad_inf > 0.0)
        .then(|| rows.iter().rposition(|r| r.grad_inf <= last.grad_inf / 10.0))
        .flatten();
    let g0 = first.grad_inf * first.grad_inf;
    let linear_ratio = rows
        .iter()
        .filter(|r| r.t > 0.0)
        .map(|r| if g0 > 0.0 { r.i / (r.t * g0) } else { 0.0 })
        .fold(0.0, f64::max);
    BlowupReport {
        i_end: last.i,
        grad_0: first.grad_inf,
        grad_end: last.grad_inf,
        decade_start_t: decade_start.map(|k| rows[k].t),
        decade_growth: decade_start.map(|k| last.i / rows[k].i),
        linear_ratio,
    }
}

fn breaking_report(
    rows: &[DiagRow],
    traj: &Trajectory,
    p: &ModelParams,
    grad_stop: f64,
) -> Result<BreakingReport> {
    let u0 = &traj.first().expect("nonempty").field;
    let m0 = ddx(u0).min();
    let k_emp = residual_sup(u0, p);
    let bound = t_star(m0, k_emp, p.gamma)?;
    let t_cross = (m0 < 0.0)
        .then(|| rows.iter().find(|r| r.min_ux <= 10.0 * m0).map(|r| r.t))
        .flatten();
    let t_grad_stop = rows.iter().find(|r| r.grad_inf >= grad_stop).map(|r| r.t);
    let run_end = rows[rows.len() - 1].t;
    let verdict = match (bound_verdict(bound.t_star, t_cross, run_end), t_grad_stop) {
        (Verdict::Yes, Some(t)) if t <= BOUND_SLACK * bound.t_star.unwrap() => Verdict::Yes,
        (Verdict::Yes, _) => Verdict::No,
        (v, _) => v,
    };
    Ok(BreakingReport {
        gamma: p.gamma,
        m0,
        k_emp,
        k_run: empirical_k_field(traj, p),
        threshold: bound.threshold(),
        t_star: bound.t_star,
        t_cross,
        t_grad_stop,
        grad_stop,
        verdict,
    })
}

fn trace_report(trace: &CharacteristicTrace, gamma: f64, k: f64, tol: f64) -> Result<CharacteristicReport> {
    let res = verify_riccati_ode(trace, gamma)?;
    let cmp = comparison_check(trace, gamma, k)?;
    let s = &trace.samples;
    Ok(CharacteristicReport {
        x0: trace.x0,
        y0: trace.y0,
        samples: s.len(),
        w_0: s[0].w,
        w_end: s[s.len() - 1].w,
        k_trace: empirical_k(trace),
        riccati_relative: res.relative(),
        resolved_until: res.resolved_until(tol),
        comparison_max_excess: cmp.max_excess,
    })
}

/// Grid location of `min u_x`, first in storage order.
fn steepest_point(u: &SpectralField) -> (f64, f64) {
    let ux = ddx(u);
    let nx = u.grid().nx();
    let (mut best, mut at) = (f64::INFINITY, 0);
    for (i, v) in ux.values().iter().enumerate() {
        if *v < best {
            best = *v;
            at = i;
        }
    }
    (u.grid().x(at % nx), u.grid().y(at / nx))
}

fn characteristic_reports(
    run: &LoadedRun,
    p: &ModelParams,
    u0: &SpectralField,
    k_emp: f64,
) -> Result<Vec<CharacteristicReport>> {
    let tol = run.config.analysis.resolved_tol;
    let mut seeds = vec![steepest_point(u0)];
    seeds.extend(run.config.analysis.seeds.iter().map(|s| (s[0], s[1])));
    seeds
        .iter()
        .map(|&(x, y)| trace_report(&track(&run.trajectory, p, x, y)?, p.gamma, k_emp, tol))
        .collect()
}

fn weighted_report(run: &LoadedRun, p: &ModelParams, u0: &SpectralField, sigma: f64) -> Result<WeightedReport> {
    let traj = &run.trajectory;
    let analysis = &run.config.analysis;
    let grid = traj.grid();
    let weight = WeightSpec::gaussian(grid, sigma)?;
    let (ix, _) = steepest_weighted_column(u0, &weight);
    let x0 = grid.x(ix);
    let M1Series { t, m1, traces, .. } = weighted_m1(traj, p, x0, &weight, TrackOptions::default())?;
    let m1_0 = m1[0];

    let mut resolved_until = Some(f64::INFINITY);
    for tr in &traces {
        let r = verify_riccati_ode(tr, p.gamma)?.resolved_until(analysis.resolved_tol);
        resolved_until = match (resolved_until, r) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
    }
    let d = empirical_d(&t, &m1, p.gamma)?;
    let d_max_resolved = resolved_until.and_then(|te| d.max_until(te));
    let c3_emp = d_max_resolved.map(|v| v.max(0.0).sqrt());
    let t0 = match c3_emp {
        Some(c3) => t0_bound(m1_0, c3, p.gamma)?.t_star,
        None => None,
    };
    let t_cross = (m1_0 < 0.0)
        .then(|| t.iter().zip(&m1).find(|(_, m)| **m <= -10.0 * m1_0.abs()).map(|(s, _)| *s))
        .flatten();
    let apriori = c3_and_t0(u0, ix, &weight, p.gamma, analysis.c_user, run.config.stepper.xs_order)?;
    Ok(WeightedReport {
        sigma,
        x0,
        m1_0,
        resolved_until,
        d_max_resolved,
        d_max_full: d.d_max,
        c3_emp,
        t0,
        t_cross,
        verdict: bound_verdict(t0, t_cross, t[t.len() - 1]),
        c3_a_priori: apriori.c3,
        c_user: apriori.c_user,
        t0_a_priori: apriori.t0(),
        t,
        m1,
    })
}

fn liouville_report(traj: &Trajectory, p: &ModelParams, tol: f64) -> Result<LiouvilleReport> {
    let u_range = traj
        .snapshots()
        .iter()
        .map(|s| s.field.max_abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let (condition, at, value) =
        match check_liouville_condition(p, -u_range, u_range, LIOUVILLE_SAMPLES)? {
            LiouvilleVerdict::HoldsStrict => ("holds_strict", None, None),
            LiouvilleVerdict::HoldsWeak => ("holds_weak", None, None),
            LiouvilleVerdict::Fails { at, value } => ("fails", Some(at), Some(value)),
        };
    let scan = vanish_scan(traj, tol)?;
    let (mut q_min, mut q_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in traj.snapshots() {
        let q = q_functional(&s.field, p);
        q_min = q_min.min(q.min());
        q_max = q_max.max(q.max());
    }
    let dx = traj.grid().spec().dx();
    let largest = scan
        .windows
        .iter()
        .max_by(|a, b| a.cells().cmp(&b.cells()).then(a.area(dx).total_cmp(&b.area(dx))));
    let p_summary = match largest {
        Some(w) if w.j1 > w.j0 => {
            let snap = &traj.snapshots()[w.i0];
            let r = p_functional(&snap.field, p, w.x0, w.x1)?;
            Some(PSummary {
                t: snap.t,
                c: r.c,
                d: r.d,
                min_gap: r.min_gap,
                verdict: match r.verdict {
                    PVerdict::Monotone => "monotone",
                    PVerdict::Violated => "violated",
                    PVerdict::Descriptive => "descriptive",
                }
                .into(),
            })
        }
        _ => None,
    };
    Ok(LiouvilleReport {
        condition: condition.into(),
        condition_at: at,
        condition_value: value,
        u_range,
        vanish_tol: tol,
        windows: scan.windows.len(),
        largest_cells: scan.largest_cells,
        largest_area: scan.largest_area,
        q_min,
        q_max,
        p: p_summary,
    })
}
