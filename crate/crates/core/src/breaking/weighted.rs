use std::f64::consts::PI;
use std::sync::Arc;

use super::characteristics::{derivative, track_family, CharacteristicTrace, TrackOptions};
use super::riccati::{t_star, RiccatiBound};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{ddx, ops::xs_energy, Grid, SpectralField};
use crate::stepper::Trajectory;

/// Gaussian weight in y, periodized on the box and normalized so that the
/// grid quadrature of `phi` is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    sigma: f64,
    center: f64,
    dy: f64,
    ys: Vec<f64>,
    phi: Vec<f64>,
    phi_dd: Vec<f64>,
    /// Factor applied to the unit-mass Gaussian by the discrete renormalization.
    renorm: f64,
}

impl WeightSpec {
    /// Centred at `ly / 2`.
    pub fn gaussian(grid: &Arc<Grid>, sigma: f64) -> Result<Self> {
        Self::gaussian_at(grid, sigma, grid.spec().ly / 2.0)
    }

    /// Requires `0 < sigma <= ly / 12` so that the periodic images are
    /// negligible and `phi` is smooth on the torus.
    pub fn gaussian_at(grid: &Arc<Grid>, sigma: f64, center: f64) -> Result<Self> {
        let ly = grid.spec().ly;
        if !(sigma > 0.0 && sigma <= ly / 12.0) {
            return Err(Error::InvalidWeight(format!(
                "sigma = {sigma} must lie in (0, ly/12 = {}]",
                ly / 12.0
            )));
        }
        let dy = grid.spec().dy();
        let ys: Vec<f64> = (0..grid.ny()).map(|iy| grid.y(iy)).collect();
        let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
        let images = |y: f64, f: &dyn Fn(f64) -> f64| -> f64 {
            // Images beyond |n| = 2 are below exp(-(1.5 * 12)^2 / 2).
            (-2..=2).map(|n| f(y - center + n as f64 * ly)).sum()
        };
        let g = |d: f64| norm * (-d * d / (2.0 * sigma * sigma)).exp();
        let g_dd = |d: f64| g(d) * (d * d / sigma.powi(4) - 1.0 / (sigma * sigma));
        let phi: Vec<f64> = ys.iter().map(|&y| images(y, &g)).collect();
        let phi_dd: Vec<f64> = ys.iter().map(|&y| images(y, &g_dd)).collect();
        let mass: f64 = phi.iter().sum::<f64>() * dy;
        let renorm = 1.0 / mass;
        Ok(Self {
            sigma,
            center,
            dy,
            ys,
            phi: phi.iter().map(|v| v * renorm).collect(),
            phi_dd: phi_dd.iter().map(|v| v * renorm).collect(),
            renorm,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_dd(&self) -> &[f64] {
        &self.phi_dd
    }

    /// `sup phi`, from the closed form `1 / (sigma sqrt(2 pi))`.
    pub fn sup_phi(&self) -> f64 {
        self.renorm / (self.sigma * (2.0 * PI).sqrt())
    }

    /// `|phi''|_{L2}`, from the closed form `sqrt(3 / (8 sqrt(pi) sigma^5))`.
    pub fn l2_phi_dd(&self) -> f64 {
        self.renorm * (3.0 / (8.0 * PI.sqrt() * self.sigma.powi(5))).sqrt()
    }

    /// Grid quadrature `sum_j phi_j v_j dy`, in fixed order.
    pub fn integrate(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.phi.len());
        self.phi.iter().zip(v).map(|(p, x)| p * x).sum::<f64>() * self.dy
    }
}

/// `M1(t) = int u_x(t, q(t, x0, y), y) phi(y) dy` at the snapshot times.
#[derive(Clone, Debug)]
pub struct M1Series {
    pub x0: f64,
    pub t: Vec<f64>,
    pub m1: Vec<f64>,
    pub traces: Vec<CharacteristicTrace>,
}

/// Tracks one characteristic per y-grid line from `x0`.
pub fn weighted_m1(
    traj: &Trajectory,
    p: &ModelParams,
    x0: f64,
    weight: &WeightSpec,
    opts: TrackOptions,
) -> Result<M1Series> {
    if weight.ys.len() != traj.grid().ny() {
        return Err(Error::InvalidWeight("weight tabulated on a different y-grid".into()));
    }
    let traces = track_family(traj, p, x0, &weight.ys, opts)?;
    let n = traces[0].samples.len();
    let t: Vec<f64> = traces[0].samples.iter().map(|s| s.t).collect();
    let m1 = (0..n)
        .map(|i| {
            let w: Vec<f64> = traces.iter().map(|tr| tr.samples[i].w).collect();
            weight.integrate(&w)
        })
        .collect();
    Ok(M1Series { x0, t, m1, traces })
}

/// Grid column `ix` minimizing `int u_x(x_ix, y) phi(y) dy`, with that value.
pub fn steepest_weighted_column(u: &SpectralField, weight: &WeightSpec) -> (usize, f64) {
    let ux = ddx(u);
    let grid = u.grid();
    let mut best = (0, f64::INFINITY);
    for ix in 0..grid.nx() {
        let col: Vec<f64> = (0..grid.ny()).map(|iy| ux.at(ix, iy)).collect();
        let m = weight.integrate(&col);
        if m < best.1 {
            best = (ix, m);
        }
    }
    best
}

/// Data and outcome of the weighted breaking bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C3Report {
    pub c3: f64,
    pub c_user: f64,
    pub xs_norm: f64,
    /// `(|u|^2 + |u_x|^2) / 2` over the whole box.
    pub energy: f64,
    pub sup_phi: f64,
    pub l2_phi_dd: f64,
    pub m1_0: f64,
    pub bound: RiccatiBound,
}

impl C3Report {
    pub fn t0(&self) -> Option<f64> {
        self.bound.t_star
    }
}

/// `T0` for the inequality `M1' <= -gamma/2 M1^2 + C3^2`: finite iff
/// `M1(0) < -sqrt(2/gamma) C3`.
pub fn t0_bound(m1_0: f64, c3: f64, gamma: f64) -> Result<RiccatiBound> {
    if !(c3 >= 0.0) {
        return Err(Error::InvalidModel(format!("C3 = {c3} must be nonnegative")));
    }
    let mut b = t_star(m1_0, c3 * c3, 0.5 * gamma)?;
    b.gamma = gamma;
    Ok(b)
}

/// `C3^2 = c_user |u0|_{X^s} + 3/2 gamma E(u0) sup phi + E(u0)^{1/2} |phi''|_2`
/// and the resulting `T0`, with `M1(0)` taken on the grid column `x0_index`.
pub fn c3_and_t0(
    u0: &SpectralField,
    x0_index: usize,
    weight: &WeightSpec,
    gamma: f64,
    c_user: f64,
    xs_order: f64,
) -> Result<C3Report> {
    if !(c_user >= 0.0) {
        return Err(Error::InvalidModel(format!("c_user = {c_user} must be nonnegative")));
    }
    let spec = u0.spectrum();
    let xs_norm = xs_energy(&spec, xs_order).sqrt();
    let energy = 0.5 * spec.weighted_energy(|xi, _| 1.0 + xi * xi);
    let (sup_phi, l2_phi_dd) = (weight.sup_phi(), weight.l2_phi_dd());
    let c3_sq = c_user * xs_norm + 1.5 * gamma * energy * sup_phi + energy.sqrt() * l2_phi_dd;
    let c3 = c3_sq.sqrt();
    let ux = ddx(u0);
    let col: Vec<f64> = (0..u0.grid().ny()).map(|iy| ux.at(x0_index, iy)).collect();
    let m1_0 = weight.integrate(&col);
    Ok(C3Report {
        c3,
        c_user,
        xs_norm,
        energy,
        sup_phi,
        l2_phi_dd,
        m1_0,
        bound: t0_bound(m1_0, c3, gamma)?,
    })
}

/// `D(t) = dM1/dt + gamma/2 M1^2` by finite differences, and its supremum.
#[derive(Clone, Debug, PartialEq)]
pub struct DSeries {
    pub t: Vec<f64>,
    pub d: Vec<f64>,
    pub d_max: f64,
}

impl DSeries {
    /// Supremum of `D` over samples with `t <= t_end`.
    pub fn max_until(&self, t_end: f64) -> Option<f64> {
        self.t
            .iter()
            .zip(&self.d)
            .filter(|(t, _)| **t <= t_end)
            .map(|(_, d)| *d)
            .reduce(f64::max)
    }
}

pub fn empirical_d(t: &[f64], m1: &[f64], gamma: f64) -> Result<DSeries> {
    if t.len() < 3 || t.len() != m1.len() {
        return Err(Error::ShortTrajectory {
            needed: 3,
            found: t.len().min(m1.len()),
        });
    }
    let dm = derivative(t, m1);
    let d: Vec<f64> = dm.iter().zip(m1).map(|(a, m)| a + 0.5 * gamma * m * m).collect();
    let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DSeries {
        t: t.to_vec(),
        d,
        d_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Nonlinearity;
    use crate::spectral::GridSpec;
    use crate::stepper::Snapshot;

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec::new(32, 64, 2.0 * PI, 24.0)).unwrap()
    }

    #[test]
    fn weight_is_normalized() {
        let w = WeightSpec::gaussian(&grid(), 2.0).unwrap();
        assert!((w.integrate(&vec![1.0; 64]) - 1.0).abs() < 1e-14);
        assert!(w.phi().iter().all(|v| *v >= 0.0));
        // Analytic sup matches the tabulated peak (the centre is a node).
        let peak = w.phi().iter().copied().fold(0.0, f64::max);
        assert!((peak - w.sup_phi()).abs() < 1e-12);
        // Closed-form |phi''| against grid quadrature.
        let l2: f64 = (w.phi_dd().iter().map(|v| v * v).sum::<f64>() * 24.0 / 64.0).sqrt();
        assert!((l2 - w.l2_phi_dd()).abs() < 1e-6 * l2);
        assert!(WeightSpec::gaussian(&grid(), 2.5).is_err());
    }

    #[test]
    fn t0_examples() {
        let b = t0_bound(-2.0, 1.0, 2.0).unwrap();
        assert!((b.t_star.unwrap() - 0.5 * 3f64.ln()).abs() < 1e-14);
        // Boundary: M1(0) = -sqrt(2/gamma) C3.
        assert_eq!(t0_bound(-1.0, 1.0, 2.0).unwrap().t_star, None);
    }

    #[test]
    fn zero_data_has_no_t0() {
        let g = grid();
        let w = WeightSpec::gaussian(&g, 1.0).unwrap();
        let r = c3_and_t0(&SpectralField::zeros(g), 3, &w, 1.0, 5.0, 2.0).unwrap();
        assert_eq!(r.c3, 0.0);
        assert_eq!(r.t0(), None);
    }

    #[test]
    fn d_of_constant_and_riccati_solution() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.01).collect();
        let d = empirical_d(&t, &vec![-3.0; 50], 1.0).unwrap();
        assert!(d.d.iter().all(|v| (v - 4.5).abs() < 1e-12));

        // M' = -M^2 + 1 (gamma = 2, C3 = 1) is solved by M(t) = coth(t - 2) < -1.
        let m: Vec<f64> = t.iter().map(|s| 1.0 / (s - 2.0).tanh()).collect();
        let d = empirical_d(&t, &m, 2.0).unwrap();
        assert!((d.d_max - 1.0).abs() < 1e-3, "{}", d.d_max);

        let series = DSeries {
            t: vec![0.0, 1.0, 2.0],
            d: vec![-1.0, 3.0, 7.0],
            d_max: 7.0,
        };
        assert_eq!(series.max_until(1.5), Some(3.0));
        assert_eq!(series.max_until(-1.0), None);
    }

    #[test]
    fn m1_reduces_to_single_trace() {
        let g = grid();
        let u = SpectralField::from_fn(g.clone(), |x, _| 0.3 * x.sin());
        let snaps = (0..=4)
            .map(|i| Snapshot {
                t: 0.1 * i as f64,
                step: i,
                field: u.clone(),
            })
            .collect();
        let traj = Trajectory::new(g.clone(), snaps).unwrap();
        let p = ModelParams::new(1.0, Nonlinearity::quadratic()).unwrap();
        let w = WeightSpec::gaussian(&g, 1.0).unwrap();
        let series = weighted_m1(&traj, &p, 1.0, &w, TrackOptions::default()).unwrap();
        let single = super::super::characteristics::track(&traj, &p, 1.0, 5.0).unwrap();
        for (m, s) in series.m1.iter().zip(&single.samples) {
            assert!((m - s.w).abs() < 1e-13);
        }
    }
}
