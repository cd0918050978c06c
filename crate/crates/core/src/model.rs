//! The CH-KP right-hand side in nonlocal form, the residual `R` that drives
//! slopes along characteristics, and checks on the nonlinearity `g`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::ops::{green_symbol, kp_symbol, MEAN_FREE_REL_TOL};
use crate::spectral::{Grid, SpectralField, Spectrum};

/// Polynomial growth bound `|g'(u)| <= c1 |u|^alpha + c2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Growth {
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Growth {
    pub fn new(alpha: f64, c1: f64, c2: f64) -> Self {
        Self { alpha, c1, c2 }
    }

    pub fn bound(&self, u: f64) -> f64 {
        self.c1 * u.abs().powf(self.alpha) + self.c2
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `g(u) = sum_k coeffs[k] u^k`.
    Polynomial(Vec<f64>),
    Custom { g: ScalarFn, g_prime: ScalarFn },
}

/// The smooth nonlinearity `g` with `g(0) = 0`.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    kind: Kind,
    growth: Option<Growth>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Nonlinearity");
        d.field("name", &self.name);
        if let Kind::Polynomial(c) = &self.kind {
            d.field("coeffs", c);
        }
        d.field("growth", &self.growth).finish()
    }
}

/// Names accepted by [`Nonlinearity::preset`].
pub const PRESET_NAMES: [&str; 4] = ["classical", "quadratic", "cubic", "quartic"];

/// Tolerance on `g(0)` at registration.
const G_ZERO_TOL: f64 = 1e-14;

impl Nonlinearity {
    /// `g(u) = 2 kappa u + 3 u^2`, the shallow-water case (with `gamma = 1`).
    pub fn classical(kappa: f64) -> Self {
        Self {
            name: "classical".into(),
            kind: Kind::Polynomial(vec![0.0, 2.0 * kappa, 3.0]),
            growth: Some(Growth::new(1.0, 6.0, 2.0 * kappa.abs())),
        }
    }

    /// `g(u) = 3 u^2`.
    pub fn quadratic() -> Self {
        Self {
            name: "quadratic".into(),
            kind: Kind::Polynomial(vec![0.0, 0.0, 3.0]),
            growth: Some(Growth::new(1.0, 6.0, 0.0)),
        }
    }

    /// `g(u) = u^3`.
    pub fn cubic() -> Self {
        Self {
            name: "cubic".into(),
            kind: Kind::Polynomial(vec![0.0, 0.0, 0.0, 1.0]),
            growth: Some(Growth::new(2.0, 3.0, 0.0)),
        }
    }

    /// `g(u) = u^4`.
    pub fn quartic() -> Self {
        Self {
            name: "quartic".into(),
            kind: Kind::Polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0]),
            growth: Some(Growth::new(3.0, 4.0, 0.0)),
        }
    }

    pub fn preset(name: &str, kappa: f64) -> Result<Self> {
        match name {
            "classical" => Ok(Self::classical(kappa)),
            "quadratic" => Ok(Self::quadratic()),
            "cubic" => Ok(Self::cubic()),
            "quartic" => Ok(Self::quartic()),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Polynomial with `coeffs[k]` multiplying `u^k`. A growth bound is derived
    /// from the coefficients: `alpha = deg - 1`, `c1 = sum_{k>=2} k |a_k|`,
    /// `c2 = |a_1| + c1`.
    pub fn polynomial(name: impl Into<String>, coeffs: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel(format!("{name}: non-finite coefficient")));
        }
        if coeffs.first().is_some_and(|c0| c0.abs() > G_ZERO_TOL) {
            return Err(Error::InvalidModel(format!("{name}: g(0) must be 0")));
        }
        let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        let c1: f64 = coeffs
            .iter()
            .enumerate()
            .skip(2)
            .map(|(k, a)| k as f64 * a.abs())
            .sum();
        let a1 = coeffs.get(1).copied().unwrap_or(0.0).abs();
        let growth = Growth::new(degree.saturating_sub(1) as f64, c1, a1 + c1);
        Ok(Self {
            name,
            kind: Kind::Polynomial(coeffs),
            growth: Some(growth),
        })
    }

    /// Arbitrary smooth `g` with its derivative. Registration checks
    /// `g(0) = 0` and that `g_prime` agrees with centered differences of `g`
    /// on `[-10, 10]`.
    pub fn custom(
        name: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth: Option<Growth>,
    ) -> Result<Self> {
        let name = name.into();
        if g(0.0).abs() > G_ZERO_TOL {
            return Err(Error::InvalidModel(format!("{name}: g(0) = {} != 0", g(0.0))));
        }
        let h = 1e-5;
        for i in 0..=200 {
            let u = -10.0 + 0.1 * i as f64;
            let fd = (g(u + h) - g(u - h)) / (2.0 * h);
            let exact = g_prime(u);
            if (fd - exact).abs() > 1e-6 * exact.abs().max(1.0) {
                return Err(Error::InvalidModel(format!(
                    "{name}: g' = {exact} disagrees with finite difference {fd} at u = {u}"
                )));
            }
        }
        Ok(Self {
            name,
            kind: Kind::Custom {
                g: Arc::new(g),
                g_prime: Arc::new(g_prime),
            },
            growth,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = Some(growth);
        self
    }

    /// Coefficients when `g` is a polynomial.
    pub fn coefficients(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Polynomial(c) => Some(c),
            Kind::Custom { .. } => None,
        }
    }

    pub fn g(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, a| acc * u + a),
            Kind::Custom { g, .. } => g(u),
        }
    }

    pub fn g_prime(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, a)| acc * u + k as f64 * a),
            Kind::Custom { g_prime, .. } => g_prime(u),
        }
    }
}

/// `gamma` and `g`.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub gamma: f64,
    pub nonlinearity: Nonlinearity,
}

impl ModelParams {
    pub fn new(gamma: f64, nonlinearity: Nonlinearity) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidModel(format!("gamma = {gamma} must be positive")));
        }
        Ok(Self { gamma, nonlinearity })
    }

    /// Classical shallow-water case: `g = 2 kappa u + 3 u^2`, `gamma = 1`.
    pub fn classical(kappa: f64) -> Self {
        Self {
            gamma: 1.0,
            nonlinearity: Nonlinearity::classical(kappa),
        }
    }

    /// Pointwise `F = g(u)/2 + gamma/2 u_x^2 - gamma/2 u^2`.
    pub fn flux_density(&self, u: f64, ux: f64) -> f64 {
        0.5 * self.nonlinearity.g(u) + 0.5 * self.gamma * (ux * ux - u * u)
    }
}

/// Precomputed symbols for evaluating the right-hand side on coefficients.
///
/// The right-hand side splits as `u_t = N(u) + L u` where `L` is the
/// diagonal transverse term `-kp_symbol` and
/// `N(u) = -d_x (gamma/2 u^2) - G * d_x F`, both products dealiased.
/// `N` vanishes on the `xi = 0` column by construction.
#[derive(Debug)]
pub struct RhsEvaluator {
    grid: Arc<Grid>,
    params: ModelParams,
    ik: Vec<Complex64>,
    green_ik: Vec<Complex64>,
    linear: Vec<Complex64>,
    mask: Vec<bool>,
}

/// Physical fields produced while evaluating `N`.
pub struct NonlinearParts {
    pub n_hat: Vec<Complex64>,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
}

impl RhsEvaluator {
    pub fn new(grid: Arc<Grid>, params: ModelParams) -> Self {
        let ny = grid.ny();
        let len = grid.spectral_len();
        let mut ik = Vec::with_capacity(len);
        let mut green_ik = Vec::with_capacity(len);
        let mut linear = Vec::with_capacity(len);
        let mut mask = Vec::with_capacity(len);
        for kx in 0..grid.nxh() {
            let xi = grid.xi()[kx];
            for ky in 0..ny {
                let eta = grid.eta()[ky];
                let nyq = grid.is_x_nyquist(kx) || grid.is_y_nyquist(ky);
                let d = if nyq { 0.0 } else { xi };
                ik.push(Complex64::new(0.0, d));
                green_ik.push(Complex64::new(0.0, d * green_symbol(xi)));
                linear.push(if nyq { Complex64::default() } else { -kp_symbol(xi, eta) });
                mask.push(grid.keeps(kx, ky));
            }
        }
        Self {
            grid,
            params,
            ik,
            green_ik,
            linear,
            mask,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Symbol of the linear transverse term, purely imaginary.
    pub fn linear_symbol(&self) -> &[Complex64] {
        &self.linear
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// `i xi` with Nyquist modes zeroed.
    pub fn ik(&self) -> &[Complex64] {
        &self.ik
    }

    pub fn nonlinear(&self, u_hat: &[Complex64]) -> NonlinearParts {
        let grid = &self.grid;
        let u = grid.inverse(u_hat);
        let ux_hat: Vec<Complex64> = u_hat.iter().zip(&self.ik).map(|(c, k)| c * k).collect();
        let ux = grid.inverse(&ux_hat);

        let half_gamma = 0.5 * self.params.gamma;
        let sq: Vec<f64> = u.iter().map(|v| half_gamma * v * v).collect();
        let flux: Vec<f64> = u
            .iter()
            .zip(&ux)
            .map(|(&a, &b)| self.params.flux_density(a, b))
            .collect();
        let sq_hat = grid.forward(&sq);
        let flux_hat = grid.forward(&flux);

        let ny = grid.ny();
        let mut n_hat: Vec<Complex64> = (0..u_hat.len())
            .map(|i| {
                if self.mask[i] {
                    -(self.ik[i] * sq_hat[i] + self.green_ik[i] * flux_hat[i])
                } else {
                    Complex64::default()
                }
            })
            .collect();
        n_hat[..ny].fill(Complex64::default());
        NonlinearParts { n_hat, u, ux }
    }

    /// Full right-hand side `N(u) + L u` on coefficients.
    pub fn rhs_hat(&self, u_hat: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.nonlinear(u_hat).n_hat;
        for ((o, c), l) in out.iter_mut().zip(u_hat).zip(&self.linear) {
            *o += l * c;
        }
        out
    }

    /// Coefficients of `F` with the two-thirds mask applied.
    pub fn flux_hat(&self, u_hat: &[Complex64]) -> Vec<Complex64> {
        let grid = &self.grid;
        let u = grid.inverse(u_hat);
        let ux_hat: Vec<Complex64> = u_hat.iter().zip(&self.ik).map(|(c, k)| c * k).collect();
        let ux = grid.inverse(&ux_hat);
        let flux: Vec<f64> = u
            .iter()
            .zip(&ux)
            .map(|(&a, &b)| self.params.flux_density(a, b))
            .collect();
        let mut f_hat = grid.forward(&flux);
        for (c, keep) in f_hat.iter_mut().zip(&self.mask) {
            if !keep {
                *c = Complex64::default();
            }
        }
        f_hat
    }

    /// Coefficients of `R = d_x(G * d_x F) + d_x(G * v_y)`.
    pub fn residual_hat(&self, u_hat: &[Complex64]) -> Vec<Complex64> {
        let f_hat = self.flux_hat(u_hat);
        let grid = &self.grid;
        let ny = grid.ny();
        let mut out = vec![Complex64::default(); u_hat.len()];
        for kx in 0..grid.nxh() {
            let xi = grid.xi()[kx];
            for ky in 0..ny {
                let i = kx * ny + ky;
                // d_x G d_x has symbol -xi^2 / (1 + xi^2); d_x of the KP term is
                // i xi * kp_symbol = -eta^2 / (1 + xi^2).
                let eta = grid.eta()[ky];
                let r1 = -xi * xi * green_symbol(xi) * f_hat[i];
                let r2 = if xi == 0.0 || grid.is_y_nyquist(ky) || grid.is_x_nyquist(kx) {
                    Complex64::default()
                } else {
                    -eta * eta * green_symbol(xi) * u_hat[i]
                };
                out[i] = r1 + r2;
            }
        }
        out
    }
}

fn require_mean_free(u: &SpectralField, op: &'static str) -> Result<()> {
    if u.has_zero_x_mean(MEAN_FREE_REL_TOL) {
        Ok(())
    } else {
        Err(Error::NotMeanFree(op))
    }
}

fn field_from(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> SpectralField {
    Spectrum::new(grid.clone(), coeffs)
        .expect("evaluator output matches grid")
        .to_field()
}

/// `u_t = -gamma u u_x - G * d_x F - G * v_y`, dealiased and x-mean-free.
pub fn rhs(u: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    require_mean_free(u, "rhs")?;
    let eval = RhsEvaluator::new(u.grid().clone(), p.clone());
    let mut u_hat = u.spectrum();
    u_hat.project_xmean_mut();
    Ok(field_from(u.grid(), eval.rhs_hat(u_hat.coeffs())))
}

/// The flux field `F` (dealiased).
pub fn flux(u: &SpectralField, p: &ModelParams) -> SpectralField {
    let eval = RhsEvaluator::new(u.grid().clone(), p.clone());
    field_from(u.grid(), eval.flux_hat(u.spectrum().coeffs()))
}

/// The residual `R = d_x(G * d_x F) + d_x(G * v_y)`.
pub fn residual_r(u: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    require_mean_free(u, "residual_r")?;
    let eval = RhsEvaluator::new(u.grid().clone(), p.clone());
    let mut u_hat = u.spectrum();
    u_hat.project_xmean_mut();
    Ok(field_from(u.grid(), eval.residual_hat(u_hat.coeffs())))
}

fn sample_points(umin: f64, umax: f64, n: usize) -> Result<Vec<f64>> {
    if !(umin < umax) || n < 2 {
        return Err(Error::EmptyRange(umin, umax));
    }
    let step = (umax - umin) / (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n).map(|i| umin + step * i as f64).collect();
    if umin <= 0.0 && umax >= 0.0 && !pts.contains(&0.0) {
        pts.push(0.0);
        pts.sort_by(f64::total_cmp);
    }
    Ok(pts)
}

/// Outcome of sampling `g(u) - gamma u^2`.
#[derive(Clone, Debug, PartialEq)]
pub enum LiouvilleVerdict {
    /// `g(u) > gamma u^2` at every nonzero sample.
    HoldsStrict,
    /// `g(u) >= gamma u^2` everywhere, with equality off zero.
    HoldsWeak,
    /// Most negative sample of `g(u) - gamma u^2`.
    Fails { at: f64, value: f64 },
}

pub fn check_liouville_condition(
    p: &ModelParams,
    umin: f64,
    umax: f64,
    n_samples: usize,
) -> Result<LiouvilleVerdict> {
    let pts = sample_points(umin, umax, n_samples)?;
    let g = &p.nonlinearity;
    let mut worst: Option<(f64, f64)> = None;
    let mut strict = true;
    for &u in &pts {
        let gu = g.g(u);
        let q = p.gamma * u * u;
        let h = gu - q;
        let tol = G_ZERO_TOL * gu.abs().max(q).max(1.0);
        if u == 0.0 {
            if h.abs() > tol {
                strict = false;
            }
            continue;
        }
        if h < -tol && worst.is_none_or(|(_, v)| h < v) {
            worst = Some((u, h));
        }
        if h <= tol {
            strict = false;
        }
    }
    Ok(match worst {
        Some((at, value)) => LiouvilleVerdict::Fails { at, value },
        None if strict => LiouvilleVerdict::HoldsStrict,
        None => LiouvilleVerdict::HoldsWeak,
    })
}

/// Outcome of sampling `|g'(u)| / (c1 |u|^alpha + c2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthVerdict {
    pub holds: bool,
    /// Largest observed ratio and where it occurs.
    pub max_ratio: f64,
    pub at: f64,
}

pub fn check_growth(
    p: &ModelParams,
    umin: f64,
    umax: f64,
    n_samples: usize,
) -> Result<GrowthVerdict> {
    let growth = p
        .nonlinearity
        .growth()
        .ok_or_else(|| Error::MissingGrowth(p.nonlinearity.name().to_string()))?;
    let pts = sample_points(umin, umax, n_samples)?;
    let mut verdict = GrowthVerdict {
        holds: true,
        max_ratio: 0.0,
        at: pts[0],
    };
    for &u in &pts {
        let lhs = p.nonlinearity.g_prime(u).abs();
        let rhs = growth.bound(u);
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        if ratio > verdict.max_ratio {
            verdict.max_ratio = ratio;
            verdict.at = u;
        }
    }
    verdict.holds = verdict.max_ratio <= 1.0 + 1e-12;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::{ddx, GridSpec};

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(GridSpec::square_2pi(n)).unwrap()
    }

    #[test]
    fn polynomial_evaluation() {
        let g = Nonlinearity::classical(1.5);
        assert!((g.g(2.0) - (2.0 * 1.5 * 2.0 + 12.0)).abs() < 1e-14);
        assert!((g.g_prime(2.0) - (3.0 + 12.0)).abs() < 1e-14);
        assert_eq!(Nonlinearity::quartic().g_prime(2.0), 32.0);
    }

    #[test]
    fn registration_checks() {
        assert!(Nonlinearity::polynomial("bad", vec![1.0, 2.0]).is_err());
        assert!(Nonlinearity::custom("shifted", |u: f64| u.cos(), |u: f64| -u.sin(), None).is_err());
        assert!(Nonlinearity::custom("wrong-derivative", |u: f64| u.sin(), |u: f64| u.sin(), None)
            .is_err());
        let ok = Nonlinearity::custom("sine", |u: f64| u.sin(), |u: f64| u.cos(), None).unwrap();
        assert_eq!(ok.name(), "sine");
        assert!(ModelParams::new(0.0, Nonlinearity::quadratic()).is_err());
        assert!(matches!(
            Nonlinearity::preset("quintic", 1.0),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn rhs_of_zero_is_zero() {
        let g = grid(16);
        let z = SpectralField::zeros(g);
        let out = rhs(&z, &ModelParams::classical(1.0)).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        assert_eq!(residual_r(&z, &ModelParams::classical(1.0)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rhs_rejects_mean() {
        let g = grid(16);
        let u = SpectralField::from_fn(g, |x, _| 0.3 + x.sin());
        assert!(matches!(
            rhs(&u, &ModelParams::classical(1.0)),
            Err(Error::NotMeanFree(_))
        ));
    }

    #[test]
    fn residual_of_cosine() {
        // gamma = 1, g = u^2, u = cos x: F = sin^2(x)/2, R = cos(2x)/5.
        let g = grid(32);
        let p = ModelParams::new(1.0, Nonlinearity::polynomial("u2", vec![0.0, 0.0, 1.0]).unwrap())
            .unwrap();
        let u = SpectralField::from_fn(g.clone(), |x, _| x.cos());
        let r = residual_r(&u, &p).unwrap();
        for ix in 0..32 {
            let x = g.x(ix);
            assert!((r.at(ix, 5) - (2.0 * x).cos() / 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_mode_frequency() {
        // u = A cos(x + y) evolves as A cos(x + y - omega t), so
        // u_t = A omega sin(x + y) with omega = (kappa xi + eta^2/xi)/(1 + xi^2) = 1.
        let g = grid(16);
        let amp = 1e-8;
        let u = SpectralField::from_fn(g.clone(), |x, y| amp * (x + y).cos());
        let out = rhs(&u, &ModelParams::classical(1.0)).unwrap();
        for iy in 0..16 {
            for ix in 0..16 {
                let expect = (g.x(ix) + g.y(iy)).sin();
                assert!((out.at(ix, iy) / amp - expect).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn y_independent_rhs_matches_quadrature() {
        // Oracle: -gamma u u_x - int K(x - z) F(z) dz with the periodized
        // kernel K = d_x G, integrated with Simpson's rule on each side of
        // the kink.
        let p = ModelParams::classical(1.0);
        let u_fn = |x: f64| 0.3 * x.cos() + 0.2 * (2.0 * x).sin();
        let ux_fn = |x: f64| -0.3 * x.sin() + 0.4 * (2.0 * x).cos();
        let flux = |x: f64| p.flux_density(u_fn(x), ux_fn(x));
        let lx = 2.0 * PI;
        let kernel = |s: f64| -> f64 {
            (-30..=30)
                .map(|n| {
                    let t = s + n as f64 * lx;
                    -0.5 * t.signum() * (-t.abs()).exp()
                })
                .sum()
        };
        let oracle = |x: f64| -> f64 {
            let m = 4000;
            let h = lx / m as f64;
            let mut acc = 0.0;
            for i in 0..=m {
                let s = i as f64 * h;
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                // One-sided limits at the kink.
                let kv = if i == 0 {
                    kernel(f64::MIN_POSITIVE)
                } else if i == m {
                    kernel(lx - 1e-12)
                } else {
                    kernel(s)
                };
                acc += w * kv * flux(x - s);
            }
            -p.gamma * u_fn(x) * ux_fn(x) - acc * h / 3.0
        };
        let g = Grid::new(GridSpec::new(32, 8, lx, 3.0)).unwrap();
        let u = SpectralField::from_fn(g.clone(), |x, _| u_fn(x));
        let out = rhs(&u, &p).unwrap();
        for ix in (0..32).step_by(3) {
            let x = g.x(ix);
            assert!((out.at(ix, 2) - oracle(x)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn semi_discrete_energy_balance() {
        // d/dt (|u|^2 + |u_x|^2) = 2<u, u_t> + 2<u_x, d_x u_t> vanishes for
        // the quadratic flux on dealiased states.
        let g = grid(48);
        let p = ModelParams::classical(1.0);
        let u = SpectralField::from_fn(g.clone(), |x, y| {
            0.4 * (x + 0.3).sin() * y.cos() + 0.25 * (2.0 * x).cos() * (2.0 * y + 1.0).sin()
                + 0.1 * (3.0 * x - 0.7).sin()
        });
        let u = crate::spectral::project_xmean(&crate::spectral::dealias(&u));
        let ut = rhs(&u, &p).unwrap();
        let ux = ddx(&u);
        let rate = 2.0 * u.inner(&ut) + 2.0 * ux.inner(&ddx(&ut));
        let scale = u.inner(&u) + ux.inner(&ux);
        assert!(rate.abs() <= 1e-8 * scale, "rate {rate} scale {scale}");
    }

    #[test]
    fn liouville_examples() {
        let quad = ModelParams::new(1.0, Nonlinearity::quadratic()).unwrap();
        assert_eq!(
            check_liouville_condition(&quad, -2.0, 2.0, 401).unwrap(),
            LiouvilleVerdict::HoldsStrict
        );
        let classical = ModelParams::classical(1.0);
        match check_liouville_condition(&classical, -1.0, 1.0, 401).unwrap() {
            LiouvilleVerdict::Fails { at, value } => {
                assert!((at + 0.5).abs() < 1e-12);
                assert!((value + 0.5).abs() < 1e-12);
            }
            other => panic!("expected failure, got {other:?}"),
        }
        let square =
            ModelParams::new(1.0, Nonlinearity::polynomial("u2", vec![0.0, 0.0, 1.0]).unwrap())
                .unwrap();
        assert_eq!(
            check_liouville_condition(&square, -1.0, 1.0, 101).unwrap(),
            LiouvilleVerdict::HoldsWeak
        );
        assert!(matches!(
            check_liouville_condition(&square, 1.0, 1.0, 10),
            Err(Error::EmptyRange(..))
        ));
    }

    #[test]
    fn growth_examples() {
        let classical = ModelParams::classical(1.0);
        let v = check_growth(&classical, -10.0, 10.0, 2001).unwrap();
        assert!(v.holds, "{v:?}");

        let cubic = |growth| {
            ModelParams::new(1.0, Nonlinearity::cubic().with_growth(growth)).unwrap()
        };
        let v = check_growth(&cubic(Growth::new(2.0, 3.0, 0.0)), -5.0, 5.0, 1001).unwrap();
        assert!(v.holds);
        assert!((v.max_ratio - 1.0).abs() < 1e-12);
        let v = check_growth(&cubic(Growth::new(1.0, 3.0, 0.0)), -5.0, 5.0, 1001).unwrap();
        assert!(!v.holds);
        assert!(v.at.abs() > 1.0);

        let bare = Nonlinearity::custom("sine", |u: f64| u.sin(), |u: f64| u.cos(), None).unwrap();
        let p = ModelParams::new(1.0, bare).unwrap();
        assert!(matches!(check_growth(&p, -1.0, 1.0, 10), Err(Error::MissingGrowth(_))));
    }
}
