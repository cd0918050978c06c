//! Closed-form and numeric solutions of the comparison equation
//! `psi' = gamma psi^2 - K`, `psi(0) = psi0`.
//!
//! With `a = sqrt(K / gamma)` and `rho = (psi0 - a) / (psi0 + a)` the solution
//! is `psi(t) = a (1 + rho e^{2 sqrt(K gamma) t}) / (1 - rho e^{2 sqrt(K gamma) t})`,
//! which diverges at `t* = ln(1 / rho) / (2 sqrt(K gamma))` when `psi0 > a`.
//! A slope `w = -psi` obeying `w' <= -gamma w^2 + K` with `w(0) = m0 < -a`
//! therefore reaches `-infinity` no later than `t*`.

use crate::error::{Error, Result};

/// Breaking-time bound for initial slope `m0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiBound {
    pub gamma: f64,
    pub k: f64,
    pub m0: f64,
    /// `None` when `m0 >= -sqrt(K / gamma)`: no breaking is guaranteed.
    pub t_star: Option<f64>,
}

impl RiccatiBound {
    /// The threshold `-sqrt(K / gamma)` that `m0` must lie below.
    pub fn threshold(&self) -> f64 {
        -(self.k / self.gamma).sqrt()
    }
}

fn check_params(k: f64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidModel(format!("gamma = {gamma} must be positive")));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidModel(format!("K = {k} must be nonnegative")));
    }
    Ok(())
}

pub fn t_star(m0: f64, k: f64, gamma: f64) -> Result<RiccatiBound> {
    check_params(k, gamma)?;
    let mut bound = RiccatiBound {
        gamma,
        k,
        m0,
        t_star: None,
    };
    if !(m0 < bound.threshold()) {
        return Ok(bound);
    }
    bound.t_star = Some(if k == 0.0 {
        1.0 / (gamma * m0.abs())
    } else {
        // ln((sqrt(g) m0 - sqrt(K)) / (sqrt(g) m0 + sqrt(K))) written via ln_1p,
        // which stays accurate as K -> 0.
        let (sg, sk) = (gamma.sqrt(), k.sqrt());
        let log = (-2.0 * sk / (sg * m0 + sk)).ln_1p();
        log / (2.0 * (k * gamma).sqrt())
    });
    Ok(bound)
}

/// The closed-form solution `psi(t)` for `psi0 > sqrt(K / gamma)`.
pub fn riccati_lower_envelope(psi0: f64, k: f64, gamma: f64, t: f64) -> Result<f64> {
    check_params(k, gamma)?;
    let a = (k / gamma).sqrt();
    if !(psi0 > a) {
        return Err(Error::NotApplicable(format!(
            "psi0 = {psi0} must exceed sqrt(K/gamma) = {a}"
        )));
    }
    let t_star = t_star(-psi0, k, gamma)?
        .t_star
        .expect("psi0 > a implies a finite blow-up time");
    if t >= t_star {
        return Err(Error::PastBlowup { t, t_star });
    }
    if t == 0.0 {
        return Ok(psi0);
    }
    if k == 0.0 {
        return Ok(psi0 / (1.0 - gamma * psi0 * t));
    }
    // 1 - rho e^x = -expm1(x) + (2a / (psi0 + a)) e^x.
    let x = 2.0 * (k * gamma).sqrt() * t;
    let rho = (psi0 - a) / (psi0 + a);
    let e = x.exp();
    let denom = -x.exp_m1() + 2.0 * a / (psi0 + a) * e;
    Ok(a * (1.0 + rho * e) / denom)
}

fn rhs(psi: f64, k: f64, gamma: f64) -> f64 {
    gamma * psi * psi - k
}

/// Step size relative to the local time scale of the equation.
fn local_step(psi: f64, k: f64, gamma: f64, rel: f64) -> f64 {
    rel / (gamma * psi.abs() + (k * gamma).sqrt() + 1e-300)
}

fn rk4(psi: f64, h: f64, k: f64, gamma: f64) -> f64 {
    let k1 = rhs(psi, k, gamma);
    let k2 = rhs(psi + 0.5 * h * k1, k, gamma);
    let k3 = rhs(psi + 0.5 * h * k2, k, gamma);
    let k4 = rhs(psi + h * k3, k, gamma);
    psi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

const REL_STEP: f64 = 1e-3;

/// Numeric `psi(t)` by RK4 with steps scaled to `1 / (gamma |psi|)`.
/// Returns infinity once `|psi|` passes `1e150`.
pub fn integrate_riccati(psi0: f64, k: f64, gamma: f64, t: f64) -> Result<f64> {
    check_params(k, gamma)?;
    let (mut s, mut psi) = (0.0, psi0);
    while s < t {
        let h = local_step(psi, k, gamma, REL_STEP).min(t - s);
        psi = rk4(psi, h, k, gamma);
        s += h;
        if !(psi.abs() < 1e150) {
            return Ok(f64::INFINITY);
        }
    }
    Ok(psi)
}

/// First time the numeric solution exceeds `threshold`, located by linear
/// interpolation of `1 / psi` inside the crossing step. `None` when `psi`
/// settles or shrinks instead.
pub fn riccati_divergence_time(psi0: f64, k: f64, gamma: f64, threshold: f64) -> Result<Option<f64>> {
    check_params(k, gamma)?;
    if psi0 >= threshold {
        return Ok(Some(0.0));
    }
    let a = (k / gamma).sqrt();
    if !(psi0 > a) {
        return Ok(None);
    }
    let (mut s, mut psi) = (0.0, psi0);
    loop {
        let h = local_step(psi, k, gamma, REL_STEP);
        let next = rk4(psi, h, k, gamma);
        if next >= threshold || !next.is_finite() {
            let (inv0, inv1) = (1.0 / psi, if next.is_finite() { 1.0 / next } else { 0.0 });
            let theta = (inv0 - 1.0 / threshold) / (inv0 - inv1);
            return Ok(Some(s + theta.clamp(0.0, 1.0) * h));
        }
        psi = next;
        s += h;
    }
}
