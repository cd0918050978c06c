//! Fourier multipliers, projections and Sobolev norms on [`SpectralField`]s.
//!
//! Every operator here is diagonal in Fourier space. Symbols:
//!
//! | operator        | symbol                      |
//! |-----------------|-----------------------------|
//! | `ddx`           | `i xi`                      |
//! | `ddy`           | `i eta`                     |
//! | `inv_ddx`       | `1 / (i xi)`, 0 at `xi = 0` |
//! | `green`         | `1 / (1 + xi^2)`            |
//! | `green_dx`      | `i xi / (1 + xi^2)`         |
//! | `kp_nonlocal`   | `i eta^2 / (xi (1 + xi^2))`, 0 at `xi = 0` |

use num_complex::Complex64;

use super::field::{SpectralField, Spectrum};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn real(m: f64) -> Complex64 {
    Complex64::new(m, 0.0)
}

/// Symbol of `(1 - d_x^2)^{-1}`, i.e. convolution in x with `exp(-|x|)/2`.
pub fn green_symbol(xi: f64) -> f64 {
    1.0 / (1.0 + xi * xi)
}

/// Symbol of `G * d_x^{-1} d_y^2` (the transverse KP term), zero on `xi = 0`.
pub fn kp_symbol(xi: f64, eta: f64) -> Complex64 {
    if xi == 0.0 {
        Complex64::default()
    } else {
        I * (eta * eta / (xi * (1.0 + xi * xi)))
    }
}

pub fn ddx(f: &SpectralField) -> SpectralField {
    f.spectrum().multiply(true, |xi, _| I * xi).to_field()
}

pub fn ddy(f: &SpectralField) -> SpectralField {
    f.spectrum().multiply(true, |_, eta| I * eta).to_field()
}

/// x-antiderivative. Inputs with a nonzero x-mean are projected first;
/// the result is always flagged x-mean-free.
pub fn inv_ddx(f: &SpectralField) -> SpectralField {
    f.spectrum()
        .multiply(true, |xi, _| {
            if xi == 0.0 {
                Complex64::default()
            } else {
                -I / xi
            }
        })
        .to_field()
}

pub fn green(f: &SpectralField) -> SpectralField {
    f.spectrum().multiply(false, |xi, _| real(green_symbol(xi))).to_field()
}

pub fn green_dx(f: &SpectralField) -> SpectralField {
    f.spectrum()
        .multiply(true, |xi, _| I * (xi * green_symbol(xi)))
        .to_field()
}

/// `G * v_y` with `v_y = d_x^{-1} u_yy`; the x-mean of `f` is discarded.
pub fn kp_nonlocal(f: &SpectralField) -> SpectralField {
    f.spectrum().multiply(true, kp_symbol).to_field()
}

pub fn project_xmean(f: &SpectralField) -> SpectralField {
    let mut s = f.spectrum();
    s.project_xmean_mut();
    s.to_field()
}

pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut s = f.spectrum();
    s.dealias_mut();
    s.to_field()
}

/// `H^s` norm with weight `(1 + xi^2 + eta^2)^s`.
pub fn norm_hs(f: &SpectralField, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::NegativeOrder(s));
    }
    Ok(hs_energy(&f.spectrum(), s).sqrt())
}

pub(crate) fn hs_energy(spec: &Spectrum, s: f64) -> f64 {
    if s == 0.0 {
        spec.weighted_energy(|_, _| 1.0)
    } else {
        spec.weighted_energy(|xi, eta| (1.0 + xi * xi + eta * eta).powf(s))
    }
}

/// Relative size of the `xi = 0` column tolerated as "mean-free" for fields
/// that were not explicitly projected.
pub const MEAN_FREE_REL_TOL: f64 = 1e-12;

/// `X^s` norm: `sqrt(|u|_s^2 + |d_x^{-1} u|_s^2 + |d_x u|_s^2)`.
pub fn norm_xs(f: &SpectralField, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::NegativeOrder(s));
    }
    if !f.has_zero_x_mean(MEAN_FREE_REL_TOL) {
        return Err(Error::NotMeanFree("norm_xs"));
    }
    let spec = f.spectrum();
    Ok(xs_energy(&spec, s).sqrt())
}

/// Squared `X^s` norm from coefficients; the `xi = 0` column is ignored.
pub(crate) fn xs_energy(spec: &Spectrum, s: f64) -> f64 {
    spec.weighted_energy(|xi, eta| {
        if xi == 0.0 {
            return 0.0;
        }
        let w = if s == 0.0 {
            1.0
        } else {
            (1.0 + xi * xi + eta * eta).powf(s)
        };
        w * (1.0 + 1.0 / (xi * xi) + xi * xi)
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::spectral::{Grid, GridSpec};

    fn grid(n: usize) -> std::sync::Arc<crate::spectral::Grid> {
        Grid::new(GridSpec::square_2pi(n)).unwrap()
    }

    fn max_err(a: &SpectralField, f: impl Fn(f64, f64) -> f64) -> f64 {
        let g = a.grid();
        let mut err: f64 = 0.0;
        for iy in 0..g.ny() {
            for ix in 0..g.nx() {
                err = err.max((a.at(ix, iy) - f(g.x(ix), g.y(iy))).abs());
            }
        }
        err
    }

    #[test]
    fn pure_mode_multipliers() {
        let g = grid(32);
        let sin = SpectralField::from_fn(g.clone(), |x, _| x.sin());
        let cos = SpectralField::from_fn(g.clone(), |x, _| x.cos());
        assert!(max_err(&ddx(&sin), |x, _| x.cos()) < 1e-12);
        assert!(max_err(&inv_ddx(&cos), |x, _| x.sin()) < 1e-12);
        assert!(max_err(&green(&cos), |x, _| 0.5 * x.cos()) < 1e-12);
        assert!(max_err(&green_dx(&sin), |x, _| 0.5 * x.cos()) < 1e-12);
        let siny = SpectralField::from_fn(g.clone(), |_, y| (3.0 * y).sin());
        assert!(max_err(&ddy(&siny), |_, y| 3.0 * (3.0 * y).cos()) < 1e-12);
    }

    #[test]
    fn constants_and_zero() {
        let g = grid(16);
        let c = SpectralField::from_fn(g.clone(), |_, _| 2.5);
        assert!(inv_ddx(&c).max_abs() < 1e-14);
        assert!(inv_ddx(&c).is_x_mean_free());
        assert!(max_err(&green(&c), |_, _| 2.5) < 1e-14);
        assert!(green_dx(&c).max_abs() < 1e-14);
        assert!(project_xmean(&c).max_abs() < 1e-14);
        let z = SpectralField::zeros(g);
        assert_eq!(ddx(&z).max_abs(), 0.0);
        assert_eq!(kp_nonlocal(&z).max_abs(), 0.0);
        assert_eq!(norm_hs(&z, 2.0).unwrap(), 0.0);
        assert_eq!(norm_xs(&z, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn inv_ddx_mixed_mode() {
        let g = grid(32);
        let f = SpectralField::from_fn(g, |x, y| (2.0 * x).sin() * y.cos());
        let got = inv_ddx(&f);
        assert!(max_err(&got, |x, y| -(2.0 * x).cos() * y.cos() / 2.0) < 1e-12);
    }

    #[test]
    fn kp_nonlocal_pure_modes() {
        let g = grid(32);
        let f = SpectralField::from_fn(g.clone(), |x, y| x.sin() * y.cos());
        // i eta^2 / (xi (1 + xi^2)) is +i/2 on e^{i(x+y)}: G d_x^{-1} d_y^2 sin(x) cos(y).
        let got = kp_nonlocal(&f);
        assert!(max_err(&got, |x, y| 0.5 * x.cos() * y.cos()) < 1e-12);
        let flat = SpectralField::from_fn(g, |x, _| (3.0 * x).cos() + x.sin());
        assert!(kp_nonlocal(&flat).max_abs() < 1e-14);
    }

    #[test]
    fn sobolev_norms_of_sine() {
        let g = grid(32);
        let f = SpectralField::from_fn(g.clone(), |x, _| x.sin());
        let l2 = (2.0 * PI * PI).sqrt();
        assert_abs_diff_eq!(norm_hs(&f, 0.0).unwrap(), l2, epsilon = 1e-12);
        assert_abs_diff_eq!(norm_hs(&f, 2.0).unwrap(), 2.0 * l2, epsilon = 1e-12);
        assert_abs_diff_eq!(norm_xs(&f, 0.0).unwrap(), 3f64.sqrt() * l2, epsilon = 1e-12);
        assert!(matches!(norm_hs(&f, -1.0), Err(Error::NegativeOrder(_))));
    }

    #[test]
    fn norm_xs_second_mode() {
        // |u|^2 = 2pi^2 and H^1 weight 1 + 4 = 5 on every piece:
        // sqrt(5 * 2pi^2 * (1 + 1/4 + 4)).
        let g = grid(32);
        let f = SpectralField::from_fn(g, |x, _| (2.0 * x).sin());
        let expected = (5.0 * 2.0 * PI * PI * (1.0 + 0.25 + 4.0)).sqrt();
        assert_abs_diff_eq!(norm_xs(&f, 1.0).unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn norm_xs_rejects_mean() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |x, _| 1.0 + x.sin());
        assert!(matches!(norm_xs(&f, 0.0), Err(Error::NotMeanFree(_))));
    }
}
