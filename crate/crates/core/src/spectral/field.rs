use std::sync::Arc;

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// A real scalar field on a periodic grid, stored in physical space.
///
/// Values are row-major with y as the outer index: point `(ix, iy)` is at
/// `iy * nx + ix`. The `x_mean_free` flag records that every `(xi = 0, eta)`
/// coefficient is exactly zero, which is what makes the x-antiderivative
/// well defined.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    x_mean_free: bool,
}

impl SpectralField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.spec().len() {
            return Err(Error::Shape {
                expected: grid.spec().len(),
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            x_mean_free: false,
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.spec().len();
        Self {
            grid,
            values: vec![0.0; n],
            x_mean_free: true,
        }
    }

    /// Samples `f(x, y)` at the grid nodes.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            let y = grid.y(iy);
            for ix in 0..nx {
                values.push(f(grid.x(ix), y));
            }
        }
        Self {
            grid,
            values,
            x_mean_free: false,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx() + ix]
    }

    /// True when the field carries the x-mean-free flag.
    pub fn is_x_mean_free(&self) -> bool {
        self.x_mean_free
    }

    /// Numerical test: the `xi = 0` column is below `rel_tol` times the
    /// largest coefficient.
    pub fn has_zero_x_mean(&self, rel_tol: f64) -> bool {
        if self.x_mean_free {
            return true;
        }
        let spec = self.spectrum();
        let ny = self.grid.ny();
        let largest = spec.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mean_part = spec.coeffs[..ny].iter().map(|c| c.norm()).fold(0.0, f64::max);
        mean_part <= rel_tol * largest
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self.grid.forward(&self.values),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Pointwise map; the mean-free flag is dropped.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            x_mean_free: false,
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            x_mean_free: self.x_mean_free,
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec());
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u + a * v)
                .collect(),
            x_mean_free: self.x_mean_free && other.x_mean_free,
        }
    }

    /// Discrete L2 inner product with continuum scaling.
    pub fn inner(&self, other: &Self) -> f64 {
        let dot: f64 = self.values.iter().zip(&other.values).map(|(u, v)| u * v).sum();
        dot * self.grid.spec().cell_area()
    }
}

/// Half-complex spectral coefficients of a real field (see [`Grid`] for layout).
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub(crate) grid: Arc<Grid>,
    pub(crate) coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(Error::Shape {
                expected: grid.spectral_len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, kx: usize, ky: usize) -> Complex64 {
        self.coeffs[kx * self.grid.ny() + ky]
    }

    /// True when every `xi = 0` coefficient is exactly zero.
    pub fn is_x_mean_free(&self) -> bool {
        self.coeffs[..self.grid.ny()].iter().all(|c| *c == Complex64::default())
    }

    pub fn to_field(&self) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            values: self.grid.inverse(&self.coeffs),
            x_mean_free: self.is_x_mean_free(),
        }
    }

    /// Multiplies mode `(xi, eta)` by `m(xi, eta)`.
    ///
    /// Odd multipliers (purely imaginary symbols such as `i xi`) have no
    /// real-valued action on an unpaired Nyquist mode, so those modes are
    /// zeroed.
    pub fn multiply(&self, odd: bool, m: impl Fn(f64, f64) -> Complex64) -> Spectrum {
        let grid = &self.grid;
        let ny = grid.ny();
        let mut coeffs = self.coeffs.clone();
        for (kx, col) in coeffs.chunks_mut(ny).enumerate() {
            let xi = grid.xi()[kx];
            for (ky, c) in col.iter_mut().enumerate() {
                if odd && (grid.is_x_nyquist(kx) || grid.is_y_nyquist(ky)) {
                    *c = Complex64::default();
                } else {
                    *c *= m(xi, grid.eta()[ky]);
                }
            }
        }
        Spectrum {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Zeroes every `(xi = 0, eta)` mode in place.
    pub fn project_xmean_mut(&mut self) {
        let ny = self.grid.ny();
        self.coeffs[..ny].fill(Complex64::default());
    }

    /// Applies the two-thirds mask in place.
    pub fn dealias_mut(&mut self) {
        let ny = self.grid.ny();
        let grid = self.grid.clone();
        for (kx, col) in self.coeffs.chunks_mut(ny).enumerate() {
            for (ky, c) in col.iter_mut().enumerate() {
                if !grid.keeps(kx, ky) {
                    *c = Complex64::default();
                }
            }
        }
    }

    /// Sum over the full two-sided spectrum of `weight(xi, eta) |c|^2`,
    /// scaled so that `weight = 1` gives the continuum L2 norm squared.
    ///
    /// Summation order is fixed (column by column), so the result does not
    /// depend on the worker count.
    pub fn weighted_energy(&self, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let grid = &self.grid;
        let spec = grid.spec();
        let ny = grid.ny();
        let n = (spec.nx * spec.ny) as f64;
        let mut total = 0.0;
        for (kx, col) in self.coeffs.chunks(ny).enumerate() {
            let xi = grid.xi()[kx];
            let mut col_sum = 0.0;
            for (ky, c) in col.iter().enumerate() {
                col_sum += weight(xi, grid.eta()[ky]) * c.norm_sqr();
            }
            total += grid.column_weight(kx) * col_sum;
        }
        total * spec.lx * spec.ly / (n * n)
    }
}
