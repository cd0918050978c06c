use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Geometry of the periodic box `[0, lx) x [0, ly)` sampled on `nx x ny` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Self {
        Self { nx, ny, lx, ly }
    }

    /// Square `[0, 2pi)^2` box with `n x n` points.
    pub fn square_2pi(n: usize) -> Self {
        Self::new(n, n, 2.0 * PI, 2.0 * PI)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and at least 8"
                )));
            }
        }
        for (name, l) in [("lx", self.lx), ("ly", self.ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Area element of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Wavenumber tables, dealiasing mask and FFT plans for one [`GridSpec`].
///
/// Spectral coefficients use the half-complex layout produced by a real
/// transform along x followed by a complex transform along y, stored
/// column-major: mode `(kx, ky)` lives at `kx * ny + ky` with
/// `kx in 0..=nx/2`.
pub struct Grid {
    spec: GridSpec,
    nxh: usize,
    xi: Vec<f64>,
    eta: Vec<f64>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let GridSpec { nx, ny, lx, ly } = spec;
        let nxh = nx / 2 + 1;

        // Signed index tables: j in -nx/2..nx/2-1, so the Nyquist column is negative.
        let jx: Vec<i64> = (0..nxh)
            .map(|k| if k == nx / 2 { -(k as i64) } else { k as i64 })
            .collect();
        let jy: Vec<i64> = (0..ny)
            .map(|k| if k >= ny / 2 { k as i64 - ny as i64 } else { k as i64 })
            .collect();

        let xi = jx.iter().map(|&j| 2.0 * PI * j as f64 / lx).collect();
        let eta = jy.iter().map(|&j| 2.0 * PI * j as f64 / ly).collect();
        let keep_x = jx.iter().map(|&j| 3 * j.unsigned_abs() as usize <= nx).collect();
        let keep_y = jy.iter().map(|&j| 3 * j.unsigned_abs() as usize <= ny).collect();

        let mut real_planner = RealFftPlanner::<f64>::new();
        let mut planner = FftPlanner::<f64>::new();
        Ok(Arc::new(Self {
            spec,
            nxh,
            xi,
            eta,
            keep_x,
            keep_y,
            r2c: real_planner.plan_fft_forward(nx),
            c2r: real_planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn ny(&self) -> usize {
        self.spec.ny
    }

    /// Number of stored x-modes (`nx/2 + 1`).
    pub fn nxh(&self) -> usize {
        self.nxh
    }

    /// Length of a spectral coefficient array.
    pub fn spectral_len(&self) -> usize {
        self.nxh * self.spec.ny
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.spec.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        iy as f64 * self.spec.dy()
    }

    pub fn is_x_nyquist(&self, kx: usize) -> bool {
        kx == self.spec.nx / 2
    }

    pub fn is_y_nyquist(&self, ky: usize) -> bool {
        ky == self.spec.ny / 2
    }

    /// Two-thirds rule: `false` for modes with `|j| > nx/3` or `|k| > ny/3`.
    pub fn keeps(&self, kx: usize, ky: usize) -> bool {
        self.keep_x[kx] && self.keep_y[ky]
    }

    /// Multiplicity of column `kx` in the full (two-sided) spectrum.
    pub(crate) fn column_weight(&self, kx: usize) -> f64 {
        if kx == 0 || self.is_x_nyquist(kx) {
            1.0
        } else {
            2.0
        }
    }

    /// Unnormalized forward transform of row-major physical values.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let GridSpec { nx, ny, .. } = self.spec;
        assert_eq!(values.len(), nx * ny, "field length does not match grid");
        let nxh = self.nxh;

        let mut rows = vec![Complex64::default(); nxh * ny];
        rows.par_chunks_mut(nxh)
            .zip(values.par_chunks(nx))
            .for_each_init(
                || (self.r2c.make_input_vec(), self.r2c.make_scratch_vec()),
                |(input, scratch), (out, row)| {
                    input.copy_from_slice(row);
                    self.r2c
                        .process_with_scratch(input, out, scratch)
                        .expect("r2c buffer sizes are fixed by the plan");
                },
            );

        let mut cols = vec![Complex64::default(); nxh * ny];
        for (iy, row) in rows.chunks(nxh).enumerate() {
            for (kx, c) in row.iter().enumerate() {
                cols[kx * ny + iy] = *c;
            }
        }
        let scratch_len = self.fwd_y.get_inplace_scratch_len();
        cols.par_chunks_mut(ny).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, col| self.fwd_y.process_with_scratch(col, scratch),
        );
        cols
    }

    /// Inverse of [`Grid::forward`], including the `1/(nx ny)` scaling.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let GridSpec { nx, ny, .. } = self.spec;
        let nxh = self.nxh;
        assert_eq!(coeffs.len(), nxh * ny, "spectrum length does not match grid");

        let mut cols = coeffs.to_vec();
        let scratch_len = self.inv_y.get_inplace_scratch_len();
        cols.par_chunks_mut(ny).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, col| self.inv_y.process_with_scratch(col, scratch),
        );

        let mut rows = vec![Complex64::default(); nxh * ny];
        for (kx, col) in cols.chunks(ny).enumerate() {
            for (iy, c) in col.iter().enumerate() {
                rows[iy * nxh + kx] = *c;
            }
        }

        let scale = 1.0 / (nx * ny) as f64;
        let mut values = vec![0.0; nx * ny];
        values
            .par_chunks_mut(nx)
            .zip(rows.par_chunks_mut(nxh))
            .for_each_init(
                || self.c2r.make_scratch_vec(),
                |scratch, (out, row)| {
                    // Real rows: DC and Nyquist carry no imaginary part.
                    row[0].im = 0.0;
                    row[nxh - 1].im = 0.0;
                    self.c2r
                        .process_with_scratch(row, out, scratch)
                        .expect("c2r buffer sizes are fixed by the plan");
                    for v in out.iter_mut() {
                        *v *= scale;
                    }
                },
            );
        values
    }
}
