use std::sync::Arc;

use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{SpectralField, Spectrum};
use super::grid::Grid;

/// Band-limited trigonometric interpolant of a field, exact on every mode
/// the grid resolves. Each evaluation costs `O(nx * ny)`.
#[derive(Clone, Debug)]
pub struct Interpolant {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl Interpolant {
    pub fn new(spectrum: &Spectrum) -> Self {
        Self {
            grid: spectrum.grid().clone(),
            coeffs: spectrum.coeffs().to_vec(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Value at an arbitrary point; coordinates are taken modulo the periods.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_with(x, y, false)
    }

    /// `d_x` of the interpolant at an arbitrary point.
    pub fn eval_dx(&self, x: f64, y: f64) -> f64 {
        self.eval_with(x, y, true)
    }

    fn eval_with(&self, x: f64, y: f64, dx: bool) -> f64 {
        let grid = &self.grid;
        let spec = grid.spec();
        let (ny, nxh) = (spec.ny, grid.nxh());
        let x = x.rem_euclid(spec.lx);
        let y = y.rem_euclid(spec.ly);

        // The unpaired y-Nyquist mode is evaluated as a cosine so the
        // interpolant stays real off the grid.
        let ey: Vec<Complex64> = (0..ny)
            .map(|ky| {
                let phase = grid.eta()[ky] * y;
                if grid.is_y_nyquist(ky) {
                    Complex64::new(phase.cos(), 0.0)
                } else {
                    Complex64::cis(phase)
                }
            })
            .collect();

        let mut total = 0.0;
        for kx in 0..nxh {
            let xi = grid.xi()[kx];
            if dx && (kx == 0 || grid.is_x_nyquist(kx)) {
                continue;
            }
            let col = &self.coeffs[kx * ny..(kx + 1) * ny];
            let mut acc = Complex64::default();
            for (c, e) in col.iter().zip(&ey) {
                acc += c * e;
            }
            let mut term = acc * Complex64::cis(xi * x);
            if dx {
                term *= Complex64::new(0.0, xi);
            }
            total += grid.column_weight(kx) * term.re;
        }
        total / (spec.nx * spec.ny) as f64
    }
}

/// Restriction of an [`Interpolant`] to the line `y = y0`: a 1D trigonometric
/// sum in x costing `O(nx)` per evaluation.
#[derive(Clone, Debug)]
pub struct LineInterpolant {
    lx: f64,
    /// Column weight and normalization folded in.
    a: Vec<Complex64>,
    /// Coefficient of the x-Nyquist column, evaluated separately.
    nyquist: Complex64,
    xi_nyquist: f64,
}

/// Re-seed the phase recurrence this often to bound round-off growth.
const RESEED: usize = 64;

impl LineInterpolant {
    pub fn eval(&self, x: f64) -> f64 {
        let base = Complex64::cis(2.0 * PI * x / self.lx);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut total = 0.0;
        for (k, a) in self.a.iter().enumerate() {
            if k % RESEED == 0 {
                phase = Complex64::cis(2.0 * PI * k as f64 * x / self.lx);
            }
            total += (a * phase).re;
            phase *= base;
        }
        total + (self.nyquist * Complex64::cis(self.xi_nyquist * x)).re
    }

    /// `d_x` at `x`; the Nyquist column has no real derivative and is skipped.
    pub fn eval_dx(&self, x: f64) -> f64 {
        let base = Complex64::cis(2.0 * PI * x / self.lx);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut total = 0.0;
        for (k, a) in self.a.iter().enumerate() {
            if k % RESEED == 0 {
                phase = Complex64::cis(2.0 * PI * k as f64 * x / self.lx);
            }
            let xi = 2.0 * PI * k as f64 / self.lx;
            total -= xi * (a * phase).im;
            phase *= base;
        }
        total
    }
}

impl Interpolant {
    pub fn line(&self, y: f64) -> LineInterpolant {
        let grid = &self.grid;
        let spec = grid.spec();
        let (ny, nxh) = (spec.ny, grid.nxh());
        let y = y.rem_euclid(spec.ly);
        let ey: Vec<Complex64> = (0..ny)
            .map(|ky| {
                let phase = grid.eta()[ky] * y;
                if grid.is_y_nyquist(ky) {
                    Complex64::new(phase.cos(), 0.0)
                } else {
                    Complex64::cis(phase)
                }
            })
            .collect();
        let norm = 1.0 / (spec.nx * spec.ny) as f64;
        let column = |kx: usize| -> Complex64 {
            let col = &self.coeffs[kx * ny..(kx + 1) * ny];
            let acc: Complex64 = col.iter().zip(&ey).map(|(c, e)| c * e).sum();
            acc * (grid.column_weight(kx) * norm)
        };
        LineInterpolant {
            lx: spec.lx,
            a: (0..nxh - 1).map(column).collect(),
            nyquist: column(nxh - 1),
            xi_nyquist: grid.xi()[nxh - 1],
        }
    }
}

impl SpectralField {
    pub fn interpolant(&self) -> Interpolant {
        Interpolant::new(&self.spectrum())
    }

    /// Trigonometric interpolation at an off-grid point.
    pub fn eval_at(&self, x: f64, y: f64) -> f64 {
        self.interpolant().eval(x, y)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn pure_mode_off_grid() {
        let g = Grid::new(GridSpec::square_2pi(16)).unwrap();
        let f = SpectralField::from_fn(g, |x, _| x.sin());
        assert!((f.eval_at(PI / 4.0, 0.3) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((f.interpolant().eval_dx(PI / 4.0, 0.3) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reproduces_grid_nodes() {
        let g = Grid::new(GridSpec::new(16, 12, 3.0, 5.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..16 * 12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SpectralField::new(g.clone(), values).unwrap();
        let interp = f.interpolant();
        for (ix, iy) in [(0, 0), (3, 7), (15, 11), (8, 6)] {
            let v = interp.eval(g.x(ix), g.y(iy));
            assert!((v - f.at(ix, iy)).abs() < 1e-12, "node ({ix},{iy})");
        }
    }

    #[test]
    fn line_matches_full_interpolant() {
        let g = Grid::new(GridSpec::new(300, 10, 7.0, 3.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..3000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SpectralField::new(g, values).unwrap();
        let full = f.interpolant();
        let line = full.line(1.3);
        for _ in 0..10 {
            let x = rng.gen_range(-7.0..14.0);
            assert!((line.eval(x) - full.eval(x, 1.3)).abs() < 1e-11);
            assert!((line.eval_dx(x) - full.eval_dx(x, 1.3)).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_direct_mode_sum() {
        // Random band-limited field built as an explicit mode sum; the
        // oracle evaluates that sum directly.
        let (lx, ly) = (4.0, 6.0);
        let g = Grid::new(GridSpec::new(24, 20, lx, ly)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let modes: Vec<(f64, f64, f64, f64)> = (0..12)
            .map(|_| {
                (
                    rng.gen_range(-5..=5) as f64,
                    rng.gen_range(-4..=4) as f64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..2.0 * PI),
                )
            })
            .collect();
        let sum = |x: f64, y: f64| -> f64 {
            modes
                .iter()
                .map(|&(j, k, a, p)| a * (2.0 * PI * (j * x / lx + k * y / ly) + p).cos())
                .sum()
        };
        let f = SpectralField::from_fn(g, sum);
        let interp = f.interpolant();
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            assert!((interp.eval(x, y) - sum(x, y)).abs() < 1e-12);
        }
    }
}
