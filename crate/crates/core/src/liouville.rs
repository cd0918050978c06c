//! Probes of the non-vanishing property: scans for `(t, x)` windows where
//! `sup_y |u|` stays below a tolerance, and the functionals `q` and `p`
//! used in its proof.
//!
//! A scan is evidence, not proof: it can only report what the grid resolves.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{ddx, SpectralField};
use crate::stepper::Trajectory;

/// Rectangle of snapshot rows `i0..=i1` and x-columns `j0..=j1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl Window {
    pub fn cells(&self) -> usize {
        (self.i1 - self.i0 + 1) * (self.j1 - self.j0 + 1)
    }

    /// `(t1 - t0) * (x1 - x0 + dx)`; a single-row window has zero area.
    pub fn area(&self, dx: f64) -> f64 {
        (self.t1 - self.t0) * (self.x1 - self.x0 + dx)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VanishReport {
    pub tol: f64,
    /// Largest rectangle inside each connected sub-threshold region.
    pub windows: Vec<Window>,
    pub largest_cells: usize,
    pub largest_area: f64,
}

/// Scans `sup_y |u(t_i, x_j, y)| < tol` over every snapshot and x-column.
///
/// Sub-threshold cells are grouped into 4-connected regions (x is not
/// wrapped, so windows stay inside one period); each region contributes its
/// largest all-sub-threshold rectangle, which cannot be extended by a cell in
/// any direction.
pub fn vanish_scan(traj: &Trajectory, tol: f64) -> Result<VanishReport> {
    if traj.len() < 2 {
        return Err(Error::ShortTrajectory {
            needed: 2,
            found: traj.len(),
        });
    }
    let grid = traj.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let rows = traj.len();
    let mut below = vec![false; rows * nx];
    for (i, snap) in traj.snapshots().iter().enumerate() {
        let v = snap.field.values();
        for j in 0..nx {
            let sup = (0..ny).fold(0.0f64, |m, iy| m.max(v[iy * nx + j].abs()));
            below[i * nx + j] = sup < tol;
        }
    }

    let labels = label_components(&below, rows, nx);
    let n_labels = labels.iter().flatten().map(|l| l + 1).max().unwrap_or(0);
    let mut boxes = vec![(usize::MAX, 0usize, usize::MAX, 0usize); n_labels];
    for i in 0..rows {
        for j in 0..nx {
            if let Some(l) = labels[i * nx + j] {
                let b = &mut boxes[l];
                *b = (b.0.min(i), b.1.max(i), b.2.min(j), b.3.max(j));
            }
        }
    }

    let times = traj.times();
    let dx = grid.spec().dx();
    let windows: Vec<Window> = boxes
        .iter()
        .enumerate()
        .map(|(l, &(r0, r1, c0, c1))| {
            let (i0, i1, j0, j1) = largest_rectangle(&labels, nx, l, r0, r1, c0, c1);
            Window {
                i0,
                i1,
                j0,
                j1,
                t0: times[i0],
                t1: times[i1],
                x0: grid.x(j0),
                x1: grid.x(j1),
            }
        })
        .collect();
    let largest_cells = windows.iter().map(|w| w.cells()).max().unwrap_or(0);
    let largest_area = windows.iter().map(|w| w.area(dx)).fold(0.0, f64::max);
    Ok(VanishReport {
        tol,
        windows,
        largest_cells,
        largest_area,
    })
}

fn label_components(mask: &[bool], rows: usize, cols: usize) -> Vec<Option<usize>> {
    let mut labels = vec![None; mask.len()];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = (k / cols, k % cols);
            let mut visit = |n: usize| {
                if mask[n] && labels[n].is_none() {
                    labels[n] = Some(next);
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(k - cols);
            }
            if i + 1 < rows {
                visit(k + cols);
            }
            if j > 0 {
                visit(k - 1);
            }
            if j + 1 < cols {
                visit(k + 1);
            }
        }
        next += 1;
    }
    labels
}

/// Largest rectangle of cells labelled `l` inside the bounding box, by the
/// histogram-and-stack method row by row.
fn largest_rectangle(
    labels: &[Option<usize>],
    cols: usize,
    l: usize,
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
) -> (usize, usize, usize, usize) {
    let width = c1 - c0 + 1;
    let mut heights = vec![0usize; width];
    let mut best = (0usize, (r0, r0, c0, c0));
    for i in r0..=r1 {
        for (k, h) in heights.iter_mut().enumerate() {
            *h = if labels[i * cols + c0 + k] == Some(l) { *h + 1 } else { 0 };
        }
        let mut stack: Vec<usize> = Vec::new();
        for k in 0..=width {
            let h = if k < width { heights[k] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] <= h {
                    break;
                }
                stack.pop();
                let left = stack.last().map_or(0, |&s| s + 1);
                let area = heights[top] * (k - left);
                if area > best.0 {
                    best = (area, (i + 1 - heights[top], i, c0 + left, c0 + k - 1));
                }
            }
            stack.push(k);
        }
    }
    best.1
}

/// Pointwise `q = g(u)/2 + gamma/2 u_x^2 - gamma/2 u^2`.
pub fn q_functional(u: &SpectralField, p: &ModelParams) -> SpectralField {
    let ux = ddx(u);
    let values = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&a, &b)| p.flux_density(a, b))
        .collect();
    SpectralField::new(u.grid().clone(), values).expect("same grid")
}

/// Periodized kernel `-1/2 sum_n sgn(s + n lx) exp(-|s + n lx|)`, summing
/// images until the tail falls below `1e-14`. Equal to
/// `sinh(s - lx/2) / (2 sinh(lx/2))` on `(0, lx)` and 0 at `s = 0`.
pub fn p_kernel(s: f64, lx: f64) -> f64 {
    let s = s.rem_euclid(lx);
    let mut total = -0.5 * if s == 0.0 { 0.0 } else { (-s).exp() };
    let mut n = 1.0;
    loop {
        let right = (-(s + n * lx)).exp();
        let left = (-(n * lx - s)).exp();
        total += -0.5 * right + 0.5 * left;
        if right.max(left) < 1e-14 {
            break;
        }
        n += 1.0;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PVerdict {
    /// `q` vanishes on `[c, d]` and `p(d, y) >= p(c, y) - 1e-10` for all `y`.
    Monotone,
    /// `q` vanishes on `[c, d]` but the inequality fails somewhere.
    Violated,
    /// The hypothesis does not hold; values are reported only.
    Descriptive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PReport {
    pub c: f64,
    pub d: f64,
    pub p_c: Vec<f64>,
    pub p_d: Vec<f64>,
    /// `min_y (p(d, y) - p(c, y))`.
    pub min_gap: f64,
    pub q_min: f64,
    pub verdict: PVerdict,
}

/// Line convolutions `p(x, y) = -1/2 int sgn(x - z) e^{-|x - z|} q(z, y) dz` at
/// `x = c` and `x = d`, by the trapezoid rule at the neighbouring nodes and
/// linear interpolation between them.
pub fn p_functional(u: &SpectralField, p: &ModelParams, c: f64, d: f64) -> Result<PReport> {
    p_from_q(&q_functional(u, p), c, d)
}

/// As [`p_functional`] for a given `q` field.
pub fn p_from_q(q: &SpectralField, c: f64, d: f64) -> Result<PReport> {
    if !(c < d) {
        return Err(Error::InvalidInterval { c, d });
    }
    let grid = q.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let spec = grid.spec();
    let (lx, dx) = (spec.lx, spec.dx());
    let kernel: Vec<f64> = (0..nx).map(|k| p_kernel(k as f64 * dx, lx)).collect();
    let v = q.values();
    let at_node = |i: usize, iy: usize| -> f64 {
        let row = &v[iy * nx..(iy + 1) * nx];
        let mut acc = 0.0;
        for (j, qv) in row.iter().enumerate() {
            acc += kernel[(i + nx - j) % nx] * qv;
        }
        acc * dx
    };
    let at = |x: f64, iy: usize| -> f64 {
        let pos = x.rem_euclid(lx) / dx;
        let i = (pos.floor() as usize).min(nx - 1);
        let theta = pos - i as f64;
        (1.0 - theta) * at_node(i, iy) + theta * at_node((i + 1) % nx, iy)
    };
    let p_c: Vec<f64> = (0..ny).map(|iy| at(c, iy)).collect();
    let p_d: Vec<f64> = (0..ny).map(|iy| at(d, iy)).collect();
    let min_gap = p_c
        .iter()
        .zip(&p_d)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);

    let q_min = q.min();
    let q_scale = q.max_abs().max(f64::MIN_POSITIVE);
    let mut vanishes = q_min >= -1e-12 * q_scale;
    for ix in 0..nx {
        let x = grid.x(ix);
        let inside = if d - c >= lx {
            true
        } else {
            let s = (x - c).rem_euclid(lx);
            s <= d - c
        };
        if inside && (0..ny).any(|iy| q.at(ix, iy).abs() > 1e-12 * q_scale) {
            vanishes = false;
        }
    }
    let verdict = if !vanishes {
        PVerdict::Descriptive
    } else if min_gap >= -1e-10 {
        PVerdict::Monotone
    } else {
        PVerdict::Violated
    };
    Ok(PReport {
        c,
        d,
        p_c,
        p_d,
        min_gap,
        q_min,
        verdict,
    })
}
