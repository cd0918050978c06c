//! Periodic-grid Fourier infrastructure.

mod field;
mod grid;
mod interp;
pub mod ops;

pub use field::{SpectralField, Spectrum};
pub use grid::{Grid, GridSpec};
pub use interp::{Interpolant, LineInterpolant};
pub use ops::{
    dealias, ddx, ddy, green, green_dx, inv_ddx, kp_nonlocal, norm_hs, norm_xs, project_xmean,
};
