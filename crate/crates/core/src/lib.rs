//! Pseudo-spectral laboratory for the generalized Camassa-Holm-Kadomtsev-Petviashvili
//! equation in nonlocal form
//!
//! ```text
//! u_t + gamma u u_x + G * d_x F + G * v_y = 0,   u_y = v_x,
//! F = g(u)/2 + gamma/2 u_x^2 - gamma/2 u^2,      G(x) = exp(-|x|)/2,
//! ```
//!
//! on a periodic box, together with the quantities used to study its wave
//! breaking: the conserved energy, the blow-up integral, slopes along
//! characteristics and their Riccati comparison bounds, a weighted slope
//! functional, and a probe of the non-vanishing (Liouville-type) property.

// `!(a > b)` deliberately treats NaN as failing the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod breaking;
pub mod diagnostics;
mod error;
pub mod liouville;
pub mod model;
pub mod presets;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
