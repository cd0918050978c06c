//! Slopes along characteristics, the Riccati comparison bounds on the
//! breaking time, and the weighted slope functional `M1`.

mod characteristics;
mod riccati;
mod weighted;

pub use characteristics::{
    check_cadence, comparison_check, empirical_k, empirical_k_field, residual_sup, track,
    track_family, verify_riccati_ode, CharacteristicTrace, ComparisonCheck, RiccatiResidual,
    TrackOptions, TraceSample,
};
pub use riccati::{
    integrate_riccati, riccati_divergence_time, riccati_lower_envelope, t_star, RiccatiBound,
};
pub use weighted::{
    c3_and_t0, empirical_d, steepest_weighted_column, t0_bound, weighted_m1, C3Report, DSeries,
    M1Series, WeightSpec,
};
