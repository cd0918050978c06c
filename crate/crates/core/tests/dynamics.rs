use std::f64::consts::PI;
use std::sync::Arc;

use chkp_core::breaking::{riccati_divergence_time, t_star};
use chkp_core::diagnostics::{record, RecordContext};
use chkp_core::model::ModelParams;
use chkp_core::presets::InitialData;
use chkp_core::spectral::{Grid, GridSpec, SpectralField, Spectrum};
use chkp_core::stepper::{run, Stepper, StepperConfig, StopReason};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(nx: usize, ny: usize) -> Arc<Grid> {
    Grid::new(GridSpec::new(nx, ny, 2.0 * PI, 2.0 * PI)).unwrap()
}

fn random_mean_free(g: &Arc<Grid>, seed: u64, amp: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64, f64)> = (0..5)
        .map(|_| {
            (
                rng.gen_range(1..=4) as f64,
                rng.gen_range(0..=4) as f64,
                rng.gen_range(-amp..amp),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    SpectralField::from_fn(g.clone(), |x, y| {
        modes.iter().map(|&(kx, ky, a, ph)| a * (kx * x + ky * y + ph).cos()).sum()
    })
}

fn l2(s: &Spectrum) -> f64 {
    s.weighted_energy(|_, _| 1.0).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear_substep_is_an_isometry(seed in any::<u64>(), dt in 1e-4f64..10.0) {
        let g = grid(32, 32);
        let st = Stepper::new(g.clone(), ModelParams::classical(1.0));
        let hat = st.prepare(&random_mean_free(&g, seed, 1.0));
        let before = l2(&Spectrum::new(g.clone(), hat.clone()).unwrap());
        let after = l2(&Spectrum::new(g, st.linear_substep(&hat, dt)).unwrap());
        prop_assert!((after - before).abs() <= 1e-12 * before);
    }

    #[test]
    fn record_invariants(seed in any::<u64>(), amp in 1e-3f64..10.0) {
        let u = random_mean_free(&grid(32, 16), seed, amp);
        let r = record(&u, 0.0, &RecordContext::default());
        prop_assert!(r.conserved >= 0.0);
        prop_assert_eq!(r.energy_e, 0.5 * r.conserved);
        prop_assert!(r.min_ux.abs() <= r.grad_inf * (1.0 + 1e-15));
        prop_assert!(!r.non_finite);
    }

    #[test]
    fn riccati_bound_matches_numeric_divergence(
        m0 in -20.0f64..-1.2,
        k in 0.0f64..1.0,
        gamma in 0.5f64..2.0,
    ) {
        // m0 < -1.2 <= -sqrt(K / gamma) keeps the hypothesis satisfied.
        let bound = t_star(m0, k, gamma).unwrap().t_star.unwrap();
        let numeric = riccati_divergence_time(-m0, k, gamma, 1e8).unwrap().unwrap();
        prop_assert!(numeric <= bound);
        prop_assert!((bound - numeric).abs() < 0.01 * bound);
    }
}

#[test]
fn blowup_integral_is_nondecreasing_and_energy_is_kept() {
    let g = Grid::new(GridSpec::new(64, 32, 4.0 * PI, 4.0 * PI)).unwrap();
    let u0 = InitialData::YModulated { amplitude: 0.3, depth: 0.5 }.build(&g).unwrap();
    let cfg = StepperConfig {
        t_end: 2.0,
        snapshot_every: 50,
        ..StepperConfig::default()
    };
    let out = run(&u0, &ModelParams::classical(1.0), &cfg).unwrap();
    assert_eq!(out.stop.reason, StopReason::HorizonReached);
    let d = &out.diagnostics;
    assert!(d.windows(2).all(|w| w[1].i_integral >= w[0].i_integral && w[1].t > w[0].t));
    let c0 = d[0].conserved;
    let drift = d.iter().map(|r| (r.conserved - c0).abs() / c0).fold(0.0, f64::max);
    assert!(drift < 1e-6, "{drift}");
    // Snapshots include both ends.
    assert_eq!(out.trajectory.first().unwrap().t, 0.0);
    assert_eq!(out.trajectory.last().unwrap().t, out.stop.t_stop);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let g = grid(32, 32);
    let u0 = random_mean_free(&g, 7, 0.5);
    let cfg = StepperConfig {
        t_end: 0.5,
        ..StepperConfig::default()
    };
    let p = ModelParams::classical(1.0);
    let a = run(&u0, &p, &cfg).unwrap();
    let b = run(&u0, &p, &cfg).unwrap();
    assert_eq!(a.diagnostics.len(), b.diagnostics.len());
    for (x, y) in a.diagnostics.iter().zip(&b.diagnostics) {
        assert_eq!(format!("{x:?}"), format!("{y:?}"));
    }
    let (fa, fb) = (&a.trajectory.last().unwrap().field, &b.trajectory.last().unwrap().field);
    assert!(fa.values().iter().zip(fb.values()).all(|(p, q)| p.to_bits() == q.to_bits()));
}

#[test]
fn steep_front_reaches_gradient_threshold() {
    // A coarse version of the breaking scenario: the gradient threshold is
    // reached well inside the horizon.
    let g = Grid::new(GridSpec::new(512, 16, 24.0, 24.0)).unwrap();
    let u0 = InitialData::SteepFront { m0: -5.0, sigma: 4.0, b: 0.04 }.build(&g).unwrap();
    let cfg = StepperConfig {
        t_end: 1.0,
        grad_stop: 40.0,
        snapshot_every: 1000,
        ..StepperConfig::default()
    };
    let out = run(&u0, &ModelParams::classical(1.0), &cfg).unwrap();
    assert_eq!(out.stop.reason, StopReason::GradientThreshold);
    assert!(out.stop.t_stop < 0.3, "{}", out.stop.t_stop);
}
