use std::f64::consts::PI;

use logkdv::evolution::orbital_rho;
use logkdv::model::{
    admissible_initial_range, build_regularized_flux, find_zeros, g_eval, g_prime_eval, log_flux,
    ModelParams, Region, ZeroKind,
};
use logkdv::numerics::SpectralGrid;
use logkdv::waves::{compute_periods, construct_wave, scaling_family, WaveOptions};
use proptest::prelude::*;

fn off_band() -> impl Strategy<Value = ModelParams> {
    (-3.0..3.0f64, -3.0..3.0f64)
        .prop_map(|(w, a)| ModelParams::new(w, a))
        .prop_filter("inside the degenerate band", |mu| mu.region() != Region::P2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeros_are_roots_with_expected_structure(mu in off_band()) {
        let zs = find_zeros(mu).unwrap();
        let expected = if mu.region() == Region::P1 { 3 } else { 1 };
        prop_assert_eq!(zs.zeros.len(), expected);
        for z in &zs.zeros {
            let scale = 1.0 + z.value.abs();
            prop_assert!(g_eval(mu, z.value).abs() <= 1e-8 * scale);
            match z.kind {
                ZeroKind::Center => prop_assert!(g_prime_eval(mu, z.value) < 0.0),
                ZeroKind::Saddle => prop_assert!(g_prime_eval(mu, z.value) > 0.0),
            }
        }
        prop_assert!(zs.zeros.windows(2).all(|w| w[0].value < w[1].value));
    }

    #[test]
    fn event_and_formula_periods_agree(mu in off_band(), frac in 0.1..0.9f64) {
        let zs = find_zeros(mu).unwrap();
        let center = zs.upper_center().value;
        let range = admissible_initial_range(mu, center).unwrap();
        let phi0 = if range.closed.1.is_finite() {
            center + frac * (range.closed.1 - center)
        } else {
            center + frac * (1.0 + center.abs())
        };
        let p = compute_periods(mu, phi0, &WaveOptions::default()).unwrap();
        prop_assert!(p.discrepancy() <= 1e-6 * p.period_event);
    }

    #[test]
    fn flux_is_odd_and_continuous(eps in 1e-3..1.0f64, s in -1.0..1.0f64) {
        let flux = build_regularized_flux(eps).unwrap();
        let u = s * eps;
        prop_assert!((flux.eval(u) + flux.eval(-u)).abs() <= 1e-14 * (1.0 + flux.eval(u).abs()));
        let inside = eps * (1.0 - 1e-9);
        prop_assert!((flux.eval(inside) - log_flux(eps)).abs() <= 1e-8 * eps);
        prop_assert!((flux.deriv(inside) - (eps.ln() + 1.0)).abs() <= 1e-6);
    }

    #[test]
    fn spectral_derivative_exact_on_trig_polynomials(
        coefs in prop::collection::vec(-1.0..1.0f64, 6),
        l in 0.5..10.0f64,
    ) {
        let n = 32;
        let grid = SpectralGrid::new(n, l).unwrap();
        let x = grid.points();
        let k0 = 2.0 * PI / l;
        let u: Vec<f64> = x.iter().map(|&x| {
            (0..3).map(|m| {
                let k = k0 * (m + 1) as f64;
                coefs[2 * m] * (k * x).cos() + coefs[2 * m + 1] * (k * x).sin()
            }).sum()
        }).collect();
        let du = grid.derivative(&u, 1).unwrap();
        for (j, &x) in x.iter().enumerate() {
            let exact: f64 = (0..3).map(|m| {
                let k = k0 * (m + 1) as f64;
                k * (-coefs[2 * m] * (k * x).sin() + coefs[2 * m + 1] * (k * x).cos())
            }).sum();
            prop_assert!((du[j] - exact).abs() <= 1e-10 * (1.0 + k0.powi(1) * 3.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scaling_family_rescales_profile(omega in -3.0..3.0f64) {
        let base = construct_wave(ModelParams::new(0.0, 0.0), 1.5, 64).unwrap();
        let w = scaling_family(&base, omega).unwrap();
        let k = (0.5 * omega).exp();
        prop_assert!((w.period - base.period).abs() <= 1e-12 * base.period);
        for (a, b) in w.phi.iter().zip(&base.phi) {
            prop_assert!((a - k * b).abs() <= 1e-12 * k * b.abs().max(1.0));
        }
    }

    #[test]
    fn rho_is_shift_invariant(shift in 0usize..64, bump in -1e-2..1e-2f64) {
        let wave = construct_wave(ModelParams::new(1.0, 1.0), 3.0, 64).unwrap();
        let n = wave.len();
        let u: Vec<f64> = wave.phi.iter().enumerate()
            .map(|(j, p)| p + bump * (2.0 * PI * j as f64 / n as f64).cos())
            .collect();
        let shifted: Vec<f64> = (0..n).map(|j| u[(j + shift) % n]).collect();
        let a = orbital_rho(&u, &wave).unwrap();
        let b = orbital_rho(&shifted, &wave).unwrap();
        prop_assert!((a.rho - b.rho).abs() <= 1e-12);
        prop_assert!(a.rho >= 0.0);
        let pure: Vec<f64> = (0..n).map(|j| wave.phi[(j + shift) % n]).collect();
        let d = orbital_rho(&pure, &wave).unwrap();
        prop_assert!(d.rho <= 1e-10);
        let expected = shift as f64 * wave.spacing();
        let gap = (d.best_shift - expected).abs();
        prop_assert!(gap.min(wave.period - gap) <= 1e-6);
    }
}
