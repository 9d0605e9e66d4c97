//! Independent oracles: closed forms, conservation laws and an energy-level
//! quadrature for the period.

use std::f64::consts::PI;

use logkdv::evolution::{conserved_quantities, orbital_rho, EvolutionState, Evolver, DEFAULT_CFL};
use logkdv::model::{big_g_eval, find_zeros, g_eval, phase_energy, ModelParams};
use logkdv::numerics::{
    eigen_sym, eigenvalues_sym, integrate, integrate_until_event, spectral_derivative, Crossing,
    EventSpec, IvpSpec, SymmetricMatrix,
};
use logkdv::waves::{construct_wave, period_by_event, period_by_formula};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

#[test]
fn exponential_growth() {
    let traj = integrate(IvpSpec::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0], 0.0, 1.0, vec![1.0])).unwrap();
    assert!((traj.y_final()[0] - 1f64.exp()).abs() < 1e-9);
}

#[test]
fn harmonic_oscillator_returns() {
    let rhs = |_t, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    let traj = integrate(IvpSpec::new(rhs, 0.0, 2.0 * PI, vec![1.0, 0.0])).unwrap();
    let y = traj.y_final();
    assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
    // dense output agrees with the closed form between nodes
    for i in 0..50 {
        let t = 0.123 * i as f64;
        let y = traj.eval(t);
        assert!((y[0] - t.cos()).abs() < 1e-8);
    }
}

#[test]
fn harmonic_oscillator_half_period_event() {
    let rhs = |_t, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    // ξ = y′ = −sin t starts at 0 (skipped), falls, and rises through 0 at π
    let hit = integrate_until_event(
        IvpSpec::new(rhs, 0.0, 10.0, vec![1.0, 0.0]),
        EventSpec::new(|_t, y: &[f64]| y[1], Crossing::Rising),
    )
    .unwrap();
    assert!((hit.t - PI).abs() < 1e-8, "{}", hit.t);
}

#[test]
fn profile_energy_is_conserved() {
    let mu = ModelParams::new(0.0, 0.0);
    let rhs = move |_t, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = g_eval(mu, y[0]);
    };
    let traj = integrate(IvpSpec::new(rhs, 0.0, 20.0, vec![1.5, 0.0])).unwrap();
    let e0 = phase_energy(mu, 1.5, 0.0);
    for (_, y) in traj.nodes() {
        assert!((phase_energy(mu, y[0], y[1]) - e0).abs() < 1e-8);
    }
}

#[test]
fn eigenvalues_of_identity_and_diagonal() {
    let mut id = SymmetricMatrix::zeros(5);
    for i in 0..5 {
        id.set(i, i, 1.0);
    }
    assert!(eigenvalues_sym(&id).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-14));
    let mut d = SymmetricMatrix::zeros(3);
    for (i, v) in [3.0, 1.0, 2.0].into_iter().enumerate() {
        d.set(i, i, v);
    }
    let e = eigen_sym(&d).unwrap();
    assert!(max_abs_diff(&e.values, &[1.0, 2.0, 3.0]) < 1e-14);
}

#[test]
fn periodic_second_difference_spectrum() {
    let n = 24;
    let mut m = SymmetricMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, 2.0);
        m.set(i, (i + 1) % n, -1.0);
    }
    let got = eigenvalues_sym(&m).unwrap();
    let mut want: Vec<f64> = (0..n).map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos()).collect();
    want.sort_by(f64::total_cmp);
    assert!(max_abs_diff(&got, &want) < 1e-10);
}

#[test]
fn spectral_derivatives_of_sine() {
    let (n, l) = (32, 3.0);
    let k = 2.0 * PI / l;
    let x: Vec<f64> = (0..n).map(|j| j as f64 * l / n as f64).collect();
    let u: Vec<f64> = x.iter().map(|x| (k * x).sin()).collect();
    let d1 = spectral_derivative(&u, l, 1).unwrap();
    let d3 = spectral_derivative(&u, l, 3).unwrap();
    let c1: Vec<f64> = x.iter().map(|x| k * (k * x).cos()).collect();
    let c3: Vec<f64> = x.iter().map(|x| -k.powi(3) * (k * x).cos()).collect();
    assert!(max_abs_diff(&d1, &c1) < 1e-10);
    assert!(max_abs_diff(&d3, &c3) < 1e-8);
    let d = spectral_derivative(&[2.5; 16], l, 2).unwrap();
    assert!(d.iter().all(|v| v.abs() < 1e-12));
}

/// Other turning point of the level `G = G(φ0)` across the center.
fn turning_point(mu: ModelParams, phi0: f64, center: f64) -> f64 {
    let level = big_g_eval(mu, phi0);
    let dir = (center - phi0).signum();
    let mut inner = center;
    let mut step = (center - phi0).abs();
    let mut outer = center + dir * step;
    while big_g_eval(mu, outer) > level {
        inner = outer;
        step *= 2.0;
        outer = center + dir * step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (inner + outer);
        if big_g_eval(mu, mid) > level {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    0.5 * (inner + outer)
}

/// `L = 2∫ dφ / √(2(G(φ) − G(φ0)))` between the turning points, with
/// `φ = m + h sin s` removing the endpoint singularities, by composite
/// 5-point Gauss–Legendre.
fn quadrature_period(mu: ModelParams, phi0: f64, center: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683,
        0.538_469_310_105_683,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let other = turning_point(mu, phi0, center);
    let (lo, hi) = (phi0.min(other), phi0.max(other));
    let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let level = big_g_eval(mu, phi0);
    let f = |s: f64| {
        let phi = m + h * s.sin();
        h * s.cos() / (2.0 * (big_g_eval(mu, phi) - level)).max(f64::MIN_POSITIVE).sqrt()
    };
    let panels = 400;
    let width = PI / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = -0.5 * PI + (p as f64 + 0.5) * width;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            total += w * 0.5 * width * f(mid + 0.5 * width * x);
        }
    }
    2.0 * total
}

#[test]
fn periods_match_energy_quadrature() {
    for (omega, a, phi0) in [
        (0.0, 0.0, 1.5),
        (1.0, 1.0, 3.0),
        (2.0, 4.0, 5.0),
        (-1.0, -1.0, -0.1),
        (1.0, -2.0, -2.0),
        (-1.0, -2.0, -1.0),
        (1.0, 1.0, -1.2),
        (5.0, 3.0, 15.0),
    ] {
        let mu = ModelParams::new(omega, a);
        let center = find_zeros(mu).unwrap().center_for(phi0).value;
        let oracle = quadrature_period(mu, phi0, center);
        let event = period_by_event(mu, phi0).unwrap();
        let formula = period_by_formula(mu, phi0).unwrap();
        assert!((event - oracle).abs() < 1e-8 * oracle, "{omega} {a} {phi0}: {event} vs {oracle}");
        assert!((formula - oracle).abs() < 1e-8 * oracle, "{omega} {a} {phi0}: {formula} vs {oracle}");
    }
}

#[test]
fn wave_samples_solve_profile_equation() {
    let wave = construct_wave(ModelParams::new(1.0, 1.0), 3.0, 128).unwrap();
    let d2 = spectral_derivative(&wave.phi, wave.period, 2).unwrap();
    for (p, dd) in wave.phi.iter().zip(&d2) {
        assert!((dd - g_eval(wave.mu, *p)).abs() < 1e-6);
    }
}

/// Evolves `u0` to `t_end` in `steps` equal steps.
fn run(u0: &[f64], period: f64, t_end: f64, steps: usize) -> EvolutionState {
    let mut s = EvolutionState::new(u0.to_vec(), period).unwrap();
    let ev = Evolver::new(&s.grid, t_end / steps as f64).unwrap();
    for _ in 0..steps {
        ev.step(&mut s).unwrap();
    }
    s
}

/// Positive analytic data on `[0, 2π)`.
fn smooth_data(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / n as f64;
            2.0 + 0.3 * x.cos() + 0.1 * (2.0 * x).sin()
        })
        .collect()
}

#[test]
fn spatial_refinement_agrees() {
    let l = 2.0 * PI;
    let coarse = run(&smooth_data(64), l, 1.0, 1000);
    let fine = run(&smooth_data(128), l, 1.0, 1000);
    let shared: Vec<f64> = fine.u.iter().step_by(2).copied().collect();
    let diff = max_abs_diff(&coarse.u, &shared);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn time_step_convergence_order() {
    let l = 2.0 * PI;
    let u0 = smooth_data(64);
    let a = run(&u0, l, 1.0, 50).u;
    let b = run(&u0, l, 1.0, 100).u;
    let c = run(&u0, l, 1.0, 200).u;
    let order = (max_abs_diff(&a, &b) / max_abs_diff(&b, &c)).log2();
    assert!(order >= 3.0, "measured order {order}");
}

#[test]
fn invariants_conserved_over_many_steps() {
    let l = 2.0 * PI;
    let mut s = EvolutionState::new(smooth_data(64), l).unwrap();
    let c0 = conserved_quantities(&s).unwrap();
    let ev = Evolver::new(&s.grid, s.stable_dt(DEFAULT_CFL)).unwrap();
    for _ in 0..10_000 {
        ev.step(&mut s).unwrap();
    }
    let c = conserved_quantities(&s).unwrap();
    assert!(((c.f - c0.f) / c0.f).abs() <= 1e-8);
    assert!(((c.m - c0.m) / c0.m).abs() <= 1e-8);
    assert!(((c.e - c0.e) / c0.e).abs() <= 1e-6);
}

#[test]
fn regularization_width_is_irrelevant_when_inactive() {
    let l = 2.0 * PI;
    let u0 = smooth_data(64);
    let min = u0.iter().fold(f64::INFINITY, |m: f64, v| m.min(v.abs()));
    let eps = 0.25 * min;
    let mut a = EvolutionState::with_epsilon(u0.clone(), l, eps).unwrap();
    let mut b = EvolutionState::with_epsilon(u0, l, 0.5 * eps).unwrap();
    let ev = Evolver::new(&a.grid, 1e-3).unwrap();
    for _ in 0..1000 {
        ev.step(&mut a).unwrap();
        ev.step(&mut b).unwrap();
    }
    assert!(a.min_abs() > 2.0 * eps);
    assert!(max_abs_diff(&a.u, &b.u) <= 1e-10);
}

#[test]
fn stationary_wave_stays_on_its_orbit() {
    let wave = construct_wave(ModelParams::new(0.0, 0.0), 1.5, 128).unwrap();
    let s = run(&wave.phi, wave.period, 5.0, 2000);
    assert!(orbital_rho(&s.u, &wave).unwrap().rho < 1e-6);
}
