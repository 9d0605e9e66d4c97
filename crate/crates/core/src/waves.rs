//! Even periodic solutions of `φ″ = g(μ, φ)`.
//!
//! A wave is started at a turning point `(φ(0), φ′(0)) = (φ0, 0)` of a closed
//! phase-plane orbit. By reversibility the orbit is symmetric about the `φ`
//! axis, so the next zero of `φ′` is the opposite turning point and the period
//! is twice that time. An independent period value comes from a polar
//! parametrization `φ = c + r(t) cos t / s`, `ξ = r(t) sin t` of the orbit
//! around its center `c` (with `s = √(−g′(c))`), which turns the period into
//! a quadrature over the angle `t ∈ [0, 2π]`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::model::{
    admissible_initial_range, big_g_eval, find_zeros, g_eval, g_prime_eval, phase_energy,
    AdmissibleRange, ModelError, ModelParams,
};
use crate::numerics::{
    brent, integrate, integrate_until_event, Crossing, EventSpec, FourierError, IvpSpec,
    OdeError, SpectralGrid,
};

/// Lower bound on `|D(t)|` in the angle parametrization.
pub const D_FLOOR: f64 = 1e-8;
/// Number of equispaced `φ(0)` values probed when bracketing a target period.
pub const SCAN_POINTS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error("φ(0) = {phi0} is outside the closed-orbit range ({lo}, {hi})")]
    OutsideAdmissibleRange { phi0: f64, lo: f64, hi: f64 },
    #[error("φ(0) = {0} coincides with the center; the orbit is a rest point")]
    AtCenter(f64),
    #[error("period detection failed from φ(0) = {phi0}: {reason}")]
    PeriodDetectionFailed { phi0: f64, reason: String },
    #[error("orbit from φ(0) = {phi0} crosses φ = 0 but a sign-definite wave was requested")]
    SignChange { phi0: f64 },
    #[error("angle-parametrization denominator |D| = {d:e} below floor at t = {t}")]
    DenominatorBlowup { t: f64, d: f64 },
    #[error("no φ(0) with period {target} found in [{lo}, {hi}]")]
    NoBracket { target: f64, lo: f64, hi: f64 },
    #[error("scaling family needs a base wave with ω = 0 and A = 0, got ({omega}, {a_const})")]
    NotBaseWave { omega: f64, a_const: f64 },
    #[error("sample count must be even and at least 4, got {0}")]
    BadSampleCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveOptions {
    /// Uniform samples over one period; must be even.
    pub n_samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Localization tolerance for the half-period event.
    pub refine_tol: f64,
    pub require_sign_definite: bool,
    /// Integration horizon when searching for the half period.
    pub max_period: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            n_samples: 256,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            refine_tol: 1e-13,
            require_sign_definite: false,
            max_period: 1e4,
        }
    }
}

impl WaveOptions {
    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn sign_definite(mut self) -> Self {
        self.require_sign_definite = true;
        self
    }

    pub fn tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = rel_tol * 1e-2;
        self
    }
}

/// One period of an even traveling-wave profile sampled at `x_j = jL/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub mu: ModelParams,
    pub phi0: f64,
    pub period: f64,
    pub center: f64,
    /// `None` when the profile changes sign.
    pub sign: Option<Sign>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

/// Self-consistency measurements of a sampled wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveDiagnostics {
    /// `max_j |φ_j − φ_{N−j}|`.
    pub symmetry: f64,
    /// `max_j |−φ″_j + g(μ, φ_j)|` with `φ″` by spectral differentiation.
    pub ode_residual: f64,
    /// Spread of the phase energy over the samples, relative to `max(|ℰ|, 1)`.
    pub energy_variation: f64,
    pub min_abs: f64,
}

impl WaveProfile {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.phi.len() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.phi.len()).map(|j| j as f64 * h).collect()
    }

    /// Energy level `ℰ(φ0, 0)` of the orbit.
    pub fn energy_level(&self) -> f64 {
        big_g_eval(self.mu, self.phi0)
    }

    pub fn spectral_grid(&self) -> Result<SpectralGrid, FourierError> {
        SpectralGrid::new(self.phi.len(), self.period)
    }

    pub fn diagnostics(&self) -> Result<WaveDiagnostics, WaveError> {
        let n = self.phi.len();
        let symmetry = (1..n)
            .map(|j| (self.phi[j] - self.phi[n - j]).abs())
            .fold(0.0, f64::max);
        let d2 = self.spectral_grid()?.derivative(&self.phi, 2)?;
        let ode_residual = self
            .phi
            .iter()
            .zip(&d2)
            .map(|(&p, &dd)| (-dd + g_eval(self.mu, p)).abs())
            .fold(0.0, f64::max);
        let level = self.energy_level();
        let energy_variation = self
            .phi
            .iter()
            .zip(&self.dphi)
            .map(|(&p, &q)| (phase_energy(self.mu, p, q) - level).abs())
            .fold(0.0, f64::max)
            / level.abs().max(1.0);
        let min_abs = self.phi.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        Ok(WaveDiagnostics {
            symmetry,
            ode_residual,
            energy_variation,
            min_abs,
        })
    }

    /// `−φ`, which solves the profile equation for `(ω, −A)`.
    pub fn negated(&self) -> WaveProfile {
        WaveProfile {
            mu: ModelParams::new(self.mu.omega, -self.mu.a_const),
            phi0: -self.phi0,
            period: self.period,
            center: -self.center,
            sign: self.sign.map(|s| match s {
                Sign::Positive => Sign::Negative,
                Sign::Negative => Sign::Positive,
            }),
            phi: self.phi.iter().map(|v| -v).collect(),
            dphi: self.dphi.iter().map(|v| -v).collect(),
        }
    }
}

/// Both period values for one orbit, with the small-amplitude limit `α = 2π/√(−g′(c))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodComputation {
    pub period_event: f64,
    pub period_formula: f64,
    pub alpha: f64,
}

impl PeriodComputation {
    pub fn discrepancy(&self) -> f64 {
        (self.period_event - self.period_formula).abs()
    }
}

/// Center and admissible range for `φ0`, rejecting data outside the closed-orbit region.
fn locate(mu: ModelParams, phi0: f64) -> Result<(f64, AdmissibleRange), WaveError> {
    let zs = find_zeros(mu)?;
    let center = zs.center_for(phi0).value;
    let range = admissible_initial_range(mu, center)?;
    if phi0 == center {
        return Err(WaveError::AtCenter(phi0));
    }
    if !range.contains(phi0) {
        return Err(WaveError::OutsideAdmissibleRange {
            phi0,
            lo: range.closed.0,
            hi: range.closed.1,
        });
    }
    Ok((center, range))
}

fn profile_rhs(mu: ModelParams) -> impl FnMut(f64, &[f64], &mut [f64]) {
    move |_x, y, dy| {
        dy[0] = y[1];
        dy[1] = g_eval(mu, y[0]);
    }
}

fn half_period(mu: ModelParams, phi0: f64, center: f64, opts: &WaveOptions) -> Result<f64, WaveError> {
    // φ″(0) = g(φ0) decides whether ξ first decreases or increases
    let direction = if g_eval(mu, phi0) < 0.0 {
        Crossing::Rising
    } else {
        Crossing::Falling
    };
    let spec = IvpSpec::new(profile_rhs(mu), 0.0, 0.5 * opts.max_period, vec![phi0, 0.0])
        .tolerances(opts.rel_tol, opts.abs_tol);
    let event = EventSpec::new(|_x, y: &[f64]| y[1], direction).refine_tol(opts.refine_tol);
    let hit = integrate_until_event(spec, event).map_err(|e| match e {
        OdeError::EventNotFound { .. } => WaveError::PeriodDetectionFailed {
            phi0,
            reason: "φ′ never returned to zero".into(),
        },
        other => WaveError::Ode(other),
    })?;
    if (hit.y[0] - center).signum() == (phi0 - center).signum() {
        return Err(WaveError::PeriodDetectionFailed {
            phi0,
            reason: format!("turning point {} on the starting side of the center", hit.y[0]),
        });
    }
    Ok(hit.t)
}

/// Period as twice the time until `φ′` next vanishes.
pub fn period_by_event(mu: ModelParams, phi0: f64) -> Result<f64, WaveError> {
    period_by_event_with(mu, phi0, &WaveOptions::default())
}

pub fn period_by_event_with(mu: ModelParams, phi0: f64, opts: &WaveOptions) -> Result<f64, WaveError> {
    let (center, _) = locate(mu, phi0)?;
    Ok(2.0 * half_period(mu, phi0, center, opts)?)
}

/// Period from the angle parametrization around the center:
/// `L = (2/s) ∫₀^{2π} −r/D dt` with `D r′ = 2r (g sin t / s + ξ cos t)`,
/// `D = 2g cos t / s − 2ξ sin t` and `r(0) = s (φ0 − c)`.
pub fn period_by_formula(mu: ModelParams, phi0: f64) -> Result<f64, WaveError> {
    period_by_formula_with(mu, phi0, &WaveOptions::default())
}

pub fn period_by_formula_with(
    mu: ModelParams,
    phi0: f64,
    opts: &WaveOptions,
) -> Result<f64, WaveError> {
    let (center, _) = locate(mu, phi0)?;
    let s = (-g_prime_eval(mu, center)).sqrt();
    let denom = move |t: f64, r: f64| {
        let (sin, cos) = t.sin_cos();
        let phi = center + r * cos / s;
        let xi = r * sin;
        let g = g_eval(mu, phi);
        (2.0 * g * cos / s - 2.0 * xi * sin, g, xi, sin, cos)
    };
    let mut min_d = (f64::INFINITY, 0.0);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let r = y[0];
        let (d, g, xi, sin, cos) = denom(t, r);
        if d.abs() < min_d.0 {
            min_d = (d.abs(), t);
        }
        dy[0] = 2.0 * r * (g * sin / s + xi * cos) / d;
        dy[1] = -r / d;
    };
    let r0 = s * (phi0 - center);
    let spec = IvpSpec::new(rhs, 0.0, 2.0 * PI, vec![r0, 0.0]).tolerances(opts.rel_tol, opts.abs_tol);
    let traj = match integrate(spec) {
        Ok(t) => t,
        Err(e) => {
            let (d, t) = min_d;
            return Err(if d < D_FLOOR {
                WaveError::DenominatorBlowup { t, d }
            } else {
                WaveError::Ode(e)
            });
        }
    };
    for (t, y) in traj.nodes() {
        let (d, ..) = denom(t, y[0]);
        if d.abs() < D_FLOOR || d.signum() == y[0].signum() {
            return Err(WaveError::DenominatorBlowup { t, d });
        }
    }
    Ok(2.0 / s * traj.y_final()[1])
}

pub fn compute_periods(mu: ModelParams, phi0: f64, opts: &WaveOptions) -> Result<PeriodComputation, WaveError> {
    let (center, _) = locate(mu, phi0)?;
    let alpha = 2.0 * PI / (-g_prime_eval(mu, center)).sqrt();
    Ok(PeriodComputation {
        period_event: period_by_event_with(mu, phi0, opts)?,
        period_formula: period_by_formula_with(mu, phi0, opts)?,
        alpha,
    })
}

/// Builds the wave through `(φ0, 0)` with the default sample count `n_samples`.
pub fn construct_wave(mu: ModelParams, phi0: f64, n_samples: usize) -> Result<WaveProfile, WaveError> {
    construct_wave_with(mu, phi0, &WaveOptions::default().with_samples(n_samples))
}

pub fn construct_wave_with(
    mu: ModelParams,
    phi0: f64,
    opts: &WaveOptions,
) -> Result<WaveProfile, WaveError> {
    let n = opts.n_samples;
    if n < 4 || !n.is_multiple_of(2) {
        return Err(WaveError::BadSampleCount(n));
    }
    let (center, range) = locate(mu, phi0)?;
    let crosses_zero = !range.contains_sign_definite(phi0);
    if opts.require_sign_definite && crosses_zero {
        return Err(WaveError::SignChange { phi0 });
    }
    let period = 2.0 * half_period(mu, phi0, center, opts)?;
    let h = period / n as f64;
    let stops: Vec<f64> = (1..n).map(|j| j as f64 * h).collect();
    let spec = IvpSpec::new(profile_rhs(mu), 0.0, period, vec![phi0, 0.0])
        .tolerances(opts.rel_tol, opts.abs_tol)
        .stops(stops.clone());
    let traj = integrate(spec)?;
    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    phi.push(phi0);
    dphi.push(0.0);
    for &x in &stops {
        let y = traj.eval(x);
        phi.push(y[0]);
        dphi.push(y[1]);
    }
    let min_abs = phi.iter().fold(f64::INFINITY, |m, v: &f64| m.min(v.abs()));
    let sign = if crosses_zero || min_abs == 0.0 {
        None
    } else if phi0 > 0.0 {
        Some(Sign::Positive)
    } else {
        Some(Sign::Negative)
    };
    if opts.require_sign_definite && sign.is_none() {
        return Err(WaveError::SignChange { phi0 });
    }
    Ok(WaveProfile {
        mu,
        phi0,
        period,
        center,
        sign,
        phi,
        dphi,
    })
}

/// Member `ψ_ω = e^{ω/2} φ₀` of the `A = 0` family generated by a wave of `(0, 0)`.
/// The period is unchanged.
pub fn scaling_family(base: &WaveProfile, omega: f64) -> Result<WaveProfile, WaveError> {
    if base.mu.omega != 0.0 || base.mu.a_const != 0.0 {
        return Err(WaveError::NotBaseWave {
            omega: base.mu.omega,
            a_const: base.mu.a_const,
        });
    }
    let k = (0.5 * omega).exp();
    Ok(WaveProfile {
        mu: ModelParams::new(omega, 0.0),
        phi0: k * base.phi0,
        period: base.period,
        center: k * base.center,
        sign: base.sign,
        phi: base.phi.iter().map(|v| k * v).collect(),
        dphi: base.dphi.iter().map(|v| k * v).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPeriodWave {
    pub wave: WaveProfile,
    /// Whether the period map was monotone on the probed bracket points.
    pub monotone: bool,
}

/// Wave of parameters `mu` whose period equals `target_period`, with `φ(0)`
/// searched inside `bracket`.
pub fn fixed_period_wave(
    mu: ModelParams,
    target_period: f64,
    bracket: (f64, f64),
    opts: &WaveOptions,
) -> Result<FixedPeriodWave, WaveError> {
    let (lo, hi) = bracket;
    let period_at = |p: f64| -> Result<f64, WaveError> {
        let (center, _) = locate(mu, p)?;
        Ok(2.0 * half_period(mu, p, center, opts)?)
    };
    let f_lo = period_at(lo)? - target_period;
    let f_hi = period_at(hi)? - target_period;
    if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        return Err(WaveError::NoBracket {
            target: target_period,
            lo,
            hi,
        });
    }
    // probe the interior to flag a non-monotone period map
    let probes: Vec<f64> = (0..=4)
        .map(|i| lo + (hi - lo) * i as f64 / 4.0)
        .map(|p| period_at(p).unwrap_or(f64::NAN))
        .collect();
    let increasing = probes.windows(2).all(|w| w[1] > w[0]);
    let decreasing = probes.windows(2).all(|w| w[1] < w[0]);
    let monotone = increasing || decreasing;

    let mut failure = None;
    let phi0 = brent(
        |p| match period_at(p) {
            Ok(l) => l - target_period,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-15 * lo.abs().max(hi.abs()),
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let phi0 = phi0.map_err(|_| WaveError::NoBracket {
        target: target_period,
        lo,
        hi,
    })?;
    let wave = construct_wave_with(mu, phi0, opts)?;
    Ok(FixedPeriodWave { wave, monotone })
}

/// Fixed-period wave near a known initial value `guess`: the bracket is grown
/// geometrically around `guess` on the same side of the center.
pub fn fixed_period_wave_near(
    mu: ModelParams,
    target_period: f64,
    guess: f64,
    opts: &WaveOptions,
) -> Result<FixedPeriodWave, WaveError> {
    let (center, range) = locate(mu, guess)?;
    let (lo_lim, hi_lim) = if opts.require_sign_definite {
        range.sign_definite
    } else {
        range.closed
    };
    // stay strictly on the side of the center that contains the guess
    let (lo_lim, hi_lim) = if guess > center {
        (center, hi_lim)
    } else {
        (lo_lim, center)
    };
    let period_at = |p: f64| -> Result<f64, WaveError> { Ok(2.0 * half_period(mu, p, center, opts)? - target_period) };
    let f_guess = period_at(guess)?;
    if f_guess == 0.0 {
        return fixed_period_wave(mu, target_period, (guess, guess), opts);
    }
    let mut step = 1e-3 * (guess - center).abs().max(1e-12);
    for _ in 0..60 {
        let lo = (guess - step).max(lo_lim + 1e-12 * (lo_lim.abs().max(1.0)));
        let hi = (guess + step).min(hi_lim - 1e-12 * (hi_lim.abs().max(1.0)));
        let f_lo = period_at(lo);
        let f_hi = period_at(hi);
        if let Ok(f) = f_lo {
            if f.signum() != f_guess.signum() {
                return fixed_period_wave(mu, target_period, (lo, guess), opts);
            }
        }
        if let Ok(f) = f_hi {
            if f.signum() != f_guess.signum() {
                return fixed_period_wave(mu, target_period, (guess, hi), opts);
            }
        }
        step *= 2.0;
    }
    Err(WaveError::NoBracket {
        target: target_period,
        lo: lo_lim,
        hi: hi_lim,
    })
}

/// Fixed-period wave found by scanning [`SCAN_POINTS`] equispaced initial
/// values in the sign-definite range on the given side of `center`.
pub fn fixed_period_wave_scan(
    mu: ModelParams,
    target_period: f64,
    center: f64,
    outer_side: bool,
    opts: &WaveOptions,
) -> Result<FixedPeriodWave, WaveError> {
    let range = admissible_initial_range(mu, center)?;
    let (lo, hi) = range.sign_definite;
    let (a, b) = match (outer_side, center > 0.0) {
        (true, true) | (false, false) => (range.center, hi),
        (true, false) | (false, true) => (lo, range.center),
    };
    // keep the scan away from the separatrix and the rest point
    let (a, b) = if a.is_finite() && b.is_finite() {
        (a, b)
    } else if a.is_finite() {
        (a, a + 10.0 * center.abs().max(1.0))
    } else {
        (b - 10.0 * center.abs().max(1.0), b)
    };
    let pts: Vec<f64> = (1..=SCAN_POINTS)
        .map(|i| a + (b - a) * i as f64 / (SCAN_POINTS + 1) as f64)
        .collect();
    let vals: Vec<Option<f64>> = pts
        .iter()
        .map(|&p| period_by_event_with(mu, p, opts).ok().map(|l| l - target_period))
        .collect();
    for i in 0..pts.len() - 1 {
        if let (Some(f0), Some(f1)) = (vals[i], vals[i + 1]) {
            if f0.signum() != f1.signum() || f0 == 0.0 {
                return fixed_period_wave(mu, target_period, (pts[i], pts[i + 1]), opts);
            }
        }
    }
    Err(WaveError::NoBracket {
        target: target_period,
        lo: a,
        hi: b,
    })
}

/// Sampled phase-plane orbit through `(seed, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub seed: f64,
    /// `(φ, ξ)` samples; for a periodic orbit the last sample closes the curve.
    pub points: Vec<(f64, f64)>,
    pub periodic: bool,
    pub sign_definite: bool,
    pub period: Option<f64>,
}

/// Phase-portrait curves for a list of seeds on the `φ` axis. Orbits whose
/// half period is not found before `horizon` (separatrices, rest points) are
/// sampled on `[0, horizon]` and tagged non-periodic.
pub fn phase_portrait_data(
    mu: ModelParams,
    orbit_seeds: &[f64],
    samples_per_orbit: usize,
    horizon: f64,
) -> Result<Vec<Orbit>, WaveError> {
    let zs = find_zeros(mu)?;
    let samples = samples_per_orbit.max(2);
    let mut out = Vec::with_capacity(orbit_seeds.len());
    for &seed in orbit_seeds {
        if zs.zeros.iter().any(|z| z.value == seed) || g_eval(mu, seed) == 0.0 {
            out.push(Orbit {
                seed,
                points: vec![(seed, 0.0)],
                periodic: zs.centers().any(|c| c.value == seed),
                sign_definite: seed != 0.0,
                period: None,
            });
            continue;
        }
        let level = big_g_eval(mu, seed);
        let on_separatrix = zs.saddle().is_some_and(|s| {
            (big_g_eval(mu, s.value) - level).abs() <= 1e-12 * level.abs().max(1.0)
        });
        let direction = if g_eval(mu, seed) < 0.0 {
            Crossing::Rising
        } else {
            Crossing::Falling
        };
        let found = if on_separatrix {
            None
        } else {
            let spec = IvpSpec::new(profile_rhs(mu), 0.0, 0.5 * horizon, vec![seed, 0.0]);
            let event = EventSpec::new(|_x, y: &[f64]| y[1], direction);
            match integrate_until_event(spec, event) {
                Ok(hit) => Some(2.0 * hit.t),
                Err(OdeError::EventNotFound { .. }) => None,
                Err(e) => return Err(e.into()),
            }
        };
        let periodic = found.is_some();
        // a non-periodic orbit is traced for half the horizon and mirrored in ξ
        let t_end = found.unwrap_or(0.5 * horizon);
        let n_int = if periodic { samples } else { samples / 2 + 1 };
        let dt = t_end / (n_int - 1) as f64;
        let stops: Vec<f64> = (1..n_int - 1).map(|i| i as f64 * dt).collect();
        let spec = IvpSpec::new(profile_rhs(mu), 0.0, t_end, vec![seed, 0.0]).stops(stops);
        let traj = integrate(spec)?;
        let forward: Vec<(f64, f64)> = (0..n_int)
            .map(|i| {
                let y = traj.eval(i as f64 * dt);
                (y[0], y[1])
            })
            .collect();
        let points = if periodic {
            forward
        } else {
            let mut pts: Vec<(f64, f64)> = forward.iter().rev().map(|&(p, q)| (p, -q)).collect();
            pts.extend_from_slice(&forward[1..]);
            pts
        };
        let sign_definite = points.iter().all(|p| p.0.signum() == seed.signum() && p.0 != 0.0);
        out.push(Orbit {
            seed,
            points,
            periodic,
            sign_definite,
            period: periodic.then_some(t_end),
        });
    }
    Ok(out)
}
