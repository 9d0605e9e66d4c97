//! The traveling-wave field `g(μ, φ) = ωφ − φ log φ² + A`, its potential `G`,
//! the phase-plane energy, parameter regions and the regularized flux.
//!
//! A traveling wave `u(x, t) = φ(x − ωt)` of the log-KdV equation satisfies
//! `−φ″ + g(μ, φ) = 0` with `μ = (ω, A)`. The first integral of that ODE is
//! the phase energy `−ξ²/2 + G(μ, φ)` with `ξ = φ′`.

mod flux;
mod zeros;

pub use flux::{
    build_fixed_linear_flux, build_regularized_flux, flux_deriv, flux_eval, log_flux,
    FluxError, RegularizedFlux, MATCH_TOL,
};
pub use zeros::{
    admissible_initial_range, find_zeros, AdmissibleRange, Zero, ZeroKind, ZeroSet, ZERO_TOL,
};

use thiserror::Error;

/// Half-width of the band around `|A| = 2e^{ω/2−1}` classified as [`Region::P2`].
pub const P2_BAND: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("(ω, A) = ({omega}, {a_const}) lies on the P2 boundary |A| = 2e^(ω/2−1)")]
    RegionP2 { omega: f64, a_const: f64 },
    #[error("zero refinement stalled near φ = {phi} (|g| = {residual:e})")]
    ConvergenceFailure { phi: f64, residual: f64 },
    #[error("φ = {0} is not a center (local maximum of G)")]
    NotACenter(f64),
    #[error("no closed-orbit region could be bracketed around φ = {0}")]
    NoBracket(f64),
    #[error("non-finite parameters (ω, A) = ({omega}, {a_const})")]
    NonFinite { omega: f64, a_const: f64 },
}

/// Parameter point `μ = (ω, A)`: wave speed and integration constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub a_const: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `|A| < 2e^{ω/2−1}`: three zeros of `g`.
    P1,
    /// `|A| = 2e^{ω/2−1}` (within [`P2_BAND`]): degenerate, rejected.
    P2,
    /// `|A| > 2e^{ω/2−1}`: a single zero of `g`.
    P3,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::P1 => "P1",
            Region::P2 => "P2",
            Region::P3 => "P3",
        })
    }
}

impl ModelParams {
    pub fn new(omega: f64, a_const: f64) -> Self {
        Self { omega, a_const }
    }

    /// Critical point `x₀ = e^{ω/2−1}` of `g`; `g` has a local minimum at `−x₀`
    /// and a local maximum at `x₀`.
    pub fn critical_point(&self) -> f64 {
        (0.5 * self.omega - 1.0).exp()
    }

    pub fn region(&self) -> Region {
        let edge = 2.0 * self.critical_point();
        let gap = self.a_const.abs() - edge;
        if gap.abs() <= P2_BAND {
            Region::P2
        } else if gap < 0.0 {
            Region::P1
        } else {
            Region::P3
        }
    }
}

/// `φ log φ²`, extended by 0 at φ = 0.
fn phi_log_phi2(phi: f64) -> f64 {
    if phi == 0.0 {
        0.0
    } else {
        phi * (phi * phi).ln()
    }
}

/// `g(μ, φ) = ωφ − φ log φ² + A`, with `g(μ, 0) = A`.
pub fn g_eval(mu: ModelParams, phi: f64) -> f64 {
    mu.omega * phi - phi_log_phi2(phi) + mu.a_const
}

/// `∂g/∂φ = ω − 2 − log φ²` (`+∞` at φ = 0).
pub fn g_prime_eval(mu: ModelParams, phi: f64) -> f64 {
    mu.omega - 2.0 - (phi * phi).ln()
}

/// `G(μ, φ) = (ω+1)/2 φ² − ½ φ² log φ² + Aφ`, the antiderivative of `g` with `G(μ, 0) = 0`.
pub fn big_g_eval(mu: ModelParams, phi: f64) -> f64 {
    0.5 * (mu.omega + 1.0) * phi * phi - 0.5 * phi * phi_log_phi2(phi) + mu.a_const * phi
}

/// Phase-plane energy `−ξ²/2 + G(μ, φ)`, constant along solutions of `φ″ = g(μ, φ)`.
pub fn phase_energy(mu: ModelParams, phi: f64, xi: f64) -> f64 {
    -0.5 * xi * xi + big_g_eval(mu, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_examples() {
        assert!(g_eval(ModelParams::new(1.0, 1.0), -1.0).abs() < 1e-15);
        assert_eq!(g_eval(ModelParams::new(0.0, 0.0), 1.0), 0.0);
        assert!(g_eval(ModelParams::new(1.0, 0.0), 0.5f64.exp()).abs() < 1e-15);
        assert_eq!(g_eval(ModelParams::new(0.3, -0.7), 0.0), -0.7);
    }

    #[test]
    fn big_g_examples() {
        assert_eq!(big_g_eval(ModelParams::new(2.0, 3.0), 0.0), 0.0);
        assert!(big_g_eval(ModelParams::new(0.0, 0.0), 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn big_g_derivative_is_g() {
        let mu = ModelParams::new(0.7, -0.4);
        for &phi in &[-3.0, -1.2, -0.3, 0.05, 0.8, 2.5] {
            let h = 1e-5;
            let fd = (big_g_eval(mu, phi + h) - big_g_eval(mu, phi - h)) / (2.0 * h);
            assert!((fd - g_eval(mu, phi)).abs() < 1e-8, "φ = {phi}");
        }
    }

    #[test]
    fn g_prime_at_a0_center_is_minus_two() {
        for &w in &[-3.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
            let mu = ModelParams::new(w, 0.0);
            let r2 = (0.5 * w).exp();
            assert!((g_prime_eval(mu, r2) + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_energy_at_rest() {
        let mu = ModelParams::new(1.0, 1.0);
        assert_eq!(phase_energy(mu, 2.09, 0.0), big_g_eval(mu, 2.09));
    }

    #[test]
    fn gaussian_soliton_on_zero_level() {
        // φ(x) = e^{(ω+1)/2} e^{−x²/2} solves −φ″ + ωφ − φ log φ² = 0 on the line
        let w = 0.4;
        let mu = ModelParams::new(w, 0.0);
        let amp = (0.5 * (w + 1.0)).exp();
        for i in 0..40 {
            let x = -4.0 + 0.2 * i as f64;
            let phi = amp * (-0.5 * x * x).exp();
            let xi = -x * phi;
            assert!(phase_energy(mu, phi, xi).abs() < 1e-13);
        }
    }

    #[test]
    fn regions() {
        assert_eq!(ModelParams::new(1.0, 1.0).region(), Region::P1);
        assert_eq!(ModelParams::new(0.0, 10.0).region(), Region::P3);
        assert_eq!(ModelParams::new(2.0, 2.0).region(), Region::P2);
        assert_eq!(ModelParams::new(2.0, -2.0 - 1e-10).region(), Region::P2);
    }
}
