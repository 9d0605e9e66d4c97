//! Orbital-stability certificates for periodic waves.
//!
//! For `A = 0` the waves form the scaling family `ψ_ω = e^{ω/2} φ₀` and the
//! convexity quantity is `d″(ω) = dF(ψ_ω)/dω = ½ e^ω ∫ φ₀²`.
//!
//! For `A ≠ 0` the waves are continued at fixed period `L₀` in both
//! parameters. With `M = ∫ψ` and `F = ½∫ψ²` the relevant data are the
//! parameter derivatives `M_ω, M_A, F_ω, F_A`, the matrix
//! `𝒟 = [[F_A, M_A], [F_ω, M_ω]]` and the quadratic form
//! `K(a, b) = a² M_A + ab (M_ω + F_A) + b² F_ω`. A witness with `K(a, b) > 0`
//! and `det 𝒟 ≠ 0`, together with inertial index `(1, 1)`, certifies
//! stability. `η = ∂ψ/∂ω` and `β = ∂ψ/∂A` satisfy `𝓛η = −ψ`, `𝓛β = −1`, so
//! `⟨𝓛(aβ + bη), aβ + bη⟩ = −K(a, b)`.

use thiserror::Error;

use crate::model::ModelParams;
use crate::numerics::periodic_trapezoid;
use crate::spectral::{
    compute_theta, hill_matrix_with, hill_spectrum_with, Laplacian, SpectralError, SIGN_FLOOR,
};
use crate::waves::{fixed_period_wave_near, scaling_family, WaveError, WaveOptions, WaveProfile};

/// Default finite-difference step in ω and A.
pub const FD_STEP: f64 = 1e-3;
/// Relative tolerance on the exact differential identities.
pub const ID_TOL: f64 = 1e-4;
/// Relative tolerance of the quadratic-form check.
pub const QUADFORM_TOL: f64 = 1e-3;
/// `det 𝒟` below this multiple of the squared entry scale is treated as zero.
pub const DET_FLOOR_REL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("fixed-period wave at (ω, A) = ({omega}, {a_const}) failed: {source}")]
    StencilFailure {
        omega: f64,
        a_const: f64,
        source: Box<WaveError>,
    },
    #[error("functional needs a sign-definite wave; sample {index} has |ψ| = {value:e}")]
    SignChange { index: usize, value: f64 },
    #[error("expected a wave with A = 0, got A = {0}")]
    NotScalingFamily(f64),
}

/// `F = ½∫ψ²`, `M = ∫ψ`, `E = ½∫(ψ′² + ψ² − ψ² log ψ²)` over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functionals {
    pub f: f64,
    pub m: f64,
    pub e: f64,
}

pub fn functionals(wave: &WaveProfile) -> Result<Functionals, StabilityError> {
    if let Some((index, &value)) = wave
        .phi
        .iter()
        .enumerate()
        .find(|(_, v)| v.abs() < SIGN_FLOOR)
    {
        return Err(StabilityError::SignChange { index, value });
    }
    let l = wave.period;
    let sq: Vec<f64> = wave.phi.iter().map(|v| v * v).collect();
    let energy: Vec<f64> = wave
        .phi
        .iter()
        .zip(&wave.dphi)
        .map(|(&p, &q)| {
            let p2 = p * p;
            0.5 * (q * q + p2 - p2 * p2.ln())
        })
        .collect();
    Ok(Functionals {
        f: 0.5 * periodic_trapezoid(&sq, l),
        m: periodic_trapezoid(&wave.phi, l),
        e: periodic_trapezoid(&energy, l),
    })
}

/// `d″(ω) = ½ e^ω ∫ φ₀²` where `φ₀` is the `ω = 0` member of the `A = 0`
/// family containing `wave`.
pub fn d2_omega_a0(wave: &WaveProfile, omega: f64) -> Result<f64, StabilityError> {
    if wave.mu.a_const != 0.0 {
        return Err(StabilityError::NotScalingFamily(wave.mu.a_const));
    }
    let sq: Vec<f64> = wave.phi.iter().map(|v| v * v).collect();
    // ∫φ₀² = e^{−ω_wave} ∫ψ²
    let base_integral = (-wave.mu.omega).exp() * periodic_trapezoid(&sq, wave.period);
    Ok(0.5 * omega.exp() * base_integral)
}

/// Central difference of `F(ψ_ω)` along the scaling family.
pub fn d2_omega_fd(wave: &WaveProfile, omega: f64, h: f64) -> Result<f64, StabilityError> {
    if wave.mu.a_const != 0.0 {
        return Err(StabilityError::NotScalingFamily(wave.mu.a_const));
    }
    let base = scaling_family_base(wave);
    let f_at = |w: f64| -> Result<f64, StabilityError> {
        Ok(functionals(&scaling_family(&base, w)?)?.f)
    };
    Ok((f_at(omega + h)? - f_at(omega - h)?) / (2.0 * h))
}

fn scaling_family_base(wave: &WaveProfile) -> WaveProfile {
    let k = (-0.5 * wave.mu.omega).exp();
    WaveProfile {
        mu: ModelParams::new(0.0, 0.0),
        phi0: k * wave.phi0,
        period: wave.period,
        center: k * wave.center,
        sign: wave.sign,
        phi: wave.phi.iter().map(|v| k * v).collect(),
        dphi: wave.dphi.iter().map(|v| k * v).collect(),
    }
}

/// Parameter derivatives along the fixed-period family, by central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDerivatives {
    pub h: f64,
    pub m_omega: f64,
    pub m_a: f64,
    pub f_omega: f64,
    pub f_a: f64,
    /// `∂ψ/∂ω` on the wave's grid.
    pub eta: Vec<f64>,
    /// `∂ψ/∂A` on the wave's grid.
    pub beta: Vec<f64>,
}

impl FamilyDerivatives {
    /// `det 𝒟 = F_A M_ω − M_A F_ω`.
    pub fn det(&self) -> f64 {
        self.f_a * self.m_omega - self.m_a * self.f_omega
    }

    /// Largest magnitude among the four entries.
    pub fn scale(&self) -> f64 {
        [self.m_omega, self.m_a, self.f_omega, self.f_a]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn stencil_wave(
    base: &WaveProfile,
    omega: f64,
    a_const: f64,
    opts: &WaveOptions,
) -> Result<WaveProfile, StabilityError> {
    let mu = ModelParams::new(omega, a_const);
    fixed_period_wave_near(mu, base.period, base.phi0, opts)
        .map(|fp| fp.wave)
        .map_err(|e| StabilityError::StencilFailure {
            omega,
            a_const,
            source: Box::new(e),
        })
}

/// Builds the four stencil waves `(ω₀ ± h, A₀)`, `(ω₀, A₀ ± h)` at the base
/// period and differences `M`, `F` and the profiles. All members are even with
/// their extremum at `x = 0`, so grid values can be differenced pointwise.
pub fn family_derivatives(base: &WaveProfile, h: f64) -> Result<FamilyDerivatives, StabilityError> {
    let opts = WaveOptions::default()
        .with_samples(base.len())
        .sign_definite();
    let ModelParams { omega, a_const } = base.mu;
    let w_plus = stencil_wave(base, omega + h, a_const, &opts)?;
    let w_minus = stencil_wave(base, omega - h, a_const, &opts)?;
    let a_plus = stencil_wave(base, omega, a_const + h, &opts)?;
    let a_minus = stencil_wave(base, omega, a_const - h, &opts)?;
    let fw = (functionals(&w_plus)?, functionals(&w_minus)?);
    let fa = (functionals(&a_plus)?, functionals(&a_minus)?);
    let diff = |p: &WaveProfile, m: &WaveProfile| -> Vec<f64> {
        p.phi
            .iter()
            .zip(&m.phi)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect()
    };
    Ok(FamilyDerivatives {
        h,
        m_omega: (fw.0.m - fw.1.m) / (2.0 * h),
        m_a: (fa.0.m - fa.1.m) / (2.0 * h),
        f_omega: (fw.0.f - fw.1.f) / (2.0 * h),
        f_a: (fa.0.f - fa.1.f) / (2.0 * h),
        eta: diff(&w_plus, &w_minus),
        beta: diff(&a_plus, &a_minus),
    })
}

/// Relative residuals of `2F_ω = 2F − A M_ω`, `2F_A = M − A M_A`, `F_A = M_ω`,
/// each divided by the largest term involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub f_omega: f64,
    pub f_a: f64,
    pub symmetry: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.f_omega.max(self.f_a).max(self.symmetry)
    }
}

fn rel(residual: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        residual.abs()
    } else {
        residual.abs() / scale
    }
}

pub fn check_identities(
    mu0: ModelParams,
    derivs: &FamilyDerivatives,
    funcs: &Functionals,
) -> IdentityResiduals {
    let a = mu0.a_const;
    let d = derivs;
    IdentityResiduals {
        f_omega: rel(
            2.0 * d.f_omega - 2.0 * funcs.f + a * d.m_omega,
            &[2.0 * d.f_omega, 2.0 * funcs.f, a * d.m_omega],
        ),
        f_a: rel(
            2.0 * d.f_a - funcs.m + a * d.m_a,
            &[2.0 * d.f_a, funcs.m, a * d.m_a],
        ),
        symmetry: rel(d.f_a - d.m_omega, &[d.f_a, d.m_omega]),
    }
}

/// `K(a, b) = a² M_A + ab (M_ω + F_A) + b² F_ω`.
pub fn k_function(derivs: &FamilyDerivatives, a: f64, b: f64) -> f64 {
    a * a * derivs.m_a + a * b * (derivs.m_omega + derivs.f_a) + b * b * derivs.f_omega
}

/// `⟨𝓛_h Φ, Φ⟩` for `Φ = aβ + bη`, using the grid inner product `(L/N) Σ`.
pub fn i_value(
    wave: &WaveProfile,
    derivs: &FamilyDerivatives,
    a: f64,
    b: f64,
    scheme: Laplacian,
) -> Result<f64, StabilityError> {
    let m = hill_matrix_with(wave, scheme)?;
    let phi: Vec<f64> = derivs
        .beta
        .iter()
        .zip(&derivs.eta)
        .map(|(bt, et)| a * bt + b * et)
        .collect();
    let lphi = m.mul_vec(&phi);
    let prod: Vec<f64> = lphi.iter().zip(&phi).map(|(x, y)| x * y).collect();
    Ok(periodic_trapezoid(&prod, wave.period))
}

/// `‖𝓛_h β + 1‖ / ‖1‖` and `‖𝓛_h η + ψ‖ / ‖ψ‖` (grid 2-norms).
pub fn operator_residuals(
    wave: &WaveProfile,
    derivs: &FamilyDerivatives,
    scheme: Laplacian,
) -> Result<(f64, f64), StabilityError> {
    let m = hill_matrix_with(wave, scheme)?;
    let lb = m.mul_vec(&derivs.beta);
    let le = m.mul_vec(&derivs.eta);
    let n = wave.len() as f64;
    let rb = (lb.iter().map(|v| (v + 1.0).powi(2)).sum::<f64>() / n).sqrt();
    let num: f64 = le.iter().zip(&wave.phi).map(|(v, p)| (v + p).powi(2)).sum();
    let den: f64 = wave.phi.iter().map(|p| p * p).sum();
    Ok((rb, (num / den).sqrt()))
}

/// Search for `(a, b)` with `K(a, b) > 0`: `(1, 0)` when `M_A > 0`, `(0, 1)`
/// when `F_ω > 0`, `(M_ω, −M_A)` when `M_ω > 0 > M_A`, then `(±1, 1)` and a
/// grid of directions.
pub fn find_k_witness(derivs: &FamilyDerivatives) -> Option<((f64, f64), f64)> {
    let d = derivs;
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    if d.m_a > 0.0 {
        candidates.push((1.0, 0.0));
    }
    if d.f_omega > 0.0 {
        candidates.push((0.0, 1.0));
    }
    if d.m_omega > 0.0 && d.m_a < 0.0 {
        candidates.push((d.m_omega, -d.m_a));
    }
    candidates.push((1.0, 1.0));
    candidates.push((-1.0, 1.0));
    for &(a, b) in &candidates {
        let k = k_function(d, a, b);
        if k > 0.0 {
            return Some(((a, b), k));
        }
    }
    (0..72)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / 72.0;
            let (a, b) = (t.cos(), t.sin());
            ((a, b), k_function(d, a, b))
        })
        .filter(|(_, k)| *k > 0.0)
        .max_by(|x, y| x.1.total_cmp(&y.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    StableCertified,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::StableCertified => "stable_certified",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub h: f64,
    pub scheme: Laplacian,
    /// Also difference with `h/2` and report the change.
    pub richardson: bool,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            h: FD_STEP,
            scheme: Laplacian::default(),
            richardson: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub mu0: ModelParams,
    pub phi0: f64,
    pub period: f64,
    pub theta: f64,
    pub inertial_index: (usize, usize),
    pub d2_omega: Option<f64>,
    pub m_omega: Option<f64>,
    pub m_a: Option<f64>,
    pub f_omega: Option<f64>,
    pub f_a: Option<f64>,
    pub det_d: Option<f64>,
    pub k_witness: Option<((f64, f64), f64)>,
    pub i_value: Option<f64>,
    pub identities: Option<IdentityResiduals>,
    /// Largest relative change of the four derivatives between steps `h` and `h/2`.
    pub fd_change: Option<f64>,
    pub verdict: Verdict,
}

impl StabilityReport {
    /// `M_A · det 𝒟`.
    pub fn m_a_det(&self) -> Option<f64> {
        Some(self.m_a? * self.det_d?)
    }
}

pub fn stability_verdict(wave: &WaveProfile) -> Result<StabilityReport, StabilityError> {
    stability_verdict_with(wave, &StabilityOptions::default())
}

pub fn stability_verdict_with(
    wave: &WaveProfile,
    opts: &StabilityOptions,
) -> Result<StabilityReport, StabilityError> {
    let theta = compute_theta(wave)?.theta;
    let spectrum = hill_spectrum_with(wave, opts.scheme)?;
    let index_ok = spectrum.inertial_index == (1, 1);
    let mut report = StabilityReport {
        mu0: wave.mu,
        phi0: wave.phi0,
        period: wave.period,
        theta,
        inertial_index: spectrum.inertial_index,
        d2_omega: None,
        m_omega: None,
        m_a: None,
        f_omega: None,
        f_a: None,
        det_d: None,
        k_witness: None,
        i_value: None,
        identities: None,
        fd_change: None,
        verdict: Verdict::Inconclusive,
    };
    if wave.mu.a_const == 0.0 {
        let d2 = d2_omega_a0(wave, wave.mu.omega)?;
        report.d2_omega = Some(d2);
        if index_ok && d2 > 0.0 {
            report.verdict = Verdict::StableCertified;
        }
        return Ok(report);
    }
    let derivs = family_derivatives(wave, opts.h)?;
    let funcs = functionals(wave)?;
    if opts.richardson {
        let half = family_derivatives(wave, 0.5 * opts.h)?;
        let pairs = [
            (derivs.m_omega, half.m_omega),
            (derivs.m_a, half.m_a),
            (derivs.f_omega, half.f_omega),
            (derivs.f_a, half.f_a),
        ];
        let scale = derivs.scale().max(f64::MIN_POSITIVE);
        report.fd_change = Some(pairs.iter().fold(0.0, |m, (a, b)| m.max((a - b).abs() / scale)));
    }
    let det = derivs.det();
    report.m_omega = Some(derivs.m_omega);
    report.m_a = Some(derivs.m_a);
    report.f_omega = Some(derivs.f_omega);
    report.f_a = Some(derivs.f_a);
    report.det_d = Some(det);
    report.identities = Some(check_identities(wave.mu, &derivs, &funcs));
    report.k_witness = find_k_witness(&derivs);
    if let Some(((a, b), _)) = report.k_witness {
        report.i_value = Some(i_value(wave, &derivs, a, b, opts.scheme)?);
    }
    let det_floor = DET_FLOOR_REL * derivs.scale().powi(2);
    if index_ok && det.abs() > det_floor && report.k_witness.is_some() {
        report.verdict = Verdict::StableCertified;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::construct_wave;

    #[test]
    fn functionals_signs() {
        let pos = construct_wave(ModelParams::new(1.0, 1.0), 3.0, 64).unwrap();
        let f = functionals(&pos).unwrap();
        assert!(f.f > 0.0 && f.m > 0.0);
        let neg = construct_wave(ModelParams::new(-1.0, -1.0), -0.1, 64).unwrap();
        let g = functionals(&neg).unwrap();
        assert!(g.f > 0.0 && g.m < 0.0);
    }

    #[test]
    fn functionals_converge() {
        let mu = ModelParams::new(0.0, 0.0);
        let a = functionals(&construct_wave(mu, 1.5, 64).unwrap()).unwrap();
        let b = functionals(&construct_wave(mu, 1.5, 128).unwrap()).unwrap();
        assert!((a.f - b.f).abs() < 1e-10);
        assert!((a.m - b.m).abs() < 1e-10);
    }

    #[test]
    fn d2_at_zero_is_half_l2() {
        let w = construct_wave(ModelParams::new(0.0, 0.0), 1.5, 64).unwrap();
        let d2 = d2_omega_a0(&w, 0.0).unwrap();
        assert!((d2 - functionals(&w).unwrap().f).abs() < 1e-14);
        let fd = d2_omega_fd(&w, 0.7, 1e-4).unwrap();
        let exact = d2_omega_a0(&w, 0.7).unwrap();
        assert!((fd - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn k_function_axes() {
        let d = FamilyDerivatives {
            h: 1e-3,
            m_omega: 0.3,
            m_a: -0.2,
            f_omega: 7.0,
            f_a: 0.3,
            eta: vec![],
            beta: vec![],
        };
        assert_eq!(k_function(&d, 0.0, 1.0), 7.0);
        assert_eq!(k_function(&d, 1.0, 0.0), -0.2);
        let ((a, b), k) = find_k_witness(&d).unwrap();
        assert_eq!((a, b), (0.0, 1.0));
        assert_eq!(k, 7.0);
    }

    #[test]
    fn witness_from_det_case() {
        // M_A < 0, F_ω ≤ 0, M_ω > 0: the witness (M_ω, −M_A) gives K = −M_A det
        let d = FamilyDerivatives {
            h: 1e-3,
            m_omega: 0.5,
            m_a: -0.2,
            f_omega: -0.1,
            f_a: 0.5,
            eta: vec![],
            beta: vec![],
        };
        let ((a, b), k) = find_k_witness(&d).unwrap();
        assert_eq!((a, b), (0.5, 0.2));
        assert!((k - (-d.m_a * d.det())).abs() < 1e-15);
    }

    #[test]
    fn a0_verdict() {
        let w = construct_wave(ModelParams::new(0.0, 0.0), 1.5, 128).unwrap();
        let r = stability_verdict(&w).unwrap();
        assert_eq!(r.verdict, Verdict::StableCertified);
        assert!(r.d2_omega.unwrap() > 0.0);
    }
}
