//! Spectral data of the Hill operator `𝓛 = −∂ₓ² + g′(μ, φ(x))` linearized
//! about a periodic wave: the θ index from a shooting problem and the
//! eigenvalues of a discretized `𝓛` with their inertial index.
//!
//! θ comes from the solution `ȳ` of `y″ = g′(μ, φ) y`, `ȳ(0) = −1/φ″(0)`,
//! `ȳ′(0) = 0`, which satisfies `ȳ(x + L) = ȳ(x) + θ φ′(x)`. Its sign decides
//! whether the zero eigenvalue (with eigenfunction `φ′`) is the second
//! (θ < 0) or third (θ > 0) eigenvalue, and θ ≠ 0 makes it simple.

use thiserror::Error;

use crate::model::{g_eval, g_prime_eval};
use crate::numerics::{
    eigenvalues_sym, integrate, EigenError, IvpSpec, OdeError, SymmetricMatrix,
};
use crate::waves::WaveProfile;

/// |θ| below this is classified degenerate.
pub const THETA_BAND: f64 = 1e-3;
/// Samples with `|φ|` below this make the potential `log φ²` unusable.
pub const SIGN_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("φ″(0) = {0:e} is too small to normalize the shooting solution")]
    DegenerateCurvature(f64),
    #[error("θ integration failed: {0}")]
    IntegrationFailure(#[from] OdeError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("wave sample {index} has |φ| = {value:e}; the Hill potential needs a sign-definite wave")]
    SignChange { index: usize, value: f64 },
    #[error("θ = {theta} predicts the zero eigenvalue at position {expected} but the spectrum has it at {found:?} with index {index:?}")]
    InconsistentClassification {
        theta: f64,
        expected: usize,
        found: Option<usize>,
        index: (usize, usize),
    },
    #[error("grid too small for the {scheme:?} Laplacian: {n}")]
    GridTooSmall { n: usize, scheme: Laplacian },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaClass {
    /// θ < 0: the zero eigenvalue is λ₁ and `(n, z) = (1, 1)`.
    Lambda1Zero,
    /// θ > 0: the zero eigenvalue is λ₂ and `(n, z) = (2, 1)`.
    Lambda2Zero,
    /// |θ| within the band: no conclusion.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaIndex {
    pub theta: f64,
    pub ybar_end_deriv: f64,
    pub phi_ddot0: f64,
    pub classification: ThetaClass,
}

fn classify(theta: f64) -> ThetaClass {
    if theta < -THETA_BAND {
        ThetaClass::Lambda1Zero
    } else if theta > THETA_BAND {
        ThetaClass::Lambda2Zero
    } else {
        ThetaClass::Degenerate
    }
}

/// θ = ȳ′(L)/φ″(0), co-integrating the wave with the shooting solution.
pub fn compute_theta(wave: &WaveProfile) -> Result<ThetaIndex, SpectralError> {
    compute_theta_with(wave, 1e-12, 1e-14)
}

pub fn compute_theta_with(
    wave: &WaveProfile,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<ThetaIndex, SpectralError> {
    let mu = wave.mu;
    let phi_ddot0 = g_eval(mu, wave.phi0);
    if phi_ddot0.abs() < 1e-12 {
        return Err(SpectralError::DegenerateCurvature(phi_ddot0));
    }
    let rhs = move |_x: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = g_eval(mu, y[0]);
        dy[2] = y[3];
        dy[3] = g_prime_eval(mu, y[0]) * y[2];
    };
    let y0 = vec![wave.phi0, 0.0, -1.0 / phi_ddot0, 0.0];
    let spec = IvpSpec::new(rhs, 0.0, wave.period, y0).tolerances(rel_tol, abs_tol);
    let end = integrate(spec)?.y_final();
    let theta = end[3] / phi_ddot0;
    Ok(ThetaIndex {
        theta,
        ybar_end_deriv: end[3],
        phi_ddot0,
        classification: classify(theta),
    })
}

/// Discretization of `−∂ₓ²` on the periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Laplacian {
    /// Three-point stencil.
    SecondOrder,
    /// Five-point stencil.
    #[default]
    FourthOrder,
    /// Dense Fourier differentiation matrix.
    Spectral,
}

impl std::str::FromStr for Laplacian {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fd2" | "second" => Ok(Laplacian::SecondOrder),
            "fd4" | "fourth" => Ok(Laplacian::FourthOrder),
            "spectral" => Ok(Laplacian::Spectral),
            _ => Err(format!("unknown Laplacian scheme '{s}' (fd2, fd4, spectral)")),
        }
    }
}

impl std::fmt::Display for Laplacian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Laplacian::SecondOrder => "fd2",
            Laplacian::FourthOrder => "fd4",
            Laplacian::Spectral => "spectral",
        })
    }
}

/// The potential `Q(x) = g′(μ, ψ(x)) = ω − 2 − log ψ²` on the wave's grid.
pub fn hill_potential(wave: &WaveProfile) -> Result<Vec<f64>, SpectralError> {
    wave.phi
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if v.abs() < SIGN_FLOOR {
                Err(SpectralError::SignChange { index, value: v })
            } else {
                Ok(g_prime_eval(wave.mu, v))
            }
        })
        .collect()
}

/// Periodic matrix of `−∂ₓ²` on `n` points over one period.
pub fn laplacian_matrix(n: usize, period: f64, scheme: Laplacian) -> Result<SymmetricMatrix, SpectralError> {
    let min = match scheme {
        Laplacian::SecondOrder => 3,
        Laplacian::FourthOrder => 5,
        Laplacian::Spectral => 4,
    };
    if n < min || (scheme == Laplacian::Spectral && !n.is_multiple_of(2)) {
        return Err(SpectralError::GridTooSmall { n, scheme });
    }
    let h = period / n as f64;
    let mut m = SymmetricMatrix::zeros(n);
    let stencil: &[f64] = match scheme {
        Laplacian::SecondOrder => &[2.0, -1.0],
        Laplacian::FourthOrder => &[30.0 / 12.0, -16.0 / 12.0, 1.0 / 12.0],
        Laplacian::Spectral => &[],
    };
    if scheme == Laplacian::Spectral {
        // second-derivative Fourier matrix on 2π-periodic grids, rescaled to period L
        let hh = 2.0 * std::f64::consts::PI / n as f64;
        let scale = (2.0 * std::f64::consts::PI / period).powi(2);
        for i in 0..n {
            for j in i..n {
                let k = j - i;
                let d2 = if k == 0 {
                    -std::f64::consts::PI.powi(2) / (3.0 * hh * hh) - 1.0 / 6.0
                } else {
                    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                    sign * 0.5 / (0.5 * k as f64 * hh).sin().powi(2)
                };
                m.set(i, j, -scale * d2);
            }
        }
        return Ok(m);
    }
    let inv_h2 = 1.0 / (h * h);
    for i in 0..n {
        m.add(i, i, stencil[0] * inv_h2);
        for (off, &c) in stencil.iter().enumerate().skip(1) {
            // adding (i, i+off) from every row covers each band entry once
            let j = (i + off) % n;
            m.add(i, j, c * inv_h2);
        }
    }
    Ok(m)
}

/// Discrete Hill operator with the default (fourth-order) Laplacian.
pub fn hill_matrix(wave: &WaveProfile) -> Result<SymmetricMatrix, SpectralError> {
    hill_matrix_with(wave, Laplacian::default())
}

pub fn hill_matrix_with(wave: &WaveProfile, scheme: Laplacian) -> Result<SymmetricMatrix, SpectralError> {
    let q = hill_potential(wave)?;
    let mut m = laplacian_matrix(wave.phi.len(), wave.period, scheme)?;
    for (i, qi) in q.iter().enumerate() {
        m.add(i, i, *qi);
    }
    Ok(m)
}

/// Eigenvalues of a matrix that commutes with the grid reflection
/// `j ↦ (N − j) mod N`, computed separately on the even and odd subspaces.
/// Falls back to the full matrix when the symmetry does not hold.
pub fn reflection_eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>, EigenError> {
    let n = m.size();
    let refl = |i: usize| (n - i) % n;
    let tol = 1e-12 * m.norm();
    let symmetric = n.is_multiple_of(2)
        && (0..n).all(|i| (0..n).all(|j| (m.get(i, j) - m.get(refl(i), refl(j))).abs() <= tol));
    if !symmetric || n < 4 {
        return eigenvalues_sym(m);
    }
    let half = n / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // basis vectors as (index, weight) pairs
    let mut even: Vec<Vec<(usize, f64)>> = vec![vec![(0, 1.0)]];
    let mut odd: Vec<Vec<(usize, f64)>> = Vec::new();
    for j in 1..half {
        even.push(vec![(j, r), (n - j, r)]);
        odd.push(vec![(j, r), (n - j, -r)]);
    }
    even.push(vec![(half, 1.0)]);
    let project = |basis: &[Vec<(usize, f64)>]| {
        let k = basis.len();
        let mut b = SymmetricMatrix::zeros(k);
        for a in 0..k {
            for c in a..k {
                let mut s = 0.0;
                for &(i, wi) in &basis[a] {
                    for &(j, wj) in &basis[c] {
                        s += wi * wj * m.get(i, j);
                    }
                }
                b.set(a, c, s);
            }
        }
        b
    };
    let mut vals = eigenvalues_sym(&project(&even))?;
    vals.extend(eigenvalues_sym(&project(&odd))?);
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillSpectrum {
    pub grid_size: usize,
    pub scheme: Laplacian,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `(n, z)`: negative eigenvalues and numerically zero eigenvalues.
    pub inertial_index: (usize, usize),
    /// `‖𝓛_h φ′‖ / ‖φ′‖`.
    pub kernel_residual: f64,
    /// Eigenvalues with `|λ| ≤ kernel_band` count as zero.
    pub kernel_band: f64,
    /// Position (0-based) of the eigenvalue closest to zero when it lies in the band.
    pub zero_position: Option<usize>,
}

impl HillSpectrum {
    /// First eigenvalue above the kernel, if any.
    pub fn gap(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&v| v > self.kernel_band)
    }

    pub fn leading(&self, count: usize) -> &[f64] {
        &self.eigenvalues[..count.min(self.eigenvalues.len())]
    }
}

/// `‖M v‖₂ / ‖v‖₂`.
pub fn relative_image_norm(m: &SymmetricMatrix, v: &[f64]) -> f64 {
    let mv = m.mul_vec(v);
    let num: f64 = mv.iter().map(|x| x * x).sum();
    let den: f64 = v.iter().map(|x| x * x).sum();
    (num / den).sqrt()
}

pub fn hill_spectrum(wave: &WaveProfile) -> Result<HillSpectrum, SpectralError> {
    hill_spectrum_with(wave, Laplacian::default())
}

pub fn hill_spectrum_with(wave: &WaveProfile, scheme: Laplacian) -> Result<HillSpectrum, SpectralError> {
    let m = hill_matrix_with(wave, scheme)?;
    let eigenvalues = reflection_eigenvalues(&m)?;
    let kernel_residual = relative_image_norm(&m, &wave.dphi);
    // Gershgorin bound on the spectral radius sets the roundoff floor
    let radius = (0..m.size())
        .map(|i| (0..m.size()).map(|j| m.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let kernel_band = (10.0 * kernel_residual).max(1e3 * f64::EPSILON * radius);
    let n_neg = eigenvalues.iter().filter(|&&v| v < -kernel_band).count();
    let n_zero = eigenvalues.iter().filter(|&&v| v.abs() <= kernel_band).count();
    let zero_position = eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .filter(|(_, v)| v.abs() <= kernel_band)
        .map(|(i, _)| i);
    Ok(HillSpectrum {
        grid_size: wave.phi.len(),
        scheme,
        eigenvalues,
        inertial_index: (n_neg, n_zero),
        kernel_residual,
        kernel_band,
        zero_position,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consistency {
    pub theta: f64,
    pub classification: ThetaClass,
    pub inertial_index: (usize, usize),
    pub zero_position: Option<usize>,
    /// `false` only for a degenerate θ, where nothing is asserted.
    pub checked: bool,
}

/// Checks the spectrum against the θ prediction: θ < 0 ⇒ `(1, 1)` with the
/// zero at λ₁; θ > 0 ⇒ `(2, 1)` with the zero at λ₂.
pub fn cross_validate(theta: &ThetaIndex, spectrum: &HillSpectrum) -> Result<Consistency, SpectralError> {
    let expected = match theta.classification {
        ThetaClass::Lambda1Zero => Some(1),
        ThetaClass::Lambda2Zero => Some(2),
        ThetaClass::Degenerate => None,
    };
    if let Some(pos) = expected {
        let ok = spectrum.inertial_index == (pos, 1) && spectrum.zero_position == Some(pos);
        if !ok {
            return Err(SpectralError::InconsistentClassification {
                theta: theta.theta,
                expected: pos,
                found: spectrum.zero_position,
                index: spectrum.inertial_index,
            });
        }
    }
    Ok(Consistency {
        theta: theta.theta,
        classification: theta.classification,
        inertial_index: spectrum.inertial_index,
        zero_position: spectrum.zero_position,
        checked: expected.is_some(),
    })
}
