//! Regularized logarithmic flux.
//!
//! `f(u) = u log|u|` is replaced on `|u| ≤ ε` by the odd degree-13 polynomial
//! `p_ε(u) = c u + Σᵢ aᵢ u^{2i+1} / ε^{2i}` (i = 1..6) whose value and first six
//! derivatives agree with `f` at `u = ε` (and, by oddness, at `u = −ε`).
//!
//! In the scaled variable `s = u/ε` we have `f = ε s (log ε + log s)`, so the
//! coefficients `aᵢ` and `c − log ε` do not depend on `ε`. Residuals are
//! reported in these scaled units: `|∂ᵏp(ε) − ∂ᵏf(ε)| · ε^{k−1}`.

use thiserror::Error;

/// Tolerance on the scaled derivative-matching residuals.
pub const MATCH_TOL: f64 = 1e-8;

const N_ODD: usize = 6;
const N_COND: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluxError {
    #[error("regularization width must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("derivative-matching system is numerically singular")]
    SingularSystem,
    #[error("matching condition k = {k} violated by {residual:e} (tolerance {tol:e})")]
    InconsistentMatch { k: usize, residual: f64, tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedFlux {
    pub epsilon: f64,
    /// Coefficient `c` of the linear term of `p_ε`.
    pub linear_coef: f64,
    /// `a₁..a₆`.
    pub odd_coefs: [f64; N_ODD],
    /// Scaled residuals `|∂ᵏp(ε) − ∂ᵏf(ε)| ε^{k−1}` for k = 0..6.
    pub match_residuals: [f64; N_COND],
}

/// `u log|u|`, with value 0 at the origin.
pub fn log_flux(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.abs().ln()
    }
}

/// `n (n−1) ⋯ (n−k+1)`.
fn falling(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    ((n - k + 1)..=n).map(|v| v as f64).product()
}

/// `dᵏ/dsᵏ (s log s)` at `s = 1`.
fn s_log_s_derivative(k: usize) -> f64 {
    match k {
        0 => 0.0,
        1 => 1.0,
        _ => {
            let fact: f64 = (1..=(k - 2)).map(|v| v as f64).product();
            if k.is_multiple_of(2) {
                fact
            } else {
                -fact
            }
        }
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Result<[f64; N], FluxError> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() <= 1e-13 * scale {
            return Err(FluxError::SingularSystem);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..N {
            let m = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = ((row + 1)..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

impl RegularizedFlux {
    fn from_scaled(epsilon: f64, shifted_linear: f64, odd_coefs: [f64; N_ODD]) -> Self {
        let mut flux = Self {
            epsilon,
            linear_coef: epsilon.ln() + shifted_linear,
            odd_coefs,
            match_residuals: [0.0; N_COND],
        };
        for k in 0..N_COND {
            let scale = epsilon.powi(k as i32 - 1);
            flux.match_residuals[k] =
                (flux.poly_derivative(epsilon, k) - log_flux_derivative(epsilon, k)).abs() * scale;
        }
        flux
    }

    pub fn max_match_residual(&self) -> f64 {
        self.match_residuals.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// `k`-th derivative of the polynomial branch `p_ε` at `u`.
    pub fn poly_derivative(&self, u: f64, k: usize) -> f64 {
        let eps = self.epsilon;
        let mut total = match k {
            0 => self.linear_coef * u,
            1 => self.linear_coef,
            _ => 0.0,
        };
        for (i, &a) in self.odd_coefs.iter().enumerate() {
            let n = 2 * (i + 1) + 1;
            if k <= n {
                total += a * falling(n, k) * u.powi((n - k) as i32) / eps.powi(n as i32 - 1);
            }
        }
        total
    }

    /// `f_ε(u)`.
    pub fn eval(&self, u: f64) -> f64 {
        if u.abs() >= self.epsilon {
            return log_flux(u);
        }
        let s2 = (u / self.epsilon).powi(2);
        let mut acc = 0.0;
        for &a in self.odd_coefs.iter().rev() {
            acc = acc * s2 + a;
        }
        u * (self.linear_coef + s2 * acc)
    }

    /// `f_ε′(u)`.
    pub fn deriv(&self, u: f64) -> f64 {
        if u.abs() >= self.epsilon {
            return u.abs().ln() + 1.0;
        }
        let s2 = (u / self.epsilon).powi(2);
        let mut acc = 0.0;
        for (i, &a) in self.odd_coefs.iter().enumerate().rev() {
            acc = acc * s2 + (2 * (i + 1) + 1) as f64 * a;
        }
        self.linear_coef + s2 * acc
    }

    /// `∫₀ᵘ f_ε`, an even function of `u`.
    pub fn potential(&self, u: f64) -> f64 {
        let eps = self.epsilon;
        let poly = |u: f64| {
            let s2 = (u / eps).powi(2);
            let mut acc = 0.0;
            for (i, &a) in self.odd_coefs.iter().enumerate().rev() {
                acc = acc * s2 + a / (2 * (i + 1) + 2) as f64;
            }
            u * u * (0.5 * self.linear_coef + s2 * acc)
        };
        if u.abs() < eps {
            poly(u)
        } else {
            let outer = |u: f64| 0.5 * u * u * u.abs().ln() - 0.25 * u * u;
            outer(u) + poly(eps) - outer(eps)
        }
    }
}

/// `k`-th derivative of `u log|u|` at `u > 0`.
fn log_flux_derivative(u: f64, k: usize) -> f64 {
    match k {
        0 => log_flux(u),
        1 => u.ln() + 1.0,
        _ => s_log_s_derivative(k) * u.powi(1 - k as i32),
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), FluxError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(FluxError::BadEpsilon(epsilon))
    }
}

/// Row `k` of the scaled matching system for unknowns `(c − log ε, a₁..a₆)`.
fn scaled_row(k: usize) -> [f64; N_COND] {
    let mut row = [0.0; N_COND];
    row[0] = falling(1, k);
    for i in 0..N_ODD {
        row[i + 1] = falling(2 * (i + 1) + 1, k);
    }
    row
}

/// Regularized flux whose linear coefficient is solved together with `a₁..a₆`
/// from the seven conditions `∂ᵏp_ε(ε) = ∂ᵏf(ε)`, k = 0..6.
pub fn build_regularized_flux(epsilon: f64) -> Result<RegularizedFlux, FluxError> {
    check_epsilon(epsilon)?;
    let mut a = [[0.0; N_COND]; N_COND];
    let mut b = [0.0; N_COND];
    for k in 0..N_COND {
        a[k] = scaled_row(k);
        b[k] = s_log_s_derivative(k);
    }
    let x = solve_dense(a, b)?;
    let odd: [f64; N_ODD] = std::array::from_fn(|i| x[i + 1]);
    let flux = RegularizedFlux::from_scaled(epsilon, x[0], odd);
    verify(&flux)?;
    Ok(flux)
}

/// The variant with the linear coefficient pinned to `log ε − ½`: solves the
/// conditions k = 1..6 and checks the remaining k = 0 condition. This system
/// is inconsistent, so the call reports [`FluxError::InconsistentMatch`]
/// carrying the measured residual.
pub fn build_fixed_linear_flux(epsilon: f64) -> Result<RegularizedFlux, FluxError> {
    check_epsilon(epsilon)?;
    let shifted_linear = -0.5;
    let mut a = [[0.0; N_ODD]; N_ODD];
    let mut b = [0.0; N_ODD];
    for k in 1..N_COND {
        let row = scaled_row(k);
        a[k - 1].copy_from_slice(&row[1..]);
        b[k - 1] = s_log_s_derivative(k) - shifted_linear * row[0];
    }
    let odd = solve_dense(a, b)?;
    let flux = RegularizedFlux::from_scaled(epsilon, shifted_linear, odd);
    verify(&flux)?;
    Ok(flux)
}

fn verify(flux: &RegularizedFlux) -> Result<(), FluxError> {
    match flux
        .match_residuals
        .iter()
        .enumerate()
        .find(|(_, &r)| !(r <= MATCH_TOL))
    {
        Some((k, &residual)) => Err(FluxError::InconsistentMatch {
            k,
            residual,
            tol: MATCH_TOL,
        }),
        None => Ok(()),
    }
}

pub fn flux_eval(flux: &RegularizedFlux, u: f64) -> f64 {
    flux.eval(u)
}

pub fn flux_deriv(flux: &RegularizedFlux, u: f64) -> f64 {
    flux.deriv(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_coefficients() {
        let f = build_regularized_flux(1.0).unwrap();
        let expect = [3.0, -15.0 / 4.0, 10.0 / 3.0, -15.0 / 8.0, 3.0 / 5.0, -1.0 / 12.0];
        for (a, e) in f.odd_coefs.iter().zip(expect) {
            assert!((a - e).abs() < 1e-11, "{a} vs {e}");
        }
        assert!((f.linear_coef + 49.0 / 40.0).abs() < 1e-11, "{}", f.linear_coef);
    }

    #[test]
    fn outer_branch_is_exact() {
        let f = build_regularized_flux(1.0).unwrap();
        assert_eq!(f.eval(2.0), 2.0 * 2f64.ln());
        assert_eq!(f.eval(-3.5), log_flux(-3.5));
        assert_eq!(f.eval(0.0), 0.0);
    }

    #[test]
    fn odd_and_continuous() {
        for &eps in &[0.1, 1.0, 1e-6] {
            let f = build_regularized_flux(eps).unwrap();
            for i in 1..20 {
                let u = eps * i as f64 / 17.0;
                assert!((f.eval(-u) + f.eval(u)).abs() <= 1e-15 * eps.max(f.eval(u).abs()));
                assert_eq!(f.deriv(-u), f.deriv(u));
            }
            let below = f.eval(eps * (1.0 - 1e-12));
            assert!((below - log_flux(eps)).abs() <= MATCH_TOL * eps);
            let dbelow = f.deriv(eps * (1.0 - 1e-12));
            assert!((dbelow - (eps.ln() + 1.0)).abs() <= 1e-8);
        }
    }

    #[test]
    fn potential_is_antiderivative() {
        let f = build_regularized_flux(0.5).unwrap();
        for &u in &[-1.3, -0.5, -0.2, 0.1, 0.45, 0.5, 0.7, 2.0] {
            let h = 1e-6;
            let fd = (f.potential(u + h) - f.potential(u - h)) / (2.0 * h);
            assert!((fd - f.eval(u)).abs() < 1e-8, "u = {u}");
            assert_eq!(f.potential(u), f.potential(-u));
        }
        assert_eq!(f.potential(0.0), 0.0);
    }

    #[test]
    fn fixed_linear_form_is_inconsistent() {
        match build_fixed_linear_flux(1.0) {
            Err(FluxError::InconsistentMatch { k, residual, .. }) => {
                assert_eq!(k, 0);
                assert!((residual - 3712.0 / 15015.0).abs() < 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_epsilon() {
        assert_eq!(build_regularized_flux(0.0), Err(FluxError::BadEpsilon(0.0)));
        assert!(build_regularized_flux(f64::NAN).is_err());
    }
}
