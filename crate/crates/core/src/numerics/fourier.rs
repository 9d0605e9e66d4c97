//! Spectral differentiation and periodic quadrature on uniform grids.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("grid size must be even and at least 4, got {0}")]
    OddGrid(usize),
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Angular wavenumbers `2πk/L` in FFT order; the Nyquist entry is `-πN/L`.
pub fn wavenumbers(n: usize, period: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / period;
    (0..n)
        .map(|j| {
            let k = if j < n / 2 {
                j as i64
            } else {
                j as i64 - n as i64
            };
            base * k as f64
        })
        .collect()
}

/// Cached forward/inverse transforms for one grid size and period.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    period: f64,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("period", &self.period)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(n: usize, period: f64) -> Result<Self, FourierError> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(FourierError::OddGrid(n));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(FourierError::BadPeriod(period));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            period,
            k: wavenumbers(n, period),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|j| j as f64 * h).collect()
    }

    /// Unnormalized forward transform of real samples.
    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the `1/N` normalization; returns the real part.
    pub fn inverse_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        let s = 1.0 / self.n as f64;
        coeffs.iter().map(|c| c.re * s).collect()
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= s;
        }
    }

    /// `order`-th derivative of a periodic sample vector. For odd orders the
    /// Nyquist mode is dropped so the result stays real.
    pub fn derivative(&self, u: &[f64], order: u32) -> Result<Vec<f64>, FourierError> {
        if u.len() != self.n {
            return Err(FourierError::LengthMismatch {
                expected: self.n,
                got: u.len(),
            });
        }
        let mut c = self.forward(u);
        let nyq = self.n / 2;
        for (j, cj) in c.iter_mut().enumerate() {
            if order % 2 == 1 && j == nyq {
                *cj = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, self.k[j]);
            *cj *= ik.powu(order);
        }
        Ok(self.inverse_real(c))
    }
}

/// One-shot spectral derivative. Prefer [`SpectralGrid`] in loops.
pub fn spectral_derivative(u: &[f64], period: f64, order: u32) -> Result<Vec<f64>, FourierError> {
    SpectralGrid::new(u.len(), period)?.derivative(u, order)
}

/// Trapezoid rule over one period (spectrally accurate for smooth periodic data).
pub fn periodic_trapezoid(values: &[f64], period: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() * period / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_trig_polynomial() {
        let n = 64;
        let l = 3.0;
        let g = SpectralGrid::new(n, l).unwrap();
        let x = g.points();
        let w = 2.0 * PI / l;
        let u: Vec<f64> = x.iter().map(|&x| (3.0 * w * x).sin() + 0.5 * (w * x).cos()).collect();
        let d1 = g.derivative(&u, 1).unwrap();
        let d3 = g.derivative(&u, 3).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            let e1 = 3.0 * w * (3.0 * w * xi).cos() - 0.5 * w * (w * xi).sin();
            let e3 = -27.0 * w.powi(3) * (3.0 * w * xi).cos() + 0.5 * w.powi(3) * (w * xi).sin();
            assert!((d1[i] - e1).abs() < 1e-11);
            assert!((d3[i] - e3).abs() < 1e-9);
        }
    }

    #[test]
    fn smooth_function_converges() {
        let n = 64;
        let g = SpectralGrid::new(n, 2.0 * PI).unwrap();
        let x = g.points();
        let u: Vec<f64> = x.iter().map(|x| x.sin().exp()).collect();
        let d = g.derivative(&u, 1).unwrap();
        for (i, xi) in x.iter().enumerate() {
            assert!((d[i] - xi.cos() * xi.sin().exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn nyquist_mode_dropped_for_odd_orders() {
        let n = 8;
        let u: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let d = spectral_derivative(&u, 1.0, 1).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn trapezoid_exact_for_trig() {
        let n = 16;
        let l = 2.5;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let x = j as f64 * l / n as f64;
                1.0 + (2.0 * PI * x / l).cos().powi(2)
            })
            .collect();
        assert!((periodic_trapezoid(&vals, l) - 1.5 * l).abs() < 1e-13);
    }

    #[test]
    fn rejects_odd_grid() {
        assert!(matches!(SpectralGrid::new(7, 1.0), Err(FourierError::OddGrid(7))));
    }
}
