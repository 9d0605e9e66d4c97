//! Dense symmetric eigenproblems by the cyclic Jacobi method.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("Jacobi sweeps did not converge (off-diagonal norm {off:e} after {sweeps} sweeps)")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

/// Row-major dense symmetric matrix. `set` writes both mirrored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 60;

/// All eigenvalues in ascending order.
pub fn eigenvalues_sym(m: &SymmetricMatrix) -> Result<Vec<f64>, EigenError> {
    let (values, _) = jacobi(m, false)?;
    let mut values = values;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues (ascending) with orthonormal eigenvectors.
pub fn eigen_sym(m: &SymmetricMatrix) -> Result<SymmetricEigen, EigenError> {
    let n = m.n;
    let (values, v) = jacobi(m, true)?;
    let v = v.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    // v is stored with eigenvectors as rows
    let vectors = order
        .iter()
        .map(|&k| v[k * n..(k + 1) * n].to_vec())
        .collect();
    let values = order.iter().map(|&k| values[k]).collect();
    Ok(SymmetricEigen { values, vectors })
}

fn jacobi(m: &SymmetricMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>), EigenError> {
    let n = m.n;
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let mut a = m.data.clone();
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        id
    });
    if n <= 1 {
        return Ok((a, v));
    }
    let scale = m.norm();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let target = f64::EPSILON * scale;
    let mut off = 0.0;
    for sweep in 0..MAX_SWEEPS {
        off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        off = off.sqrt();
        if off <= target {
            return Ok(((0..n).map(|i| a[i * n + i]).collect(), v));
        }
        // skip small rotations during the first sweeps
        let thresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if sweep > 3
                    && app.abs() + 100.0 * apq.abs() == app.abs()
                    && aqq.abs() + 100.0 * apq.abs() == aqq.abs()
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, n, p, q, c, s);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if let Some(v) = v.as_mut() {
                    let (lo, hi) = v.split_at_mut(q * n);
                    let vp = &mut lo[p * n..(p + 1) * n];
                    let vq = &mut hi[..n];
                    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                        let (xo, yo) = (*x, *y);
                        *x = c * xo - s * yo;
                        *y = s * xo + c * yo;
                    }
                }
            }
        }
    }
    Err(EigenError::NoConvergence {
        sweeps: MAX_SWEEPS,
        off,
    })
}

/// Applies the rotation to rows/columns `p` and `q` outside the 2×2 block.
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = a.split_at_mut(q * n);
    let row_p = &mut lo[p * n..(p + 1) * n];
    let row_q = &mut hi[..n];
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let (x, y) = (row_p[k], row_q[k]);
        row_p[k] = c * x - s * y;
        row_q[k] = s * x + c * y;
    }
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        a[k * n + p] = a[p * n + k];
        a[k * n + q] = a[q * n + k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_by_two() {
        let mut m = SymmetricMatrix::zeros(2);
        m.set(0, 0, 2.0);
        m.set(1, 1, 2.0);
        m.set(0, 1, 1.0);
        let e = eigen_sym(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        // tridiag(-1, 2, -1): λ_k = 2 - 2cos(kπ/(n+1))
        let n = 40;
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
            }
        }
        let vals = eigenvalues_sym(&m).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn eigenvectors_satisfy_equation() {
        let n = 12;
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { i as f64 } else { 0.0 });
            }
        }
        let e = eigen_sym(&m).unwrap();
        for (lam, vec) in e.values.iter().zip(&e.vectors) {
            let mv = m.mul_vec(vec);
            let res: f64 = mv.iter().zip(vec).map(|(a, b)| (a - lam * b).powi(2)).sum();
            assert!(res.sqrt() < 1e-12);
            let nrm: f64 = vec.iter().map(|x| x * x).sum();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
        let only = eigenvalues_sym(&m).unwrap();
        for (a, b) in only.iter().zip(&e.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nan() {
        let mut m = SymmetricMatrix::zeros(2);
        m.set(0, 1, f64::NAN);
        assert_eq!(eigenvalues_sym(&m), Err(EigenError::NonFinite));
    }
}
