//! Published reference values that `table1` and `table2` compare against.

/// A traveling wave fixed by `(ω, A, φ(0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveKey {
    pub omega: f64,
    pub a: f64,
    pub phi0: f64,
}

const fn k(omega: f64, a: f64, phi0: f64) -> WaveKey {
    WaveKey { omega, a, phi0 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodThetaRow {
    pub key: WaveKey,
    pub period: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeRow {
    pub key: WaveKey,
    pub m_a_det: f64,
    pub m_a: f64,
    pub f_omega: f64,
}

/// Period and θ index; the last two rows are the worked examples.
pub const PERIOD_THETA: [PeriodThetaRow; 6] = [
    PeriodThetaRow { key: k(2.0, 4.0, 5.0), period: 3.49, theta: -0.14 },
    PeriodThetaRow { key: k(-1.0, -1.0, -0.1), period: 4.32, theta: -0.02 },
    PeriodThetaRow { key: k(1.0, -2.0, -2.0), period: 3.65, theta: -0.03 },
    PeriodThetaRow { key: k(-1.0, -2.0, -1.0), period: 3.37, theta: -0.03 },
    PeriodThetaRow { key: k(0.0, 0.0, 1.5), period: 4.80, theta: -1.70 },
    PeriodThetaRow { key: k(1.0, 1.0, 3.0), period: 4.18, theta: -0.08 },
];

/// `M_A det 𝒟`, `M_A` and `F_ω` along fixed-period families.
pub const DERIVATIVES: [DerivativeRow; 9] = [
    DerivativeRow { key: k(1.0, 1.0, 3.0), m_a_det: -0.47, m_a: -0.21, f_omega: 7.41 },
    DerivativeRow { key: k(2.0, 4.0, 5.0), m_a_det: 3.13, m_a: 24.99, f_omega: 21.81 },
    DerivativeRow { key: k(-1.0, -1.0, -0.1), m_a_det: 0.50, m_a: 0.44, f_omega: 1.42 },
    DerivativeRow { key: k(1.0, -2.0, -2.0), m_a_det: 2.80, m_a: 8.99, f_omega: 7.82 },
    DerivativeRow { key: k(-1.0, -2.0, -1.0), m_a_det: -1.65, m_a: -0.14, f_omega: 0.52 },
    DerivativeRow { key: k(5.0, 3.0, 15.0), m_a_det: 354.78, m_a: 1.22, f_omega: 349.28 },
    DerivativeRow { key: k(-3.0, -2.0, -0.5), m_a_det: 0.18, m_a: 0.43, f_omega: 0.22 },
    DerivativeRow { key: k(-5.0, -0.1, -0.1), m_a_det: 0.01, m_a: 0.45, f_omega: 0.01 },
    DerivativeRow { key: k(-10.0, -2.0, -0.2), m_a_det: 0.0008, m_a: 0.20, f_omega: 0.004 },
];
