//! Adaptive Dormand–Prince 5(4) integration with continuous (dense) output
//! and sign-change event location.
//!
//! The stepper keeps the interpolation coefficients of every accepted step,
//! so a [`Trajectory`] can be evaluated anywhere inside the integrated span
//! with fourth-order accuracy. Requested output times can also be registered
//! as *stops*; the step size is clipped so those times are hit exactly and
//! the values there carry only the global integration error.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("right-hand side produced a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("exceeded {0} steps")]
    MaxStepsExceeded(usize),
    #[error("no event found in [{t0}, {t_end}]")]
    EventNotFound { t0: f64, t_end: f64 },
    #[error("invalid tolerances rel_tol = {rel_tol:e}, abs_tol = {abs_tol:e}")]
    InvalidTolerance { rel_tol: f64, abs_tol: f64 },
}

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;

/// An initial-value problem `y' = rhs(t, y)`, `y(t0) = y0`, integrated towards
/// `t_end` (which may lie on either side of `t0`).
pub struct IvpSpec<F> {
    pub rhs: F,
    pub t0: f64,
    pub t_end: f64,
    pub y0: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Times the stepper must land on exactly. Values outside the span are ignored.
    pub stops: Vec<f64>,
}

impl<F> IvpSpec<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(rhs: F, t0: f64, t_end: f64, y0: Vec<f64>) -> Self {
        Self {
            rhs,
            t0,
            t_end,
            y0,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_steps: 1_000_000,
            stops: Vec::new(),
        }
    }

    pub fn tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn stops(mut self, stops: Vec<f64>) -> Self {
        self.stops = stops;
        self
    }

    pub fn max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn dimension(&self) -> usize {
        self.y0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// Event function goes from negative to positive.
    Rising,
    /// Event function goes from positive to negative.
    Falling,
    Any,
}

impl Crossing {
    fn accepts(self, before: f64, after: f64) -> bool {
        match self {
            Crossing::Rising => before < 0.0 && after >= 0.0,
            Crossing::Falling => before > 0.0 && after <= 0.0,
            Crossing::Any => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

pub struct EventSpec<G> {
    pub event_fn: G,
    pub direction: Crossing,
    pub refine_tol: f64,
}

impl<G> EventSpec<G>
where
    G: FnMut(f64, &[f64]) -> f64,
{
    pub fn new(event_fn: G, direction: Crossing) -> Self {
        Self {
            event_fn,
            direction,
            refine_tol: DEFAULT_REFINE_TOL,
        }
    }

    pub fn refine_tol(mut self, tol: f64) -> Self {
        self.refine_tol = tol;
        self
    }
}

#[derive(Debug, Clone)]
pub struct EventHit {
    pub t: f64,
    pub y: Vec<f64>,
    pub trajectory: Trajectory,
}

/// One accepted step: `y(t + θh) = r0 + θ(r1 + (1-θ)(r2 + θ(r3 + (1-θ) r4)))`.
#[derive(Debug, Clone)]
struct Segment {
    t: f64,
    h: f64,
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    t0: f64,
    y0: Vec<f64>,
    segments: Vec<Segment>,
}

impl Trajectory {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_final(&self) -> f64 {
        self.segments
            .last()
            .map(|s| s.t + s.h)
            .unwrap_or(self.t0)
    }

    pub fn y_final(&self) -> Vec<f64> {
        match self.segments.last() {
            Some(s) => {
                let mut y = vec![0.0; self.dim];
                s.eval(1.0, self.dim, &mut y);
                y
            }
            None => self.y0.clone(),
        }
    }

    pub fn step_count(&self) -> usize {
        self.segments.len()
    }

    /// Step endpoints `(t, y)`, starting with the initial point.
    pub fn nodes(&self) -> Vec<(f64, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push((self.t0, self.y0.clone()));
        for s in &self.segments {
            let mut y = vec![0.0; self.dim];
            s.eval(1.0, self.dim, &mut y);
            out.push((s.t + s.h, y));
        }
        out
    }

    /// Dense-output evaluation. Times outside the span are clamped to it.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.eval_into(t, &mut y);
        y
    }

    pub fn eval_into(&self, t: f64, y: &mut [f64]) {
        if self.segments.is_empty() {
            y.copy_from_slice(&self.y0);
            return;
        }
        let forward = self.segments[0].h > 0.0;
        // segments are ordered along the integration direction
        let idx = self.segments.partition_point(|s| {
            let end = s.t + s.h;
            if forward {
                end < t
            } else {
                end > t
            }
        });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        let theta = ((t - seg.t) / seg.h).clamp(0.0, 1.0);
        seg.eval(theta, self.dim, y);
    }
}

impl Segment {
    fn eval(&self, theta: f64, dim: usize, y: &mut [f64]) {
        let c = &self.coeffs;
        let one_minus = 1.0 - theta;
        for i in 0..dim {
            let r0 = c[i];
            let r1 = c[dim + i];
            let r2 = c[2 * dim + i];
            let r3 = c[3 * dim + i];
            let r4 = c[4 * dim + i];
            y[i] = r0 + theta * (r1 + one_minus * (r2 + theta * (r3 + one_minus * r4)));
        }
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Stepper<F> {
    rhs: F,
    dim: usize,
    t: f64,
    t_end: f64,
    dir: f64,
    y: Vec<f64>,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_steps: usize,
    steps: usize,
    stops: Vec<f64>,
    next_stop: usize,
    done: bool,
}

fn check_finite(v: &[f64], t: f64) -> Result<(), OdeError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OdeError::NonFiniteRhs { t })
    }
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    fn new(spec: IvpSpec<F>) -> Result<Self, OdeError> {
        let IvpSpec {
            mut rhs,
            t0,
            t_end,
            y0,
            rel_tol,
            abs_tol,
            max_steps,
            stops,
        } = spec;
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return Err(OdeError::InvalidTolerance { rel_tol, abs_tol });
        }
        let dim = y0.len();
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let mut stops: Vec<f64> = stops
            .into_iter()
            .filter(|&s| (s - t0) * dir > 0.0 && (t_end - s) * dir > 0.0)
            .collect();
        stops.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
        stops.dedup();
        let mut k0 = vec![0.0; dim];
        rhs(t0, &y0, &mut k0);
        check_finite(&k0, t0)?;
        let mut st = Self {
            rhs,
            dim,
            t: t0,
            t_end,
            dir,
            y: y0,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            y_stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
            h: 0.0,
            rel_tol,
            abs_tol,
            max_steps,
            steps: 0,
            stops,
            next_stop: 0,
            done: t_end == t0,
        };
        st.k[0] = k0;
        if !st.done {
            st.h = st.initial_step()?;
        }
        Ok(st)
    }

    fn scale(&self, a: f64) -> f64 {
        self.abs_tol + self.rel_tol * a.abs()
    }

    fn initial_step(&mut self) -> Result<f64, OdeError> {
        let n = self.dim.max(1) as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..self.dim {
            let sk = self.scale(self.y[i]);
            d0 += (self.y[i] / sk).powi(2);
            d1 += (self.k[0][i] / sk).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let span = (self.t_end - self.t).abs();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span);
        for i in 0..self.dim {
            self.y_stage[i] = self.y[i] + self.dir * h0 * self.k[0][i];
        }
        let mut f1 = vec![0.0; self.dim];
        (self.rhs)(self.t + self.dir * h0, &self.y_stage, &mut f1);
        check_finite(&f1, self.t)?;
        let mut d2 = 0.0;
        for i in 0..self.dim {
            let sk = self.scale(self.y[i]);
            d2 += ((f1[i] - self.k[0][i]) / sk).powi(2);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span))
    }

    /// Takes one accepted step. Returns `None` once `t_end` has been reached.
    fn advance(&mut self) -> Result<Option<Segment>, OdeError> {
        if self.done {
            return Ok(None);
        }
        let dim = self.dim;
        loop {
            if self.steps >= self.max_steps {
                return Err(OdeError::MaxStepsExceeded(self.max_steps));
            }
            let h_min = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if self.h < h_min {
                return Err(OdeError::StepUnderflow { t: self.t, h: self.h });
            }
            // land on the next stop or the end point exactly
            let mut target = self.t_end;
            if let Some(&s) = self.stops.get(self.next_stop) {
                target = s;
            }
            let mut h = self.h;
            let mut hits_target = false;
            if (self.t + self.dir * h - target) * self.dir >= 0.0 {
                h = (target - self.t).abs();
                hits_target = true;
            } else if (self.t + self.dir * 1.5 * h - target) * self.dir > 0.0 {
                // avoid leaving a sliver before the target
                h = 0.5 * (target - self.t).abs();
            }
            let hs = self.dir * h;
            let t = self.t;

            let (k_head, k_tail) = self.k.split_at_mut(1);
            let k1 = &k_head[0];
            let [k2, k3, k4, k5, k6, k7] = k_tail else {
                unreachable!()
            };
            let y = &self.y;
            let ys = &mut self.y_stage;

            for i in 0..dim {
                ys[i] = y[i] + hs * A21 * k1[i];
            }
            (self.rhs)(t + C2 * hs, ys, k2);
            for i in 0..dim {
                ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            (self.rhs)(t + C3 * hs, ys, k3);
            for i in 0..dim {
                ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            (self.rhs)(t + C4 * hs, ys, k4);
            for i in 0..dim {
                ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            (self.rhs)(t + C5 * hs, ys, k5);
            for i in 0..dim {
                ys[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            (self.rhs)(t + hs, ys, k6);
            let y_new = &mut self.y_new;
            for i in 0..dim {
                y_new[i] = y[i]
                    + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            (self.rhs)(t + hs, y_new, k7);

            let stages_finite = [&*k2, &*k3, &*k4, &*k5, &*k6, &*k7]
                .iter()
                .all(|k| k.iter().all(|v| v.is_finite()));
            let mut err = 0.0;
            if stages_finite {
                for i in 0..dim {
                    let e = hs
                        * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                            + E7 * k7[i]);
                    let sk = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                    err += (e / sk).powi(2);
                }
                err = (err / dim.max(1) as f64).sqrt();
            } else {
                err = f64::INFINITY;
            }

            if err <= 1.0 {
                let mut coeffs = vec![0.0; 5 * dim];
                for i in 0..dim {
                    let dy = y_new[i] - y[i];
                    let bspl = hs * k1[i] - dy;
                    coeffs[i] = y[i];
                    coeffs[dim + i] = dy;
                    coeffs[2 * dim + i] = bspl;
                    coeffs[3 * dim + i] = dy - hs * k7[i] - bspl;
                    coeffs[4 * dim + i] = hs
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let seg = Segment { t, h: hs, coeffs };
                let t_new = if hits_target { target } else { t + hs };
                self.t = t_new;
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                self.steps += 1;
                if hits_target {
                    if target == self.t_end {
                        self.done = true;
                    } else {
                        self.next_stop += 1;
                    }
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // keep the pre-clipping step size when we only shortened to hit a stop
                self.h = if hits_target { self.h.max(h * fac) } else { h * fac };
                return Ok(Some(seg));
            }
            if !stages_finite {
                // a failed stage is retried with a much smaller step before giving up
                if h <= 1e3 * h_min {
                    return Err(OdeError::NonFiniteRhs { t });
                }
                self.h = 0.1 * h;
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
    }
}

/// Integrates `spec` over its full span, keeping the dense output of every step.
pub fn integrate<F>(spec: IvpSpec<F>) -> Result<Trajectory, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let t0 = spec.t0;
    let y0 = spec.y0.clone();
    check_finite(&y0, t0)?;
    let mut stepper = Stepper::new(spec)?;
    let mut traj = Trajectory {
        dim: stepper.dim,
        t0,
        y0,
        segments: Vec::new(),
    };
    while let Some(seg) = stepper.advance()? {
        traj.segments.push(seg);
    }
    Ok(traj)
}

/// Integrates until the event function crosses zero in the requested direction
/// at some `t` strictly after `t0`; the crossing is localized on the dense output.
pub fn integrate_until_event<F, G>(
    spec: IvpSpec<F>,
    mut event: EventSpec<G>,
) -> Result<EventHit, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> f64,
{
    let t0 = spec.t0;
    let t_end = spec.t_end;
    let y0 = spec.y0.clone();
    check_finite(&y0, t0)?;
    let mut stepper = Stepper::new(spec)?;
    let dim = stepper.dim;
    let mut traj = Trajectory {
        dim,
        t0,
        y0: y0.clone(),
        segments: Vec::new(),
    };
    let mut g_prev = (event.event_fn)(t0, &y0);
    let mut buf = vec![0.0; dim];
    while let Some(seg) = stepper.advance()? {
        seg.eval(1.0, dim, &mut buf);
        let t_next = seg.t + seg.h;
        let g_next = (event.event_fn)(t_next, &buf);
        // a zero at t0 itself is not an event: the sign is taken from the first step
        if g_prev != 0.0 && event.direction.accepts(g_prev, g_next) {
            let (t_hit, y_hit) = refine_event(&seg, dim, g_prev, g_next, &mut event);
            traj.segments.push(seg);
            return Ok(EventHit {
                t: t_hit,
                y: y_hit,
                trajectory: traj,
            });
        }
        g_prev = g_next;
        traj.segments.push(seg);
    }
    Err(OdeError::EventNotFound { t0, t_end })
}

fn refine_event<G>(
    seg: &Segment,
    dim: usize,
    g_a: f64,
    g_b: f64,
    event: &mut EventSpec<G>,
) -> (f64, Vec<f64>)
where
    G: FnMut(f64, &[f64]) -> f64,
{
    let mut y = vec![0.0; dim];
    if g_b == 0.0 {
        seg.eval(1.0, dim, &mut y);
        return (seg.t + seg.h, y);
    }
    // Illinois variant of regula falsi in the step's local coordinate θ ∈ [0, 1]
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let (mut fa, mut fb) = (g_a, g_b);
    let tol = event.refine_tol / seg.h.abs();
    let mut side = 0i8;
    let mut theta = 1.0;
    for _ in 0..200 {
        theta = (a * fb - b * fa) / (fb - fa);
        if !(theta > a && theta < b) {
            theta = 0.5 * (a + b);
        }
        seg.eval(theta, dim, &mut y);
        let f = (event.event_fn)(seg.t + theta * seg.h, &y);
        if f == 0.0 {
            break;
        }
        if f.signum() == fb.signum() {
            b = theta;
            fb = f;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = theta;
            fa = f;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if (b - a) <= tol {
            theta = (a * fb - b * fa) / (fb - fa);
            if !(theta >= a && theta <= b) {
                theta = 0.5 * (a + b);
            }
            break;
        }
    }
    seg.eval(theta, dim, &mut y);
    (seg.t + theta * seg.h, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn exponential_growth() {
        let spec = IvpSpec::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0], 0.0, 1.0, vec![1.0]);
        let traj = integrate(spec).unwrap();
        assert!((traj.y_final()[0] - 1f64.exp()).abs() < 1e-9);
        assert_eq!(traj.t_final(), 1.0);
    }

    #[test]
    fn backward_integration() {
        let spec = IvpSpec::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0], 0.0, -2.0, vec![1.0]);
        let traj = integrate(spec).unwrap();
        assert!((traj.y_final()[0] - (-2f64).exp()).abs() < 1e-10);
        assert!((traj.eval(-1.0)[0] - (-1f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_full_turn() {
        let spec = IvpSpec::new(oscillator, 0.0, 2.0 * PI, vec![1.0, 0.0]);
        let y = integrate(spec).unwrap().y_final();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
    }

    #[test]
    fn dense_output_between_steps() {
        let spec = IvpSpec::new(oscillator, 0.0, 10.0, vec![1.0, 0.0]);
        let traj = integrate(spec).unwrap();
        for i in 0..200 {
            let t = 0.05 * i as f64 + 0.0123;
            let y = traj.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-8);
            assert!((y[1] + t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn stops_are_hit_exactly() {
        let stops: Vec<f64> = (1..10).map(|i| 0.37 * i as f64).collect();
        let spec = IvpSpec::new(oscillator, 0.0, 4.0, vec![1.0, 0.0]).stops(stops.clone());
        let traj = integrate(spec).unwrap();
        let times: Vec<f64> = traj.nodes().iter().map(|n| n.0).collect();
        for s in stops {
            assert!(times.contains(&s), "missing stop {s}");
        }
    }

    #[test]
    fn event_half_turn_at_pi() {
        let spec = IvpSpec::new(oscillator, 0.0, 10.0, vec![1.0, 0.0]);
        // ξ starts at 0, goes negative, and comes back up through zero at t = π
        let ev = EventSpec::new(|_t, y: &[f64]| y[1], Crossing::Rising);
        let hit = integrate_until_event(spec, ev).unwrap();
        assert!((hit.t - PI).abs() < 1e-8, "{}", hit.t);
        assert!((hit.y[0] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn event_at_start_is_skipped() {
        let spec = IvpSpec::new(oscillator, 0.0, 10.0, vec![1.0, 0.0]);
        let ev = EventSpec::new(|_t, y: &[f64]| y[1], Crossing::Any);
        let hit = integrate_until_event(spec, ev).unwrap();
        assert!((hit.t - PI).abs() < 1e-8);
    }

    #[test]
    fn missing_event_is_reported() {
        let spec = IvpSpec::new(oscillator, 0.0, 1.0, vec![1.0, 0.0]);
        let ev = EventSpec::new(|_t, y: &[f64]| y[0] - 5.0, Crossing::Any);
        assert!(matches!(
            integrate_until_event(spec, ev),
            Err(OdeError::EventNotFound { .. })
        ));
    }

    #[test]
    fn non_finite_rhs() {
        let spec = IvpSpec::new(
            |_t, y: &[f64], dy: &mut [f64]| dy[0] = if y[0] > 1.5 { f64::NAN } else { 1.0 },
            0.0,
            2.0,
            vec![1.0],
        );
        assert!(matches!(integrate(spec), Err(OdeError::NonFiniteRhs { .. })));
    }

    #[test]
    fn rejects_bad_tolerances() {
        let spec = IvpSpec::new(oscillator, 0.0, 1.0, vec![1.0, 0.0]).tolerances(0.0, 1e-12);
        assert!(matches!(integrate(spec), Err(OdeError::InvalidTolerance { .. })));
    }

    #[test]
    fn order_of_accuracy() {
        // endpoint error should shrink roughly like tol when tol shrinks (≥ 4th order method)
        let err = |tol: f64| {
            let spec = IvpSpec::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0], 0.0, 5.0, vec![1.0])
                .tolerances(tol, tol * 1e-2);
            let traj = integrate(spec).unwrap();
            ((traj.y_final()[0] - 5f64.exp()).abs(), traj.step_count())
        };
        let (e1, n1) = err(1e-6);
        let (e2, n2) = err(1e-6 / 32.0);
        assert!(e2 < e1);
        // for an order-p method, steps grow like (tol ratio)^(1/(p+1)) ≈ 32^(1/5) = 2
        let growth = n2 as f64 / n1 as f64;
        assert!(growth < 2.6, "step growth {growth}");
        let observed = (e1 / e2).ln() / growth.ln();
        assert!(observed >= 4.0, "observed order {observed}");
    }
}
