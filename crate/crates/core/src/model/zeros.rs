use super::{big_g_eval, g_eval, g_prime_eval, ModelError, ModelParams, Region};
use crate::numerics::{bisect, brent};

/// Absolute tolerance on `|g|` at a reported zero.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroKind {
    /// Local maximum of `G` (`g′ < 0`): periodic orbits circle it.
    Center,
    /// Local minimum of `G` (`g′ > 0`).
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub value: f64,
    pub kind: ZeroKind,
    /// `g′(μ, value)`; `+∞` for the zero at the origin when `A = 0`.
    pub g_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub mu: ModelParams,
    pub region: Region,
    /// Ascending.
    pub zeros: Vec<Zero>,
}

impl ZeroSet {
    pub fn values(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.value).collect()
    }

    pub fn centers(&self) -> impl Iterator<Item = &Zero> {
        self.zeros.iter().filter(|z| z.kind == ZeroKind::Center)
    }

    pub fn saddle(&self) -> Option<&Zero> {
        self.zeros.iter().find(|z| z.kind == ZeroKind::Saddle)
    }

    /// The center whose basin contains `phi0`: in P1 the saddle splits the
    /// line into a negative lobe (`r₀`) and a positive lobe (`r₂`).
    pub fn center_for(&self, phi0: f64) -> &Zero {
        match self.saddle() {
            Some(s) if phi0 < s.value => &self.zeros[0],
            Some(_) => &self.zeros[2],
            None => &self.zeros[0],
        }
    }

    /// The largest center (`r₂` when it exists).
    pub fn upper_center(&self) -> &Zero {
        self.centers().last().expect("every zero set has a center")
    }
}

fn refine(mu: ModelParams, a: f64, b: f64) -> Result<f64, ModelError> {
    let g = |x: f64| g_eval(mu, x);
    let mut x = bisect(g, a, b, 1e-15 * a.abs().max(b.abs()).max(1e-300), 400).map_err(|_| {
        ModelError::ConvergenceFailure {
            phi: 0.5 * (a + b),
            residual: g(0.5 * (a + b)).abs(),
        }
    })?;
    // one Newton polish, skipped near the logarithmic singularity of g′
    if x.abs() > 1e-8 {
        let dg = g_prime_eval(mu, x);
        if dg.is_finite() && dg != 0.0 {
            let xn = x - g(x) / dg;
            if g(xn).abs() <= g(x).abs() {
                x = xn;
            }
        }
    }
    let residual = g(x).abs();
    if residual > ZERO_TOL {
        return Err(ModelError::ConvergenceFailure { phi: x, residual });
    }
    Ok(x)
}

/// Walks from `start` by doubling steps in direction `dir` until `g` has sign `want`.
fn tail_bracket(mu: ModelParams, start: f64, dir: f64, want: f64) -> Result<f64, ModelError> {
    let mut step = start.abs().max(1.0);
    for _ in 0..200 {
        let x = start + dir * step;
        if g_eval(mu, x).signum() == want {
            return Ok(x);
        }
        step *= 2.0;
    }
    Err(ModelError::ConvergenceFailure {
        phi: start,
        residual: f64::NAN,
    })
}

/// All real zeros of `g(μ, ·)`, bracketed through the critical points `±x₀`
/// and the monotone tails.
pub fn find_zeros(mu: ModelParams) -> Result<ZeroSet, ModelError> {
    if !(mu.omega.is_finite() && mu.a_const.is_finite()) {
        return Err(ModelError::NonFinite {
            omega: mu.omega,
            a_const: mu.a_const,
        });
    }
    let region = mu.region();
    let x0 = mu.critical_point();
    let mut values = Vec::with_capacity(3);
    match region {
        Region::P2 => {
            return Err(ModelError::RegionP2 {
                omega: mu.omega,
                a_const: mu.a_const,
            })
        }
        Region::P1 => {
            let left = tail_bracket(mu, -x0, -1.0, 1.0)?;
            values.push(refine(mu, left, -x0)?);
            values.push(if mu.a_const == 0.0 {
                0.0
            } else {
                refine(mu, -x0, x0)?
            });
            let right = tail_bracket(mu, x0, 1.0, -1.0)?;
            values.push(refine(mu, x0, right)?);
        }
        Region::P3 => {
            if mu.a_const > 0.0 {
                let right = tail_bracket(mu, x0, 1.0, -1.0)?;
                values.push(refine(mu, x0, right)?);
            } else {
                let left = tail_bracket(mu, -x0, -1.0, 1.0)?;
                values.push(refine(mu, left, -x0)?);
            }
        }
    }
    let zeros = values
        .into_iter()
        .map(|v| {
            let gp = g_prime_eval(mu, v);
            Zero {
                value: v,
                kind: if gp < 0.0 {
                    ZeroKind::Center
                } else {
                    ZeroKind::Saddle
                },
                g_prime: gp,
            }
        })
        .collect();
    Ok(ZeroSet { mu, region, zeros })
}

/// Initial data `φ(0)` that generate periodic orbits around one center.
///
/// Both intervals contain the center; `φ(0)` may lie on either side of it
/// (the profile then has its maximum or its minimum at `x = 0`). Infinite
/// endpoints mean every value on that side is admissible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleRange {
    pub center: f64,
    /// Open interval of closed orbits, bounded by the saddle on the inner side
    /// and by the saddle energy level on the outer side.
    pub closed: (f64, f64),
    /// Sub-interval of orbits that never reach `φ = 0`.
    pub sign_definite: (f64, f64),
}

impl AdmissibleRange {
    pub fn contains(&self, phi0: f64) -> bool {
        phi0 > self.closed.0 && phi0 < self.closed.1
    }

    pub fn contains_sign_definite(&self, phi0: f64) -> bool {
        phi0 > self.sign_definite.0 && phi0 < self.sign_definite.1
    }

    /// The part of the sign-definite range on the far side of the center
    /// from the origin, as an `(inner, outer)` pair of endpoints.
    pub fn outer_interval(&self) -> (f64, f64) {
        if self.center > 0.0 {
            (self.center, self.sign_definite.1)
        } else {
            (self.center, self.sign_definite.0)
        }
    }
}

/// Nearest solution of `G(μ, φ) = level` on the far side of `center`.
fn outer_crossing(mu: ModelParams, center: f64, dir: f64, level: f64) -> Result<f64, ModelError> {
    let h = |x: f64| big_g_eval(mu, x) - level;
    let mut step = center.abs().max(1.0) * 0.25;
    let mut inner = center;
    for _ in 0..200 {
        let x = center + dir * step;
        if h(x) < 0.0 {
            let (a, b) = if dir > 0.0 { (inner, x) } else { (x, inner) };
            return brent(h, a, b, 1e-14 * center.abs().max(1.0), 200)
                .map_err(|_| ModelError::NoBracket(center));
        }
        inner = x;
        step *= 2.0;
    }
    Err(ModelError::NoBracket(center))
}

/// Closed-orbit and sign-definite ranges of `φ(0)` around `center`.
pub fn admissible_initial_range(
    mu: ModelParams,
    center: f64,
) -> Result<AdmissibleRange, ModelError> {
    let zs = find_zeros(mu)?;
    let c = zs
        .centers()
        .find(|z| (z.value - center).abs() <= 1e-8 * center.abs().max(1.0))
        .map(|z| z.value)
        .ok_or(ModelError::NotACenter(center))?;
    // the origin and the saddle (if any) are on the same side of c
    let outward = c.signum();
    let saddle = zs.saddle().map(|s| s.value);
    let g_c = big_g_eval(mu, c);

    let (closed_inner, closed_outer) = match saddle {
        Some(s) => {
            let level = big_g_eval(mu, s);
            if !(level < g_c) {
                return Err(ModelError::NoBracket(c));
            }
            (s, outer_crossing(mu, c, outward, level)?)
        }
        None => (-outward * f64::INFINITY, outward * f64::INFINITY),
    };
    // inner barrier for sign-definite orbits: the saddle or the origin, whichever is nearer
    let (sd_inner, sd_level) = match saddle {
        Some(s) if (s - c).abs() <= c.abs() => (s, big_g_eval(mu, s)),
        _ => (0.0, 0.0),
    };
    let sd_outer = outer_crossing(mu, c, outward, sd_level)?;
    let order = |a: f64, b: f64| if a <= b { (a, b) } else { (b, a) };
    Ok(AdmissibleRange {
        center: c,
        closed: order(closed_inner, closed_outer),
        sign_definite: order(sd_inner, sd_outer),
    })
}
