//! One function per subcommand, each turning a resolved config into a table.

use logkdv::evolution::{stability_experiment, EvolutionError, EvolutionOptions, Scheme};
use logkdv::model::{admissible_initial_range, find_zeros, ModelError, ModelParams, Region};
use logkdv::spectral::{compute_theta_with, cross_validate, hill_spectrum_with, Laplacian, SpectralError};
use logkdv::stability::{family_derivatives, stability_verdict_with, StabilityError, StabilityOptions};
use logkdv::waves::{construct_wave_with, phase_portrait_data, WaveError, WaveOptions, WaveProfile};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::RunConfig;
use crate::output::{cell, input, num, opt, Table};
use crate::reference::{DERIVATIVES, PERIOD_THETA};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("cannot start {0} worker threads: {1}")]
    ThreadPool(usize, String),
}

pub fn run(cfg: &RunConfig, parallel: usize) -> Result<Table, CommandError> {
    match cfg.command {
        "wave" => wave(cfg),
        "spectrum" => spectrum(cfg),
        "theta" => theta(cfg),
        "table1" => table1(cfg, parallel),
        "table2" => table2(cfg, parallel),
        "portrait" => portrait(cfg),
        "evolve" => evolve(cfg),
        "sweep" => sweep(cfg, parallel),
        other => unreachable!("unknown command {other}"),
    }
}

/// Maps `f` over `items` on `threads` workers, keeping the input order.
fn ordered_map<T: Sync, R: Send>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Result<Vec<R>, CommandError> {
    if threads <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CommandError::ThreadPool(threads, e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

fn wave_options(cfg: &RunConfig) -> WaveOptions {
    WaveOptions::default()
        .with_samples(cfg.int("grid"))
        .tolerance(cfg.float("ode_tol"))
}

fn build(cfg: &RunConfig, omega: f64, a: f64, phi0: f64) -> Result<WaveProfile, WaveError> {
    construct_wave_with(ModelParams::new(omega, a), phi0, &wave_options(cfg))
}

fn single_wave(cfg: &RunConfig) -> Result<WaveProfile, WaveError> {
    build(cfg, cfg.float("omega"), cfg.float("a"), cfg.float("phi0"))
}

fn laplacian(cfg: &RunConfig) -> Laplacian {
    cfg.word("laplacian").parse().expect("validated by the schema")
}

fn theta_of(cfg: &RunConfig, wave: &WaveProfile) -> Result<f64, SpectralError> {
    let tol = cfg.float("ode_tol");
    Ok(compute_theta_with(wave, tol, tol * 1e-2)?.theta)
}

fn wave(cfg: &RunConfig) -> Result<Table, CommandError> {
    let w = single_wave(cfg)?;
    let d = w.diagnostics()?;
    let mut t = Table::new(&["x", "phi", "dphi"]);
    t.note(format!("region: {}", w.mu.region()));
    t.note(format!("period: {}", num(w.period)));
    t.note(format!("center: {}", num(w.center)));
    t.note(format!(
        "sign: {}",
        match w.sign {
            Some(s) if s.factor() > 0.0 => "positive",
            Some(_) => "negative",
            None => "changing",
        }
    ));
    t.note(format!("energy_level: {}", num(w.energy_level())));
    t.note(format!("symmetry_defect: {}", num(d.symmetry)));
    t.note(format!("ode_residual: {}", num(d.ode_residual)));
    t.note(format!("energy_variation: {}", num(d.energy_variation)));
    for ((x, p), dp) in w.grid().iter().zip(&w.phi).zip(&w.dphi) {
        t.push(vec![num(*x), num(*p), num(*dp)]);
    }
    Ok(t)
}

fn spectrum(cfg: &RunConfig) -> Result<Table, CommandError> {
    let w = single_wave(cfg)?;
    let s = hill_spectrum_with(&w, laplacian(cfg))?;
    let theta = compute_theta_with(&w, cfg.float("ode_tol"), cfg.float("ode_tol") * 1e-2)?;
    let mut t = Table::new(&["index", "eigenvalue", "in_kernel"]);
    t.note(format!("period: {}", num(w.period)));
    t.note(format!("theta: {}", num(theta.theta)));
    t.note(format!("inertial_index: ({}, {})", s.inertial_index.0, s.inertial_index.1));
    t.note(format!("kernel_residual: {}", num(s.kernel_residual)));
    t.note(format!("kernel_band: {}", num(s.kernel_band)));
    t.note(match cross_validate(&theta, &s) {
        Ok(c) if c.checked => "theta_consistent: true".to_string(),
        Ok(_) => "theta_consistent: not checked (theta degenerate)".to_string(),
        Err(e) => format!("theta_consistent: false ({e})"),
    });
    let count = match cfg.int("eigenvalues") {
        0 => s.eigenvalues.len(),
        n => n,
    };
    for (i, v) in s.leading(count).iter().enumerate() {
        t.push(vec![i.to_string(), num(*v), (v.abs() <= s.kernel_band).to_string()]);
    }
    Ok(t)
}

fn theta(cfg: &RunConfig) -> Result<Table, CommandError> {
    let w = single_wave(cfg)?;
    let tol = cfg.float("ode_tol");
    let th = compute_theta_with(&w, tol, tol * 1e-2)?;
    let s = hill_spectrum_with(&w, laplacian(cfg))?;
    let consistent = match cross_validate(&th, &s) {
        Ok(c) if c.checked => "true",
        Ok(_) => "unchecked",
        Err(_) => "false",
    };
    let mut t = Table::new(&[
        "omega", "a", "phi0", "period", "theta", "class", "negative", "zero", "zero_position", "consistent",
    ]);
    t.push(vec![
        input(w.mu.omega),
        input(w.mu.a_const),
        input(w.phi0),
        num(w.period),
        num(th.theta),
        format!("{:?}", th.classification),
        s.inertial_index.0.to_string(),
        s.inertial_index.1.to_string(),
        s.zero_position.map(|p| p.to_string()).unwrap_or_default(),
        consistent.to_string(),
    ]);
    Ok(t)
}

fn table1(cfg: &RunConfig, parallel: usize) -> Result<Table, CommandError> {
    let tol = cfg.float("pass_tol");
    let rows = ordered_map(&PERIOD_THETA, parallel, |r| {
        let w = build(cfg, r.key.omega, r.key.a, r.key.phi0)?;
        let theta = theta_of(cfg, &w)?;
        Ok::<_, CommandError>((w.period, theta))
    })?;
    let mut t = Table::new(&[
        "omega",
        "a",
        "phi0",
        "period",
        "period_published",
        "theta",
        "theta_published",
        "pass",
        "error",
    ]);
    t.note(format!("pass: |computed - published| <= {} for both period and theta", input(tol)));
    for (r, res) in PERIOD_THETA.iter().zip(rows) {
        let head = vec![input(r.key.omega), input(r.key.a), input(r.key.phi0)];
        let tail = match res {
            Ok((l, th)) => {
                let pass = (l - r.period).abs() <= tol && (th - r.theta).abs() <= tol;
                vec![num(l), input(r.period), num(th), input(r.theta), pass.to_string(), String::new()]
            }
            Err(e) => {
                t.failures += 1;
                vec![String::new(), input(r.period), String::new(), input(r.theta), "false".into(), cell(&e.to_string())]
            }
        };
        t.push([head, tail].concat());
    }
    Ok(t)
}

fn stability_options(cfg: &RunConfig, richardson: bool) -> StabilityOptions {
    StabilityOptions {
        h: cfg.float("fd_step"),
        scheme: laplacian(cfg),
        richardson,
    }
}

fn table2(cfg: &RunConfig, parallel: usize) -> Result<Table, CommandError> {
    let opts = stability_options(cfg, true);
    let reports = ordered_map(&DERIVATIVES, parallel, |r| {
        let w = build(cfg, r.key.omega, r.key.a, r.key.phi0)?;
        Ok::<_, CommandError>(stability_verdict_with(&w, &opts)?)
    })?;
    let mut t = Table::new(&[
        "omega",
        "a",
        "phi0",
        "period",
        "theta",
        "negative",
        "zero",
        "m_a_det",
        "m_a_det_published",
        "m_a",
        "m_a_published",
        "f_omega",
        "f_omega_published",
        "identity_residual",
        "fd_change",
        "verdict",
        "pass",
        "error",
    ]);
    let (ma_abs, ma_rel) = (cfg.float("m_a_abs_tol"), cfg.float("m_a_rel_tol"));
    let (fw_rel, det_rel) = (cfg.float("f_omega_rel_tol"), cfg.float("m_a_det_rel_tol"));
    t.note(format!(
        "pass: |M_A - ref| <= max({}, {}|ref|), |F_w - ref| <= {}|ref|, sign(M_A detD) matches, |M_A detD - ref| <= {}|ref| when |ref| > 0.1",
        input(ma_abs),
        input(ma_rel),
        input(fw_rel),
        input(det_rel)
    ));
    for (r, res) in DERIVATIVES.iter().zip(reports) {
        let head = vec![input(r.key.omega), input(r.key.a), input(r.key.phi0)];
        let row = match res {
            Ok(rep) => {
                let pass = match (rep.m_a, rep.f_omega, rep.m_a_det()) {
                    (Some(ma), Some(fw), Some(md)) => {
                        (ma - r.m_a).abs() <= ma_abs.max(ma_rel * r.m_a.abs())
                            && (fw - r.f_omega).abs() <= fw_rel * r.f_omega.abs()
                            && md.signum() == r.m_a_det.signum()
                            && (r.m_a_det.abs() <= 0.1 || (md - r.m_a_det).abs() <= det_rel * r.m_a_det.abs())
                    }
                    _ => false,
                };
                vec![
                    num(rep.period),
                    num(rep.theta),
                    rep.inertial_index.0.to_string(),
                    rep.inertial_index.1.to_string(),
                    opt(rep.m_a_det()),
                    input(r.m_a_det),
                    opt(rep.m_a),
                    input(r.m_a),
                    opt(rep.f_omega),
                    input(r.f_omega),
                    opt(rep.identities.map(|i| i.max())),
                    opt(rep.fd_change),
                    rep.verdict.to_string(),
                    pass.to_string(),
                    String::new(),
                ]
            }
            Err(e) => {
                t.failures += 1;
                let mut v = vec![String::new(); 15];
                v[5] = input(r.m_a_det);
                v[7] = input(r.m_a);
                v[9] = input(r.f_omega);
                v[13] = "false".into();
                v[14] = cell(&e.to_string());
                v
            }
        };
        t.push([head, row].concat());
    }
    Ok(t)
}

/// Seeds spread over the closed orbits around each center, plus one orbit
/// outside the separatrix when there is a saddle.
fn default_seeds(mu: ModelParams) -> Result<Vec<f64>, ModelError> {
    let zs = find_zeros(mu)?;
    let saddle = zs.saddle().map(|s| s.value);
    let mut seeds = Vec::new();
    for c in zs.centers().map(|z| z.value) {
        let range = admissible_initial_range(mu, c)?;
        let away = match saddle {
            Some(s) if s < c => range.closed.1,
            Some(_) => range.closed.0,
            None if c > 0.0 => range.closed.1,
            None => range.closed.0,
        };
        let outer = if away.is_finite() {
            away
        } else {
            c + 2.0 * (1.0 + c.abs()) * c.signum()
        };
        for f in [0.2, 0.4, 0.6, 0.8] {
            seeds.push(c + f * (outer - c));
        }
        if saddle.is_some() {
            seeds.push(c + 1.1 * (outer - c));
        }
    }
    seeds.sort_by(f64::total_cmp);
    seeds.dedup();
    Ok(seeds)
}

fn portrait(cfg: &RunConfig) -> Result<Table, CommandError> {
    let mu = ModelParams::new(cfg.float("omega"), cfg.float("a"));
    let seeds = match cfg.list("seeds") {
        [] => default_seeds(mu)?,
        s => s.to_vec(),
    };
    let orbits = phase_portrait_data(mu, &seeds, cfg.int("grid"), cfg.float("horizon"))?;
    let zs = find_zeros(mu)?;
    let mut t = Table::new(&["orbit", "seed", "periodic", "sign_definite", "period", "phi", "xi"]);
    t.note(format!("region: {}", mu.region()));
    for z in &zs.zeros {
        t.note(format!("zero: {} {:?}", num(z.value), z.kind));
    }
    for (i, o) in orbits.iter().enumerate() {
        for &(p, x) in &o.points {
            t.push(vec![
                i.to_string(),
                num(o.seed),
                o.periodic.to_string(),
                o.sign_definite.to_string(),
                opt(o.period),
                num(p),
                num(x),
            ]);
        }
    }
    Ok(t)
}

fn evolve(cfg: &RunConfig) -> Result<Table, CommandError> {
    let w = single_wave(cfg)?;
    let scheme: Scheme = cfg.word("scheme").parse().expect("validated by the schema");
    let opts = EvolutionOptions {
        dt: cfg.opt_float("dt"),
        cfl: cfg.float("cfl"),
        epsilon: cfg.opt_float("epsilon"),
        record_interval: cfg.float("record_interval"),
        scheme,
    };
    let r = stability_experiment(&w, cfg.float("delta"), cfg.float("horizon"), &opts)?;
    let mut t = Table::new(&["t", "E", "F", "M", "rho"]);
    t.note(format!("period: {}", num(w.period)));
    t.note(format!("dt: {}", num(r.dt)));
    t.note(format!("sup_rho: {}", num(r.sup_rho)));
    t.note(format!("rho_within_tw_tol: {}", r.sup_rho <= cfg.float("tw_tol")));
    if r.delta != 0.0 {
        t.note(format!("bounded: {}", r.bounded));
    }
    t.note(format!("max_e_drift: {}", num(r.max_e_drift)));
    t.note(format!("max_f_drift: {}", num(r.max_f_drift)));
    t.note(format!("max_m_drift: {}", num(r.max_m_drift)));
    t.note(format!("min_abs_u: {}", num(r.min_abs_u)));
    t.note(format!("regularization_active: {}", r.regularization_active));
    for p in &r.series {
        t.push(vec![num(p.t), num(p.e), num(p.f), num(p.m), opt(p.rho)]);
    }
    Ok(t)
}

fn axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// `φ(0)` a fraction of the way from the upper center to the far end of its
/// sign-definite range.
fn sweep_phi0(mu: ModelParams, fraction: f64) -> Result<f64, ModelError> {
    let c = find_zeros(mu)?.upper_center().value;
    let (inner, outer) = admissible_initial_range(mu, c)?.outer_interval();
    Ok(if outer.is_finite() {
        inner + fraction * (outer - inner)
    } else {
        c + fraction * (1.0 + c.abs()) * c.signum()
    })
}

struct SweepCell {
    phi0: f64,
    period: f64,
    theta: f64,
    index: (usize, usize),
    det_d: f64,
    f_omega: f64,
    d2_omega: Option<f64>,
    verdict: String,
}

fn sweep_cell(cfg: &RunConfig, mu: ModelParams) -> Result<SweepCell, CommandError> {
    let phi0 = sweep_phi0(mu, cfg.float("phi0_fraction"))?;
    let w = build(cfg, mu.omega, mu.a_const, phi0)?;
    let rep = stability_verdict_with(&w, &stability_options(cfg, cfg.boolean("richardson")))?;
    let (det_d, f_omega) = match (rep.det_d, rep.f_omega) {
        (Some(d), Some(f)) => (d, f),
        _ => {
            let d = family_derivatives(&w, cfg.float("fd_step"))?;
            (d.det(), d.f_omega)
        }
    };
    Ok(SweepCell {
        phi0,
        period: w.period,
        theta: rep.theta,
        index: rep.inertial_index,
        det_d,
        f_omega,
        d2_omega: rep.d2_omega,
        verdict: rep.verdict.to_string(),
    })
}

fn sweep(cfg: &RunConfig, parallel: usize) -> Result<Table, CommandError> {
    let omegas = axis(cfg.float("omega_min"), cfg.float("omega_max"), cfg.int("omega_steps"));
    let amps = axis(cfg.float("a_min"), cfg.float("a_max"), cfg.int("a_steps"));
    let all: Vec<ModelParams> = omegas
        .iter()
        .flat_map(|&w| amps.iter().map(move |&a| ModelParams::new(w, a)))
        .collect();
    let cells: Vec<ModelParams> = all.iter().copied().filter(|mu| mu.region() != Region::P2).collect();
    let results = ordered_map(&cells, parallel, |&mu| sweep_cell(cfg, mu))?;
    let mut t = Table::new(&[
        "omega", "a", "region", "phi0", "period", "theta", "negative", "zero", "det_d", "f_omega", "d2_omega",
        "verdict", "error",
    ]);
    t.note(format!("cells: {} of {} (degenerate band excluded)", cells.len(), all.len()));
    for (mu, res) in cells.iter().zip(results) {
        let head = vec![input(mu.omega), input(mu.a_const), mu.region().to_string()];
        let tail = match res {
            Ok(c) => vec![
                num(c.phi0),
                num(c.period),
                num(c.theta),
                c.index.0.to_string(),
                c.index.1.to_string(),
                num(c.det_d),
                num(c.f_omega),
                opt(c.d2_omega),
                c.verdict,
                String::new(),
            ],
            Err(e) => {
                t.failures += 1;
                let mut v = vec![String::new(); 10];
                v[9] = cell(&e.to_string());
                v
            }
        };
        t.push([head, tail].concat());
    }
    Ok(t)
}
