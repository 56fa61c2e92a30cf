//! One function per mode; each returns an [`Output`].

use std::fmt::Write as _;

use fujita_core::certificates::{certify, CertificateReport, ResidualGrid};
use fujita_core::exponents::{fujita_exponent, PotentialSpec, ReactionSpec, DEFAULT_BORDERLINE_MARGIN};
use fujita_core::kernels::{critical_u_integral, duhamel_lower_integral, log_kernel_qn, DuhamelParams, KernelParams};
use fujita_core::pde_sim::{self, Verdict};
use fujita_core::spectral::{principal_eigenpair, EigenProblem, RadialPotential, NEGATIVE_TOL};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Mode, RunConfig, ValueList};
use crate::sweep::{self, csv_field, SimSettings, SweepPoint, SweepSettings};
use crate::{CliError, Output};

fn list(v: &Option<ValueList>, default: f64) -> Vec<f64> {
    v.as_ref().map_or_else(|| vec![default], |l| l.0.clone())
}

fn single(v: &Option<ValueList>, name: &str, default: f64) -> Result<f64, CliError> {
    match v {
        None => Ok(default),
        Some(l) => l
            .single()
            .ok_or_else(|| CliError::Validation(format!("`{name}` takes a single value in this mode, got {l}"))),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Numerical(format!("cannot serialize output: {e}")))
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {threads} worker threads: {e}")))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sim_settings(cfg: &RunConfig) -> SimSettings {
    let d = SimSettings::default();
    SimSettings {
        amplitude: cfg.amplitude.unwrap_or(d.amplitude),
        center: cfg.center,
        width: cfg.width.unwrap_or(d.width),
        r0: cfg.r0,
        t_max: cfg.t_max.unwrap_or(d.t_max),
        spacing: cfg.spacing.unwrap_or(d.spacing),
        r_max: cfg.r_max,
        c1: cfg.c1.unwrap_or(d.c1),
        eps: cfg.eps.unwrap_or(d.eps),
    }
}

pub fn sweep_settings(cfg: &RunConfig) -> SweepSettings {
    SweepSettings {
        borderline_margin: cfg.borderline_margin.unwrap_or(DEFAULT_BORDERLINE_MARGIN),
        sim: if cfg.theory_only.unwrap_or(false) { None } else { Some(sim_settings(cfg)) },
    }
}

pub fn sweep_points(cfg: &RunConfig) -> Vec<SweepPoint> {
    sweep::grid(&list(&cfg.n, 3.0), &list(&cfg.omega, 0.0), &list(&cfg.m, 0.0), &list(&cfg.p, 2.0))
}

pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.mode.ok_or_else(|| CliError::Validation("no mode given".into()))? {
        Mode::Exponent => exponent(cfg),
        Mode::Classify => classify(cfg),
        Mode::Simulate => simulate(cfg),
        Mode::Sweep => sweep_mode(cfg),
        Mode::Kernel => kernel(cfg),
        Mode::Eigen => eigen(cfg),
        Mode::Certify => certify_mode(cfg),
        Mode::Duhamel => duhamel(cfg),
    }
}

#[derive(Serialize)]
struct ExponentRecord {
    n: f64,
    omega: f64,
    m: f64,
    alpha: Option<f64>,
    #[serde(rename = "N")]
    big_n: Option<f64>,
    p_star: f64,
}

fn exponent(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut records = Vec::new();
    for &n in &list(&cfg.n, 3.0) {
        for &omega in &list(&cfg.omega, 0.0) {
            for &m in &list(&cfg.m, 0.0) {
                let pot = PotentialSpec::new(omega, n)?;
                let rep = fujita_exponent(&pot, &ReactionSpec::power(m))?;
                records.push(ExponentRecord { n, omega, m, alpha: rep.alpha, big_n: rep.effective_dimension, p_star: rep.p_star });
            }
        }
    }
    let mut summary = String::new();
    for r in &records {
        let _ = write!(summary, "n = {}, omega = {}, m = {}: ", r.n, r.omega, r.m);
        match r.alpha {
            Some(a) => {
                let _ = writeln!(summary, "alpha = {a:.6}, N = {:.6}, p* = {:.6}", r.big_n.unwrap_or(f64::NAN), r.p_star);
            }
            None => {
                let _ = writeln!(summary, "below the Hardy threshold, p* = inf");
            }
        }
    }
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&records)?,
        Format::Csv => {
            let mut s = String::from("n,omega,m,alpha,N,p_star\n");
            for r in &records {
                let _ = writeln!(s, "{},{},{},{},{},{}", r.n, r.omega, r.m, opt(r.alpha), opt(r.big_n), r.p_star);
            }
            s
        }
    };
    Ok(Output { summary, body, table: false, failures: 0 })
}

fn classify(cfg: &RunConfig) -> Result<Output, CliError> {
    let settings = SweepSettings { sim: None, ..sweep_settings(cfg) };
    let rows = sweep::run_sweep(&sweep_points(cfg), &settings, 1)?;
    if let Some(bad) = rows.iter().find(|r| r.failed) {
        return Err(CliError::Validation(bad.notes.join("; ")));
    }
    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(
            summary,
            "n = {}, omega = {}, m = {}, p = {}: {} (theory), p* = {:.6}",
            r.point.n,
            r.point.omega,
            r.point.m,
            r.point.p,
            r.theory_verdict,
            r.p_star.unwrap_or(f64::NAN)
        );
    }
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&rows)?,
        Format::Csv => sweep::write_sweep_csv(&rows),
    };
    Ok(Output { summary, body, table: false, failures: 0 })
}

#[derive(Serialize)]
struct SimulationRecord<'a> {
    point: SweepPoint,
    settings: &'a SimSettings,
    theory_verdict: &'a str,
    verdict: &'a Verdict<f64>,
    final_t: f64,
    boundary_contact: bool,
    trace: &'a [pde_sim::TracePoint<f64>],
}

fn simulate(cfg: &RunConfig) -> Result<Output, CliError> {
    let pt = SweepPoint {
        n: single(&cfg.n, "n", 3.0)?,
        omega: single(&cfg.omega, "omega", 0.0)?,
        m: single(&cfg.m, "m", 0.0)?,
        p: single(&cfg.p, "p", 2.0)?,
    };
    let sim = sim_settings(cfg);
    let spec = sim.problem(&pt)?;
    let solver = sim.solver_config()?;
    let theory = sweep::sweep_row(pt, &SweepSettings { sim: None, ..sweep_settings(cfg) });
    let out = pde_sim::solve_radial(&spec, &solver)?;
    let mut summary = format!("theory: {}\nsimulation: {}", theory.theory_verdict, out.verdict.label());
    match &out.verdict {
        Verdict::BlowUp { time } => {
            let _ = write!(summary, " at t = {time:.6}");
        }
        Verdict::Global(ev) => {
            let _ = write!(summary, " (final sup {:.3e}, running max {:.3e})", ev.final_sup, ev.running_max);
        }
        Verdict::Undetermined { reason } => {
            let _ = write!(summary, " ({reason})");
        }
    }
    summary.push('\n');
    if out.boundary_contact {
        summary.push_str("warning: solution reached the truncation boundary\n");
    }
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&SimulationRecord {
            point: pt,
            settings: &sim,
            theory_verdict: &theory.theory_verdict,
            verdict: &out.verdict,
            final_t: out.final_t,
            boundary_contact: out.boundary_contact,
            trace: &out.trace,
        })?,
        Format::Csv => {
            let mut buf = Vec::new();
            out.write_trace_csv(&mut buf)
                .map_err(|e| CliError::Numerical(format!("cannot format trace: {e}")))?;
            String::from_utf8_lossy(&buf).into_owned()
        }
    };
    Ok(Output { summary, body, table: false, failures: 0 })
}

fn sweep_mode(cfg: &RunConfig) -> Result<Output, CliError> {
    let points = sweep_points(cfg);
    let rows = sweep::run_sweep(&points, &sweep_settings(cfg), cfg.threads())?;
    let failures = rows.iter().filter(|r| r.failed).count();
    let disagreements = rows.iter().filter(|r| r.agreement == Some(false)).count();
    let summary = format!(
        "{} points, {} failed, {} disagreements between theory and simulation\n",
        rows.len(),
        failures,
        disagreements
    );
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&rows)?,
        Format::Csv => sweep::write_sweep_csv(&rows),
    };
    Ok(Output { summary, body, table: true, failures })
}

#[derive(Serialize)]
struct KernelRecord {
    #[serde(rename = "N")]
    dimension: f64,
    t: f64,
    r: f64,
    rho: f64,
    q: f64,
    log_q: f64,
}

fn kernel(cfg: &RunConfig) -> Result<Output, CliError> {
    let dimension = cfg.dimension.unwrap_or(3.0);
    let mut records = Vec::new();
    for &t in &list(&cfg.t, 1.0) {
        for &r in &list(&cfg.r, 1.0) {
            for &rho in &list(&cfg.rho, 1.0) {
                let log_q = log_kernel_qn(dimension, t, r, rho)?;
                records.push(KernelRecord { dimension, t, r, rho, q: log_q.exp(), log_q });
            }
        }
    }
    let summary = format!("{} kernel values in dimension N = {dimension}\n", records.len());
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&records)?,
        Format::Csv => {
            let mut s = String::from("N,t,r,rho,q,log_q\n");
            for k in &records {
                let _ = writeln!(s, "{},{},{},{},{:e},{}", k.dimension, k.t, k.r, k.rho, k.q, k.log_q);
            }
            s
        }
    };
    Ok(Output { summary, body, table: true, failures: 0 })
}

#[derive(Serialize)]
struct EigenRecord<'a> {
    dimension: f64,
    a: f64,
    b: f64,
    coeff: f64,
    grid_points: usize,
    lambda0: f64,
    rayleigh: f64,
    r: &'a [f64],
    phi: &'a [f64],
}

fn eigen(cfg: &RunConfig) -> Result<Output, CliError> {
    let dimension = cfg.dimension.unwrap_or(3.0);
    let a = cfg.a.unwrap_or(1.0);
    let b = cfg.b.unwrap_or(2.0);
    let coeff = cfg.coeff.unwrap_or(0.0);
    let potential = if coeff == 0.0 { RadialPotential::Zero } else { RadialPotential::InverseSquare { coeff } };
    let grid_points = match cfg.grid_points {
        Some(g) => g,
        None if a > 0.0 && b > a => EigenProblem::<f64>::auto_grid_points(a, b),
        None => 2000,
    };
    let prob = EigenProblem::new(dimension, a, b, potential, grid_points);
    prob.validate()?;
    let pair = principal_eigenpair(&prob)?;
    let mut summary = format!("lambda0 = {:.10e} (Rayleigh quotient {:.10e})\n", pair.lambda0, pair.rayleigh);
    if pair.lambda0 < -NEGATIVE_TOL {
        summary.push_str("negative principal eigenvalue: blow-up for every p > 1 with a positive reaction floor\n");
    }
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&EigenRecord {
            dimension,
            a,
            b,
            coeff,
            grid_points,
            lambda0: pair.lambda0,
            rayleigh: pair.rayleigh,
            r: &pair.r,
            phi: &pair.phi,
        })?,
        Format::Csv => {
            let mut s = String::from("r,phi\n");
            for (r, phi) in pair.r.iter().zip(&pair.phi) {
                let _ = writeln!(s, "{r:e},{phi:e}");
            }
            s
        }
    };
    Ok(Output { summary, body, table: false, failures: 0 })
}

#[derive(Serialize)]
struct CertifyBatch<'a> {
    seed: Option<u64>,
    reports: &'a [CertificateReport<f64>],
}

fn certify_mode(cfg: &RunConfig) -> Result<Output, CliError> {
    let c1 = cfg.c1.unwrap_or(1.0);
    let c2 = cfg.c2.unwrap_or(c1);
    let grid = ResidualGrid::<f64>::standard();
    let points = sweep_points(cfg);
    let results: Vec<Result<CertificateReport<f64>, CliError>> = pool(cfg.threads())?.install(|| {
        points
            .par_iter()
            .map(|pt| {
                let reac = ReactionSpec::new(pt.m, c1, c2)?;
                Ok(certify(pt.omega, pt.n, &reac, pt.p, &grid)?)
            })
            .collect()
    });
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut summary = String::new();
    let mut failures = 0;
    for r in &reports {
        let _ = write!(summary, "n = {}, omega = {}, m = {}, p = {}: ", r.n, r.omega, r.m, r.p);
        match (&r.params, &r.residual) {
            (Some(par), Some(res)) => {
                if !r.passed {
                    failures += 1;
                }
                let _ = writeln!(
                    summary,
                    "{} (gamma = {:.6}, delta = {:.3e}, max residual = {:.3e})",
                    if r.passed { "certified" } else { "FAILED" },
                    par.gamma,
                    par.delta,
                    res.max_residual
                );
            }
            _ => {
                let _ = writeln!(summary, "infeasible ({})", r.error.as_deref().unwrap_or("p <= p*"));
            }
        }
    }
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&CertifyBatch { seed: cfg.seed, reports: &reports })?,
        Format::Csv => {
            let mut s = String::from("n,omega,m,p,p_star,gamma,delta,max_residual,passed,note\n");
            for r in &reports {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.omega,
                    r.m,
                    r.p,
                    r.p_star,
                    opt(r.params.map(|x| x.gamma)),
                    opt(r.params.map(|x| x.delta)),
                    opt(r.residual.map(|x| x.max_residual)),
                    r.passed,
                    csv_field(r.error.as_deref().unwrap_or(""))
                );
            }
            s
        }
    };
    Ok(Output { summary, body, table: false, failures })
}

#[derive(Serialize)]
struct DuhamelRecord {
    #[serde(rename = "N")]
    dimension: f64,
    #[serde(rename = "M")]
    big_m: f64,
    p: f64,
    r0: f64,
    t: f64,
    r: f64,
    integral: f64,
    critical_u_integral: f64,
}

fn duhamel(cfg: &RunConfig) -> Result<Output, CliError> {
    let dimension = cfg.dimension.unwrap_or(3.0);
    let big_m = cfg.big_m.unwrap_or(0.0);
    let p = single(&cfg.p, "p", DuhamelParams::critical_p(dimension, big_m))?;
    let r0 = cfg.r0.unwrap_or(1.0);
    let kp = KernelParams::new(dimension).with_r0(r0);
    let dp = DuhamelParams::new(dimension, big_m, p);
    let mut jobs = Vec::new();
    for &t in &list(&cfg.t, 100.0) {
        for &r in &list(&cfg.r, r0 + 2.0) {
            jobs.push((t, r));
        }
    }
    let records: Vec<Result<DuhamelRecord, CliError>> = pool(cfg.threads())?.install(|| {
        jobs.par_iter()
            .map(|&(t, r)| {
                Ok(DuhamelRecord {
                    dimension,
                    big_m,
                    p,
                    r0,
                    t,
                    r,
                    integral: duhamel_lower_integral(&kp, &dp, t, r)?,
                    critical_u_integral: critical_u_integral(&dp, dimension, t)?,
                })
            })
            .collect()
    });
    let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = format!("{} Duhamel integrals for N = {dimension}, M = {big_m}, p = {p}\n", records.len());
    let body = match cfg.format.unwrap_or_default() {
        Format::Json => json(&records)?,
        Format::Csv => {
            let mut s = String::from("N,M,p,r0,t,r,integral,critical_u_integral\n");
            for d in &records {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{:e},{:e}",
                    d.dimension, d.big_m, d.p, d.r0, d.t, d.r, d.integral, d.critical_u_integral
                );
            }
            s
        }
    };
    Ok(Output { summary, body, table: true, failures: 0 })
}
