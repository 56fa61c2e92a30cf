//! Phase-diagram sweeps over `(n, ω, m, p)`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use fujita_core::exponents::{classify_with_margin, PotentialSpec, ReactionSpec, Verdict, DEFAULT_BORDERLINE_MARGIN};
use fujita_core::pde_sim::{self, Geometry, InitialData, ProblemSpec, SolverConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::CliError;

/// Initial data, geometry and resolution for one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSettings {
    pub amplitude: f64,
    /// `None` puts the bump at the origin (whole space) or `r0 + 2·width`.
    pub center: Option<f64>,
    pub width: f64,
    pub r0: Option<f64>,
    pub t_max: f64,
    pub spacing: f64,
    /// `None` means `inner + 20 + 8 √t_max`.
    pub r_max: Option<f64>,
    pub c1: f64,
    pub eps: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            center: None,
            width: 1.0,
            r0: None,
            t_max: 200.0,
            spacing: 0.05,
            r_max: None,
            c1: 1.0,
            eps: 1e-3,
        }
    }
}

impl SimSettings {
    pub fn geometry(&self) -> Geometry<f64> {
        match self.r0 {
            Some(r0) => Geometry::Exterior { r0 },
            None => Geometry::WholeSpace,
        }
    }

    pub fn initial(&self) -> InitialData<f64> {
        let center = self
            .center
            .unwrap_or_else(|| self.r0.map_or(0.0, |r0| r0 + 2.0 * self.width));
        InitialData::new(self.amplitude, center, self.width)
    }

    pub fn solver_config(&self) -> Result<SolverConfig<f64>, CliError> {
        let inner = self.r0.unwrap_or(0.0);
        let r_max = self.r_max.unwrap_or(inner + 20.0 + 8.0 * self.t_max.max(0.0).sqrt());
        if !(self.spacing > 0.0) || !(r_max > inner) {
            return Err(CliError::Validation("need spacing > 0 and r_max beyond the inner radius".into()));
        }
        let mut cfg = SolverConfig::with_spacing(self.t_max, r_max - inner, self.spacing);
        cfg.r_max = r_max;
        cfg.validate(inner)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(cfg)
    }

    pub fn problem(&self, pt: &SweepPoint) -> Result<ProblemSpec<f64>, CliError> {
        let spec = ProblemSpec {
            pot: PotentialSpec::with_eps(pt.omega, pt.n, self.eps)?,
            reac: ReactionSpec::new(pt.m, self.c1, self.c1)?,
            p: pt.p,
            geometry: self.geometry(),
            initial: self.initial(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: f64,
    pub omega: f64,
    pub m: f64,
    pub p: f64,
}

impl SweepPoint {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.n
            .total_cmp(&other.n)
            .then(self.omega.total_cmp(&other.omega))
            .then(self.m.total_cmp(&other.m))
            .then(self.p.total_cmp(&other.p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub borderline_margin: f64,
    /// `None` for a theory-only sweep.
    pub sim: Option<SimSettings>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            borderline_margin: DEFAULT_BORDERLINE_MARGIN,
            sim: Some(SimSettings::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub point: SweepPoint,
    pub p_star: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "N")]
    pub big_n: Option<f64>,
    #[serde(rename = "M")]
    pub big_m: Option<f64>,
    pub theory_verdict: String,
    pub sim_verdict: Option<String>,
    pub blowup_time: Option<f64>,
    /// `None` when either side is undecided, borderline or missing.
    pub agreement: Option<bool>,
    pub notes: Vec<String>,
    pub failed: bool,
}

/// Do the two verdicts agree? Small-data global existence does not rule out
/// blow-up of the simulated data, so `GlobalPossible` against `BlowUp` is
/// undecided; a `Global` run where theory says every solution blows up is
/// the only disagreement.
fn agreement(theory: Verdict, sim: &pde_sim::Verdict<f64>) -> Option<bool> {
    use pde_sim::Verdict as S;
    match (theory, sim) {
        (Verdict::Borderline, _) | (_, S::Undetermined { .. }) => None,
        (Verdict::NoGlobal | Verdict::HardySupercritical, S::BlowUp { .. }) => Some(true),
        (Verdict::NoGlobal | Verdict::HardySupercritical, S::Global(_)) => Some(false),
        (Verdict::GlobalPossible, S::Global(_)) => Some(true),
        (Verdict::GlobalPossible, S::BlowUp { .. }) => None,
    }
}

pub fn sweep_row(pt: SweepPoint, settings: &SweepSettings) -> SweepRow {
    let mut row = SweepRow {
        point: pt,
        p_star: None,
        alpha: None,
        big_n: None,
        big_m: None,
        theory_verdict: String::new(),
        sim_verdict: None,
        blowup_time: None,
        agreement: None,
        notes: Vec::new(),
        failed: false,
    };
    let fail = |row: &mut SweepRow, msg: String| {
        row.failed = true;
        row.notes.push(format!("failed: {msg}"));
    };
    let report = PotentialSpec::with_eps(pt.omega, pt.n, settings.sim.map_or(1e-3, |s| s.eps))
        .and_then(|pot| classify_with_margin(&pot, &ReactionSpec::power(pt.m), pt.p, settings.borderline_margin));
    let theory = match report {
        Ok(rep) => {
            row.p_star = Some(rep.p_star);
            row.alpha = rep.alpha;
            row.big_n = rep.effective_dimension;
            row.big_m = rep.effective_exponent;
            if rep.borderline {
                row.notes.push("borderline".into());
            }
            let v = rep.policy_verdict();
            row.theory_verdict = v.map_or("None".into(), |v| v.to_string());
            v
        }
        Err(e) => {
            row.theory_verdict = "Error".into();
            fail(&mut row, e.to_string());
            None
        }
    };
    let Some(sim) = settings.sim else {
        return row;
    };
    let outcome = sim
        .problem(&pt)
        .and_then(|spec| Ok((spec, sim.solver_config()?)))
        .and_then(|(spec, cfg)| pde_sim::solve_radial(&spec, &cfg).map_err(CliError::from));
    match outcome {
        Ok(out) => {
            row.sim_verdict = Some(out.verdict.label().to_string());
            match &out.verdict {
                pde_sim::Verdict::BlowUp { time } => row.blowup_time = Some(*time),
                pde_sim::Verdict::Undetermined { reason } => row.notes.push(format!("undetermined: {reason}")),
                pde_sim::Verdict::Global(_) => {}
            }
            if out.boundary_contact {
                row.notes.push("boundary contact".into());
            }
            row.agreement = theory.and_then(|t| agreement(t, &out.verdict));
            match row.agreement {
                Some(true) => row.notes.push("agree".into()),
                Some(false) => row.notes.push("disagree".into()),
                None if theory == Some(Verdict::GlobalPossible) && row.blowup_time.is_some() => {
                    row.notes.push("data not small enough for global existence".into())
                }
                None => {}
            }
        }
        Err(e) => {
            row.sim_verdict = Some("Failed".into());
            fail(&mut row, e.to_string());
        }
    }
    row
}

/// Evaluate every point on a pool of `threads` workers and sort the rows by
/// `(n, ω, m, p)`. Failed points stay in the output, marked.
pub fn run_sweep(points: &[SweepPoint], settings: &SweepSettings, threads: usize) -> Result<Vec<SweepRow>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {threads} worker threads: {e}")))?;
    let mut rows: Vec<SweepRow> = pool.install(|| points.par_iter().map(|pt| sweep_row(*pt, settings)).collect());
    rows.sort_by(|a, b| a.point.cmp_key(&b.point));
    Ok(rows)
}

/// Cartesian product of the four value lists.
pub fn grid(n: &[f64], omega: &[f64], m: &[f64], p: &[f64]) -> Vec<SweepPoint> {
    let mut out = Vec::with_capacity(n.len() * omega.len() * m.len() * p.len());
    for &n in n {
        for &omega in omega {
            for &m in m {
                for &p in p {
                    out.push(SweepPoint { n, omega, m, p });
                }
            }
        }
    }
    out
}

pub const SWEEP_COLUMNS: &str = "n,omega,m,p,p_star,alpha,N,M,theory_verdict,sim_verdict,blowup_time,notes";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Quote a CSV field when it needs it.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_COLUMNS);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.point.n,
            r.point.omega,
            r.point.m,
            r.point.p,
            opt(r.p_star),
            opt(r.alpha),
            opt(r.big_n),
            opt(r.big_m),
            csv_field(&r.theory_verdict),
            csv_field(r.sim_verdict.as_deref().unwrap_or("")),
            opt(r.blowup_time),
            csv_field(&r.notes.join("; ")),
        );
    }
    s
}
