//! Radial semilinear heat solver
//!
//! ```text
//! u_t = u_rr + (d-1)/r u_r - V(r) u + a(r) u^p
//! ```
//!
//! on the whole space (symmetry at `r = 0`) or outside a ball (Dirichlet at
//! `r0`), with Dirichlet data at the truncation radius.
//!
//! Time stepping is Strang splitting: a pointwise half step of
//! `u' = -V⁺ u + a u^p`, solved in closed form through `G = u^{1-p}`, then a
//! θ-scheme step of the diffusion plus the attractive part `-V⁻`, then
//! another pointwise half step. The θ-scheme is
//! Crank–Nicolson whenever that step is order-preserving and moves toward
//! backward Euler only as far as needed to keep it so; both substeps are
//! monotone, so positivity and comparison hold for every step size.

use std::io::Write;
use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::exponents::{alpha_root, PotentialSpec, ReactionSpec};
use crate::quadrature::{integrate, QuadTol};
use crate::scalar::Real;

pub type RadialFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry<T> {
    WholeSpace,
    Exterior { r0: T },
}

impl<T: Real> Geometry<T> {
    pub fn inner_radius(&self) -> T {
        match self {
            Self::WholeSpace => T::zero(),
            Self::Exterior { r0 } => *r0,
        }
    }
}

/// Gaussian bump `amplitude · exp(-(r - center)² / width²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData<T> {
    pub amplitude: T,
    pub center: T,
    pub width: T,
}

impl<T: Real> InitialData<T> {
    pub fn new(amplitude: T, center: T, width: T) -> Self {
        Self {
            amplitude,
            center,
            width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > T::zero() && self.center >= T::zero() && self.width > T::zero()) {
            return invalid("initial data needs amplitude > 0, center >= 0, width > 0");
        }
        Ok(())
    }

    pub fn eval(&self, r: T) -> T {
        let z = (r - self.center) / self.width;
        self.amplitude * (-z * z).exp()
    }
}

/// One instance of the whole-space or exterior problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec<T> {
    pub pot: PotentialSpec<T>,
    pub reac: ReactionSpec<T>,
    pub p: T,
    pub geometry: Geometry<T>,
    pub initial: InitialData<T>,
}

impl<T: Real> ProblemSpec<T> {
    pub fn validate(&self) -> Result<()> {
        self.pot.validate()?;
        self.reac.validate()?;
        self.initial.validate()?;
        if !(self.p > T::one()) {
            return invalid(format!("p = {} must exceed 1", self.p));
        }
        if let Geometry::Exterior { r0 } = self.geometry {
            if !(r0 > T::zero()) {
                return invalid("exterior radius must be positive");
            }
        }
        Ok(())
    }

    /// `a(r) = c1 (1 + r²)^{m/2}`.
    pub fn reaction_coefficient(&self) -> RadialFn<T> {
        let c1 = self.reac.c1;
        let half_m = self.reac.m * T::lit(0.5);
        Arc::new(move |r: T| c1 * (T::one() + r * r).powf(half_m))
    }

    /// The equation for `u` itself.
    pub fn equation(&self) -> RadialEquation<T> {
        let pot = self.pot;
        RadialEquation {
            drift_dimension: self.pot.n,
            potential: Arc::new(move |r| pot.eval(r)),
            reaction: Some(self.reaction_coefficient()),
            p: self.p,
        }
    }

    /// The equation for `v = r^{-α} u`:
    /// `v_t = v_rr + (n+2α-1)/r v_r + (α(α+n-2)/r² - V) v + r^{α(p-1)} a v^p`.
    pub fn transformed_equation(&self) -> Result<RadialEquation<T>> {
        let alpha = alpha_root(self.pot.omega, self.pot.n)?;
        let pot = self.pot;
        let a = self.reaction_coefficient();
        let shift = alpha * (alpha + pot.n - T::lit(2.0));
        let weight = alpha * (self.p - T::one());
        Ok(RadialEquation {
            drift_dimension: pot.n + T::lit(2.0) * alpha,
            potential: Arc::new(move |r| pot.eval(r) - shift / (r * r)),
            reaction: Some(Arc::new(move |r| r.powf(weight) * a(r))),
            p: self.p,
        })
    }
}

/// `u_t = u_rr + (d-1)/r u_r - V u + a u^p`; `reaction = None` is the linear
/// equation.
#[derive(Clone)]
pub struct RadialEquation<T> {
    pub drift_dimension: T,
    pub potential: RadialFn<T>,
    pub reaction: Option<RadialFn<T>>,
    pub p: T,
}

impl<T: Real> RadialEquation<T> {
    pub fn heat(drift_dimension: T) -> Self {
        Self {
            drift_dimension,
            potential: Arc::new(|_| T::zero()),
            reaction: None,
            p: T::lit(2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub r_max: T,
    /// Nodes from the inner radius to `r_max`, both included.
    pub grid_points: usize,
    pub dt_init: T,
    pub dt_min: T,
    pub dt_max: T,
    /// Step cap `dt <= time_step_fraction · (1 + t)`.
    pub time_step_fraction: T,
    /// Step cap `(p-1) a u^{p-1} dt <= reaction_step_limit`.
    pub reaction_step_limit: T,
    pub blowup_threshold: T,
    /// Trailing fraction of `[0, t_max]` over which decay is required.
    pub decay_window: T,
    pub t_max: T,
    pub snapshot_times: Vec<T>,
}

impl<T: Real> SolverConfig<T> {
    /// Grid spacing 0.05 out to `20 + 8 √t_max`.
    pub fn for_horizon(t_max: T) -> Self {
        Self::with_spacing(t_max, T::lit(20.0) + T::lit(8.0) * t_max.sqrt(), T::lit(0.05))
    }

    pub fn with_spacing(t_max: T, r_max: T, spacing: T) -> Self {
        let nodes = (r_max / spacing).ceil().to_f64_lossy().max(2.0) as usize + 1;
        Self {
            r_max,
            grid_points: nodes,
            dt_init: T::lit(1e-4),
            dt_min: T::lit(1e-14),
            dt_max: T::infinity(),
            time_step_fraction: T::lit(0.01),
            reaction_step_limit: T::lit(0.2),
            blowup_threshold: T::lit(1e8),
            decay_window: T::lit(0.2),
            t_max,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self, inner: T) -> Result<()> {
        let bad = |msg: &str| Err(LabError::SolverConfig(msg.to_string()));
        if !(self.r_max > inner) {
            return bad("r_max must exceed the inner radius");
        }
        if self.grid_points < 4 {
            return bad("need at least 4 grid points");
        }
        if !(self.dt_min > T::zero() && self.dt_init >= self.dt_min && self.dt_max >= self.dt_init) {
            return bad("need 0 < dt_min <= dt_init <= dt_max");
        }
        if !(self.t_max > T::zero()) {
            return bad("t_max must be positive");
        }
        if !(self.time_step_fraction > T::zero() && self.reaction_step_limit > T::zero()) {
            return bad("step-size controls must be positive");
        }
        if !(self.decay_window > T::zero() && self.decay_window < T::one()) {
            return bad("decay_window must lie in (0, 1)");
        }
        if self.snapshot_times.iter().any(|&s| !(s >= T::zero() && s <= self.t_max)) {
            return bad("snapshot times must lie in [0, t_max]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalEvidence<T> {
    pub final_sup: T,
    pub running_max: T,
    /// sup norm non-increasing over the trailing window
    pub monotone_decay: bool,
    /// `t · max a · ‖u‖^{p-1}` decreasing over the trailing window
    pub scaling_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict<T> {
    BlowUp { time: T },
    Global(GlobalEvidence<T>),
    Undetermined { reason: String },
}

impl<T> Verdict<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Self::BlowUp { .. } => "BlowUp",
            Self::Global(_) => "Global",
            Self::Undetermined { .. } => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    pub t: T,
    pub sup_norm: T,
    pub dt: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<T> {
    pub t: T,
    pub u: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome<T> {
    pub verdict: Verdict<T>,
    pub r: Vec<T>,
    pub trace: Vec<TracePoint<T>>,
    pub snapshots: Vec<Snapshot<T>>,
    /// Solution at the last accepted time.
    pub final_u: Vec<T>,
    pub final_t: T,
    /// Mass reached the truncation boundary at some point.
    pub boundary_contact: bool,
}

impl<T: Real> SolveOutcome<T> {
    pub fn snapshot_at(&self, t: T) -> Option<&Snapshot<T>> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= T::lit(1e-9) * t.abs().max(T::one()))
    }

    /// CSV with columns `r,u`.
    pub fn write_snapshot_csv<W: Write>(&self, snap: &Snapshot<T>, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,u")?;
        for (r, u) in self.r.iter().zip(&snap.u) {
            writeln!(w, "{r:e},{u:e}")?;
        }
        Ok(())
    }

    /// CSV with columns `t,sup_norm,dt`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,sup_norm,dt")?;
        for p in &self.trace {
            writeln!(w, "{:e},{:e},{:e}", p.t, p.sup_norm, p.dt)?;
        }
        Ok(())
    }
}

/// Finite-volume drift–diffusion operator on the unknown nodes.
struct Grid<T> {
    r: Vec<T>,
    /// first unknown node (1 in the exterior case, 0 for the whole space)
    first: usize,
    lower: Vec<T>,
    /// includes `-V` where `V < 0`
    diag: Vec<T>,
    upper: Vec<T>,
    /// `max(V, 0)`, applied in the pointwise substep
    potential: Vec<T>,
    reaction: Vec<T>,
    /// some cell has a nonzero potential or reaction
    has_pointwise: bool,
    /// max |L_jj|
    stiffness: T,
}

fn build_grid<T: Real>(eq: &RadialEquation<T>, geometry: Geometry<T>, cfg: &SolverConfig<T>) -> Result<Grid<T>> {
    let inner = geometry.inner_radius();
    let g = cfg.grid_points;
    let h = (cfg.r_max - inner) / T::from_count(g - 1);
    let r: Vec<T> = (0..g).map(|i| inner + h * T::from_count(i)).collect();
    let d = eq.drift_dimension;
    let half = T::lit(0.5);
    let first = match geometry {
        Geometry::WholeSpace => 0,
        Geometry::Exterior { .. } => 1,
    };
    let face = |x: T| x.powf(d - T::one());
    let moment = |x: T| x.powf(d) / d;
    let k = g - 1 - first;
    let (mut lower, mut diag, mut upper) = (vec![T::zero(); k], vec![T::zero(); k], vec![T::zero(); k]);
    let mut potential = vec![T::zero(); k];
    let mut reaction = vec![T::zero(); k];
    let quad = QuadTol {
        abs: T::zero(),
        rel: T::lit(1e-8),
        max_segments: 200,
    };
    for j in 0..k {
        let i = j + first;
        let left = if i == 0 { T::zero() } else { r[i] - half * h };
        let right = r[i] + half * h;
        let vol = moment(right) - moment(left);
        let fl = if i == 0 { T::zero() } else { face(left) };
        let fr = face(right);
        lower[j] = fl / (h * vol);
        upper[j] = fr / (h * vol);
        // cell-averaged potential with the same weight as the cell volume
        let v = &eq.potential;
        let avg = integrate(|x: T| v(x) * face(x), left, right, quad)?.value / vol;
        if !avg.is_finite() {
            return Err(LabError::SolverConfig(format!("potential not integrable near r = {}", r[i])));
        }
        // the attractive part is stiff near the origin and must be implicit
        diag[j] = -(lower[j] + upper[j]) - avg.min(T::zero());
        potential[j] = avg.max(T::zero());
        reaction[j] = eq.reaction.as_ref().map_or(T::zero(), |a| a(r[i]));
    }
    let has_pointwise = potential.iter().chain(&reaction).any(|x| *x != T::zero());
    let stiffness = diag.iter().map(|x| x.abs()).fold(T::zero(), T::max);
    Ok(Grid {
        has_pointwise,
        stiffness,
        r,
        first,
        lower,
        diag,
        upper,
        potential,
        reaction,
    })
}

/// `(I - θ dt L) x = (I + (1-θ) dt L) u` with θ chosen for monotonicity.
/// Returns false if the result has a negative or non-finite entry, which can
/// only happen when the attractive potential outgrows `1/(θ dt)`.
fn diffusion_step<T: Real>(grid: &Grid<T>, u: &mut [T], dt: T, work: &mut DiffusionWork<T>) -> bool {
    let k = u.len();
    let theta = T::lit(0.5).max(T::one() - T::one() / (dt * grid.stiffness));
    let explicit = (T::one() - theta) * dt;
    let rhs = &mut work.rhs;
    for j in 0..k {
        let mut v = u[j] * (T::one() + explicit * grid.diag[j]).max(T::zero());
        if j > 0 {
            v = v + explicit * grid.lower[j] * u[j - 1];
        }
        if j + 1 < k {
            v = v + explicit * grid.upper[j] * u[j + 1];
        }
        rhs[j] = v;
    }
    let implicit = theta * dt;
    // Thomas algorithm on the M-matrix I - θ dt L
    let c = &mut work.c;
    let mut prev_c = T::zero();
    let mut prev_d = T::zero();
    for j in 0..k {
        let a = -implicit * grid.lower[j];
        let inv = T::one() / (T::one() - implicit * grid.diag[j] - a * prev_c);
        c[j] = -implicit * grid.upper[j] * inv;
        u[j] = (rhs[j] - a * prev_d) * inv;
        prev_c = c[j];
        prev_d = u[j];
    }
    for j in (0..k.saturating_sub(1)).rev() {
        u[j] = u[j] - c[j] * u[j + 1];
    }
    u.iter().all(|x| *x >= T::zero() && x.is_finite())
}

struct DiffusionWork<T> {
    rhs: Vec<T>,
    c: Vec<T>,
}

/// Closed-form solution of `u' = -V u + a u^p` over `dt`; `None` when the
/// solution blows up within the step.
fn pointwise_step<T: Real>(u: T, v: T, a: T, p: T, dt: T) -> Option<T> {
    if u <= T::zero() {
        return Some(T::zero());
    }
    if a == T::zero() {
        return Some(u * (-v * dt).exp());
    }
    let k = p - T::one();
    let x = k * v * dt;
    // ln of ψ(x) = (1 - e^{-x})/x, finite for every x
    let ln_psi = if x.abs() < T::lit(1e-8) {
        (-x * T::lit(0.5)).ln_1p()
    } else if x > T::zero() {
        (-(-x).exp_m1()).ln() - x.ln()
    } else {
        -x + (-x.exp_m1()).ln() - (-x).ln()
    };
    // G = u^{1-p} evolves affinely: G = e^x G0 (1 - a k dt u^k ψ); the product
    // is formed in logs so huge |V| dt with tiny u cannot produce inf - inf.
    let term = (a * k * dt).ln() + k * u.ln() + ln_psi;
    if term >= T::zero() {
        return None;
    }
    let next = u * (-v * dt).exp() * ((-term.exp()).ln_1p() * (-T::one() / k)).exp();
    if next.is_finite() {
        Some(next)
    } else {
        None
    }
}

fn sup<T: Real>(u: &[T]) -> T {
    u.iter().copied().fold(T::zero(), T::max)
}

/// Evolve `eq` from `initial` and classify the trajectory.
pub fn solve_equation<T: Real>(
    eq: &RadialEquation<T>,
    geometry: Geometry<T>,
    initial: &dyn Fn(T) -> T,
    cfg: &SolverConfig<T>,
) -> Result<SolveOutcome<T>> {
    let inner = geometry.inner_radius();
    cfg.validate(inner)?;
    if !(eq.p > T::one()) {
        return invalid("p must exceed 1");
    }
    let grid = build_grid(eq, geometry, cfg)?;
    let k = grid.diag.len();
    let mut u: Vec<T> = (0..k).map(|j| initial(grid.r[j + grid.first]).max(T::zero())).collect();
    let start_sup = sup(&u);
    if !(start_sup > T::zero()) {
        return invalid("initial data vanish on the grid");
    }
    if !(cfg.blowup_threshold > start_sup) {
        return Err(LabError::SolverConfig("blowup_threshold must exceed the initial sup norm".into()));
    }
    let diffusion_length = cfg.t_max.sqrt();
    if cfg.r_max - inner < T::lit(4.0) * diffusion_length {
        warn!(
            "r_max = {} is short of the diffusion length √t_max = {}; boundary effects likely",
            cfg.r_max, diffusion_length
        );
    }

    let a_max = grid.reaction.iter().copied().fold(T::zero(), T::max);
    let p = eq.p;
    let mut snapshots_due: Vec<T> = cfg.snapshot_times.clone();
    snapshots_due.sort_by(|a, b| a.partial_cmp(b).expect("finite snapshot times"));
    snapshots_due.dedup();
    let mut snapshots = Vec::new();
    let mut trace = vec![TracePoint {
        t: T::zero(),
        sup_norm: start_sup,
        dt: T::zero(),
    }];
    while snapshots_due.first().is_some_and(|&s| s <= T::zero()) {
        snapshots.push(Snapshot {
            t: snapshots_due.remove(0),
            u: full_profile(&grid, &u),
        });
    }

    let mut t = T::zero();
    let mut dt = cfg.dt_init;
    let mut boundary_contact = false;
    let mut work = DiffusionWork {
        rhs: vec![T::zero(); k],
        c: vec![T::zero(); k],
    };
    let mut trial = vec![T::zero(); k];
    let half = T::lit(0.5);
    let verdict = loop {
        if t >= cfg.t_max {
            break classify_end(&trace, cfg, a_max, p);
        }
        // step-size controls
        let reaction_rate = if a_max > T::zero() {
            grid.reaction
                .iter()
                .zip(&u)
                .map(|(a, u)| (p - T::one()) * *a * u.powf(p - T::one()))
                .fold(T::zero(), T::max)
        } else {
            T::zero()
        };
        let mut step = dt
            .min(cfg.dt_max)
            .min(cfg.time_step_fraction * (T::one() + t));
        if reaction_rate > T::zero() {
            step = step.min(cfg.reaction_step_limit / reaction_rate);
        }
        step = step.max(cfg.dt_min).min(cfg.t_max - t);
        if let Some(&next) = snapshots_due.first() {
            if next > t {
                step = step.min(next - t);
            }
        }

        trial.copy_from_slice(&u);
        let mut ok = pointwise_all(&grid, &mut trial, p, half * step);
        if ok && !diffusion_step(&grid, &mut trial, step, &mut work) {
            if step > cfg.dt_min {
                dt = (half * step).max(cfg.dt_min);
                continue;
            }
            return Err(LabError::SolverConfig(format!(
                "linear step lost positivity at dt_min = {} (t = {t})",
                cfg.dt_min
            )));
        }
        if ok {
            ok = pointwise_all(&grid, &mut trial, p, half * step);
        }
        if !ok {
            if step > cfg.dt_min {
                dt = (half * step).max(cfg.dt_min);
                continue;
            }
            let current = sup(&u);
            if current * T::lit(1e4) >= cfg.blowup_threshold {
                break Verdict::BlowUp { time: t + step };
            }
            return Err(LabError::SolverConfig(format!(
                "reaction substep blows up at dt_min = {} while the sup norm is only {current}",
                cfg.dt_min
            )));
        }
        std::mem::swap(&mut u, &mut trial);
        t = t + step;
        if u.iter().any(|x| x.is_nan()) {
            return Err(LabError::SolverConfig(format!("solution became NaN at t = {t}")));
        }
        let s = sup(&u);
        trace.push(TracePoint { t, sup_norm: s, dt: step });
        if !boundary_contact && u[k - 1] > T::lit(1e-10) * s {
            boundary_contact = true;
            warn!("solution reached the truncation boundary r_max = {} at t = {}", cfg.r_max, t);
        }
        while snapshots_due.first().is_some_and(|&next| next <= t * (T::one() + T::lit(1e-12))) {
            snapshots.push(Snapshot {
                t: snapshots_due.remove(0),
                u: full_profile(&grid, &u),
            });
        }
        if !s.is_finite() || s >= cfg.blowup_threshold {
            let prev = trace[trace.len() - 2].sup_norm;
            if s > prev || !s.is_finite() {
                break Verdict::BlowUp { time: t };
            }
        }
        dt = (step * T::lit(1.2)).max(cfg.dt_init.min(step * T::lit(1.2)));
    };
    let final_u = full_profile(&grid, &u);
    Ok(SolveOutcome {
        verdict,
        r: grid.r,
        trace,
        snapshots,
        final_u,
        final_t: t,
        boundary_contact,
    })
}

fn pointwise_all<T: Real>(grid: &Grid<T>, u: &mut [T], p: T, dt: T) -> bool {
    if !grid.has_pointwise {
        return true;
    }
    for (j, x) in u.iter_mut().enumerate() {
        match pointwise_step(*x, grid.potential[j], grid.reaction[j], p, dt) {
            Some(v) => *x = v,
            None => return false,
        }
    }
    true
}

fn full_profile<T: Real>(grid: &Grid<T>, u: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); grid.r.len()];
    out[grid.first..grid.first + u.len()].copy_from_slice(u);
    out
}

fn classify_end<T: Real>(trace: &[TracePoint<T>], cfg: &SolverConfig<T>, a_max: T, p: T) -> Verdict<T> {
    let window_start = cfg.t_max * (T::one() - cfg.decay_window);
    let running_max = trace.iter().map(|x| x.sup_norm).fold(T::zero(), T::max);
    let final_sup = trace.last().expect("non-empty trace").sup_norm;
    let window: Vec<&TracePoint<T>> = trace.iter().filter(|x| x.t >= window_start).collect();
    if window.len() < 2 {
        return Verdict::Undetermined {
            reason: "too few steps in the decay window".into(),
        };
    }
    let slack = T::one() + T::lit(1e-12);
    let monotone_decay = window.windows(2).all(|w| w[1].sup_norm <= w[0].sup_norm * slack)
        && window.last().expect("non-empty").sup_norm < window[0].sup_norm;
    let scaling = |x: &TracePoint<T>| x.t * a_max * x.sup_norm.powf(p - T::one());
    let scaling_decreasing = a_max == T::zero()
        || window.windows(2).all(|w| scaling(w[1]) <= scaling(w[0]) * slack);
    let below_half = final_sup < T::lit(0.5) * running_max;
    if monotone_decay && below_half && scaling_decreasing {
        Verdict::Global(GlobalEvidence {
            final_sup,
            running_max,
            monotone_decay,
            scaling_decreasing,
        })
    } else {
        let reason = if !monotone_decay {
            "sup norm not decreasing over the decay window"
        } else if !below_half {
            "sup norm not below half its running maximum"
        } else {
            "t·a·‖u‖^(p-1) still growing: decay may precede late blow-up"
        };
        Verdict::Undetermined { reason: reason.into() }
    }
}

/// Solve the problem for `u`.
pub fn solve_radial<T: Real>(spec: &ProblemSpec<T>, cfg: &SolverConfig<T>) -> Result<SolveOutcome<T>> {
    spec.validate()?;
    let init = spec.initial;
    solve_equation(&spec.equation(), spec.geometry, &move |r| init.eval(r), cfg)
}

/// `v(r) = r^{-α} u(r)`; `α = 0` is the identity.
pub fn transform_to_v<T: Real>(r: &[T], u: &[T], alpha: T) -> Result<Vec<T>> {
    if r.len() != u.len() {
        return invalid("profile and grid lengths differ");
    }
    if alpha == T::zero() {
        return Ok(u.to_vec());
    }
    if r.iter().any(|&x| !(x > T::zero())) {
        return invalid("r^{-α} is undefined at r = 0 for α ≠ 0");
    }
    Ok(r.iter().zip(u).map(|(x, v)| x.powf(-alpha) * *v).collect())
}

/// Numerical exterior Dirichlet heat kernel from a narrow bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProbe<T> {
    pub dimension: T,
    pub bump: InitialData<T>,
    /// `∫ bump dρ` on the grid
    pub bump_mass: T,
    pub r: Vec<T>,
    pub times: Vec<T>,
    /// `values[i][j] ≈ q̄(times[i], r[j], bump.center)`
    pub values: Vec<Vec<T>>,
}

/// Resolution of [`solve_exterior_kernel_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings<T> {
    pub spacing: T,
    pub time_step_fraction: T,
}

impl<T: Real> Default for ProbeSettings<T> {
    fn default() -> Self {
        Self {
            spacing: T::lit(0.02),
            time_step_fraction: T::lit(2e-4),
        }
    }
}

/// Evolve the linear exterior problem in drift dimension `dimension` from
/// `bump` and divide by its mass; the result approximates the Dirichlet
/// kernel `q̄(t, r, ρ0)` as a density in the source variable, smoothed by the
/// bump.
pub fn solve_exterior_kernel_probe<T: Real>(
    dimension: T,
    r0: T,
    bump: InitialData<T>,
    times: &[T],
    settings: &ProbeSettings<T>,
) -> Result<KernelProbe<T>> {
    bump.validate()?;
    if !(r0 > T::zero()) || !(bump.center > r0 + T::one()) {
        return invalid("bump must sit beyond r0 + 1 with r0 > 0");
    }
    if times.is_empty() || times.iter().any(|&t| !(t > T::zero())) {
        return invalid("probe times must be positive");
    }
    let t_max = times.iter().copied().fold(T::zero(), T::max);
    let r_max = bump.center + T::lit(12.0) * t_max.sqrt() + T::lit(10.0) * bump.width + T::one();
    let mut cfg = SolverConfig::with_spacing(t_max, r_max - r0, settings.spacing);
    cfg.r_max = r_max;
    cfg.dt_init = T::lit(1e-3) * settings.spacing * settings.spacing;
    cfg.time_step_fraction = settings.time_step_fraction;
    cfg.snapshot_times = times.to_vec();
    cfg.blowup_threshold = T::infinity();
    let eq = RadialEquation::heat(dimension);
    let out = solve_equation(&eq, Geometry::Exterior { r0 }, &move |r| bump.eval(r), &cfg)?;
    let h = out.r[1] - out.r[0];
    let bump_mass = out.r.iter().map(|&r| bump.eval(r)).sum::<T>() * h;
    let values = times
        .iter()
        .map(|&t| {
            let snap = out
                .snapshot_at(t)
                .ok_or_else(|| LabError::SolverConfig(format!("no snapshot at t = {t}")))?;
            Ok(snap.u.iter().map(|v| *v / bump_mass).collect())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    Ok(KernelProbe {
        dimension,
        bump,
        bump_mass,
        r: out.r,
        times: times.to_vec(),
        values,
    })
}

/// `∫ q_N(t, r, ρ) bump(ρ) dρ / ∫ bump dρ`: the free-space kernel seen
/// through the same bump as a probe.
pub fn smoothed_kernel<T: Real>(dimension: T, t: T, r: T, bump: &InitialData<T>) -> Result<T> {
    let w = bump.width;
    let c = bump.center;
    let lo = (c - T::lit(8.0) * w).max(T::min_positive_value());
    let hi = c + T::lit(8.0) * w;
    let tol = QuadTol::rel(T::lit(1e-9));
    let breaks = [lo, c, hi];
    let mass = crate::quadrature::integrate_with_breaks(|rho| bump.eval(rho), &breaks, tol)?.value;
    let num = crate::quadrature::integrate_with_breaks(
        |rho| (crate::kernels::log_kernel_qn(dimension, t, r, rho).unwrap_or(T::neg_infinity())).exp() * bump.eval(rho),
        &breaks,
        tol,
    )?
    .value;
    Ok(num / mass)
}

/// Comparison constants `q̄(t, r, ρ) >= c q_N(K0 t, r, ρ)` fitted on probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonFit<T> {
    pub c: T,
    pub k0: T,
    /// `max q̄ / q_N` over the compared points (domination check)
    pub max_upper_ratio: T,
    pub points: usize,
}

/// Points compared: probe nodes with `r` in `r_range` (every `stride`-th)
/// where the smoothed free kernel is at least `floor` times its maximum over
/// those nodes at that time. For every `K0` in `k0_grid` the admissible `c`
/// is `min(1, min q̄ / q_N(K0 t))`; the `K0` with the largest `c` wins.
pub fn fit_dirichlet_comparison<T: Real>(
    probes: &[KernelProbe<T>],
    r_range: (T, T),
    stride: usize,
    k0_grid: &[T],
    floor: T,
) -> Result<ComparisonFit<T>> {
    if probes.is_empty() || k0_grid.is_empty() || k0_grid.iter().any(|&k| !(k >= T::one())) {
        return invalid("need probes and K0 candidates >= 1");
    }
    let mut best_c = vec![T::infinity(); k0_grid.len()];
    let mut max_upper = T::zero();
    let mut points = 0;
    for probe in probes {
        let nodes: Vec<usize> = (0..probe.r.len())
            .filter(|&j| probe.r[j] >= r_range.0 && probe.r[j] <= r_range.1)
            .step_by(stride.max(1))
            .collect();
        for (i, &t) in probe.times.iter().enumerate() {
            let free: Vec<T> = nodes
                .iter()
                .map(|&j| smoothed_kernel(probe.dimension, t, probe.r[j], &probe.bump))
                .collect::<Result<_>>()?;
            let peak = free.iter().copied().fold(T::zero(), T::max);
            for (&j, &q) in nodes.iter().zip(&free) {
                if !(q >= floor * peak) {
                    continue;
                }
                points += 1;
                let value = probe.values[i][j];
                max_upper = max_upper.max(value / q);
                for (slot, &k0) in best_c.iter_mut().zip(k0_grid) {
                    let dilated = if k0 == T::one() {
                        q
                    } else {
                        smoothed_kernel(probe.dimension, k0 * t, probe.r[j], &probe.bump)?
                    };
                    *slot = slot.min(value / dilated);
                }
            }
        }
    }
    if points == 0 {
        return invalid("no probe nodes above the comparison floor");
    }
    let (idx, c) = best_c
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
    Ok(ComparisonFit {
        c: c.min(T::one()),
        k0: k0_grid[idx],
        max_upper_ratio: max_upper,
        points,
    })
}
