//! Global-existence and blow-up certificates.
//!
//! Global side: the Gaussian supersolution
//! `v = δ r^α (t+1)^{-γ} exp(-r²/4(t+1))`, its parameter selection and a
//! pointwise residual check of `v^{-1}(v_rr + (n-1)/r v_r - V v - v_t + a v^p)`.
//!
//! Blow-up side: the moment inequality `F' >= -a_lin F + b F^p` and its
//! Bernoulli comparison solution.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, LabError, Result};
use crate::exponents::{alpha_root, critical_exponent, hardy_threshold, ReactionSpec};
use crate::scalar::Real;

/// Parameters of the Gaussian supersolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionParams<T> {
    pub alpha: T,
    pub gamma: T,
    pub delta: T,
    /// Gaussian rate, always 1/4.
    pub c: T,
    /// Feasible interval `[gamma_lower, gamma_upper)` for `gamma`.
    pub gamma_lower: T,
    pub gamma_upper: T,
    /// `sup z^e exp(-(p-1) z / 4)` used to size `delta`.
    pub c1_sup: T,
    /// `C` with `a(r) <= C r^m` (`m <= 0`) or `C (r ∨ 1)^m` (`m > 0`).
    pub reaction_bound: T,
}

impl<T: Real> SupersolutionParams<T> {
    /// Upper bound on the reaction coefficient used by the certificate.
    pub fn reaction_envelope(&self, m: T, r: T) -> T {
        if m > T::zero() {
            self.reaction_bound * r.max(T::one()).powf(m)
        } else {
            self.reaction_bound * r.powf(m)
        }
    }

    /// `ln v(r, t)`.
    pub fn log_value(&self, r: T, t: T) -> T {
        let s = t + T::one();
        self.delta.ln() + self.alpha * r.ln() - self.gamma * s.ln() - self.c * r * r / s
    }
}

/// Sample grid for residual checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualGrid<T> {
    pub r: Vec<T>,
    pub t: Vec<T>,
}

impl<T: Real> ResidualGrid<T> {
    /// `r` log-spaced on `[r_min, r_max]`; `t + 1` log-spaced on
    /// `[1, t_max + 1]`, so `t = 0` and `t = t_max` are both included.
    pub fn log_spaced(r_min: T, r_max: T, nr: usize, t_max: T, nt: usize) -> Result<Self> {
        if !(r_min > T::zero()) || !(r_max > r_min) || nr < 2 || nt < 2 || !(t_max > T::zero()) {
            return invalid("residual grid needs 0 < r_min < r_max, t_max > 0 and at least two points per axis");
        }
        let lr = (r_max / r_min).ln();
        let r = (0..nr)
            .map(|i| r_min * (lr * T::from_count(i) / T::from_count(nr - 1)).exp())
            .collect();
        let lt = (t_max + T::one()).ln();
        let t = (0..nt)
            .map(|j| (lt * T::from_count(j) / T::from_count(nt - 1)).exp_m1())
            .collect();
        Ok(Self { r, t })
    }

    /// `r ∈ [1e-3, 100] × t ∈ [0, 1e4]`, 200 × 100 points.
    pub fn standard() -> Self {
        Self::log_spaced(T::lit(1e-3), T::lit(100.0), 200, T::lit(1e4), 100).expect("static grid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.r.is_empty() || self.t.is_empty() {
            return invalid("empty residual grid");
        }
        if let Some(r) = self.r.iter().find(|r| !(**r > T::zero()) || !r.is_finite()) {
            return domain(format!("residual grid touches r = {r}; the supersolution needs r > 0"));
        }
        if let Some(t) = self.t.iter().find(|t| !(**t >= T::zero()) || !t.is_finite()) {
            return domain(format!("residual grid has invalid time {t}"));
        }
        Ok(())
    }

    /// Range of `z = r² / (t+1)` covered by the grid.
    pub fn z_range(&self) -> (T, T) {
        let r_min = self.r.iter().copied().fold(T::infinity(), T::min);
        let r_max = self.r.iter().copied().fold(T::zero(), T::max);
        let t_max = self.t.iter().copied().fold(T::zero(), T::max);
        let t_min = self.t.iter().copied().fold(T::infinity(), T::min);
        (r_min * r_min / (t_max + T::one()), r_max * r_max / (t_min + T::one()))
    }
}

/// `sup z^e exp(-(p-1) z / 4)` over `z > 0`, or over `z_range` when given.
///
/// Golden-section search on `ln z` of the concave log-objective. For `e < 0`
/// the unrestricted supremum is infinite, so a range is required.
pub fn gaussian_power_sup<T: Real>(e: T, p: T, z_range: Option<(T, T)>) -> Result<T> {
    if !(p > T::one()) {
        return invalid("gaussian_power_sup needs p > 1");
    }
    let k = (p - T::one()) / T::lit(4.0);
    let (lo, hi) = match z_range {
        Some((a, b)) if a > T::zero() && b >= a => (a.ln(), b.ln()),
        Some(_) => return invalid("z range must satisfy 0 < z_min <= z_max"),
        None if e < T::zero() => {
            return domain(format!(
                "sup of z^{e} e^(-kz) over z > 0 is infinite; restrict the z range"
            ))
        }
        None if e == T::zero() => return Ok(T::one()),
        None => {
            // maximizer 4e/(p-1) sits well inside
            let z_star = e / k;
            ((z_star * T::lit(1e-6)).ln(), (z_star * T::lit(1e6)).ln())
        }
    };
    let log_f = |l: T| e * l - k * l.exp();
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (log_f(x1), log_f(x2));
    let tol = T::epsilon().sqrt() * (T::one() + lo.abs().max(hi.abs()));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = log_f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = log_f(x1);
        }
    }
    let best = [lo, hi, x1, x2]
        .iter()
        .map(|&l| log_f(l))
        .fold(T::neg_infinity(), T::max);
    Ok(best.exp())
}

/// `C` such that `a(r) = c2 (1 + r²)^{m/2}` satisfies `a(r) <= C r^m`
/// (`m <= 0`) or `a(r) <= C (r ∨ 1)^m` (`m > 0`), by maximizing the ratio
/// over `r ∈ [1e-8, 1e8]` (log grid, `r = 1` included).
pub fn reaction_bound_constant<T: Real>(reac: &ReactionSpec<T>) -> Result<T> {
    reac.validate()?;
    let m = reac.m;
    let half_m = m * T::lit(0.5);
    let ratio = |r: T| {
        let a = reac.c2 * (T::one() + r * r).powf(half_m);
        let env = if m > T::zero() { r.max(T::one()).powf(m) } else { r.powf(m) };
        a / env
    };
    let steps = 1600;
    let c = (0..=steps)
        .map(|i| T::lit(10.0).powf(T::lit(-8.0) + T::lit(16.0) * T::from_count(i) / T::from_count(steps)))
        .chain(std::iter::once(T::one()))
        .map(ratio)
        .fold(T::zero(), T::max);
    Ok(c)
}

/// Choose `(γ, δ)` for the supersolution, with `c = 1/4` and `α = α(ω, n)`.
///
/// `γ` is the midpoint of `[max(α/2 + (1+m/2)/(p-1), α/2 + 1/(p-1) if m > 0), α + n/2)`
/// and `δ^{p-1} = (α + n/2 - γ) / (2 C1 C)`. When the `z`-exponent of `C1`
/// is negative the supremum is taken over the `z` range of `grid`, so the
/// certificate only covers that grid.
pub fn supersolution_params<T: Real>(
    omega: T,
    n: T,
    reac: &ReactionSpec<T>,
    p: T,
    grid: &ResidualGrid<T>,
) -> Result<SupersolutionParams<T>> {
    reac.validate()?;
    grid.validate()?;
    if !(p > T::one()) {
        return invalid(format!("p must exceed 1, got {p}"));
    }
    if omega < hardy_threshold(n) {
        return domain(format!("omega = {omega} is below the Hardy threshold {}", hardy_threshold(n)));
    }
    let m = reac.m;
    let alpha = alpha_root(omega, n)?;
    let p_star = critical_exponent(omega, n, m)?;
    let half = T::lit(0.5);
    let pm1 = p - T::one();
    let mut gamma_lower = half * alpha + (T::one() + half * m) / pm1;
    if m > T::zero() {
        gamma_lower = gamma_lower.max(half * alpha + T::one() / pm1);
    }
    let gamma_upper = alpha + half * n;
    let slack = T::lit(64.0) * T::epsilon() * p_star;
    if p <= p_star + slack || !(gamma_lower < gamma_upper) {
        return Err(LabError::Infeasible(format!(
            "no supersolution exponent: p = {p} <= p* = {p_star} (gamma interval [{gamma_lower}, {gamma_upper}) is empty)"
        )));
    }
    let gamma = half * (gamma_lower + gamma_upper);
    let z_range = grid.z_range();
    let sup_for = |e: T| {
        if e < T::zero() {
            gaussian_power_sup(e, p, Some(z_range))
        } else {
            gaussian_power_sup(e, p, None)
        }
    };
    let mut c1_sup = sup_for(half * (alpha * pm1 + m))?;
    if m > T::zero() {
        c1_sup = c1_sup.max(sup_for(half * alpha * pm1)?);
    }
    let reaction_bound = reaction_bound_constant(reac)?;
    let delta = (half * (gamma_upper - gamma) / (c1_sup * reaction_bound)).powf(T::one() / pm1);
    Ok(SupersolutionParams {
        alpha,
        gamma,
        delta,
        c: T::lit(0.25),
        gamma_lower,
        gamma_upper,
        c1_sup,
        reaction_bound,
    })
}

/// Outcome of [`supersolution_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport<T> {
    pub max_residual: T,
    pub at_r: T,
    pub at_t: T,
    /// `max |(4c² - c) r² / (t+1)²|` over the grid
    pub gaussian_term: T,
    /// `max |(α² + (n-2)α - ω) / r²|` over the grid
    pub hardy_term: T,
    pub passed: bool,
}

/// Residual tolerance for a passing certificate.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Evaluate `v^{-1}(v_rr + (n-1)/r v_r - ω/r² v - v_t + a v^p)` from the
/// analytic derivative ratios, with `a` the certificate's reaction envelope,
/// and take the maximum over the grid.
pub fn supersolution_residual<T: Real>(
    params: &SupersolutionParams<T>,
    omega: T,
    n: T,
    m: T,
    p: T,
    grid: &ResidualGrid<T>,
) -> Result<ResidualReport<T>> {
    grid.validate()?;
    let SupersolutionParams { alpha, gamma, c, .. } = *params;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut report = ResidualReport {
        max_residual: T::neg_infinity(),
        at_r: T::nan(),
        at_t: T::nan(),
        gaussian_term: T::zero(),
        hardy_term: T::zero(),
        passed: false,
    };
    for &t in &grid.t {
        let s = t + T::one();
        for &r in &grid.r {
            let vr = alpha / r - two * c * r / s;
            let vrr = alpha * alpha / (r * r) + four * c * c * r * r / (s * s)
                - four * c * alpha / s
                - alpha / (r * r)
                - two * c / s;
            let vt = -gamma / s + c * r * r / (s * s);
            let reaction = params.reaction_envelope(m, r) * ((p - T::one()) * params.log_value(r, t)).exp();
            let res = vrr + (n - T::one()) / r * vr - omega / (r * r) - vt + reaction;
            if res > report.max_residual || res.is_nan() {
                report.max_residual = res;
                report.at_r = r;
                report.at_t = t;
                if res.is_nan() {
                    return domain(format!("residual is not finite at r = {r}, t = {t}"));
                }
            }
            let g = ((four * c * c - c) * r * r / (s * s)).abs();
            let h = ((alpha * alpha + (n - two) * alpha - omega) / (r * r)).abs();
            report.gaussian_term = report.gaussian_term.max(g);
            report.hardy_term = report.hardy_term.max(h);
        }
    }
    report.passed = report.max_residual <= T::lit(RESIDUAL_TOL);
    Ok(report)
}

/// For `ω < 0` the supersolution is infinite at the origin; the global
/// argument uses `min(v̂(|x - x0|, t), v(|x|, t))` with `v̂` built for a
/// slightly smaller `ω`. Checks that the minimum is finite and positive on a
/// square sample grid of the plane through `0` and `x0` (both hit exactly).
pub fn shifted_min_is_finite<T: Real>(
    v: &SupersolutionParams<T>,
    v_shifted: &SupersolutionParams<T>,
    x0: T,
    half_width: T,
    points: usize,
    times: &[T],
) -> Result<bool> {
    if x0 == T::zero() || points < 2 || !(half_width > x0.abs()) {
        return invalid("need x0 != 0, at least two points and a window containing x0");
    }
    // spacing x0 / k keeps both 0 and x0 on the lattice
    let k = (T::from_count(points) * x0.abs() / (T::lit(2.0) * half_width)).ceil().max(T::one());
    let step = x0.abs() / k;
    let count = (half_width / step).floor().to_i64().unwrap_or(0);
    for &t in times {
        for i in -count..=count {
            for j in -count..=count {
                let x = step * T::from_f64(i as f64).unwrap_or(T::zero());
                let y = step * T::from_f64(j as f64).unwrap_or(T::zero());
                let a = v.log_value((x * x + y * y).sqrt(), t);
                let b = v_shifted.log_value(((x - x0) * (x - x0) + y * y).sqrt(), t);
                let lo = a.min(b);
                if !lo.is_finite() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Bernoulli comparison `F' = -a_lin F + b F^p` from `F0`: the blow-up time,
/// or `None` when `F0` does not exceed the stationary level
/// `(a_lin / b)^{1/(p-1)}`.
///
/// With `G = F^{1-p}`: `G' = (p-1)(a_lin G - b)`, which reaches zero at
/// `T* = ln[(b/a_lin) / (b/a_lin - G0)] / ((p-1) a_lin)`.
pub fn bernoulli_blowup_time<T: Real>(a_lin: T, b: T, p: T, f0: T) -> Result<Option<T>> {
    if !(a_lin >= T::zero()) || !(b > T::zero()) || !(p > T::one()) || !(f0 > T::zero()) {
        return invalid("bernoulli_blowup_time needs a_lin >= 0, b > 0, p > 1, F0 > 0");
    }
    let pm1 = p - T::one();
    let level = (a_lin / b).powf(T::one() / pm1);
    if f0 <= level * (T::one() + T::lit(8.0) * T::epsilon()) {
        return Ok(None);
    }
    let g0 = f0.powf(-pm1);
    let x = a_lin * g0 / b;
    let t = if x == T::zero() {
        g0 / (pm1 * b)
    } else {
        -(-x).ln_1p() / (pm1 * a_lin)
    };
    Ok(Some(t))
}

/// Moment functional on the annulus of scale `n_ann`:
/// `F' >= -(c_eig / n²) F + c1 n^M F^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentModel<T> {
    pub n_ann: T,
    #[serde(rename = "M")]
    pub m_eff: T,
    pub p: T,
    pub c_eig: T,
    pub c1: T,
    #[serde(rename = "F0")]
    pub f0: T,
}

impl<T: Real> MomentModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_ann > T::zero()) || !(self.c_eig > T::zero()) || !(self.c1 > T::zero()) {
            return invalid("moment model rates and scale must be positive");
        }
        if !(self.p > T::one()) || !(self.f0 >= T::zero()) || !self.m_eff.is_finite() {
            return invalid("moment model needs p > 1, F0 >= 0 and finite M");
        }
        Ok(())
    }

    /// `(a_lin, b) = (c_eig / n², c1 n^M)`.
    pub fn rates(&self) -> (T, T) {
        (self.c_eig / (self.n_ann * self.n_ann), self.c1 * self.n_ann.powf(self.m_eff))
    }

    pub fn blowup_time(&self) -> Result<Option<T>> {
        self.validate()?;
        if self.f0 == T::zero() {
            return Ok(None);
        }
        let (a, b) = self.rates();
        bernoulli_blowup_time(a, b, self.p, self.f0)
    }
}

/// `(c_eig / c1)^{1/(p-1)} n^{-(M+2)/(p-1)}`; checked against
/// `(a_lin / b)^{1/(p-1)}` from [`MomentModel::rates`].
pub fn moment_threshold<T: Real>(model: &MomentModel<T>) -> Result<T> {
    model.validate()?;
    let pm1 = model.p - T::one();
    let threshold = (model.c_eig / model.c1).powf(T::one() / pm1)
        * model.n_ann.powf(-(model.m_eff + T::lit(2.0)) / pm1);
    let (a, b) = model.rates();
    let direct = (a / b).powf(T::one() / pm1);
    let tol = T::lit(64.0) * T::epsilon() * (T::one() + (T::one() / pm1).abs() * (T::one() + model.n_ann.ln().abs()));
    if crate::scalar::rel_diff(threshold, direct) > tol {
        return Err(LabError::Domain(format!(
            "moment threshold identity failed: {threshold} vs {direct}"
        )));
    }
    Ok(threshold)
}

/// Smallest annulus scale `n` beyond which the a-priori lower bound
/// `lower · n^{-N} ln n` stays above the moment threshold of `template`
/// (whose `n_ann` is ignored). `None` when the bound falls behind for large
/// `n`, which happens exactly when `(M+2)/(p-1) < N`.
pub fn moment_crossover<T: Real>(template: &MomentModel<T>, lower: T, dimension: T) -> Result<Option<T>> {
    template.validate()?;
    if !(lower > T::zero()) || !(dimension > T::zero()) {
        return invalid("moment_crossover needs positive lower constant and dimension");
    }
    let pm1 = template.p - T::one();
    let s = (template.m_eff + T::lit(2.0)) / pm1;
    let k = (template.c_eig / template.c1).ln() / pm1;
    // g(L) = ln(bound) - ln(threshold) at n = e^L
    let g = |l: T| lower.ln() - k + (s - dimension) * l + l.ln();
    let excess = s - dimension;
    if excess < -T::lit(64.0) * T::epsilon() * (s.abs() + dimension) {
        return Ok(None);
    }
    // g is increasing on L > 0 here
    let mut hi = T::one();
    while g(hi) <= T::zero() {
        hi = hi * T::lit(2.0);
        if hi > T::lit(1e300) {
            return Ok(None);
        }
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi.exp()))
}

/// JSON-ready summary of a supersolution certificate attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport<T> {
    pub omega: T,
    pub n: T,
    pub m: T,
    pub p: T,
    pub p_star: T,
    pub params: Option<SupersolutionParams<T>>,
    pub residual: Option<ResidualReport<T>>,
    pub passed: bool,
    pub error: Option<String>,
}

/// Select parameters and check the residual; infeasibility is reported, not
/// returned as an error.
pub fn certify<T: Real>(omega: T, n: T, reac: &ReactionSpec<T>, p: T, grid: &ResidualGrid<T>) -> Result<CertificateReport<T>> {
    let p_star = critical_exponent(omega, n, reac.m)?;
    let mut report = CertificateReport {
        omega,
        n,
        m: reac.m,
        p,
        p_star,
        params: None,
        residual: None,
        passed: false,
        error: None,
    };
    match supersolution_params(omega, n, reac, p, grid) {
        Ok(params) => {
            let residual = supersolution_residual(&params, omega, n, reac.m, p, grid)?;
            report.passed = residual.passed;
            report.params = Some(params);
            report.residual = Some(residual);
        }
        Err(LabError::Infeasible(msg)) => report.error = Some(msg),
        Err(e) => return Err(e),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coarse() -> ResidualGrid<f64> {
        ResidualGrid::log_spaced(1e-3, 100.0, 60, 1e4, 40).unwrap()
    }

    #[test]
    fn positive_omega_example() {
        let grid = ResidualGrid::standard();
        let params = supersolution_params(3.0, 3.0, &ReactionSpec::power(0.0), 2.0, &grid).unwrap();
        let alpha = (-1.0 + 13f64.sqrt()) / 2.0;
        assert!((params.alpha - alpha).abs() < 1e-15);
        assert!((params.alpha - 1.302776).abs() < 1e-6);
        assert!((params.gamma_lower - (alpha / 2.0 + 1.0)).abs() < 1e-14);
        assert!((params.gamma_upper - (alpha + 1.5)).abs() < 1e-14);
        assert!((params.gamma - (0.75 * alpha + 1.25)).abs() < 1e-14);
        assert!((params.gamma - 2.2271).abs() < 1e-4, "{}", params.gamma);
        let rep = supersolution_residual(&params, 3.0, 3.0, 0.0, 2.0, &grid).unwrap();
        assert!(rep.passed && rep.max_residual <= 0.0, "{rep:?}");
        assert_eq!(rep.gaussian_term, 0.0);
        assert!(rep.hardy_term < 1e-8, "{}", rep.hardy_term);
    }

    #[test]
    fn critical_point_is_infeasible() {
        let err = supersolution_params(0.0, 3.0, &ReactionSpec::power(0.0), 5.0 / 3.0, &coarse()).unwrap_err();
        assert!(matches!(err, LabError::Infeasible(_)));
    }

    #[test]
    fn c1_values() {
        assert_eq!(gaussian_power_sup(0.0, 2.0, None).unwrap(), 1.0);
        // e > 0: maximum at z = 4e/(p-1)
        let (e, p) = (0.7_f64, 2.5);
        let z = 4.0 * e / (p - 1.0);
        let exact = z.powf(e) * (-(p - 1.0) * z / 4.0).exp();
        assert!((gaussian_power_sup(e, p, None).unwrap() / exact - 1.0).abs() < 1e-12);
        // e < 0: unbounded without a range, left endpoint with one
        assert!(gaussian_power_sup(-0.3, 2.0, None).is_err());
        let v = gaussian_power_sup(-0.3, 2.0, Some((1e-4, 10.0))).unwrap();
        assert!((v / (1e-4f64.powf(-0.3) * (-0.25e-4f64).exp()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reaction_constant() {
        let c: f64 = reaction_bound_constant(&ReactionSpec::new(-1.0, 1.0, 2.0).unwrap()).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
        let c = reaction_bound_constant(&ReactionSpec::new(1.5, 1.0, 1.0).unwrap()).unwrap();
        assert!((c - 2f64.powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn negative_omega_and_positive_m_certify() {
        let grid = coarse();
        for &(omega, n, m, p) in &[(-0.2, 3.0, 0.0, 2.0), (-0.25, 3.0, -0.5, 1.9), (0.5, 3.0, 1.0, 2.6), (1.0, 4.0, -3.0, 1.2)] {
            let rep = certify(omega, n, &ReactionSpec::power(m), p, &grid).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn grid_rejects_origin() {
        let grid = ResidualGrid { r: vec![0.0, 1.0], t: vec![0.0] };
        let params = supersolution_params(1.0, 3.0, &ReactionSpec::power(0.0), 3.0, &coarse()).unwrap();
        assert!(supersolution_residual(&params, 1.0, 3.0, 0.0, 3.0, &grid).is_err());
    }

    #[test]
    fn shifted_minimum_finite() {
        let grid = coarse();
        let v = supersolution_params(-0.2, 3.0, &ReactionSpec::power(0.0), 2.0, &grid).unwrap();
        let w = supersolution_params(-0.21, 3.0, &ReactionSpec::power(0.0), 2.0, &grid).unwrap();
        assert!(v.alpha < 0.0);
        assert!(!v.log_value(0.0, 1.0).is_finite());
        assert!(shifted_min_is_finite(&v, &w, 0.5, 3.0, 41, &[0.0, 1.0, 100.0]).unwrap());
        assert!(shifted_min_is_finite(&v, &w, 0.0, 3.0, 41, &[0.0]).is_err());
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(bernoulli_blowup_time(1.0, 1.0, 2.0, 1.0).unwrap(), None);
        let level = 0.5f64.powf(1.0 / 0.7);
        assert_eq!(bernoulli_blowup_time(0.5, 1.0, 1.7, level).unwrap(), None);
        assert!((bernoulli_blowup_time(0.0_f64, 1.0, 2.0, 1.0).unwrap().unwrap() - 1.0).abs() < 1e-15);
        let t = bernoulli_blowup_time(1.0, 1.0, 2.0, 2.0).unwrap().unwrap();
        assert!((t - 2f64.ln()).abs() < 1e-15);
        // continuity in a_lin at 0
        let t0 = bernoulli_blowup_time(0.0_f64, 2.0, 3.0, 1.5).unwrap().unwrap();
        let t1 = bernoulli_blowup_time(1e-12, 2.0, 3.0, 1.5).unwrap().unwrap();
        assert!((t0 - t1).abs() < 1e-10);
    }

    #[test]
    fn moment_threshold_examples() {
        for &(n, p) in &[(2.0_f64, 2.0), (17.0, 1.3), (0.5, 4.0)] {
            let model = MomentModel { n_ann: n, m_eff: -2.0, p, c_eig: 3.0, c1: 3.0, f0: 1.0 };
            assert!((moment_threshold(&model).unwrap() - 1.0).abs() < 1e-14);
        }
        let model = MomentModel { n_ann: 10.0_f64, m_eff: 0.0, p: 2.0, c_eig: 2.0, c1: 1.0, f0: 1.0 };
        let thr = moment_threshold(&model).unwrap();
        let (a, b) = model.rates();
        assert!((a - 0.02).abs() < 1e-16 && (b - 1.0).abs() < 1e-16);
        assert!((thr - 0.02).abs() < 1e-16);
        assert!(model.blowup_time().unwrap().is_some());
        let below = MomentModel { f0: 0.01, ..model };
        assert!(below.blowup_time().unwrap().is_none());
    }

    #[test]
    fn crossover_scaling() {
        // N = 3, M = 0, p = 5/3: exponents match, ln n decides
        let template = MomentModel { n_ann: 1.0_f64, m_eff: 0.0, p: 5.0 / 3.0, c_eig: 2.0, c1: 1.0, f0: 0.0 };
        let lower = 0.3;
        let n = moment_crossover(&template, lower, 3.0).unwrap().unwrap();
        // bound / threshold = (lower / 2^{1.5}) ln n
        assert!((n.ln() - 2f64.powf(1.5) / lower).abs() < 1e-9 * n.ln());
        // below the critical exponent the crossover is earlier
        let sub = MomentModel { p: 1.5, ..template };
        assert!(moment_crossover(&sub, lower, 3.0).unwrap().unwrap() < n);
        // above it the bound falls behind
        let sup = MomentModel { p: 1.8, ..template };
        assert!(moment_crossover(&sup, lower, 3.0).unwrap().is_none());
    }

    #[test]
    fn certificate_report_serializes() {
        let rep = certify(0.0, 3.0, &ReactionSpec::power(0.0), 1.5, &coarse()).unwrap();
        assert!(!rep.passed && rep.params.is_none() && rep.error.is_some());
        let rep = certify(0.0, 3.0, &ReactionSpec::power(0.0), 2.0, &coarse()).unwrap();
        assert!(rep.passed);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn feasible_iff_supercritical(
            n in prop::sample::select(vec![2.0f64, 3.0, 4.0, 5.0]),
            w in 0.0f64..1.0,
            m in -3.0f64..2.0,
            shift in prop::sample::select(vec![-0.3f64, -0.05, -1e-3, 1e-3, 0.05, 0.3]),
        ) {
            let hardy = hardy_threshold(n);
            let omega = hardy + w * (2.0 - hardy);
            let p_star = critical_exponent(omega, n, m).unwrap();
            let p = p_star + shift;
            prop_assume!(p > 1.0);
            let grid = ResidualGrid::log_spaced(1e-3, 100.0, 30, 1e4, 20).unwrap();
            let res = supersolution_params(omega, n, &ReactionSpec::power(m), p, &grid);
            prop_assert_eq!(res.is_ok(), p > p_star);
            if let Ok(params) = res {
                let rep = supersolution_residual(&params, omega, n, m, p, &grid).unwrap();
                prop_assert!(rep.passed, "{:?}", rep);
            } else {
                prop_assert!(matches!(res, Err(LabError::Infeasible(_))));
            }
        }
    }
}
