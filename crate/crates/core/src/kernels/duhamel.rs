//! Duhamel lower-bound integrals and lower-bound constant fitting.
//!
//! The nonlinear feedback term is bounded below by
//!
//! ```text
//! I(t, r) = ∫_1^{t/2} ds ∫_{r0+1}^∞ dρ  q_N(K1(t-s), r, ρ) ρ^M q_N(K1 s, ρ, r0+2)^p
//! ```
//!
//! which behaves like `t^{1 + M/2 - Np/2}` below the critical power
//! `p = 1 + (2+M)/N` and like `t^{-N/2} log t` at it. After the substitution
//! `u = s/t` the time integral becomes [`critical_u_integral`].

use serde::{Deserialize, Serialize};

use super::{log_correction, log_qn_unchecked, KernelParams};
use crate::error::{domain, invalid, LabError, Result};
use crate::quadrature::{gauss_legendre, integrate, integrate_with_breaks, QuadTol};
use crate::scalar::Real;

/// Constants of the Duhamel lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelParams<T> {
    /// Time dilation inside both kernels.
    pub k1: T,
    /// Constant in `r(s, t) = s / (s + p K2 (t - s))`.
    pub k2: T,
    /// `β = N0 - N` for fractional `N`, in `[0, 1)`.
    pub beta: T,
    /// Reaction growth exponent `M`.
    pub big_m: T,
    pub p: T,
}

impl<T: Real> DuhamelParams<T> {
    /// `K1 = K2 = 1`, `β` from the fractional part of `dimension`.
    pub fn new(dimension: T, big_m: T, p: T) -> Self {
        let beta = dimension.ceil() - dimension;
        Self {
            k1: T::one(),
            k2: T::one(),
            beta,
            big_m,
            p,
        }
    }

    /// `p = 1 + (2 + M)/N`.
    pub fn critical_p(dimension: T, big_m: T) -> T {
        T::one() + (T::lit(2.0) + big_m) / dimension
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > T::zero() && self.k2 > T::zero()) {
            return invalid("K1 and K2 must be positive");
        }
        if !(self.beta >= T::zero() && self.beta < T::one()) {
            return invalid(format!("beta = {} must lie in [0, 1)", self.beta));
        }
        if !(self.p > T::one()) {
            return invalid(format!("p = {} must exceed 1", self.p));
        }
        Ok(())
    }
}

/// Numerically evaluate the Duhamel lower-bound integral `I(t, r)`.
///
/// The time integral uses composite Gauss–Legendre panels in `ln s`, doubled
/// until two successive estimates agree to `kp.quad_tol`. Each spatial
/// integral is clipped to where its log-integrand is within
/// `kp.tail_cutoff` of its maximum. In two dimensions both kernels carry the
/// log correction of the planar exterior bound.
pub fn duhamel_lower_integral<T: Real>(kp: &KernelParams<T>, dp: &DuhamelParams<T>, t: T, r: T) -> Result<T> {
    duhamel_partial_integral(kp, dp, t, r, t / T::lit(2.0))
}

/// The same integrand as [`duhamel_lower_integral`] with the time window
/// `[1, s_max]`, `1 < s_max < t`. Non-decreasing in `s_max`.
pub fn duhamel_partial_integral<T: Real>(
    kp: &KernelParams<T>,
    dp: &DuhamelParams<T>,
    t: T,
    r: T,
    s_max: T,
) -> Result<T> {
    kp.validate()?;
    dp.validate()?;
    if !(t > T::lit(2.0)) {
        return domain(format!("Duhamel integral needs t > 2, got {t}"));
    }
    if !(r > kp.r0 + T::one()) {
        return domain(format!("r = {r} must exceed r0 + 1"));
    }
    if !(s_max > T::one() && s_max < t) {
        return domain(format!("time window end {s_max} must lie in (1, t)"));
    }
    let upper = s_max.ln();
    let per_panel = 16usize;
    let (nodes, weights) = gauss_legendre::<T>(per_panel);
    let mut panels = (kp.s_nodes / per_panel).max(1);
    let mut previous: Option<T> = None;
    for _ in 0..7 {
        let mut total = T::zero();
        let width = upper / T::from_count(panels);
        let half = width / T::lit(2.0);
        for k in 0..panels {
            let mid = width * (T::from_count(k) + T::lit(0.5));
            for (x, w) in nodes.iter().zip(&weights) {
                let u = mid + half * *x;
                let s = u.exp();
                total = total + *w * half * s * spatial_integral(kp, dp, t, s, r)?;
            }
        }
        if let Some(prev) = previous {
            if (total - prev).abs() <= kp.quad_tol * total.abs() {
                return Ok(total);
            }
        }
        previous = Some(total);
        panels *= 2;
    }
    let estimate = previous.unwrap_or(T::nan());
    Err(LabError::QuadratureNonConvergence {
        estimate: estimate.to_f64_lossy(),
        error: f64::NAN,
        tolerance: kp.quad_tol.to_f64_lossy(),
    })
}

fn spatial_integral<T: Real>(kp: &KernelParams<T>, dp: &DuhamelParams<T>, t: T, s: T, r: T) -> Result<T> {
    let dim = kp.dimension;
    let lo = kp.r0 + T::one();
    let source = kp.r0 + T::lit(2.0);
    let tau_out = dp.k1 * (t - s);
    let tau_in = dp.k1 * s;
    let planar = kp.is_two_dimensional();
    let log_f = |rho: T| {
        let mut v = log_qn_unchecked(dim, tau_out, r, rho)
            + dp.big_m * rho.ln()
            + dp.p * log_qn_unchecked(dim, tau_in, rho, source);
        if planar {
            v = v + log_correction(t - s, r, rho).ln() + dp.p * log_correction(s, rho, source).ln();
        }
        v
    };

    // Scan on offsets that are geometric near the inner edge, where the
    // source factor is narrow for small s.
    let span = r + source + T::lit(40.0) * (dp.k1 * t).sqrt() + T::lit(10.0);
    let first = T::lit(1e-4) * s.sqrt().min(T::one());
    let count = 400usize;
    let ratio = (span / first).ln() / T::from_count(count - 1);
    let mut grid = Vec::with_capacity(count + 2);
    grid.push(lo);
    for j in 0..count {
        grid.push(lo + first * (ratio * T::from_count(j)).exp());
    }
    if r > lo && r < lo + span {
        grid.push(r);
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    }
    let values: Vec<T> = grid.iter().map(|&rho| log_f(rho)).collect();
    let (imax, vmax) = values
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if !vmax.is_finite() {
        return Ok(T::zero());
    }
    let floor = vmax - kp.tail_cutoff;
    let first_in = values.iter().position(|&v| v >= floor).unwrap_or(imax);
    let last_in = values.iter().rposition(|&v| v >= floor).unwrap_or(imax);
    let a = grid[first_in.saturating_sub(1)];
    let b = grid[(last_in + 1).min(grid.len() - 1)];
    let mut breaks = vec![a];
    for i in [imax.saturating_sub(1), imax, imax + 1] {
        if i < grid.len() && grid[i] > *breaks.last().expect("non-empty") && grid[i] < b {
            breaks.push(grid[i]);
        }
    }
    breaks.push(b);
    let tol = QuadTol {
        abs: T::zero(),
        rel: kp.quad_tol * T::lit(0.01),
        max_segments: 4000,
    };
    let q = integrate_with_breaks(|rho| (log_f(rho) - vmax).exp(), &breaks, tol)?;
    Ok(q.value * vmax.exp())
}

/// `J(t) = ∫_{1/t}^{1/2} u^{N/2+M/2-Np/2} (u + pK2(1-u))^{-N/2-M/2} (1-u)^{M/2-β/2} du`.
pub fn critical_u_integral<T: Real>(dp: &DuhamelParams<T>, dimension: T, t: T) -> Result<T> {
    dp.validate()?;
    if !(t > T::lit(2.0)) {
        return domain(format!("critical integral needs t > 2, got {t}"));
    }
    let half = T::lit(0.5);
    let power = half * (dimension + dp.big_m - dimension * dp.p);
    let mixed = -half * (dimension + dp.big_m);
    let tail = half * (dp.big_m - dp.beta);
    let pk2 = dp.p * dp.k2;
    // integrate in v = ln u
    let f = |v: T| {
        let u = v.exp();
        (power * v).exp() * (u + pk2 * (T::one() - u)).powf(mixed) * (T::one() - u).powf(tail) * u
    };
    let q = integrate(f, -t.ln(), half.ln(), QuadTol::rel(T::lit(1e-12)))?;
    Ok(q.value)
}

/// Fitted constants of a lower bound `w(r, t) ≥ C profile(t) exp(-K r²/t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundFit<T> {
    pub c: T,
    pub k: T,
}

impl<T: Real> LowerBoundFit<T> {
    /// Fit from samples `(t, r, value)`. For each candidate `K` the largest
    /// admissible `C` is the minimum of `value / (profile(t) e^{-K r²/t})`;
    /// the candidate whose ratios spread least (best shape match) is kept.
    pub fn fit<P: Fn(T) -> T>(samples: &[(T, T, T)], profile: P, k_candidates: &[T]) -> Result<Self> {
        if samples.is_empty() || k_candidates.is_empty() {
            return invalid("lower-bound fit needs samples and K candidates");
        }
        if let Some(bad) = samples.iter().find(|s| !(s.2 > T::zero())) {
            return domain(format!("non-positive sample value {} at t = {}, r = {}", bad.2, bad.0, bad.1));
        }
        let mut best: Option<(T, Self)> = None;
        for &k in k_candidates {
            if !(k > T::zero()) {
                return invalid("K candidates must be positive");
            }
            let logs: Vec<T> = samples
                .iter()
                .map(|&(t, r, v)| v.ln() - profile(t).ln() + k * r * r / t)
                .collect();
            let lo = logs.iter().copied().fold(T::infinity(), T::min);
            let hi = logs.iter().copied().fold(T::neg_infinity(), T::max);
            let spread = hi - lo;
            let candidate = Self { c: lo.exp(), k };
            if best.as_ref().is_none_or(|(s, _)| spread < *s) {
                best = Some((spread, candidate));
            }
        }
        let (_, fit) = best.expect("at least one candidate");
        if !(fit.c > T::zero()) {
            return domain("fitted constant is not positive");
        }
        Ok(fit)
    }

    pub fn bound(&self, profile_at_t: T, t: T, r: T) -> T {
        self.c * profile_at_t * (-self.k * r * r / t).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp3(p: f64) -> DuhamelParams<f64> {
        DuhamelParams::new(3.0, 0.0, p)
    }

    #[test]
    fn exponent_identity_at_critical_power() {
        for &(n, m) in &[(3.0, 0.0), (2.5, 1.0), (5.6, -1.5)] {
            let p = DuhamelParams::critical_p(n, m);
            let e: f64 = n / 2.0 + m / 2.0 - n * p / 2.0;
            assert!((e + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn beta_from_fractional_dimension() {
        assert_eq!(DuhamelParams::new(3.0_f64, 0.0, 2.0).beta, 0.0);
        assert!((DuhamelParams::new(2.6_f64, 0.0, 2.0).beta - 0.4).abs() < 1e-15);
    }

    #[test]
    fn critical_integral_grows_like_log() {
        let dp = dp3(DuhamelParams::critical_p(3.0, 0.0));
        let a = critical_u_integral(&dp, 3.0, 1e3).unwrap() / 1e3f64.ln();
        let b = critical_u_integral(&dp, 3.0, 1e6).unwrap() / 1e6f64.ln();
        assert!(((b - a) / a).abs() < 0.05, "a={a} b={b}");
        // the log slope is the integrand's limit at u = 0: (pK2)^{-(N+M)/2}
        let c = critical_u_integral(&dp, 3.0, 1e12).unwrap() - critical_u_integral(&dp, 3.0, 1e9).unwrap();
        let slope = (5.0f64 / 3.0).powf(-1.5) * 1e3f64.ln();
        assert!((c / slope - 1.0).abs() < 1e-6);
    }

    #[test]
    fn subcritical_integral_is_bounded() {
        // J increases to a finite limit; increments over successive decades shrink geometrically.
        let dp = dp3(1.5);
        let j: Vec<f64> = [1e3, 1e6, 1e9, 1e12].iter().map(|&t| critical_u_integral(&dp, 3.0, t).unwrap()).collect();
        let d1 = j[1] - j[0];
        let d2 = j[2] - j[1];
        let d3 = j[3] - j[2];
        assert!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0);
        // increments scale like t^{-1/4}: factor 1000^{-1/4} ≈ 0.178 per step
        assert!((d2 / d1 - 1000f64.powf(-0.25)).abs() < 0.01);
        assert!((d3 / d2 - 1000f64.powf(-0.25)).abs() < 0.01);
        // so the limit is bounded by j[3] + d3 * 0.178 / (1 - 0.178)
        let limit_bound = j[3] + d3 * 0.3;
        assert!(j.iter().all(|&v| v <= limit_bound));
    }

    #[test]
    fn duhamel_rejects_bad_domain() {
        let kp = KernelParams::new(3.0);
        assert!(duhamel_lower_integral(&kp, &dp3(1.5), 1.5, 3.0).is_err());
        assert!(duhamel_lower_integral(&kp, &dp3(1.5), 10.0, 1.5).is_err());
    }

    #[test]
    fn duhamel_positive_and_decaying() {
        let kp = KernelParams::new(3.0);
        let dp = dp3(1.5);
        let v: Vec<f64> = [8.0, 32.0, 128.0]
            .iter()
            .map(|&t| duhamel_lower_integral(&kp, &dp, t, 3.0).unwrap())
            .collect();
        assert!(v.iter().all(|&x| x > 0.0));
        assert!(v[1] < v[0] && v[2] < v[1]);
    }

    #[test]
    fn partial_window_monotone() {
        let kp = KernelParams::new(3.0);
        let dp = dp3(1.5);
        let mut prev = 0.0;
        for &s_max in &[1.5, 3.0, 10.0, 30.0, 50.0] {
            let v = duhamel_partial_integral(&kp, &dp, 100.0, 4.0, s_max).unwrap();
            assert!(v > prev, "s_max={s_max}");
            prev = v;
        }
        assert!(duhamel_partial_integral(&kp, &dp, 100.0, 4.0, 100.0).is_err());
    }

    fn normalized(p: f64, times: &[f64]) -> Vec<f64> {
        // r = 2 r0 with r0 = 2 so that r > r0 + 1
        let kp = KernelParams::new(3.0).with_r0(2.0);
        let dp = dp3(p);
        times
            .iter()
            .map(|&t| duhamel_lower_integral(&kp, &dp, t, 4.0).unwrap() * t.powf(1.5 * p - 1.0))
            .collect()
    }

    #[test]
    fn subcritical_scaling() {
        let times = [1e2, 1e3, 1e4, 1e5];
        let v = normalized(1.5, &times);
        let samples: Vec<(f64, f64, f64)> =
            times[..3].iter().zip(&v).map(|(&t, &x)| (t, 4.0, x * t.powf(-1.25))).collect();
        let fit = LowerBoundFit::fit(&samples, |t: f64| t.powf(-1.25), &[0.25, 0.5, 1.0, 2.0]).unwrap();
        assert!(fit.c > 0.0);
        // the normalized values converge: decade increments shrink like 10^{-1/4}
        let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
        for w in d.windows(2) {
            assert!((w[1] / w[0] - 10f64.powf(-0.25)).abs() < 0.1, "increments {d:?}");
        }
        let limit = v[3] + d[2] * 0.6 / 0.4;
        for &(t, r, value) in &samples {
            assert!(value >= fit.bound(t.powf(-1.25), t, r) * (1.0 - 1e-12));
        }
        assert!(v.iter().all(|&x| x <= limit));
    }

    #[test]
    fn critical_log_growth() {
        let p = DuhamelParams::critical_p(3.0, 0.0);
        let v = normalized(p, &[1e3, 1e4, 1e5]);
        // t^{N/2} I(t) = A ln t + B: equal increments per decade, A > 0
        let d1 = v[1] - v[0];
        let d2 = v[2] - v[1];
        assert!(d1 > 0.0 && d2 > 0.0);
        assert!((d2 / d1 - 1.0).abs() < 0.03, "d1={d1} d2={d2}");
        let ratios: Vec<f64> = [1e3f64, 1e4, 1e5].iter().zip(&v).map(|(t, x)| x / (1.0 + t).ln()).collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2]);
        let a = d2 / 10f64.ln();
        assert!(ratios[2] < a);
    }

    #[test]
    fn fit_recovers_exact_shape() {
        let samples: Vec<(f64, f64, f64)> = [5.0_f64, 20.0, 80.0]
            .iter()
            .flat_map(|&t: &f64| [2.0, 5.0, 9.0].map(move |r| (t, r, 0.3 * t.powf(-1.5) * (-0.7 * r * r / t).exp())))
            .collect();
        let ks = [0.1, 0.3, 0.5, 0.7, 0.9];
        let fit = LowerBoundFit::fit(&samples, |t: f64| t.powf(-1.5), &ks).unwrap();
        assert_eq!(fit.k, 0.7);
        assert!((fit.c - 0.3).abs() < 1e-12);
        assert!(LowerBoundFit::fit(&[(1.0, 1.0, 0.0)], |t: f64| t, &ks).is_err());
    }
}
