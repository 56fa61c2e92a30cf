//! Heat kernels for radial operators of (possibly fractional) dimension.
//!
//! [`kernel_qn`] is the transition density of the Bessel process of
//! dimension `N` (generator `d²/dr² + (N-1)/r d/dr`), normalized as a density
//! in the end point `ρ`:
//!
//! ```text
//! q_N(t, r, ρ) = exp(-(r² + ρ²)/4t) ρ^{N-1} / (2t (rρ)^{N/2-1}) I_{N/2-1}(rρ/2t)
//! ```
//!
//! Everything is evaluated in the log domain; the exponentials are combined
//! as `-(r - ρ)²/4t` so that no intermediate overflows.

pub mod bessel;
pub mod duhamel;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::scalar::Real;

pub use bessel::{bessel_i, ln_gamma, log_bessel_i_scaled};
pub use duhamel::{critical_u_integral, duhamel_lower_integral, duhamel_partial_integral, DuhamelParams, LowerBoundFit};

/// Dimension below which (`N - 2 < this`) the two-dimensional, log-corrected
/// comparison is used.
const TWO_DIM_TOL: f64 = 1e-12;

/// Kernel configuration: dimension, exterior radius, comparison constants
/// and quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams<T> {
    /// Effective dimension `N ≥ 2`.
    pub dimension: T,
    /// Exterior radius `r0 ≥ 0`.
    pub r0: T,
    /// Comparison constant `c ∈ (0, 1]` in `q̄(t) ≥ c q(K0 t)`.
    pub comparison_c: T,
    /// Time dilation `K0 ≥ 1` in `q̄(t) ≥ c q(K0 t)`.
    pub comparison_k0: T,
    /// Relative tolerance for the quadratures.
    pub quad_tol: T,
    /// Log-magnitude below the peak at which integrand tails are dropped.
    pub tail_cutoff: T,
    /// Initial number of time nodes in the Duhamel integral.
    pub s_nodes: usize,
}

impl<T: Real> KernelParams<T> {
    pub fn new(dimension: T) -> Self {
        Self {
            dimension,
            r0: T::one(),
            comparison_c: T::one(),
            comparison_k0: T::one(),
            quad_tol: T::lit(1e-7),
            tail_cutoff: T::lit(700.0),
            s_nodes: 128,
        }
    }

    pub fn with_r0(mut self, r0: T) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_comparison(mut self, c: T, k0: T) -> Self {
        self.comparison_c = c;
        self.comparison_k0 = k0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dimension >= T::lit(2.0)) {
            return invalid(format!("kernel dimension N = {} must be >= 2", self.dimension));
        }
        if !(self.r0 >= T::zero()) {
            return invalid("exterior radius must be non-negative");
        }
        if !(self.comparison_c > T::zero() && self.comparison_c <= T::one()) {
            return invalid(format!("comparison c = {} must lie in (0, 1]", self.comparison_c));
        }
        if !(self.comparison_k0 >= T::one()) {
            return invalid(format!("comparison K0 = {} must be >= 1", self.comparison_k0));
        }
        if !(self.quad_tol > T::zero()) || !(self.tail_cutoff > T::zero()) || self.s_nodes < 2 {
            return invalid("quadrature controls must be positive");
        }
        Ok(())
    }

    /// `q_N(t, r, ρ)` in this dimension.
    pub fn qn(&self, t: T, r: T, rho: T) -> Result<T> {
        kernel_qn(self.dimension, t, r, rho)
    }

    fn is_two_dimensional(&self) -> bool {
        self.dimension - T::lit(2.0) < T::lit(TWO_DIM_TOL)
    }
}

/// `ln q_N(t, r, ρ)`.
pub fn log_kernel_qn<T: Real>(dimension: T, t: T, r: T, rho: T) -> Result<T> {
    if !(t > T::zero() && r > T::zero() && rho > T::zero()) {
        return domain(format!("kernel needs t, r, rho > 0 (t={t}, r={r}, rho={rho})"));
    }
    Ok(log_qn_unchecked(dimension, t, r, rho))
}

pub(crate) fn log_qn_unchecked<T: Real>(dimension: T, t: T, r: T, rho: T) -> T {
    let two = T::lit(2.0);
    let nu = dimension / two - T::one();
    let z = r * rho / (two * t);
    let d = r - rho;
    let scaled = bessel::log_bessel_i_scaled(nu, z).unwrap_or(T::nan());
    -d * d / (T::lit(4.0) * t) + (dimension - T::one()) * rho.ln() - (two * t).ln() - nu * (r * rho).ln() + scaled
}

/// Bessel-process transition density `q_N(t, r, ρ)` (density in `ρ`).
pub fn kernel_qn<T: Real>(dimension: T, t: T, r: T, rho: T) -> Result<T> {
    Ok(log_kernel_qn(dimension, t, r, rho)?.exp())
}

/// Gaussian heat kernel `(4πt)^{-n/2} exp(-|y - x|²/4t)` with
/// `|y - x|² = |x|² + |y|² - 2|x||y| cos θ`.
pub fn gaussian_kernel<T: Real>(n: T, t: T, x_norm: T, y_norm: T, angle_cos: T) -> Result<T> {
    if !(t > T::zero()) {
        return domain("gaussian kernel needs t > 0");
    }
    if !(angle_cos.abs() <= T::one()) {
        return domain(format!("|cos θ| = {} exceeds 1", angle_cos.abs()));
    }
    let dist2 = (x_norm * x_norm + y_norm * y_norm - T::lit(2.0) * x_norm * y_norm * angle_cos).max(T::zero());
    let four_t = T::lit(4.0) * t;
    Ok((-dist2 / four_t).exp() * (T::PI() * four_t).powf(-n / T::lit(2.0)))
}

/// Two-dimensional log correction
/// `log(1+|x|) log(1+|y|) / [(log(1+√t) + log(1+|x|)) (log(1+√t) + log(1+|y|))]`.
pub fn log_correction<T: Real>(t: T, x_norm: T, y_norm: T) -> T {
    let lt = t.sqrt().ln_1p();
    let lx = x_norm.ln_1p();
    let ly = y_norm.ln_1p();
    lx * ly / ((lt + lx) * (lt + ly))
}

/// Lower bound for the exterior Dirichlet kernel `q̄_{(N, r0)}(t, r, ρ)`.
///
/// For `N > 2` this is `c q_N(K0 t, r, ρ)`. For `N = 2` the radial density
/// `q_2(K0 t, r, ρ)` (the circle integral of the planar Gaussian) is damped by
/// [`log_correction`].
pub fn dirichlet_lower_bound<T: Real>(params: &KernelParams<T>, t: T, r: T, rho: T) -> Result<T> {
    params.validate()?;
    let edge = params.r0 + T::one();
    if !(r > edge && rho > edge) {
        return domain(format!("points must lie beyond r0 + 1 = {edge} (r={r}, rho={rho})"));
    }
    let dilated = kernel_qn(params.dimension, params.comparison_k0 * t, r, rho)?;
    let factor = if params.is_two_dimensional() {
        log_correction(t, r, rho)
    } else {
        T::one()
    };
    Ok(params.comparison_c * factor * dilated)
}

/// Pointwise planar form of the two-dimensional bound:
/// `c L(t, |x|, |y|) p(K0 t, x, y)`.
pub fn dirichlet_lower_bound_planar<T: Real>(
    params: &KernelParams<T>,
    t: T,
    x_norm: T,
    y_norm: T,
    angle_cos: T,
) -> Result<T> {
    params.validate()?;
    let edge = params.r0 + T::one();
    if !(x_norm > edge && y_norm > edge) {
        return domain(format!("points must lie beyond r0 + 1 = {edge}"));
    }
    let p = gaussian_kernel(T::lit(2.0), params.comparison_k0 * t, x_norm, y_norm, angle_cos)?;
    Ok(params.comparison_c * log_correction(t, x_norm, y_norm) * p)
}

/// Largest `c` on the halving ladder `1, 1/2, 1/4, …` (down to `min_c`) with
///
/// ```text
/// exp(-|y-x|²/(C t)) exp(-p|y|²/(2 K0 s)) ≥ exp(-|x|²/(c t)) exp(-|y|²/(c s))
/// ```
///
/// at every sample `(t, s, |x|, |y|, cos θ)`. `None` if no rung works.
pub fn gaussian_product_constant<T: Real>(
    big_c: T,
    p: T,
    k0: T,
    samples: &[(T, T, T, T, T)],
    min_c: T,
) -> Option<T> {
    let holds = |c: T| {
        samples.iter().all(|&(t, s, x, y, cs)| {
            let d2 = (x * x + y * y - T::lit(2.0) * x * y * cs).max(T::zero());
            let lhs = -d2 / (big_c * t) - p * y * y / (T::lit(2.0) * k0 * s);
            let rhs = -x * x / (c * t) - y * y / (c * s);
            lhs >= rhs
        })
    };
    let mut c = T::one();
    while c >= min_c {
        if holds(c) {
            return Some(c);
        }
        c = c * T::lit(0.5);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_with_breaks, QuadTol};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// N = 3 density from the closed form of I_{1/2}.
    fn q3_closed(t: f64, r: f64, rho: f64) -> f64 {
        rho / (2.0 * r * (PI * t).sqrt())
            * ((-(rho - r).powi(2) / (4.0 * t)).exp() - (-(rho + r).powi(2) / (4.0 * t)).exp())
    }

    fn mass(dim: f64, t: f64, r: f64) -> f64 {
        let hi = r + 60.0 * t.sqrt() + 10.0;
        let pts = [0.0, (r - 5.0 * t.sqrt()).max(0.0) * 0.5, r, r + 5.0 * t.sqrt(), hi];
        let mut pts = pts.to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        integrate_with_breaks(|rho| if rho > 0.0 { kernel_qn(dim, t, r, rho).unwrap() } else { 0.0 }, &pts, QuadTol::rel(1e-12))
            .unwrap()
            .value
    }

    #[test]
    fn n3_matches_closed_form() {
        for &(t, r, rho) in &[(0.5, 0.1, 0.3), (5.0, 1.0, 4.0), (0.01, 10.0, 10.05), (2.0, 7.0, 0.5), (50.0, 0.2, 30.0)] {
            assert_relative_eq!(kernel_qn(3.0, t, r, rho).unwrap(), q3_closed(t, r, rho), max_relative = 1e-10);
        }
    }

    #[test]
    fn detailed_balance() {
        for &dim in &[2.0, 2.5, 3.0, 5.6] {
            for &(t, r, rho) in &[(0.3, 0.5_f64, 2.0_f64), (4.0, 3.0, 1.0), (1e3, 20.0, 70.0)] {
                let a = r.powf(dim - 1.0) * kernel_qn(dim, t, r, rho).unwrap();
                let b = rho.powf(dim - 1.0) * kernel_qn(dim, t, rho, r).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn normalization() {
        for &dim in &[2.0, 2.5, 3.0, 5.6] {
            for &t in &[0.5, 5.0] {
                for &r in &[0.1, 1.0, 10.0] {
                    let m = mass(dim, t, r);
                    assert!((m - 1.0).abs() < 1e-6, "N={dim} t={t} r={r} mass={m}");
                }
            }
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        for &dim in &[2.0, 2.5, 3.0] {
            for &(s, t, r, rho) in &[(0.5_f64, 0.7_f64, 1.0_f64, 2.0_f64), (1.0, 3.0, 0.3, 4.0), (2.0, 2.0, 5.0, 6.5)] {
                let hi = r.max(rho) + 60.0 * (s + t).sqrt();
                let v = integrate_with_breaks(
                    |xi: f64| {
                        if xi <= 0.0 {
                            return 0.0;
                        }
                        kernel_qn(dim, s, r, xi).unwrap() * kernel_qn(dim, t, xi, rho).unwrap()
                    },
                    &[0.0, r.min(rho), r.max(rho), hi],
                    QuadTol::rel(1e-11),
                )
                .unwrap()
                .value;
                let direct = kernel_qn(dim, s + t, r, rho).unwrap();
                assert_relative_eq!(v, direct, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn gaussian_diagonal_and_total_mass() {
        let t = 0.37;
        assert_relative_eq!(gaussian_kernel(2.0, t, 1.5, 1.5, 1.0).unwrap(), 1.0 / (4.0 * PI * t));
        // planar: ∫_0^∞ ρ dρ ∫_0^{2π} dθ p
        let x = 0.8;
        let tol = QuadTol::rel(1e-12);
        let m2 = integrate(
            |rho: f64| {
                rho * integrate(|th: f64| gaussian_kernel(2.0, t, x, rho, th.cos()).unwrap(), 0.0, 2.0 * PI, tol)
                    .unwrap()
                    .value
            },
            0.0,
            15.0,
            tol,
        )
        .unwrap()
        .value;
        assert!((m2 - 1.0).abs() < 1e-8, "{m2}");
        // spatial: ∫_0^∞ ρ² dρ ∫_{-1}^{1} 2π dμ p
        let m3 = integrate(
            |rho: f64| {
                2.0 * PI
                    * rho
                    * rho
                    * integrate(|mu: f64| gaussian_kernel(3.0, t, x, rho, mu).unwrap(), -1.0, 1.0, tol)
                        .unwrap()
                        .value
            },
            0.0,
            15.0,
            tol,
        )
        .unwrap()
        .value;
        assert!((m3 - 1.0).abs() < 1e-8, "{m3}");
    }

    #[test]
    fn sphere_integral_of_gaussian_is_q3() {
        for &(t, r, rho) in &[(0.5, 1.0, 1.3), (3.0, 0.4, 2.2), (10.0, 5.0, 1.0)] {
            let shell = 2.0
                * PI
                * rho
                * rho
                * integrate(|mu: f64| gaussian_kernel(3.0, t, r, rho, mu).unwrap(), -1.0, 1.0, QuadTol::rel(1e-13))
                    .unwrap()
                    .value;
            assert_relative_eq!(shell, kernel_qn(3.0, t, r, rho).unwrap(), max_relative = 1e-8);
        }
    }

    #[test]
    fn degenerate_comparison_is_identity() {
        let kp = KernelParams::new(3.4).with_r0(1.0);
        for &(t, r, rho) in &[(0.5, 2.5, 3.0), (40.0, 10.0, 2.1)] {
            assert_eq!(dirichlet_lower_bound(&kp, t, r, rho).unwrap(), kernel_qn(3.4, t, r, rho).unwrap());
        }
    }

    #[test]
    fn two_dimensional_log_factor() {
        let t = 49.0;
        assert_relative_eq!(log_correction(t, 7.0, 7.0), 0.25, max_relative = 1e-15);
        let kp = KernelParams::new(2.0).with_r0(1.0);
        let g = dirichlet_lower_bound_planar(&kp, t, 7.0, 7.0, 1.0).unwrap();
        assert_relative_eq!(g, 0.25 * gaussian_kernel(2.0, t, 7.0, 7.0, 1.0).unwrap(), max_relative = 1e-14);
        let radial = dirichlet_lower_bound(&kp, t, 7.0, 7.0).unwrap();
        assert_relative_eq!(radial, 0.25 * kernel_qn(2.0, t, 7.0, 7.0).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn points_inside_collar_rejected() {
        let kp = KernelParams::new(3.0).with_r0(1.0);
        assert!(dirichlet_lower_bound(&kp, 1.0, 1.5, 3.0).is_err());
        assert!(dirichlet_lower_bound(&kp.with_comparison(1.5, 1.0), 1.0, 2.5, 3.0).is_err());
    }

    #[test]
    fn gaussian_product_constant_exists() {
        let mut samples = Vec::new();
        for &t in &[1.0_f64, 10.0, 100.0] {
            for &sf in &[0.01, 0.2, 0.5] {
                let s = (t * sf).max(1.0);
                for &x in &[t.sqrt(), 2.0 * t.sqrt(), 5.0] {
                    for &y in &[0.0, 1.0, 10.0, 40.0] {
                        for &cs in &[-1.0, 0.0, 1.0] {
                            samples.push((t, s, x, y, cs));
                        }
                    }
                }
            }
        }
        let c = gaussian_product_constant(4.0, 2.0, 1.5, &samples, 1e-6).expect("constant exists");
        assert!(c > 0.0);
        // the analytic choice min(C/2, 1/(2/C + p/(2 K0))) is always admissible
        let analytic: f64 = (4.0_f64 / 2.0).min(1.0 / (2.0 / 4.0 + 2.0 / 3.0));
        assert!(c >= analytic * 0.5);
    }

    proptest! {
        #[test]
        fn positive_everywhere(dim in 2.0f64..8.0, t in 1e-3f64..1e4, r in 1e-3f64..1e3, rho in 1e-3f64..1e3) {
            let q = log_kernel_qn(dim, t, r, rho).unwrap();
            prop_assert!(q.is_finite());
        }

        // q_N(t, r, ρ) ≥ (2t)^{β/2} ρ^{-β} q_{N0}(t, r, ρ) for N = N0 - β
        #[test]
        fn fractional_reduction(n0 in 3u32..6, beta in 0.01f64..0.99, t in 0.1f64..100.0, r in 0.05f64..30.0, rho in 0.05f64..30.0) {
            let n0 = n0 as f64;
            let lhs = log_kernel_qn(n0 - beta, t, r, rho).unwrap();
            let rhs = 0.5 * beta * (2.0 * t).ln() - beta * rho.ln() + log_kernel_qn(n0, t, r, rho).unwrap();
            prop_assert!(lhs >= rhs - 1e-12);
        }
    }
}
