//! Log-gamma and modified Bessel functions of the first kind, real order.
//!
//! `I_ν(x)` is evaluated through `ln(e^{-x} I_ν(x))`: the ascending series
//! below a crossover and the Hankel expansion (with its exponentially small
//! reflected part) above it. Neither path overflows.

use crate::error::{domain, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, nine terms).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (T::PI() / (T::PI() * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(*c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Argument above which the Hankel expansion is used.
pub fn asymptotic_crossover<T: Real>(nu: T) -> T {
    T::lit(25.0).max(T::lit(2.0) * nu * nu)
}

/// `ln(e^{-x} I_ν(x))`, the log-scaled modified Bessel function.
pub fn log_bessel_i_scaled<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    if x == T::zero() {
        return Ok(if nu == T::zero() { T::zero() } else { T::neg_infinity() });
    }
    if x < asymptotic_crossover(nu) {
        Ok(log_series_scaled(nu, x))
    } else {
        Ok(log_asymptotic_scaled(nu, x))
    }
}

/// `I_ν(x)`; returns `+∞` once the value exceeds the scalar range.
pub fn bessel_i<T: Real>(nu: T, x: T) -> Result<T> {
    Ok((log_bessel_i_scaled(nu, x)? + x).exp())
}

/// `ln(e^{-x} I_ν(x))` from the ascending series, for any `x > 0`.
pub fn bessel_i_series_log_scaled<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    if x == T::zero() {
        return log_bessel_i_scaled(nu, x);
    }
    Ok(log_series_scaled(nu, x))
}

/// `ln(e^{-x} I_ν(x))` from the Hankel expansion; accuracy degrades for
/// `x` below [`asymptotic_crossover`].
pub fn bessel_i_asymptotic_log_scaled<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    if !(x > T::zero()) {
        return domain("asymptotic expansion needs x > 0");
    }
    Ok(log_asymptotic_scaled(nu, x))
}

fn check_args<T: Real>(nu: T, x: T) -> Result<()> {
    if !(nu >= T::zero()) || !(x >= T::zero()) {
        return domain(format!("bessel_i needs nu >= 0 and x >= 0, got nu = {nu}, x = {x}"));
    }
    Ok(())
}

fn log_series_scaled<T: Real>(nu: T, x: T) -> T {
    let quarter_x2 = T::lit(0.25) * x * x;
    let stop = T::epsilon() * T::lit(0.1);
    let big = T::max_value().sqrt() * T::lit(1e-8);
    let mut offset = T::zero();
    let mut sum = T::one();
    let mut term = T::one();
    let mut k = T::zero();
    loop {
        k = k + T::one();
        term = term * quarter_x2 / (k * (k + nu));
        sum = sum + term;
        if term > big {
            let shift = big.ln();
            sum = sum / big;
            term = term / big;
            offset = offset + shift;
        }
        if term < stop * sum {
            break;
        }
    }
    -x + nu * (T::lit(0.5) * x).ln() - ln_gamma(nu + T::one()) + sum.ln() + offset
}

fn log_asymptotic_scaled<T: Real>(nu: T, x: T) -> T {
    let mu = T::lit(4.0) * nu * nu;
    // Series terms (without the alternating sign) up to the smallest one.
    let mut terms = vec![T::one()];
    let mut k = T::zero();
    for _ in 0..500 {
        k = k + T::one();
        let odd = T::lit(2.0) * k - T::one();
        let next = *terms.last().expect("non-empty") * (mu - odd * odd) / (T::lit(8.0) * k * x);
        if next.abs() >= terms.last().expect("non-empty").abs() && k > T::one() {
            break;
        }
        terms.push(next);
        if next.abs() <= T::epsilon() * T::lit(0.01) {
            break;
        }
    }
    // truncate just before the smallest term of the divergent series
    if terms.len() > 2 && terms.last().expect("non-empty").abs() > T::epsilon() * T::lit(0.01) {
        terms.pop();
    }
    let mut alternating = T::zero();
    let mut plain = T::zero();
    for (j, t) in terms.iter().enumerate() {
        plain = plain + *t;
        alternating = if j % 2 == 0 { alternating + *t } else { alternating - *t };
    }
    let reflected = (T::PI() * nu).sin() * (T::lit(-2.0) * x).exp() * plain;
    -T::lit(0.5) * (T::lit(2.0) * T::PI() * x).ln() + (alternating - reflected).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gamma_values() {
        assert!(ln_gamma(1.0_f64).abs() < 1e-14);
        assert!(ln_gamma(2.0_f64).abs() < 1e-14);
        assert_relative_eq!(ln_gamma(0.5_f64), std::f64::consts::PI.sqrt().ln(), max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(10.0_f64), 362_880f64.ln(), max_relative = 1e-13);
        // ln Γ(0.1) = 2.252712651734206
        assert_relative_eq!(ln_gamma(0.1_f64), 2.252_712_651_734_206, max_relative = 1e-12);
        // ln Γ(100.5) = ln Γ(0.5) + Σ_{k<100} ln(k + 0.5)
        let direct: f64 = std::f64::consts::PI.sqrt().ln() + (0..100).map(|k| (k as f64 + 0.5).ln()).sum::<f64>();
        assert_relative_eq!(ln_gamma(100.5_f64), direct, max_relative = 1e-13);
    }

    #[test]
    fn half_order_closed_form() {
        let expect = (2.0 / std::f64::consts::PI).sqrt() * 1f64.sinh();
        let got = bessel_i(0.5, 1.0).unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-13);
        assert_relative_eq!(got, 0.937_674, epsilon = 1e-6);
        for x in [0.01, 3.0, 30.0, 200.0] {
            let expect = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh();
            assert_relative_eq!(bessel_i(0.5, x).unwrap(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.3, 0.0).unwrap(), 0.0);
        assert_eq!(log_bessel_i_scaled(2.0, 0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn negative_inputs_rejected() {
        assert!(bessel_i(-0.5, 1.0).is_err());
        assert!(bessel_i(0.5, -1.0).is_err());
    }

    #[test]
    fn regimes_agree_at_x_ten() {
        let s = bessel_i_series_log_scaled(1.3_f64, 10.0).unwrap();
        let a = bessel_i_asymptotic_log_scaled(1.3, 10.0).unwrap();
        assert!((s - a).abs() < 1e-10, "log difference {}", (s - a).abs());
    }

    #[test]
    fn regimes_agree_at_crossover() {
        for nu in [0.0_f64, 0.25, 0.5, 1.3, 2.8, 4.0, 7.5] {
            let x = asymptotic_crossover(nu);
            let s = bessel_i_series_log_scaled(nu, x).unwrap();
            let a = bessel_i_asymptotic_log_scaled(nu, x).unwrap();
            assert!((s - a).abs() < 1e-10, "nu={nu} diff {}", (s - a).abs());
        }
    }

    #[test]
    fn known_integer_order_values() {
        // I_0(1) = 1.2660658777520082, I_1(2.5) = 2.5167162452887006
        assert_relative_eq!(bessel_i(0.0, 1.0).unwrap(), 1.266_065_877_752_008_2, max_relative = 1e-14);
        assert_relative_eq!(bessel_i(1.0, 2.5).unwrap(), 2.516_716_245_288_700_6, max_relative = 1e-13);
    }

    #[test]
    fn log_scaled_no_overflow() {
        for x in [1e3_f64, 1e5, 1e8] {
            let v = log_bessel_i_scaled(0.75, x).unwrap();
            assert!(v.is_finite());
            let leading = -0.5 * (2.0 * std::f64::consts::PI * x).ln();
            assert!((v - leading).abs() < 1e-2);
        }
        // huge order forces the rescaled series
        let v = log_bessel_i_scaled(30.0_f64, 1500.0).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn single_precision() {
        let v = bessel_i(0.5_f32, 1.0).unwrap();
        assert!((v - 0.937_674).abs() < 1e-5);
    }

    #[test]
    fn recurrence_holds() {
        // I_{ν-1}(x) - I_{ν+1}(x) = (2ν/x) I_ν(x)
        for &(nu, x) in &[(1.3, 0.7), (2.25, 12.0), (1.75, 40.0), (3.1, 90.0)] {
            let lhs = bessel_i(nu - 1.0, x).unwrap() - bessel_i(nu + 1.0, x).unwrap();
            let rhs = 2.0 * nu / x * bessel_i(nu, x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-11);
        }
    }

    proptest! {
        // (x/2)^{-ν} I_ν(x) decreases in ν at fixed x
        #[test]
        fn normalized_bessel_decreasing_in_order(nu in 0.5f64..3.0, dnu in 1e-3f64..1.0, x in 1e-3f64..50.0) {
            let f = |nu: f64| log_bessel_i_scaled(nu, x).unwrap() + x - nu * (0.5 * x).ln();
            prop_assert!(f(nu + dnu) < f(nu));
        }
    }
}
