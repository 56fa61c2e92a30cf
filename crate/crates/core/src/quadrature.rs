//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre rules.

use crate::error::{LabError, Result};
use crate::scalar::Real;

// 15-point Kronrod abscissae on [-1, 1] (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Embedded 7-point Gauss weights, paired with XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTol<T> {
    pub abs: T,
    pub rel: T,
    pub max_segments: usize,
}

impl<T: Real> Default for QuadTol<T> {
    fn default() -> Self {
        Self {
            abs: T::zero(),
            rel: T::lit(1e-10),
            max_segments: 2000,
        }
    }
}

impl<T: Real> QuadTol<T> {
    pub fn rel(rel: T) -> Self {
        Self {
            rel,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).abs();
    Segment { a, b, value, error }
}

/// Integrate `f` over `[a, b]`, bisecting the worst segment until the total
/// error estimate is below `max(tol.abs, tol.rel * |value|)`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T, tol: QuadTol<T>) -> Result<Quad<T>> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Like [`integrate`] but starts from the partition given by `points`
/// (sorted, at least two entries). Useful to place nodes near known peaks.
pub fn integrate_with_breaks<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    points: &[T],
    tol: QuadTol<T>,
) -> Result<Quad<T>> {
    assert!(points.len() >= 2, "need at least one interval");
    let mut segs: Vec<Segment<T>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * segs.len();
    if segs.is_empty() {
        return Ok(Quad {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    loop {
        let value: T = segs.iter().map(|s| s.value).sum();
        let error: T = segs.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(Quad {
                value,
                error,
                evaluations,
            });
        }
        if segs.len() >= tol.max_segments {
            return Err(LabError::QuadratureNonConvergence {
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
                tolerance: target.to_f64_lossy(),
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, s)| {
                if s.error > acc.1 {
                    (i, s.error)
                } else {
                    acc
                }
            });
        let s = segs.swap_remove(worst);
        let mid = T::lit(0.5) * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Segment cannot be split further in this precision; accept it.
            segs.push(Segment {
                error: T::zero(),
                ..s
            });
            continue;
        }
        segs.push(gk15(&mut f, s.a, mid));
        segs.push(gk15(&mut f, mid, s.b));
        evaluations += 30;
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x: f64| x.powi(6) - 3.0 * x, 0.0, 2.0, QuadTol::default()).unwrap();
        assert!((q.value - (128.0 / 7.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn peaked_gaussian() {
        let q = integrate(
            |x: f64| (-(x - 3.0).powi(2) / 1e-4).exp(),
            0.0,
            10.0,
            QuadTol::rel(1e-12),
        )
        .unwrap();
        let exact = (std::f64::consts::PI * 1e-4).sqrt();
        assert!((q.value / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // integral of x^{-1/2} on (0, 1] is 2
        let q = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, QuadTol::rel(1e-9)).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn nonconvergence_reported() {
        let tol = QuadTol {
            abs: 0.0,
            rel: 1e-14,
            max_segments: 4,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tol);
        assert!(matches!(r, Err(LabError::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn legendre_rules() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre::<f64>(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            // exact for x^{2n-2}
            let deg = 2 * n as i32 - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            assert!((m - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }
}
