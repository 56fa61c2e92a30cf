//! Principal Dirichlet eigenpair of `-r^{1-N}(r^{N-1} φ')' + V φ` on `(a, b)`.
//!
//! The operator is discretized by finite volumes with the weight `r^{N-1}`
//! taken at cell faces, which gives a symmetric tridiagonal matrix after
//! scaling by the mass diagonal. The lowest eigenvalue comes from Sturm
//! sequence bisection and the eigenvector from inverse iteration.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::scalar::Real;

/// Eigenvalues below `-NEGATIVE_TOL` count as negative.
pub const NEGATIVE_TOL: f64 = 1e-8;

/// Radial potential `V(r)`.
#[derive(Clone)]
pub enum RadialPotential<T> {
    Zero,
    /// `coeff / r²`, evaluated exactly.
    InverseSquare { coeff: T },
    /// `coeff / (r² + eps²)`.
    Regularized { coeff: T, eps: T },
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> RadialPotential<T> {
    pub fn eval(&self, r: T) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::InverseSquare { coeff } => *coeff / (r * r),
            Self::Regularized { coeff, eps } => *coeff / (r * r + *eps * *eps),
            Self::Custom(f) => f(r),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for RadialPotential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::InverseSquare { coeff } => write!(f, "InverseSquare({coeff:?})"),
            Self::Regularized { coeff, eps } => write!(f, "Regularized({coeff:?}, eps={eps:?})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenProblem<T> {
    /// Exponent of the weight `r^{N-1}`, `N >= 1`.
    pub dimension: T,
    pub a: T,
    pub b: T,
    pub potential: RadialPotential<T>,
    /// Number of grid nodes including both endpoints.
    pub grid_points: usize,
}

impl<T: Real> EigenProblem<T> {
    pub fn new(dimension: T, a: T, b: T, potential: RadialPotential<T>, grid_points: usize) -> Self {
        Self {
            dimension,
            a,
            b,
            potential,
            grid_points,
        }
    }

    /// Grid size resolving the inner radius: spacing about `a/20`, clamped to
    /// `[2000, 500000]` nodes.
    pub fn auto_grid_points(a: T, b: T) -> usize {
        let want = ((b - a) / (a / T::lit(20.0))).to_f64_lossy();
        if want.is_finite() {
            (want.ceil() as usize).clamp(2000, 500_000)
        } else {
            500_000
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dimension >= T::one()) {
            return invalid(format!("weight exponent N = {} must be >= 1", self.dimension));
        }
        if !(self.a > T::zero() && self.b > self.a) {
            return invalid(format!("interval ({}, {}) needs 0 < a < b", self.a, self.b));
        }
        if self.grid_points < 3 {
            return invalid("eigenproblem needs at least 3 grid points");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenPair<T> {
    pub lambda0: T,
    /// Grid nodes, endpoints included.
    pub r: Vec<T>,
    /// Eigenfunction on `r`, zero at both ends, `Σ φ r^{N-1} h = 1`.
    pub phi: Vec<T>,
    /// Discrete Rayleigh quotient of `phi`.
    pub rayleigh: T,
}

impl<T: Real> EigenPair<T> {
    /// One-sided difference quotients at `a` and `b`.
    pub fn boundary_derivatives(&self) -> (T, T) {
        let n = self.r.len();
        let h = self.r[1] - self.r[0];
        ((self.phi[1] - self.phi[0]) / h, (self.phi[n - 1] - self.phi[n - 2]) / h)
    }
}

struct Tridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
    /// square roots of the mass diagonal (cell weights)
    sqrt_mass: Vec<T>,
}

fn assemble<T: Real>(prob: &EigenProblem<T>) -> (Vec<T>, Tridiagonal<T>) {
    let n = prob.grid_points;
    let h = (prob.b - prob.a) / T::from_count(n - 1);
    let r: Vec<T> = (0..n).map(|i| prob.a + h * T::from_count(i)).collect();
    let expo = prob.dimension - T::one();
    let half = T::lit(0.5);
    let weight = |x: T| x.powf(expo);
    let interior = n - 2;
    let mut diag = Vec::with_capacity(interior);
    let mut off = Vec::with_capacity(interior.saturating_sub(1));
    let mut sqrt_mass = Vec::with_capacity(interior);
    let h2 = h * h;
    for i in 1..n - 1 {
        let m = weight(r[i]);
        let left = weight(r[i] - half * h);
        let right = weight(r[i] + half * h);
        diag.push((left + right) / (h2 * m) + prob.potential.eval(r[i]));
        sqrt_mass.push(m.sqrt());
    }
    for i in 1..n - 2 {
        let face = weight(r[i] + half * h);
        off.push(-face / (h2 * sqrt_mass[i - 1] * sqrt_mass[i]));
    }
    (r, Tridiagonal { diag, off, sqrt_mass })
}

/// Number of eigenvalues strictly below `x`.
fn sturm_count<T: Real>(m: &Tridiagonal<T>, x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = T::one();
    for i in 0..m.diag.len() {
        let coupling = if i == 0 { T::zero() } else { m.off[i - 1] * m.off[i - 1] / q };
        q = m.diag[i] - x - coupling;
        if q == T::zero() {
            q = -tiny;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

fn smallest_eigenvalue<T: Real>(m: &Tridiagonal<T>) -> Result<T> {
    let k = m.diag.len();
    let mut lo = T::infinity();
    let mut hi = T::infinity();
    for i in 0..k {
        let left = if i > 0 { m.off[i - 1].abs() } else { T::zero() };
        let right = if i + 1 < k { m.off[i].abs() } else { T::zero() };
        lo = lo.min(m.diag[i] - left - right);
        hi = hi.min(m.diag[i]);
    }
    let scale = lo.abs().max(hi.abs()).max(T::one());
    hi = hi + T::epsilon() * scale;
    if sturm_count(m, hi) == 0 {
        return Err(LabError::EigenSolver("Sturm bracket does not contain the spectrum".into()));
    }
    for _ in 0..400 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(m, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

/// Solve `(B - σ) x = y` by the Thomas algorithm.
fn shifted_solve<T: Real>(m: &Tridiagonal<T>, sigma: T, rhs: &[T]) -> Result<Vec<T>> {
    let k = m.diag.len();
    let mut c = vec![T::zero(); k];
    let mut d = vec![T::zero(); k];
    let mut denom = m.diag[0] - sigma;
    for i in 0..k {
        if i > 0 {
            denom = m.diag[i] - sigma - m.off[i - 1] * c[i - 1];
        }
        if denom == T::zero() || !denom.is_finite() {
            return Err(LabError::EigenSolver("singular shifted system".into()));
        }
        c[i] = if i + 1 < k { m.off[i] / denom } else { T::zero() };
        let prev = if i > 0 { m.off[i - 1] * d[i - 1] } else { T::zero() };
        d[i] = (rhs[i] - prev) / denom;
    }
    for i in (0..k.saturating_sub(1)).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}

fn matvec<T: Real>(m: &Tridiagonal<T>, x: &[T]) -> Vec<T> {
    let k = x.len();
    (0..k)
        .map(|i| {
            let mut v = m.diag[i] * x[i];
            if i > 0 {
                v = v + m.off[i - 1] * x[i - 1];
            }
            if i + 1 < k {
                v = v + m.off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

fn unit<T: Real>(x: &mut [T]) {
    let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    x.iter_mut().for_each(|v| *v = *v / norm);
}

/// Smallest eigenvalue and its positive, weight-normalized eigenfunction.
pub fn principal_eigenpair<T: Real>(prob: &EigenProblem<T>) -> Result<EigenPair<T>> {
    prob.validate()?;
    let (r, mat) = assemble(prob);
    if mat.diag.iter().any(|d| !d.is_finite()) {
        return Err(LabError::EigenSolver("potential is not finite on the grid".into()));
    }
    let lambda = smallest_eigenvalue(&mat)?;
    let norm = mat.diag.iter().map(|d| d.abs()).fold(T::zero(), T::max);
    let sigma = lambda - (T::lit(64.0) * T::epsilon() * norm).max(T::lit(1e-12) * lambda.abs());
    let k = mat.diag.len();
    let mut y = vec![T::one(); k];
    unit(&mut y);
    let mut converged = false;
    for _ in 0..30 {
        let mut next = shifted_solve(&mat, sigma, &y)?;
        unit(&mut next);
        if next.iter().copied().sum::<T>() < T::zero() {
            next.iter_mut().for_each(|v| *v = -*v);
        }
        let change = next.iter().zip(&y).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
        y = next;
        if change <= T::lit(1e-13).max(T::lit(16.0) * T::epsilon()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LabError::EigenSolver("inverse iteration did not converge".into()));
    }
    let by = matvec(&mat, &y);
    let rayleigh = y.iter().zip(&by).map(|(a, b)| *a * *b).sum::<T>();

    let peak = y.iter().copied().fold(T::zero(), T::max);
    if y.iter().any(|v| *v < -T::lit(1e-10) * peak) {
        return Err(LabError::EigenSolver("principal eigenvector changes sign".into()));
    }
    let h = (prob.b - prob.a) / T::from_count(prob.grid_points - 1);
    let mut phi = Vec::with_capacity(prob.grid_points);
    phi.push(T::zero());
    phi.extend(y.iter().zip(&mat.sqrt_mass).map(|(v, s)| v.max(T::zero()) / *s));
    phi.push(T::zero());
    let expo = prob.dimension - T::one();
    let mass: T = phi.iter().zip(&r).map(|(p, x)| *p * x.powf(expo)).sum::<T>() * h;
    phi.iter_mut().for_each(|p| *p = *p / mass);
    Ok(EigenPair {
        lambda0: lambda,
        r,
        phi,
        rayleigh,
    })
}

/// `λ_n n²` for the annuli `(n, 2n)` with `V = 0`, `grid_points` nodes each.
pub fn annulus_scaling<T: Real>(dimension: T, sizes: &[T], grid_points: usize) -> Result<Vec<(T, T)>> {
    if sizes.len() < 2 {
        return invalid("annulus scaling needs at least two sizes");
    }
    sizes
        .iter()
        .map(|&n| {
            let prob = EigenProblem::new(dimension, n, T::lit(2.0) * n, RadialPotential::Zero, grid_points);
            principal_eigenpair(&prob).map(|e| (n, e.lambda0 * n * n))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralVerdict {
    BlowUpForAllP,
    Inconclusive,
}

impl fmt::Display for SpectralVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BlowUpForAllP => "BlowUpForAllP",
            Self::Inconclusive => "Inconclusive",
        })
    }
}

/// Sufficient blow-up test: a negative principal eigenvalue of `-Δ + V` on
/// the shell `(a, b)` in dimension `n` with a positive reaction floor means no
/// positive solution is global for any `p > 1`.
pub fn spectral_blowup_criterion<T: Real>(
    n: T,
    potential: RadialPotential<T>,
    domain: (T, T),
    a_inf: T,
) -> Result<(SpectralVerdict, T)> {
    if !(a_inf > T::zero()) {
        return invalid(format!("reaction lower bound a_inf = {a_inf} must be positive"));
    }
    let grid = EigenProblem::auto_grid_points(domain.0, domain.1);
    let pair = principal_eigenpair(&EigenProblem::new(n, domain.0, domain.1, potential, grid))?;
    let verdict = if pair.lambda0 < -T::lit(NEGATIVE_TOL) {
        SpectralVerdict::BlowUpForAllP
    } else {
        SpectralVerdict::Inconclusive
    };
    Ok((verdict, pair.lambda0))
}
