//! Critical-exponent algebra for `u_t = Δu - V u + a u^p` with `V ~ ω/|x|²`
//! and `a ~ |x|^m`.
//!
//! The power `α(ω, n)` is the larger root of `α(α + n - 2) = ω`. Conjugating
//! by `r^α` removes the inverse-square potential and produces a radial heat
//! operator of effective dimension `N = n + 2α` with reaction growth
//! `M = α(p - 1) + m`. The critical exponent is
//! `p*(ω, m) = 1 + (2 + m)⁺ / (n + α)` above the Hardy threshold
//! `ω ≥ -(n - 2)²/4` and `+∞` below it.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::scalar::Real;

/// Default half-width of the band around `p*` in which trajectories are not
/// trusted to separate blow-up from global behaviour.
pub const DEFAULT_BORDERLINE_MARGIN: f64 = 0.02;

/// Inverse-square potential tail `V(r) ~ ω/r²` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec<T> {
    pub omega: T,
    pub n: T,
    /// Evaluation uses `V(r) = ω / (r² + ε²)`.
    pub regularization_eps: T,
}

impl<T: Real> PotentialSpec<T> {
    pub fn new(omega: T, n: T) -> Result<Self> {
        Self::with_eps(omega, n, T::lit(1e-3))
    }

    pub fn with_eps(omega: T, n: T, regularization_eps: T) -> Result<Self> {
        let pot = Self {
            omega,
            n,
            regularization_eps,
        };
        pot.validate()?;
        Ok(pot)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= T::lit(2.0)) {
            return invalid(format!("dimension n = {} must be >= 2", self.n));
        }
        if !(self.regularization_eps > T::zero()) {
            return invalid("regularization_eps must be positive");
        }
        if !self.omega.is_finite() {
            return invalid("omega must be finite");
        }
        Ok(())
    }

    /// `-(n - 2)² / 4`.
    pub fn hardy_threshold(&self) -> T {
        hardy_threshold(self.n)
    }

    /// True iff `ω ≥ -(n - 2)²/4`, i.e. `-Δ + ω/|x|²` is non-negative.
    pub fn subcritical_hardy(&self) -> bool {
        self.omega >= self.hardy_threshold()
    }

    /// Regularized potential `ω / (r² + ε²)`.
    pub fn eval(&self, r: T) -> T {
        self.omega / (r * r + self.regularization_eps * self.regularization_eps)
    }
}

/// Two-sided power bounds `c1 r^m ≤ a(r) ≤ c2 r^m` for large `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec<T> {
    pub m: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> ReactionSpec<T> {
    pub fn new(m: T, c1: T, c2: T) -> Result<Self> {
        let r = Self { m, c1, c2 };
        r.validate()?;
        Ok(r)
    }

    /// `a(r) = r^m` asymptotically, with `c1 = c2 = 1`.
    pub fn power(m: T) -> Self {
        Self {
            m,
            c1: T::one(),
            c2: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > T::zero()) || !(self.c2 >= self.c1) {
            return invalid(format!(
                "reaction bounds need 0 < c1 <= c2, got c1 = {}, c2 = {}",
                self.c1, self.c2
            ));
        }
        if !self.m.is_finite() {
            return invalid("m must be finite");
        }
        Ok(())
    }
}

/// Theory classification of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// `1 < p ≤ p*`: every non-trivial solution blows up.
    NoGlobal,
    /// `p > p*`: small data give global solutions.
    GlobalPossible,
    /// `ω < -(n-2)²/4`: `p* = ∞`, blow-up for every `p > 1`.
    HardySupercritical,
    /// Within the borderline margin of `p*`; not desk-decidable.
    Borderline,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::NoGlobal => "NoGlobal",
            Verdict::GlobalPossible => "GlobalPossible",
            Verdict::HardySupercritical => "HardySupercritical",
            Verdict::Borderline => "Borderline",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of [`fujita_exponent`] or [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport<T> {
    /// `α(ω, n)`; `None` below the Hardy threshold.
    pub alpha: Option<T>,
    /// `p*(ω, m)`, possibly `+∞`.
    pub p_star: T,
    /// `N = n + 2α`.
    pub effective_dimension: Option<T>,
    /// `M = α(p - 1) + m`; only known once `p` is given.
    pub effective_exponent: Option<T>,
    /// The exponent that was classified, if any.
    pub p: Option<T>,
    /// `None` from [`fujita_exponent`] when the potential is Hardy-subcritical.
    pub verdict: Option<Verdict>,
    /// `|p - p*|` (`+∞` when `p* = ∞`, `NaN` when no `p` was given).
    pub margin: T,
    /// `|p - p*|` below the configured margin.
    pub borderline: bool,
    /// Whether `p ≤ p*` agrees with `p ≤ 1 + (2 + M)⁺ / N`.
    pub formulations_agree: bool,
}

impl<T: Real> RegimeReport<T> {
    /// The verdict a harness should act on: `Borderline` replaces the theory
    /// verdict when `p` sits inside the margin.
    pub fn policy_verdict(&self) -> Option<Verdict> {
        if self.borderline {
            Some(Verdict::Borderline)
        } else {
            self.verdict
        }
    }
}

/// `-(n - 2)² / 4`.
pub fn hardy_threshold<T: Real>(n: T) -> T {
    let d = n - T::lit(2.0);
    -d * d / T::lit(4.0)
}

/// Larger root of `α(α + n - 2) = ω`.
pub fn alpha_root<T: Real>(omega: T, n: T) -> Result<T> {
    if !(n >= T::lit(2.0)) {
        return domain(format!("alpha_root needs n >= 2, got {n}"));
    }
    let d = n - T::lit(2.0);
    let disc = d * d + T::lit(4.0) * omega;
    if disc < T::zero() {
        return domain(format!(
            "omega = {omega} is below the Hardy threshold {} (negative discriminant)",
            hardy_threshold(n)
        ));
    }
    Ok((-d + disc.sqrt()) / T::lit(2.0))
}

/// Critical exponent without potential: `1 + (2 + m)⁺ / n`.
pub fn fujita_flat<T: Real>(n: T, m: T) -> T {
    T::one() + (T::lit(2.0) + m).positive_part() / n
}

/// `p*(ω, m) = 1 + (2 + m)⁺ / (n + α)`, or `+∞` below the Hardy threshold.
pub fn critical_exponent<T: Real>(omega: T, n: T, m: T) -> Result<T> {
    if omega < hardy_threshold(n) {
        return Ok(T::infinity());
    }
    let alpha = alpha_root(omega, n)?;
    Ok(T::one() + (T::lit(2.0) + m).positive_part() / (n + alpha))
}

/// Fill in `α`, `p*` and `N` for a potential/reaction pair.
pub fn fujita_exponent<T: Real>(pot: &PotentialSpec<T>, reac: &ReactionSpec<T>) -> Result<RegimeReport<T>> {
    pot.validate()?;
    if !pot.subcritical_hardy() {
        return Ok(RegimeReport {
            alpha: None,
            p_star: T::infinity(),
            effective_dimension: None,
            effective_exponent: None,
            p: None,
            verdict: Some(Verdict::HardySupercritical),
            margin: T::infinity(),
            borderline: false,
            formulations_agree: true,
        });
    }
    let alpha = alpha_root(pot.omega, pot.n)?;
    let p_star = T::one() + (T::lit(2.0) + reac.m).positive_part() / (pot.n + alpha);
    Ok(RegimeReport {
        alpha: Some(alpha),
        p_star,
        effective_dimension: Some(pot.n + T::lit(2.0) * alpha),
        effective_exponent: None,
        p: None,
        verdict: None,
        margin: T::nan(),
        borderline: false,
        formulations_agree: true,
    })
}

/// `M = α(p - 1) + m`.
pub fn effective_exponent<T: Real>(alpha: T, m: T, p: T) -> T {
    alpha * (p - T::one()) + m
}

/// `p ≤ 1 + (2 + M)⁺ / N` with `M`, `N` built from `(α, n, m, p)`.
pub fn transformed_condition<T: Real>(alpha: T, n: T, m: T, p: T) -> bool {
    let big_n = n + T::lit(2.0) * alpha;
    let big_m = effective_exponent(alpha, m, p);
    p <= T::one() + (T::lit(2.0) + big_m).positive_part() / big_n
}

/// Classify `p` against `p*(ω, m)` with the default borderline margin.
pub fn classify<T: Real>(pot: &PotentialSpec<T>, reac: &ReactionSpec<T>, p: T) -> Result<RegimeReport<T>> {
    classify_with_margin(pot, reac, p, T::lit(DEFAULT_BORDERLINE_MARGIN))
}

pub fn classify_with_margin<T: Real>(
    pot: &PotentialSpec<T>,
    reac: &ReactionSpec<T>,
    p: T,
    borderline_margin: T,
) -> Result<RegimeReport<T>> {
    if !(p > T::one()) {
        return domain(format!("exponent p = {p} must exceed 1"));
    }
    let mut report = fujita_exponent(pot, reac)?;
    report.p = Some(p);
    let Some(alpha) = report.alpha else {
        return Ok(report);
    };
    // p == p* belongs to the blow-up side; allow for rounding in p*.
    let slack = T::lit(64.0) * T::epsilon() * report.p_star;
    let no_global = p <= report.p_star + slack;
    report.verdict = Some(if no_global {
        Verdict::NoGlobal
    } else {
        Verdict::GlobalPossible
    });
    report.effective_exponent = Some(effective_exponent(alpha, reac.m, p));
    report.margin = (p - report.p_star).abs();
    report.borderline = report.margin < borderline_margin;
    // At p == p* the two sides may differ by rounding; only a disagreement
    // away from the critical point is a real inconsistency.
    report.formulations_agree =
        transformed_condition(alpha, pot.n, reac.m, p) == no_global || report.margin <= slack;
    Ok(report)
}
