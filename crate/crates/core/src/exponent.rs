//! Characteristic exponents of symmetric Lévy processes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{power_tail, Tolerance};

/// A user supplied exponent. The tail exponent `p` (with `ψ(λ) ≍ λ^p` as
/// `λ → ∞`) must be declared for the tail integrals to be computed.
#[derive(Clone)]
pub struct UserExponent {
    pub name: String,
    pub eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub tail_exponent: Option<f64>,
    /// Where the power-law regime is taken to start.
    pub tail_start: f64,
}

impl fmt::Debug for UserExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserExponent")
            .field("name", &self.name)
            .field("tail_exponent", &self.tail_exponent)
            .field("tail_start", &self.tail_start)
            .finish()
    }
}

/// Characteristic exponent `ψ` of a symmetric Lévy process,
/// `E e^{iλZ_t} = e^{-tψ(λ)}`.
#[derive(Debug, Clone)]
pub enum CharExponent {
    /// `ψ(λ) = γ λ²`.
    BrownianScaled { gamma: f64 },
    /// `ψ(λ) = c |λ|^p`, `p ∈ (1, 2]`.
    SymmetricStable { p: f64, c: f64 },
    UserCallable(UserExponent),
}

impl CharExponent {
    pub fn brownian(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        Ok(CharExponent::BrownianScaled { gamma })
    }

    pub fn stable(p: f64, c: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!("stable index must lie in (1, 2], got {p}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("stable scale must be positive, got {c}")));
        }
        Ok(CharExponent::SymmetricStable { p, c })
    }

    /// Wrap an arbitrary even, nonnegative function with `ψ(0) = 0`.
    pub fn user<F>(name: &str, f: F, tail_exponent: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CharExponent::UserCallable(UserExponent {
            name: name.to_string(),
            eval: Arc::new(f),
            tail_exponent,
            tail_start: 1.0,
        })
    }

    /// `ψ(λ)`. Evaluated at `|λ|`, so evenness holds by construction.
    pub fn eval(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        match self {
            CharExponent::BrownianScaled { gamma } => gamma * l * l,
            CharExponent::SymmetricStable { p, c } => {
                if l == 0.0 {
                    0.0
                } else {
                    c * l.powf(*p)
                }
            }
            CharExponent::UserCallable(u) => (u.eval)(l),
        }
    }

    /// `ψ'(λ)` for `λ > 0`; central differences for user exponents.
    pub fn derivative(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        let sign = if lambda < 0.0 { -1.0 } else { 1.0 };
        let d = match self {
            CharExponent::BrownianScaled { gamma } => 2.0 * gamma * l,
            CharExponent::SymmetricStable { p, c } => {
                if l == 0.0 {
                    0.0
                } else {
                    c * p * l.powf(p - 1.0)
                }
            }
            CharExponent::UserCallable(u) => {
                let h = 1e-5 * l.max(1e-8);
                let lo = (l - h).max(0.0);
                ((u.eval)(l + h) - (u.eval)(lo)) / (l + h - lo)
            }
        };
        sign * d
    }

    /// Declared or intrinsic tail exponent.
    pub fn tail_exponent(&self) -> Option<f64> {
        match self {
            CharExponent::BrownianScaled { .. } => Some(2.0),
            CharExponent::SymmetricStable { p, .. } => Some(*p),
            CharExponent::UserCallable(u) => u.tail_exponent,
        }
    }

    pub(crate) fn tail_start(&self) -> f64 {
        match self {
            CharExponent::UserCallable(u) => u.tail_start,
            _ => 1.0,
        }
    }

    /// Tail exponent, or `Indeterminate` when it is undeclared or too small
    /// for `1/(1+ψ)` to be integrable.
    pub(crate) fn required_tail_exponent(&self) -> Result<f64> {
        match self.tail_exponent() {
            Some(p) if p > 1.0 => Ok(p),
            Some(p) => Err(Error::Indeterminate(format!(
                "declared tail exponent {p} does not exceed 1"
            ))),
            None => Err(Error::Indeterminate(
                "user exponent has no declared tail exponent".into(),
            )),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CharExponent::BrownianScaled { gamma } => format!("brownian:{gamma}"),
            CharExponent::SymmetricStable { p, c } => format!("stable:{p}:{c}"),
            CharExponent::UserCallable(u) => format!("user:{}", u.name),
        }
    }
}

/// `true` iff `∫ 1/(1+ψ(λ)) dλ < ∞`.
///
/// Built-in exponents are decided analytically. User exponents need a declared
/// tail exponent, which is checked against the observed log-slope of `ψ` over
/// several decades before the tail integral is evaluated numerically.
pub fn check_integrability(exponent: &CharExponent) -> Result<bool> {
    match exponent {
        CharExponent::BrownianScaled { .. } | CharExponent::SymmetricStable { .. } => Ok(true),
        CharExponent::UserCallable(u) => {
            let p = match u.tail_exponent {
                Some(p) => p,
                None => {
                    return Err(Error::Indeterminate(
                        "user exponent has no declared tail exponent".into(),
                    ))
                }
            };
            let start = u.tail_start.max(1.0);
            let mut slopes = Vec::new();
            for k in 0..4 {
                let a = start * 10f64.powi(2 + k);
                let b = 10.0 * a;
                let (pa, pb) = ((u.eval)(a), (u.eval)(b));
                if !(pa > 0.0 && pb > 0.0 && pa.is_finite() && pb.is_finite()) {
                    return Err(Error::Indeterminate(format!(
                        "psi not positive and finite at {a:e} or {b:e}"
                    )));
                }
                slopes.push((pb / pa).log10());
            }
            let last = *slopes.last().unwrap();
            if (last - p).abs() > 0.05 * p.max(1.0) {
                return Err(Error::Indeterminate(format!(
                    "declared tail exponent {p} disagrees with observed log-slope {last:.4}"
                )));
            }
            if p <= 1.0 {
                return Ok(false);
            }
            let tol = Tolerance::new(1e-6, 1e-12);
            let tail = power_tail(|l| 1.0 / (1.0 + (u.eval)(l)), start, p, &tol);
            if !tail.value.is_finite() || tail.error > tol.target(tail.value) {
                return Err(Error::Indeterminate(format!(
                    "tail integral did not settle: {tail:?}"
                )));
            }
            Ok(true)
        }
    }
}

/// Result of the bound `sup_λ λ|ψ'(λ)|/(β+ψ(λ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioBound {
    Finite(f64),
    Infinite,
}

/// Numeric supremum of `λ|ψ'(λ)|/(β+ψ(λ))` over `λ ∈ [1e-8, 1e8]`, joined with
/// the tail limit `p` at infinity.
///
/// With `β = 0` the ratio near the origin is the local log-slope of `ψ`; if it
/// keeps growing across the lowest decades the supremum is reported as
/// [`RatioBound::Infinite`].
pub fn psi_ratio_bound(exponent: &CharExponent, beta: f64) -> Result<RatioBound> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let per_decade = 20;
    let decades = 16;
    let mut sup: f64 = 0.0;
    let mut low = Vec::new();
    for i in 0..=decades * per_decade {
        let lambda = 10f64.powf(-8.0 + i as f64 / per_decade as f64);
        let psi = exponent.eval(lambda);
        let denom = beta + psi;
        if denom <= 0.0 {
            return Ok(RatioBound::Infinite);
        }
        let r = lambda * exponent.derivative(lambda).abs() / denom;
        if !r.is_finite() {
            return Ok(RatioBound::Infinite);
        }
        if i % per_decade == 0 && i <= 3 * per_decade {
            low.push(r);
        }
        sup = sup.max(r);
    }
    if beta == 0.0 && low.len() == 4 {
        let growing = low.windows(2).all(|w| w[0] > 1.1 * w[1]);
        if growing {
            return Ok(RatioBound::Infinite);
        }
    }
    if let Some(p) = exponent.tail_exponent() {
        sup = sup.max(p);
    }
    Ok(RatioBound::Finite(sup))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        assert_eq!(CharExponent::brownian(1.0).unwrap().eval(2.0), 4.0);
        let s = CharExponent::stable(1.5, 1.0).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert!((s.eval(-2.0) - 2f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(s.eval(-2.0), s.eval(2.0));
    }

    #[test]
    fn stable_index_is_restricted() {
        assert!(CharExponent::stable(1.0, 1.0).is_err());
        assert!(CharExponent::stable(2.5, 1.0).is_err());
        assert!(CharExponent::stable(2.0, 1.0).is_ok());
        assert!(CharExponent::brownian(0.0).is_err());
    }

    #[test]
    fn integrability_examples() {
        assert!(check_integrability(&CharExponent::stable(1.5, 1.0).unwrap()).unwrap());
        assert!(check_integrability(&CharExponent::stable(2.0, 1.0).unwrap()).unwrap());
        assert!(check_integrability(&CharExponent::brownian(1.0).unwrap()).unwrap());
    }

    #[test]
    fn user_exponent_needs_declared_tail() {
        let undeclared = CharExponent::user("sq", |l| l * l, None);
        assert!(matches!(check_integrability(&undeclared), Err(Error::Indeterminate(_))));
        let declared = CharExponent::user("sq", |l| l * l, Some(2.0));
        assert!(check_integrability(&declared).unwrap());
        let wrong = CharExponent::user("sq", |l| l * l, Some(1.5));
        assert!(matches!(check_integrability(&wrong), Err(Error::Indeterminate(_))));
        let log_growth = CharExponent::user("flat", |l| l.abs().ln_1p(), Some(0.5));
        assert!(check_integrability(&log_growth).is_err());
    }

    #[test]
    fn ratio_bound_examples() {
        let b = CharExponent::brownian(1.0).unwrap();
        match psi_ratio_bound(&b, 1.0).unwrap() {
            RatioBound::Finite(v) => assert!((v - 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        match psi_ratio_bound(&b, 0.0).unwrap() {
            RatioBound::Finite(v) => assert!((v - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let s = CharExponent::stable(1.5, 2.0).unwrap();
        match psi_ratio_bound(&s, 0.7).unwrap() {
            RatioBound::Finite(v) => assert!((v - 1.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ratio_bound_detects_flat_origin() {
        // ψ(λ) = exp(-1/λ²) vanishes faster than any power at the origin.
        let flat = CharExponent::user(
            "flat",
            |l: f64| if l == 0.0 { 0.0 } else { (1.0 + l * l) * (-1.0 / (l * l)).exp() },
            Some(2.0),
        );
        assert_eq!(psi_ratio_bound(&flat, 0.0).unwrap(), RatioBound::Infinite);
        // With β > 0 the same exponent has a finite bound.
        assert!(matches!(psi_ratio_bound(&flat, 1.0).unwrap(), RatioBound::Finite(_)));
        let vanishing = CharExponent::user(
            "vanishing",
            |l: f64| if l < 1e-3 { 0.0 } else { l * l },
            Some(2.0),
        );
        assert_eq!(psi_ratio_bound(&vanishing, 0.0).unwrap(), RatioBound::Infinite);
    }
}
