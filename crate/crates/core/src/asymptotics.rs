//! Small-time limits and the LIL constants of the four kernel examples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionPair, ScaleFunction};
use crate::error::{Error, Result};
use crate::exponent::CharExponent;
use crate::kernels::{sigma_sq_derivative, KernelFamily};
use crate::measure::{left_potential, FiniteMeasure};
use crate::quadrature::Tolerance;

/// Agreement required between successive extrapolations.
pub const LIMIT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// `t/σ²(t) → 0`.
    Zero,
    /// `σ²(t)/t → C`.
    Positive(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitClassification {
    pub kind: LimitKind,
    pub ts: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl LimitClassification {
    /// `lim t/σ²(t)`: 0 or `1/C`.
    pub fn inverse_limit(&self) -> f64 {
        match self.kind {
            LimitKind::Zero => 0.0,
            LimitKind::Positive(c) => 1.0 / c,
        }
    }
}

fn aitken(r0: f64, r1: f64, r2: f64) -> f64 {
    let d1 = r1 - r0;
    let d2 = r2 - r1;
    let den = d2 - d1;
    if den == 0.0 || (d2 * d2 / den).abs() > 1e3 * r2.abs().max(1e-300) {
        r2
    } else {
        r2 - d2 * d2 / den
    }
}

/// Classify `t/σ²(t)` on `t = 2^{-j}`, `j = 10..=40`.
pub fn t_over_sigma_limit(family: &KernelFamily, tol: &Tolerance) -> Result<LimitClassification> {
    let ts: Vec<f64> = (10..=40).map(|j| 0.5f64.powi(j)).collect();
    let ratios = ts
        .iter()
        .map(|&t| Ok(t / family.sigma_sq(t, tol)?))
        .collect::<Result<Vec<f64>>>()?;
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Inconclusive("t/sigma^2(t) is not positive and finite".into()));
    }
    let n = ratios.len();
    // The last ten halvings span three decades.
    let window = &ratios[n - 11..];
    let est = aitken(ratios[n - 3], ratios[n - 2], ratios[n - 1]);
    let spread = window.iter().map(|r| (r - est).abs() / est).fold(0.0, f64::max);
    let kind = if spread <= LIMIT_TOL {
        LimitKind::Positive(1.0 / est)
    } else {
        let slopes: Vec<f64> = window.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if ratios[n - 1] < 1e-4 && lo > 0.02 && hi <= 2.0 * lo {
            LimitKind::Zero
        } else {
            return Err(Error::Inconclusive(format!(
                "t/sigma^2 neither settles (spread {spread:.3e}) nor decays as a power (slopes {lo:.3}..{hi:.3})"
            )));
        }
    };
    Ok(LimitClassification { kind, ts, ratios })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub example: u8,
    pub base_term: f64,
    pub integral_term: f64,
    pub total: f64,
    /// The example only bounds the limit from above.
    pub upper_bound: bool,
    pub limit: Option<LimitKind>,
    pub mass: f64,
    pub inputs: String,
    /// Auxiliary values (`rho0`, numeric ratio checks).
    pub extras: BTreeMap<String, f64>,
}

impl ConstantReport {
    /// Constant in front of the normalising function in the LIL bound.
    pub fn lil_constant(&self) -> f64 {
        1.0 + self.total
    }
}

fn derivative_integral(family: &KernelFamily, mu: &FiniteMeasure, tol: &Tolerance) -> Result<f64> {
    mu.integrate(|v| sigma_sq_derivative(family, v, tol), &[], tol)
}

/// `|μ|/2 + (1/2) lim(t/σ⁰²) ∫ (σ⁰²)' dμ`, with the integral dropped when the
/// limit is zero.
pub fn c_example1(psi: &CharExponent, mu: &FiniteMeasure) -> Result<ConstantReport> {
    let tol = Tolerance::default();
    let family = KernelFamily::LevyKilledAtZero { psi: psi.clone() };
    mu.validate_for(&family)?;
    let limit = t_over_sigma_limit(&family, &tol)?;
    let mass = mu.total_mass()?;
    let integral_term = match limit.kind {
        LimitKind::Zero => 0.0,
        LimitKind::Positive(c) => derivative_integral(&family, mu, &tol)? / (2.0 * c),
    };
    let base_term = 0.5 * mass;
    Ok(ConstantReport {
        example: 1,
        base_term,
        integral_term,
        total: base_term + integral_term,
        upper_bound: false,
        limit: Some(limit.kind),
        mass,
        inputs: format!("psi={}", psi.label()),
        extras: BTreeMap::new(),
    })
}

/// The unkilled potential density `u^β(x−y)` behind an exponentially killed family.
fn unkilled(family: &KernelFamily) -> Result<KernelFamily> {
    match family {
        KernelFamily::LevyExpKilled { psi, beta } | KernelFamily::LevyExpKilledAtZero { psi, beta } => {
            Ok(KernelFamily::LevyExpKilled {
                psi: psi.clone(),
                beta: *beta,
            })
        }
        KernelFamily::ClosedFormExponential { k } => Ok(KernelFamily::ClosedFormExponential { k: *k }),
        _ => Err(Error::InvalidParameter(format!(
            "example 2 needs an exponentially killed Levy kernel, got {}",
            family.label()
        ))),
    }
}

/// `f_{u^β,μ}(0)/(2u^β(0)) + (1/2C) ∫ (σ_β²)' dμ`; an upper bound.
pub fn c_example2(family: &KernelFamily, mu: &FiniteMeasure) -> Result<ConstantReport> {
    let tol = Tolerance::default();
    let u = unkilled(family)?;
    mu.validate_for(&u)?;
    let mass = mu.total_mass()?;
    if mu.is_zero() {
        return Ok(ConstantReport {
            example: 2,
            base_term: 0.0,
            integral_term: 0.0,
            total: 0.0,
            upper_bound: true,
            limit: None,
            mass,
            inputs: u.label(),
            extras: BTreeMap::new(),
        });
    }
    let f0 = left_potential(&u, mu, 0.0, &tol)?;
    let u0 = u.eval_with(0.0, 0.0, &tol)?;
    let base_term = f0 / (2.0 * u0);
    let limit = t_over_sigma_limit(&u, &tol)?;
    let integral_term = match limit.kind {
        LimitKind::Zero => 0.0,
        LimitKind::Positive(c) => derivative_integral(&u, mu, &tol)? / (2.0 * c),
    };
    let mut extras = BTreeMap::new();
    extras.insert("f_u_mu_0".into(), f0);
    extras.insert("u_0".into(), u0);
    Ok(ConstantReport {
        example: 2,
        base_term,
        integral_term,
        total: base_term + integral_term,
        upper_bound: true,
        limit: Some(limit.kind),
        mass,
        inputs: u.label(),
        extras,
    })
}

const SMALL_X: f64 = 1e-6;

/// Killed diffusion with scale `s`: the constant is `|μ|`.
pub fn c_example3(scale: &ScaleFunction, mu: &FiniteMeasure) -> Result<ConstantReport> {
    let family = KernelFamily::DiffusionKilledAtZero { scale: scale.clone() };
    family.validate()?;
    mu.validate_for(&family)?;
    let mass = mu.total_mass()?;
    let mut extras = BTreeMap::new();
    if !mu.is_zero() {
        let f = left_potential(&family, mu, SMALL_X, &Tolerance::default())?;
        extras.insert("ratio_f_over_s".into(), f / scale.eval(SMALL_X));
    }
    Ok(ConstantReport {
        example: 3,
        base_term: mass,
        integral_term: 0.0,
        total: mass,
        upper_bound: false,
        limit: None,
        mass,
        inputs: format!("scale={}", scale.label()),
        extras,
    })
}

/// Exponentially killed diffusion: the constant is `∫ q/q(0) dμ`.
pub fn c_example4(pair: &DiffusionPair, mu: &FiniteMeasure) -> Result<ConstantReport> {
    pair.validate()?;
    let family = KernelFamily::DiffusionExpKilledAtZero { pair: pair.clone() };
    mu.validate_for(&family)?;
    let tol = Tolerance::default();
    let mass = mu.total_mass()?;
    let q0 = pair.q(0.0);
    let total = mu.integrate(|y| Ok(pair.q(y) / q0), &[], &tol)?;
    let rho = pair.rho0();
    let mut extras = BTreeMap::new();
    extras.insert("rho0".into(), rho);
    if !mu.is_zero() {
        let f = left_potential(&family, mu, SMALL_X, &tol)?;
        extras.insert("ratio_f_over_rho_x".into(), f / (rho * SMALL_X));
    }
    Ok(ConstantReport {
        example: 4,
        base_term: total,
        integral_term: 0.0,
        total,
        upper_bound: false,
        limit: None,
        mass,
        inputs: format!("pair={}", pair.label()),
        extras,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioLimit {
    pub estimate: f64,
    /// Gap between the last two extrapolations.
    pub error: f64,
    pub ratios: Vec<f64>,
    pub monotone: bool,
}

/// Extrapolate `num(t)/den(t)` along a sequence decreasing to 0 by Aitken's
/// Δ² on the last three points; the previous triple gives the error.
pub fn ratio_limit<N, D>(num: N, den: D, ts: &[f64]) -> Result<RatioLimit>
where
    N: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    if ts.len() < 4 {
        return Err(Error::InvalidParameter("ratio_limit needs at least four points".into()));
    }
    let ratios = ts
        .iter()
        .map(|&t| Ok(num(t)? / den(t)?))
        .collect::<Result<Vec<f64>>>()?;
    if ratios.iter().any(|r| !r.is_finite()) {
        return Err(Error::Inconclusive("ratio is not finite on the sequence".into()));
    }
    let n = ratios.len();
    let estimate = aitken(ratios[n - 3], ratios[n - 2], ratios[n - 1]);
    let previous = aitken(ratios[n - 4], ratios[n - 3], ratios[n - 2]);
    let error = (estimate - previous).abs();
    let diffs: Vec<f64> = ratios.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = diffs.iter().all(|d| *d >= 0.0) || diffs.iter().all(|d| *d <= 0.0);
    if error > LIMIT_TOL * estimate.abs().max(1.0) {
        return Err(Error::Inconclusive(format!(
            "extrapolations disagree: {estimate:e} vs {previous:e}"
        )));
    }
    Ok(RatioLimit {
        estimate,
        error,
        ratios,
        monotone,
    })
}

/// `t = 2^{-j}` for `j` in `first..=last`.
pub fn dyadic(first: i32, last: i32) -> Vec<f64> {
    (first..=last).map(|j| 0.5f64.powi(j)).collect()
}

/// Least-squares slope of `log f` against `log t` over `[t_lo, t_hi]`.
pub fn reg_var_index<F>(f: F, t_lo: f64, t_hi: f64, points: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(t_lo > 0.0 && t_hi > t_lo) || points < 2 {
        return Err(Error::InvalidParameter("need 0 < t_lo < t_hi and two points".into()));
    }
    let (a, b) = (t_lo.ln(), t_hi.ln());
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for k in 0..points {
        let x = a + (b - a) * k as f64 / (points - 1) as f64;
        let v = f(x.exp())?;
        if !(v > 0.0) {
            return Err(Error::Domain(format!("function is not positive at {}", x.exp())));
        }
        xs.push(x);
        ys.push(v.ln());
    }
    let mx = xs.iter().sum::<f64>() / points as f64;
    let my = ys.iter().sum::<f64>() / points as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::sigma0_sq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn classification_examples() {
        let b = KernelFamily::LevyKilledAtZero { psi: CharExponent::brownian(1.0).unwrap() };
        match t_over_sigma_limit(&b, &tol()).unwrap().kind {
            LimitKind::Positive(c) => assert!((c - 1.0).abs() < 1e-6),
            k => panic!("{k:?}"),
        }
        let s = KernelFamily::LevyKilledAtZero { psi: CharExponent::stable(1.5, 1.0).unwrap() };
        assert_eq!(t_over_sigma_limit(&s, &tol()).unwrap().kind, LimitKind::Zero);
        let e = KernelFamily::ClosedFormExponential { k: 2.5 };
        match t_over_sigma_limit(&e, &tol()).unwrap().kind {
            LimitKind::Positive(c) => assert!((c - 2.5).abs() < 1e-9),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn example1() {
        let b = CharExponent::brownian(1.0).unwrap();
        let sym = FiniteMeasure::from_atoms(vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        let r = c_example1(&b, &sym).unwrap();
        assert!((r.total - 0.5).abs() < 1e-8 && r.integral_term.abs() < 1e-8);

        let neg = FiniteMeasure::from_atoms(vec![(-0.5, 1.0), (-2.0, 2.0)]).unwrap();
        let r = c_example1(&b, &neg).unwrap();
        assert!((r.integral_term + 1.5).abs() < 1e-6);
        assert!(r.total.abs() < 1e-6);
        assert!((r.lil_constant() - 1.0).abs() < 1e-6);

        let st = CharExponent::stable(1.5, 1.0).unwrap();
        let r = c_example1(&st, &FiniteMeasure::dirac(1.0)).unwrap();
        assert_eq!(r.total, 0.5);
        assert_eq!(r.limit, Some(LimitKind::Zero));
    }

    #[test]
    fn example2_closed_form() {
        let e = KernelFamily::ClosedFormExponential { k: 1.0 };
        let r = c_example2(&e, &FiniteMeasure::dirac(-1.0)).unwrap();
        let em1 = (-1.0f64).exp();
        assert!((r.base_term - em1 / 2.0).abs() < 1e-12);
        assert!((r.integral_term + em1 / 2.0).abs() < 1e-8);
        assert!(r.total.abs() < 1e-8 && r.upper_bound);

        let sym = FiniteMeasure::from_atoms(vec![(1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let r = c_example2(&e, &sym).unwrap();
        assert!((r.total - em1).abs() < 1e-8);

        let r = c_example2(&e, &FiniteMeasure::zero()).unwrap();
        assert_eq!((r.base_term, r.total), (0.0, 0.0));
        assert!(c_example2(&KernelFamily::min_kernel(), &sym).is_err());
    }

    #[test]
    fn examples_3_and_4() {
        let r = c_example3(&ScaleFunction::Identity, &FiniteMeasure::dirac(0.5)).unwrap();
        assert_eq!(r.total, 1.0);
        assert_eq!(r.extras["ratio_f_over_s"], 1.0);
        let three = FiniteMeasure::from_atoms(vec![(0.2, 1.0), (0.9, 2.0)]).unwrap();
        assert_eq!(c_example3(&ScaleFunction::Identity, &three).unwrap().total, 3.0);

        let pair = DiffusionPair::exponential(1.0).unwrap();
        let r = c_example4(&pair, &FiniteMeasure::dirac(1.0)).unwrap();
        assert!((r.extras["rho0"] - 1.0).abs() < 1e-15);
        assert!((r.total - (-1.0f64).exp()).abs() < 1e-15);
        assert!((r.extras["ratio_f_over_rho_x"] - r.total).abs() < 1e-6);
        assert_eq!(c_example4(&pair, &FiniteMeasure::zero()).unwrap().total, 0.0);
    }

    #[test]
    fn ratio_limits() {
        let ts = dyadic(2, 30);
        let id = |t: f64| Ok(t);
        assert!((ratio_limit(id, id, &ts).unwrap().estimate - 1.0).abs() < 1e-12);
        let r = ratio_limit(|t: f64| Ok(-(-t).exp_m1()), id, &ts).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-9 && r.monotone);
        let r = ratio_limit(|t: f64| Ok(t * t), id, &ts).unwrap();
        assert!(r.estimate.abs() < 1e-9);
        assert!(ratio_limit(|t: f64| Ok(t.ln().sin()), id, &ts).is_err());
    }

    #[test]
    fn regular_variation() {
        assert!((reg_var_index(Ok, 1e-6, 1e-2, 9).unwrap() - 1.0).abs() < 1e-12);
        assert!((reg_var_index(|t: f64| Ok(t.sqrt()), 1e-6, 1e-2, 9).unwrap() - 0.5).abs() < 1e-12);
        let psi = CharExponent::stable(1.5, 1.0).unwrap();
        let idx = reg_var_index(|t| sigma0_sq(&psi, t, &tol()), 1e-6, 1e-2, 9).unwrap();
        assert!((idx - 0.5).abs() < 1e-6);
    }
}
