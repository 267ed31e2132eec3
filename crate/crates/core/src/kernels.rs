//! Potential densities of killed Lévy processes and diffusions.
//!
//! Six base families are provided:
//!
//! | family | kernel |
//! |--------|--------|
//! | [`KernelFamily::LevyKilledAtZero`] | `Φ(x,y) = (σ⁰²(x) + σ⁰²(y) − σ⁰²(x−y))/2` |
//! | [`KernelFamily::LevyExpKilled`] | `u^β(x−y)` |
//! | [`KernelFamily::LevyExpKilledAtZero`] | `v^β(x,y) = u^β(x−y) − u^β(x)u^β(y)/u^β(0)` |
//! | [`KernelFamily::DiffusionKilledAtZero`] | `s(x) ∧ s(y)` |
//! | [`KernelFamily::DiffusionExpKilledAtZero`] | `p(x∧y)q(x∨y) − p(0)q(x)q(y)/q(0)` |
//! | [`KernelFamily::ClosedFormExponential`] | `e^{−K|x−y|}/2` |
//!
//! The Lévy families are Fourier integrals of `1/(β+ψ)`. With `a = |x|` and
//! `t = λa` every integral is taken at unit frequency:
//!
//! ```text
//! ∫_0^∞ (1 − cos λa) h(λ) dλ = (1/a) ∫_0^∞ 2 sin²(t/2) h(t/a) dt
//! ```
//!
//! The non-oscillatory part is integrated on half-period panels up to a zero
//! `T` of `cos t` inside the power-law regime of `ψ`; beyond `T` the `1·h`
//! piece is a power-law tail and the `cos t·h` piece a lobe series.

use std::f64::consts::PI;

use crate::diffusion::{DiffusionPair, ScaleFunction};
use crate::error::{Error, Result};
use crate::exponent::{check_integrability, CharExponent};
use crate::quadrature::{cosine_tail, cosine_transform, integrate, power_tail, Estimate, Tolerance};

const MAX_HEAD_LOBES: usize = 50_000;

/// `∫_0^∞ (1 − cos λa)/(β+ψ(λ)) dλ` for `a > 0`.
fn increment_integral(psi: &CharExponent, beta: f64, a: f64) -> Result<Estimate> {
    let p = psi.required_tail_exponent()?;
    let h = |lambda: f64| 1.0 / (beta + psi.eval(lambda));
    let scaled = |t: f64| h(t / a) / a;
    let lobe_tol = Tolerance::new(1e-13, 0.0);

    let m = ((psi.tail_start() * a / PI - 0.5).ceil()).max(0.0) as usize;
    if m > MAX_HEAD_LOBES {
        return Err(Error::QuadratureFailure {
            value: f64::NAN,
            error: f64::INFINITY,
            target: 0.0,
        });
    }
    let bump = |t: f64| {
        let s = (0.5 * t).sin();
        2.0 * s * s * scaled(t)
    };
    let mut head = integrate(bump, 0.0, 0.5 * PI, &lobe_tol);
    for k in 0..m {
        let lo = (k as f64 + 0.5) * PI;
        head = head + integrate(bump, lo, lo + PI, &lobe_tol);
    }
    let t_split = (m as f64 + 0.5) * PI;
    let tail = power_tail(h, t_split / a, p, &lobe_tol);
    let osc = cosine_tail(scaled, m, &Tolerance::new(1e-12, 0.0));
    Ok(head + tail - osc)
}

/// `(σ⁰)²(x) = (2/π) ∫_0^∞ (1 − cos λx)/ψ(λ) dλ`.
pub fn sigma0_sq(psi: &CharExponent, x: f64, tol: &Tolerance) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if !check_integrability(psi)? {
        return Err(Error::Indeterminate("1/(1+psi) is not integrable".into()));
    }
    let est = increment_integral(psi, 0.0, x.abs())?.scale(2.0 / PI);
    tol.accept(est)
}

/// `(σ^β)²(x) = (2/π) ∫_0^∞ (1 − cos λx)/(β+ψ(λ)) dλ = 2(u^β(0) − u^β(x))`.
pub fn sigma_beta_sq(psi: &CharExponent, beta: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    check_beta(beta)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let est = increment_integral(psi, beta, x.abs())?.scale(2.0 / PI);
    tol.accept(est)
}

/// `u^β(x) = (1/2π) ∫ cos(λx)/(β+ψ(λ)) dλ`.
pub fn u_beta(psi: &CharExponent, beta: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    check_beta(beta)?;
    let p = psi.required_tail_exponent()?;
    let h = |lambda: f64| 1.0 / (beta + psi.eval(lambda));
    let inner = Tolerance::new(1e-13, 0.0);
    let est = if x == 0.0 {
        let start = psi.tail_start();
        integrate(h, 0.0, start, &inner) + power_tail(h, start, p, &inner)
    } else {
        let a = x.abs();
        cosine_transform(|t| h(t / a) / a, &Tolerance::new(1e-12, 0.0))
    };
    tol.accept(est.scale(1.0 / PI))
}

/// `Φ(x,y) = (σ⁰²(x) + σ⁰²(y) − σ⁰²(x−y))/2`.
pub fn phi(psi: &CharExponent, x: f64, y: f64, tol: &Tolerance) -> Result<f64> {
    if x == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    let sx = sigma0_sq(psi, x, tol)?;
    if x == y {
        return Ok(sx);
    }
    let sy = sigma0_sq(psi, y, tol)?;
    let sxy = sigma0_sq(psi, x - y, tol)?;
    Ok(0.5 * (sx + sy - sxy))
}

/// `v^β(x,y) = u^β(x−y) − u^β(x)u^β(y)/u^β(0)`.
///
/// Evaluated through `d = u(0) − u = σ_β²/2` as
/// `d(x) + d(y) − d(x−y) − d(x)d(y)/u(0)`, which keeps full relative accuracy
/// near the origin where the direct form cancels.
pub fn v_beta(psi: &CharExponent, beta: f64, x: f64, y: f64, tol: &Tolerance) -> Result<f64> {
    check_beta(beta)?;
    if x == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    let u0 = u_beta(psi, beta, 0.0, tol)?;
    let d = |z: f64| sigma_beta_sq(psi, beta, z, tol).map(|s| 0.5 * s);
    let dx = d(x)?;
    let dy = if y.abs() == x.abs() { dx } else { d(y)? };
    let dxy = d(x - y)?;
    Ok(dx + dy - dxy - dx * dy / u0)
}

/// `u_{T0}(x,y) = s(x) ∧ s(y)` for `x, y ≥ 0`.
pub fn u_t0(s: &ScaleFunction, x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::Domain(format!("diffusion kernel needs x, y >= 0, got ({x}, {y})")));
    }
    Ok(s.eval(x).min(s.eval(y)))
}

/// Potential density of the exponentially killed diffusion started in
/// `(0, ∞)` and killed at 0.
pub fn v_tilde_beta(pair: &DiffusionPair, x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::Domain(format!("diffusion kernel needs x, y >= 0, got ({x}, {y})")));
    }
    if x == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let ratio = pair.p(0.0) / pair.q(0.0);
    Ok(pair.p(lo) * pair.q(hi) - ratio * pair.q(lo) * pair.q(hi))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")))
    }
}

/// Where a family's kernel lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    /// `ℝ` (the origin included; killed-at-zero kernels vanish there).
    Line,
    /// `[0, ∞)`.
    HalfLine,
}

/// One of the six base potential densities.
#[derive(Debug, Clone)]
pub enum KernelFamily {
    LevyKilledAtZero { psi: CharExponent },
    LevyExpKilled { psi: CharExponent, beta: f64 },
    LevyExpKilledAtZero { psi: CharExponent, beta: f64 },
    DiffusionKilledAtZero { scale: ScaleFunction },
    DiffusionExpKilledAtZero { pair: DiffusionPair },
    ClosedFormExponential { k: f64 },
}

impl KernelFamily {
    /// Killed Brownian motion, `x ∧ y`.
    pub fn min_kernel() -> Self {
        KernelFamily::DiffusionKilledAtZero {
            scale: ScaleFunction::Identity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelFamily::LevyKilledAtZero { psi } => {
                if !check_integrability(psi)? {
                    return Err(Error::InvalidParameter("1/(1+psi) is not integrable".into()));
                }
                Ok(())
            }
            KernelFamily::LevyExpKilled { psi, beta } | KernelFamily::LevyExpKilledAtZero { psi, beta } => {
                check_beta(*beta)?;
                psi.required_tail_exponent().map(|_| ())
            }
            KernelFamily::DiffusionKilledAtZero { scale } => scale.validate(&[0.0, 1e-6, 1e-3, 0.1, 1.0, 10.0]),
            KernelFamily::DiffusionExpKilledAtZero { pair } => pair.validate(),
            KernelFamily::ClosedFormExponential { k } => {
                if *k > 0.0 && k.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("K must be positive, got {k}")))
                }
            }
        }
    }

    pub fn state_space(&self) -> StateSpace {
        match self {
            KernelFamily::DiffusionKilledAtZero { .. } | KernelFamily::DiffusionExpKilledAtZero { .. } => {
                StateSpace::HalfLine
            }
            _ => StateSpace::Line,
        }
    }

    /// Families whose processes are killed on hitting the origin.
    pub fn killed_at_zero(&self) -> bool {
        !matches!(
            self,
            KernelFamily::LevyExpKilled { .. } | KernelFamily::ClosedFormExponential { .. }
        )
    }

    pub fn is_levy(&self) -> bool {
        matches!(
            self,
            KernelFamily::LevyKilledAtZero { .. }
                | KernelFamily::LevyExpKilled { .. }
                | KernelFamily::LevyExpKilledAtZero { .. }
                | KernelFamily::ClosedFormExponential { .. }
        )
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_with(x, y, &Tolerance::default())
    }

    pub fn eval_with(&self, x: f64, y: f64, tol: &Tolerance) -> Result<f64> {
        match self {
            KernelFamily::LevyKilledAtZero { psi } => phi(psi, x, y, tol),
            KernelFamily::LevyExpKilled { psi, beta } => u_beta(psi, *beta, x - y, tol),
            KernelFamily::LevyExpKilledAtZero { psi, beta } => v_beta(psi, *beta, x, y, tol),
            KernelFamily::DiffusionKilledAtZero { scale } => u_t0(scale, x, y),
            KernelFamily::DiffusionExpKilledAtZero { pair } => v_tilde_beta(pair, x, y),
            KernelFamily::ClosedFormExponential { k } => Ok(0.5 * (-k * (x - y).abs()).exp()),
        }
    }

    /// The increment variance `σ²(x)` tied to a Lévy family: `σ⁰²` when killed
    /// only at zero, `σ_β²` when exponentially killed, `1 − e^{−K|x|}` for the
    /// closed-form exponential kernel.
    pub fn sigma_sq(&self, x: f64, tol: &Tolerance) -> Result<f64> {
        match self {
            KernelFamily::LevyKilledAtZero { psi } => sigma0_sq(psi, x, tol),
            KernelFamily::LevyExpKilled { psi, beta } | KernelFamily::LevyExpKilledAtZero { psi, beta } => {
                sigma_beta_sq(psi, *beta, x, tol)
            }
            KernelFamily::ClosedFormExponential { k } => Ok(-(-k * x.abs()).exp_m1()),
            _ => Err(Error::Domain("sigma^2 is defined for the Levy families only".into())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            KernelFamily::LevyKilledAtZero { psi } => format!("levy_killed_at_zero[{}]", psi.label()),
            KernelFamily::LevyExpKilled { psi, beta } => format!("levy_exp_killed[{};beta={beta}]", psi.label()),
            KernelFamily::LevyExpKilledAtZero { psi, beta } => {
                format!("levy_exp_killed_at_zero[{};beta={beta}]", psi.label())
            }
            KernelFamily::DiffusionKilledAtZero { scale } => format!("diffusion_killed_at_zero[{}]", scale.label()),
            KernelFamily::DiffusionExpKilledAtZero { pair } => {
                format!("diffusion_exp_killed_at_zero[{}]", pair.label())
            }
            KernelFamily::ClosedFormExponential { k } => format!("closed_form_exponential[K={k}]"),
        }
    }
}

const RICHARDSON_LEVELS: usize = 4;
const DERIVATIVE_REL_TOL: f64 = 1e-6;

/// `(σ²)'(x)` by central differences with Richardson extrapolation over four
/// step halvings. Steps stay on the same side of the origin as `x`.
pub fn sigma_sq_derivative(family: &KernelFamily, x: f64, tol: &Tolerance) -> Result<f64> {
    if !family.is_levy() {
        return Err(Error::Domain("sigma^2 derivative needs a Levy family".into()));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("derivative requires x != 0, got {x}")));
    }
    let inner = Tolerance::new(tol.rel.min(1e-11), tol.abs.min(1e-14));
    let h0 = 0.125 * x.abs();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(RICHARDSON_LEVELS);
    for i in 0..RICHARDSON_LEVELS {
        let h = h0 / f64::from(1u32 << i);
        let d = (family.sigma_sq(x + h, &inner)? - family.sigma_sq(x - h, &inner)?) / (2.0 * h);
        let mut row = vec![d];
        for j in 1..=i {
            let factor = 4f64.powi(j as i32);
            let prev = &table[i - 1];
            row.push(row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0));
        }
        table.push(row);
    }
    let last = table[RICHARDSON_LEVELS - 1][RICHARDSON_LEVELS - 1];
    let previous = table[RICHARDSON_LEVELS - 2][RICHARDSON_LEVELS - 2];
    let scale = last.abs().max(1e-12 * family.sigma_sq(x, &inner)?.abs() / x.abs());
    if (last - previous).abs() <= DERIVATIVE_REL_TOL * scale {
        Ok(last)
    } else {
        Err(Error::DerivativeUnstable { x, last, previous })
    }
}
