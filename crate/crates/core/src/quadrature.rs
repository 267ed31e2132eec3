//! Adaptive Gauss–Kronrod quadrature and the two semi-infinite pieces the
//! Lévy kernels need: power-law tails and cosine (Fourier) tails.
//!
//! Cosine tails are integrated lobe by lobe between consecutive zeros of
//! `cos t`. The lobe contributions alternate in sign once the amplitude is
//! monotone, and the partial sums are accelerated by repeated averaging
//! (the Euler transform of the tail), which only ever forms convex
//! combinations and therefore does not amplify rounding noise.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative and absolute error targets for a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-8, abs: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    /// Error budget for a result of size `value`.
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }

    /// Fail with `QuadratureFailure` unless `est` meets the budget.
    pub fn accept(&self, est: Estimate) -> Result<f64> {
        let target = self.target(est.value);
        if est.value.is_finite() && est.error <= target {
            Ok(est.value)
        } else {
            Err(Error::QuadratureFailure {
                value: est.value,
                error: est.error,
                target,
            })
        }
    }
}

/// An integral value with its (estimated) absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value - rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl Estimate {
    pub fn scale(self, c: f64) -> Estimate {
        Estimate {
            value: self.value * c,
            error: self.error * c.abs(),
        }
    }
}

// 21-point Kronrod abscissae; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208977211580,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel { a, b, value, error }
}

const MAX_PANELS: usize = 2000;

/// Adaptive 21-point Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Returns the best estimate reached; whether the error is acceptable is up to
/// the caller (see [`Tolerance::accept`]).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0 };
    }
    let mut panels = vec![gk21(&f, a, b)];
    loop {
        let (value, error) = panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= tol.target(value) || panels.len() >= MAX_PANELS {
            return Estimate { value, error };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            // Interval exhausted at machine resolution.
            panels.push(p);
            let (value, error) = panels
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            return Estimate { value, error };
        }
        panels.push(gk21(&f, p.a, mid));
        panels.push(gk21(&f, mid, p.b));
    }
}

/// `∫_{lambda0}^∞ h(λ) dλ` for `h` decaying like `λ^{-p}` with `p > 1`.
///
/// The substitution `λ = λ0 s^{-1/(p-1)}` maps the tail onto `(0, 1]` and makes
/// the integrand exactly constant for a pure power law.
pub fn power_tail<F: Fn(f64) -> f64>(h: F, lambda0: f64, p: f64, tol: &Tolerance) -> Estimate {
    assert!(p > 1.0 && lambda0 > 0.0);
    let q = p - 1.0;
    let g = |s: f64| {
        let lam = lambda0 * s.powf(-1.0 / q);
        if !lam.is_finite() {
            return 0.0;
        }
        let v = lam * h(lam) / (q * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

// Lobe rule for the cosine tail.
const MIN_LOBES: usize = 32;
const AVERAGING_DEPTH: usize = 20;
const LOBE_STEP: usize = 8;
const MAX_LOBES: usize = 20_000;

fn euler_average(partial: &[f64]) -> f64 {
    let mut v = partial.to_vec();
    while v.len() > 1 {
        for i in 0..v.len() - 1 {
            v[i] = 0.5 * (v[i] + v[i + 1]);
        }
        v.pop();
    }
    v[0]
}

/// `∫_{(m+1/2)π}^∞ cos(t) g(t) dt` for an amplitude `g` that is eventually
/// monotone and tends to zero.
pub fn cosine_tail<F: Fn(f64) -> f64>(g: F, first_zero: usize, tol: &Tolerance) -> Estimate {
    let lobe_tol = Tolerance::new(1e-13, 0.0);
    let start = (first_zero as f64 + 0.5) * PI;
    let mut partial: Vec<f64> = Vec::with_capacity(MIN_LOBES * 2);
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut lobe_error = 0.0;
    let mut scale: f64 = 0.0;
    let mut previous: Option<(f64, f64)> = None;
    let mut k = 0usize;
    loop {
        while partial.len() < MIN_LOBES.max(k) {
            let a = start + partial.len() as f64 * PI;
            let lobe = integrate(|t| t.cos() * g(t), a, a + PI, &lobe_tol);
            // Neumaier summation keeps the partial sums at rounding level.
            let t = sum + lobe.value;
            if sum.abs() >= lobe.value.abs() {
                comp += (sum - t) + lobe.value;
            } else {
                comp += (lobe.value - t) + sum;
            }
            sum = t;
            lobe_error += lobe.error;
            partial.push(sum + comp);
            scale = scale.max((sum + comp).abs()).max(lobe.value.abs());
        }
        let n = partial.len();
        let est = euler_average(&partial[n - AVERAGING_DEPTH - 1..]);
        if let Some((prev, prev_diff)) = previous {
            let diff = (est - prev).abs();
            let stop = (0.01 * tol.rel * est.abs()).max(32.0 * f64::EPSILON * scale);
            if (diff <= stop && prev_diff <= 4.0 * stop) || n >= MAX_LOBES {
                return Estimate {
                    value: est,
                    error: diff.max(lobe_error).max(4.0 * f64::EPSILON * scale),
                };
            }
            previous = Some((est, diff));
        } else {
            previous = Some((est, f64::INFINITY));
        }
        k = n + LOBE_STEP;
    }
}

/// `∫_0^∞ cos(t) g(t) dt`: the half lobe `[0, π/2]` plus the lobe series.
pub fn cosine_transform<F: Fn(f64) -> f64>(g: F, tol: &Tolerance) -> Estimate {
    let head_tol = Tolerance::new(1e-13, 0.0);
    let head = integrate(|t| t.cos() * g(t), 0.0, 0.5 * PI, &head_tol);
    head + cosine_tail(g, 0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_integrates_polynomials_exactly() {
        let tol = Tolerance::default();
        let est = integrate(|x| 3.0 * x * x + 2.0 * x + 1.0, 0.0, 2.0, &tol);
        assert!((est.value - 14.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let tol = Tolerance::new(1e-10, 0.0);
        let est = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &tol);
        assert!((est.value - 2.0 / 3.0).abs() < 1e-10, "{est:?}");
        tol.accept(est).unwrap();
    }

    #[test]
    fn power_tail_of_pure_power_law_is_exact() {
        let tol = Tolerance::default();
        let est = power_tail(|l: f64| l.powf(-1.5), 4.0, 1.5, &tol);
        assert!((est.value - 1.0).abs() < 1e-14);
        let est = power_tail(|l: f64| 1.0 / (1.0 + l * l), 1.0, 2.0, &tol);
        assert!((est.value - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_transform_of_lorentzian() {
        // ∫_0^∞ cos(t a)/(1+t²) dt = (π/2) e^{-a}; scaled to unit frequency.
        let tol = Tolerance::default();
        for &a in &[0.1_f64, 1.0, 5.0] {
            let est = cosine_transform(|t| 1.0 / (a * (1.0 + (t / a).powi(2))), &tol);
            let exact = 0.5 * PI * (-a).exp();
            assert!((est.value - exact).abs() < 1e-12, "a={a}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn accept_rejects_large_error() {
        let tol = Tolerance::default();
        let bad = Estimate { value: 1.0, error: 1.0 };
        assert!(matches!(tol.accept(bad), Err(Error::QuadratureFailure { .. })));
    }
}
