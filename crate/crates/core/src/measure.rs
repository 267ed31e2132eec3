//! Finite positive measures, left potentials and augmented kernels.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, StateSpace};
use crate::quadrature::{integrate, Tolerance};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolutely continuous part of a measure, supported on `[lo, hi]`.
#[derive(Clone)]
pub struct Density {
    pub lo: f64,
    pub hi: f64,
    pub name: String,
    eval: RealFn,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density({} on [{}, {}])", self.name, self.lo, self.hi)
    }
}

impl Density {
    pub fn new<F>(name: &str, lo: f64, hi: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("density support [{lo}, {hi}] is not an interval")));
        }
        Ok(Density {
            lo,
            hi,
            name: name.to_string(),
            eval: Arc::new(f),
        })
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::InvalidParameter(format!("density value must be positive, got {value}")));
        }
        Self::new(&format!("constant:{value}"), lo, hi, move |_| value)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            (self.eval)(x)
        }
    }
}

/// `μ = Σ w_k δ_{x_k} + ρ(v) dv`.
#[derive(Debug, Clone, Default)]
pub struct FiniteMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub density: Option<Density>,
}

impl FiniteMeasure {
    /// The zero measure. Allowed so that `μ = 0` reduces every augmented
    /// object to its base.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn dirac(x: f64) -> Self {
        FiniteMeasure {
            atoms: vec![(x, 1.0)],
            density: None,
        }
    }

    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = FiniteMeasure { atoms, density: None };
        m.check_weights()?;
        Ok(m)
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.density = Some(density);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_none()
    }

    fn check_weights(&self) -> Result<()> {
        for &(x, w) in &self.atoms {
            if !(w > 0.0 && w.is_finite() && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("atom ({x}, {w}) must have finite location and positive weight")));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.1).sum();
        let dens = match &self.density {
            Some(d) => Tolerance::default().accept(integrate(|v| d.eval(v), d.lo, d.hi, &Tolerance::new(1e-12, 0.0)))?,
            None => 0.0,
        };
        Ok(atoms + dens)
    }

    /// Integrate `h` against `μ`. `breaks` are points where `h` may have a kink.
    pub fn integrate<F>(&self, h: F, breaks: &[f64], tol: &Tolerance) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let mut total = 0.0;
        for &(x, w) in &self.atoms {
            total += w * h(x)?;
        }
        if let Some(d) = &self.density {
            let mut cuts = vec![d.lo];
            cuts.extend(breaks.iter().copied().filter(|b| *b > d.lo && *b < d.hi));
            cuts.push(d.hi);
            cuts.sort_by(f64::total_cmp);
            // Errors from `h` inside the integrand are surfaced after the pass.
            let failure: RefCell<Option<Error>> = RefCell::new(None);
            let integrand = |v: f64| match h(v) {
                Ok(value) => value * d.eval(v),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            };
            let inner = Tolerance::new(tol.rel * 0.1, tol.abs * 0.1);
            for w in cuts.windows(2) {
                let est = integrate(integrand, w[0], w[1], &inner);
                total += tol.accept(est)?;
            }
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
        }
        Ok(total)
    }

    /// Check the support against the standing assumptions of a family:
    /// no mass at 0, and support in `(0, ∞)` for the diffusion families.
    pub fn validate_for(&self, family: &KernelFamily) -> Result<()> {
        self.check_weights()?;
        let half_line = family.state_space() == StateSpace::HalfLine;
        for &(x, _) in &self.atoms {
            if x == 0.0 {
                return Err(Error::Domain("measure has an atom at 0".into()));
            }
            if half_line && x < 0.0 {
                return Err(Error::Domain(format!("atom at {x} outside (0, inf)")));
            }
        }
        if let Some(d) = &self.density {
            if d.lo <= 0.0 && d.hi >= 0.0 {
                return Err(Error::Domain(format!("density support [{}, {}] contains 0", d.lo, d.hi)));
            }
            if half_line && d.hi < 0.0 {
                return Err(Error::Domain("density supported on the negative half-line".into()));
            }
        }
        Ok(())
    }
}

/// `f_{u,μ}(t) = ∫ u(v, t) dμ(v)`.
pub fn left_potential(family: &KernelFamily, mu: &FiniteMeasure, t: f64, tol: &Tolerance) -> Result<f64> {
    mu.validate_for(family)?;
    if family.state_space() == StateSpace::HalfLine && t < 0.0 {
        return Err(Error::Domain(format!("t = {t} outside [0, inf)")));
    }
    mu.integrate(|v| family.eval_with(v, t, tol), &[t, 0.0], tol)
}

/// Second factor `g(s) = ∫ u(v, s) dν(v)`; same contract as [`left_potential`].
pub fn second_potential_g(family: &KernelFamily, nu: &FiniteMeasure, s: f64, tol: &Tolerance) -> Result<f64> {
    left_potential(family, nu, s, tol)
}

/// `u(x,y) + f(y)`, or `u(x,y) + g(x) f(y)` when `ν` is given.
#[derive(Debug, Clone)]
pub struct AugmentedKernel {
    pub base: KernelFamily,
    pub mu: FiniteMeasure,
    pub nu: Option<FiniteMeasure>,
    pub tol: Tolerance,
}

impl AugmentedKernel {
    pub fn new(base: KernelFamily, mu: FiniteMeasure) -> Result<Self> {
        mu.validate_for(&base)?;
        Ok(AugmentedKernel {
            base,
            mu,
            nu: None,
            tol: Tolerance::default(),
        })
    }

    pub fn with_second_factor(mut self, nu: FiniteMeasure) -> Result<Self> {
        nu.validate_for(&self.base)?;
        self.nu = Some(nu);
        Ok(self)
    }

    pub fn f(&self, t: f64) -> Result<f64> {
        left_potential(&self.base, &self.mu, t, &self.tol)
    }

    /// `g(s)`; identically 1 without a second factor.
    pub fn g(&self, s: f64) -> Result<f64> {
        match &self.nu {
            Some(nu) => second_potential_g(&self.base, nu, s, &self.tol),
            None => Ok(1.0),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.base.eval_with(x, y, &self.tol)? + self.g(x)? * self.f(y)?)
    }

    pub fn label(&self) -> String {
        let second = if self.nu.is_some() { "+g*f" } else { "+f" };
        format!("{}{second}", self.base.label())
    }
}

/// Outcome of `sup |f(s) − f(t)| / u(|t−s|, |t−s|)` over pairs in `(0, δ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBound {
    pub constant: f64,
    pub worst_pair: (f64, f64),
    pub pairs: usize,
}

/// Estimate the smallest `C` with `|f(s)−f(t)| ≤ C u(|t−s|,|t−s|)` on `n`
/// geometric points in `(0, δ]`. The constant is reported, not assumed.
pub fn increment_bound(family: &KernelFamily, mu: &FiniteMeasure, delta: f64, n: usize, tol: &Tolerance) -> Result<IncrementBound> {
    if !(delta > 0.0) || n < 2 {
        return Err(Error::InvalidParameter("need delta > 0 and at least two points".into()));
    }
    let pts: Vec<f64> = (0..n).map(|k| delta * 0.5f64.powf(k as f64 * 12.0 / n as f64)).collect();
    let fv = pts.iter().map(|&t| left_potential(family, mu, t, tol)).collect::<Result<Vec<_>>>()?;
    let mut best = IncrementBound {
        constant: 0.0,
        worst_pair: (pts[0], pts[0]),
        pairs: 0,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let h = (pts[i] - pts[j]).abs();
            let d = family.eval_with(h, h, tol)?;
            if d <= 0.0 {
                continue;
            }
            let c = (fv[i] - fv[j]).abs() / d;
            best.pairs += 1;
            if c > best.constant {
                best.constant = c;
                best.worst_pair = (pts[i], pts[j]);
            }
        }
    }
    Ok(best)
}
