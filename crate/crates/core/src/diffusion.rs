//! Scale functions and `(p, q)` pairs describing one-dimensional diffusions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scale function `s` with `s(0) = 0`, strictly increasing.
#[derive(Clone)]
pub enum ScaleFunction {
    Identity,
    Linear { slope: f64 },
    /// `s(x) = x^k` on `[0, ∞)`.
    Power { exponent: f64 },
    Custom { name: String, eval: RealFn },
}

impl fmt::Debug for ScaleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleFunction::Identity => write!(f, "Identity"),
            ScaleFunction::Linear { slope } => write!(f, "Linear({slope})"),
            ScaleFunction::Power { exponent } => write!(f, "Power({exponent})"),
            ScaleFunction::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl ScaleFunction {
    pub fn custom<F>(name: &str, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScaleFunction::Custom {
            name: name.to_string(),
            eval: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScaleFunction::Identity => x,
            ScaleFunction::Linear { slope } => slope * x,
            ScaleFunction::Power { exponent } => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.powf(*exponent)
                }
            }
            ScaleFunction::Custom { eval, .. } => eval(x),
        }
    }

    /// Check `s(0) = 0` and strict increase on the given sample points.
    pub fn validate(&self, samples: &[f64]) -> Result<()> {
        match self {
            ScaleFunction::Linear { slope } if *slope <= 0.0 => {
                return Err(Error::InvalidParameter(format!("scale slope must be positive, got {slope}")))
            }
            ScaleFunction::Power { exponent } if *exponent <= 0.0 => {
                return Err(Error::InvalidParameter(format!(
                    "scale power must be positive, got {exponent}"
                )))
            }
            _ => {}
        }
        if self.eval(0.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter("scale function must vanish at 0".into()));
        }
        let mut pts: Vec<f64> = samples.iter().copied().filter(|x| *x >= 0.0).collect();
        pts.sort_by(f64::total_cmp);
        for w in pts.windows(2) {
            if w[1] > w[0] && self.eval(w[1]) <= self.eval(w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "scale function is not strictly increasing between {} and {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            ScaleFunction::Identity => "identity".into(),
            ScaleFunction::Linear { slope } => format!("linear:{slope}"),
            ScaleFunction::Power { exponent } => format!("power:{exponent}"),
            ScaleFunction::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

/// Increasing/decreasing solutions `p`, `q` of the exponentially killed
/// diffusion, with derivative evaluators at the origin.
#[derive(Clone)]
pub enum DiffusionPair {
    /// `p(x) = a e^{kx}`, `q(x) = b e^{-kx}`.
    Exponential { k: f64, a: f64, b: f64 },
    Custom {
        name: String,
        p: RealFn,
        q: RealFn,
        dp0: f64,
        dq0: f64,
    },
}

impl fmt::Debug for DiffusionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusionPair::Exponential { k, a, b } => write!(f, "Exponential(k={k}, a={a}, b={b})"),
            DiffusionPair::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl DiffusionPair {
    /// `p = e^{kx}`, `q = e^{-kx}/2`; the base kernel is `e^{-k|x-y|}/2`.
    pub fn exponential(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
        }
        Ok(DiffusionPair::Exponential { k, a: 1.0, b: 0.5 })
    }

    pub fn p(&self, x: f64) -> f64 {
        match self {
            DiffusionPair::Exponential { k, a, .. } => a * (k * x).exp(),
            DiffusionPair::Custom { p, .. } => p(x),
        }
    }

    pub fn q(&self, x: f64) -> f64 {
        match self {
            DiffusionPair::Exponential { k, b, .. } => b * (-k * x).exp(),
            DiffusionPair::Custom { q, .. } => q(x),
        }
    }

    pub fn dp0(&self) -> f64 {
        match self {
            DiffusionPair::Exponential { k, a, .. } => k * a,
            DiffusionPair::Custom { dp0, .. } => *dp0,
        }
    }

    pub fn dq0(&self) -> f64 {
        match self {
            DiffusionPair::Exponential { k, b, .. } => -k * b,
            DiffusionPair::Custom { dq0, .. } => *dq0,
        }
    }

    /// `ρ(0) = p'(0) q(0) − q'(0) p(0)`.
    pub fn rho0(&self) -> f64 {
        self.dp0() * self.q(0.0) - self.dq0() * self.p(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if let DiffusionPair::Exponential { a, b, .. } = self {
            if *a <= 0.0 || *b <= 0.0 {
                return Err(Error::InvalidParameter("p and q must be positive".into()));
            }
        }
        if !(self.p(0.0) > 0.0 && self.q(0.0) > 0.0) {
            return Err(Error::InvalidParameter("p(0) and q(0) must be positive".into()));
        }
        if !(self.rho0() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho(0) = p'(0)q(0) - q'(0)p(0) must be positive, got {}",
                self.rho0()
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            DiffusionPair::Exponential { k, a, b } => format!("exponential:{k}:{a}:{b}"),
            DiffusionPair::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}
