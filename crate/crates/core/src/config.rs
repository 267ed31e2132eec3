//! Declarative descriptions of exponents, kernels and measures.
//!
//! ```json
//! {"family": "levy_exp_killed_at_zero",
//!  "psi": {"stable": {"p": 1.5, "c": 1.0}},
//!  "beta": 1.0,
//!  "mu": {"atoms": [[1.0, 0.5], [2.0, 0.5]], "density": null}}
//! ```
//!
//! The CLI also accepts short forms: `brownian:1`, `stable:1.5:1`,
//! `identity`, `power:2`, `exponential:1`, `atoms=[[0.5,1]]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionPair, ScaleFunction};
use crate::error::{Error, Result};
use crate::exponent::CharExponent;
use crate::experiment::{Bands, Denominator};
use crate::kernels::KernelFamily;
use crate::measure::{Density, FiniteMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiConfig {
    Brownian { gamma: f64 },
    Stable { p: f64, c: f64 },
}

impl PsiConfig {
    pub fn build(&self) -> Result<CharExponent> {
        match *self {
            PsiConfig::Brownian { gamma } => CharExponent::brownian(gamma),
            PsiConfig::Stable { p, c } => CharExponent::stable(p, c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleConfig {
    Identity,
    Linear { slope: f64 },
    Power { exponent: f64 },
}

impl ScaleConfig {
    pub fn build(&self) -> ScaleFunction {
        match *self {
            ScaleConfig::Identity => ScaleFunction::Identity,
            ScaleConfig::Linear { slope } => ScaleFunction::Linear { slope },
            ScaleConfig::Power { exponent } => ScaleFunction::Power { exponent },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PairConfig {
    Exponential { k: f64 },
}

impl PairConfig {
    pub fn build(&self) -> Result<DiffusionPair> {
        match *self {
            PairConfig::Exponential { k } => DiffusionPair::exponential(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub interval: [f64; 2],
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub density: Option<DensityConfig>,
}

impl MeasureConfig {
    pub fn build(&self) -> Result<FiniteMeasure> {
        let mut m = FiniteMeasure::from_atoms(self.atoms.clone())?;
        if let Some(d) = &self.density {
            m = m.with_density(Density::constant(d.interval[0], d.interval[1], d.value)?);
        }
        Ok(m)
    }
}

/// Every field is optional; commands pick what they need and CLI flags
/// override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub family: Option<String>,
    pub psi: Option<PsiConfig>,
    pub beta: Option<f64>,
    pub scale: Option<ScaleConfig>,
    pub pair: Option<PairConfig>,
    /// Rate of the closed-form exponential kernel.
    pub k: Option<f64>,
    pub mu: Option<MeasureConfig>,
    pub nu: Option<MeasureConfig>,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub l: Option<u32>,
    pub n: Option<u32>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub denominator: Option<Denominator>,
    pub bands: Option<Bands>,
    pub example: Option<u8>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn exponent(&self) -> Result<CharExponent> {
        self.psi
            .as_ref()
            .ok_or_else(|| Error::Config("psi is required for this family".into()))?
            .build()
    }

    fn need_beta(&self) -> Result<f64> {
        self.beta.ok_or_else(|| Error::Config("beta is required for this family".into()))
    }

    /// Fill in `family` from the pieces present when it is not named:
    /// `psi` and `beta` give the exponential Lévy kernel killed at zero,
    /// `psi` alone the Lévy kernel killed at zero, `pair`, `k` and `scale`
    /// their own families, and nothing at all `x ∧ y`.
    pub fn infer_family(&mut self) {
        if self.family.is_some() {
            return;
        }
        let name = match (&self.psi, self.beta, &self.pair, self.k, &self.scale) {
            (Some(_), Some(_), ..) => "levy_exp_killed_at_zero",
            (Some(_), None, ..) => "levy_killed_at_zero",
            (None, _, Some(_), ..) => "diffusion_exp_killed_at_zero",
            (None, _, None, Some(_), _) => "closed_form_exponential",
            _ => "diffusion_killed_at_zero",
        };
        self.family = Some(name.into());
    }

    /// Build the base kernel family named by `family`.
    pub fn kernel_family(&self) -> Result<KernelFamily> {
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| Error::Config("family is required".into()))?;
        let fam = match name {
            "levy_killed_at_zero" => KernelFamily::LevyKilledAtZero { psi: self.exponent()? },
            "levy_exp_killed" => KernelFamily::LevyExpKilled {
                psi: self.exponent()?,
                beta: self.need_beta()?,
            },
            "levy_exp_killed_at_zero" => KernelFamily::LevyExpKilledAtZero {
                psi: self.exponent()?,
                beta: self.need_beta()?,
            },
            "diffusion_killed_at_zero" | "min" => KernelFamily::DiffusionKilledAtZero {
                scale: self.scale.as_ref().map_or(ScaleFunction::Identity, ScaleConfig::build),
            },
            "diffusion_exp_killed_at_zero" => KernelFamily::DiffusionExpKilledAtZero {
                pair: self
                    .pair
                    .as_ref()
                    .ok_or_else(|| Error::Config("pair is required for this family".into()))?
                    .build()?,
            },
            "closed_form_exponential" => KernelFamily::ClosedFormExponential {
                k: self.k.ok_or_else(|| Error::Config("k is required for this family".into()))?,
            },
            other => return Err(Error::Config(format!("unknown family '{other}'"))),
        };
        fam.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(fam)
    }

    pub fn measure(&self) -> Result<Option<FiniteMeasure>> {
        self.mu.as_ref().map(MeasureConfig::build).transpose()
    }

    pub fn second_measure(&self) -> Result<Option<FiniteMeasure>> {
        self.nu.as_ref().map(MeasureConfig::build).transpose()
    }
}

fn number(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{what}: '{s}' is not a number")))
}

/// `brownian:γ` or `stable:p[:c]`.
pub fn parse_psi(s: &str) -> Result<PsiConfig> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["brownian"] => Ok(PsiConfig::Brownian { gamma: 1.0 }),
        ["brownian", g] => Ok(PsiConfig::Brownian { gamma: number(g, "gamma")? }),
        ["stable", p] => Ok(PsiConfig::Stable { p: number(p, "p")?, c: 1.0 }),
        ["stable", p, c] => Ok(PsiConfig::Stable {
            p: number(p, "p")?,
            c: number(c, "c")?,
        }),
        _ if s.trim_start().starts_with('{') => Ok(serde_json::from_str(s)?),
        _ => Err(Error::Config(format!("cannot parse psi '{s}' (brownian:G, stable:P[:C])"))),
    }
}

/// `identity`, `linear:a`, `power:k`.
pub fn parse_scale(s: &str) -> Result<ScaleConfig> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["identity"] => Ok(ScaleConfig::Identity),
        ["linear", a] => Ok(ScaleConfig::Linear { slope: number(a, "slope")? }),
        ["power", k] => Ok(ScaleConfig::Power { exponent: number(k, "exponent")? }),
        _ => Err(Error::Config(format!("cannot parse scale '{s}' (identity, linear:A, power:K)"))),
    }
}

/// `exponential:k`.
pub fn parse_pair(s: &str) -> Result<PairConfig> {
    match s.split_once(':') {
        Some(("exponential", k)) => Ok(PairConfig::Exponential { k: number(k, "k")? }),
        _ => Err(Error::Config(format!("cannot parse pair '{s}' (exponential:K)"))),
    }
}

/// JSON object, or `atoms=[[x,w],...]` and `density=[a,b,value]` joined by `;`.
pub fn parse_measure(s: &str) -> Result<MeasureConfig> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    let mut cfg = MeasureConfig::default();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in measure, got '{part}'")))?;
        match key.trim() {
            "atoms" => cfg.atoms = serde_json::from_str(value)?,
            "density" => {
                let v: [f64; 3] = serde_json::from_str(value)?;
                cfg.density = Some(DensityConfig {
                    interval: [v[0], v[1]],
                    value: v[2],
                });
            }
            other => return Err(Error::Config(format!("unknown measure key '{other}'"))),
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_document() {
        let c = Config::from_json(
            r#"{"family":"levy_exp_killed_at_zero","psi":{"stable":{"p":1.5,"c":1.0}},"beta":1.0,
                "mu":{"atoms":[[1.0,0.5],[2.0,0.5]],"density":null}}"#,
        )
        .unwrap();
        let fam = c.kernel_family().unwrap();
        assert!(matches!(fam, KernelFamily::LevyExpKilledAtZero { beta, .. } if beta == 1.0));
        assert_eq!(c.measure().unwrap().unwrap().total_mass().unwrap(), 1.0);
        assert!(Config::from_json(r#"{"familly":"x"}"#).is_err());
    }

    #[test]
    fn short_forms() {
        assert_eq!(parse_psi("brownian:1").unwrap(), PsiConfig::Brownian { gamma: 1.0 });
        assert_eq!(parse_psi("stable:1.5:2").unwrap(), PsiConfig::Stable { p: 1.5, c: 2.0 });
        assert!(parse_psi("cauchy").is_err());
        assert_eq!(parse_scale("power:2").unwrap(), ScaleConfig::Power { exponent: 2.0 });
        assert_eq!(parse_pair("exponential:3").unwrap(), PairConfig::Exponential { k: 3.0 });
        let m = parse_measure("atoms=[[0.5,1]]").unwrap();
        assert_eq!(m.atoms, vec![(0.5, 1.0)]);
        let m = parse_measure("atoms=[[3,1]]; density=[1,2,0.5]").unwrap();
        assert!((m.build().unwrap().total_mass().unwrap() - 1.5).abs() < 1e-12);
        assert!(parse_measure("weights=[1]").is_err());
    }

    #[test]
    fn missing_pieces_are_config_errors() {
        let c = Config {
            family: Some("levy_exp_killed".into()),
            psi: Some(PsiConfig::Brownian { gamma: 1.0 }),
            ..Config::default()
        };
        assert!(matches!(c.kernel_family(), Err(Error::Config(_))));
        let c = Config {
            family: Some("closed_form_exponential".into()),
            k: Some(-1.0),
            ..Config::default()
        };
        assert!(matches!(c.kernel_family(), Err(Error::Config(_))));
    }
}
