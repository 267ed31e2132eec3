//! Desk-scale LIL experiments, the envelope probability bound, and report
//! emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::g12;
use crate::kernels::KernelFamily;
use crate::matrixlab::{build_kernel_matrix, lu_inverse, normalize_matrix, CheckRecord, Grid};
use crate::measure::{left_potential, FiniteMeasure};
use crate::quadrature::Tolerance;
use crate::sampler::{replication_rng, sample_permanental, PermanentalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `u(t,t)`.
    Diagonal,
    /// `u(t,t) + f(t)`.
    DiagonalPlusPotential,
}

/// Acceptance bands on the terminal running maxima. Any band may be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bands {
    /// Median must lie in `[lo, hi]`.
    pub median: Option<(f64, f64)>,
    /// At least `fraction` of replications at or below `level`.
    pub upper: Option<(f64, f64)>,
    /// At least `fraction` of replications at or above `level`.
    pub lower: Option<(f64, f64)>,
}

impl Bands {
    pub fn default_for(den: Denominator) -> Self {
        match den {
            Denominator::Diagonal => Bands {
                median: Some((0.6, 1.4)),
                upper: None,
                lower: Some((0.5, 0.9)),
            },
            Denominator::DiagonalPlusPotential => Bands {
                median: None,
                upper: Some((1.2, 0.95)),
                lower: None,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct LilSpec {
    pub family: KernelFamily,
    pub mu: Option<FiniteMeasure>,
    pub alpha: f64,
    pub theta: f64,
    pub l: u32,
    pub n: u32,
    pub reps: usize,
    pub seed: u64,
    pub denominator: Denominator,
    pub bands: Bands,
}

impl LilSpec {
    /// Killed Brownian motion, `k = 1`, `θ = 1/2`, `j ∈ [3, 40]`, 200 replications.
    pub fn killed_brownian(seed: u64) -> Self {
        LilSpec {
            family: KernelFamily::min_kernel(),
            mu: None,
            alpha: 0.5,
            theta: 0.5,
            l: 3,
            n: 40,
            reps: 200,
            seed,
            denominator: Denominator::Diagonal,
            bands: Bands::default_for(Denominator::Diagonal),
        }
    }

    /// Same, with the denominator enlarged by the left potential of `mu`.
    pub fn with_potential(mut self, mu: FiniteMeasure) -> Self {
        self.mu = Some(mu);
        self.denominator = Denominator::DiagonalPlusPotential;
        self.bands = Bands::default_for(self.denominator);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
}

/// Linear-interpolation quantile of unsorted data.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, frac) = (h.floor() as usize, h.fract());
    if lo + 1 < v.len() {
        v[lo] + frac * (v[lo + 1] - v[lo])
    } else {
        v[lo]
    }
}

impl Quantiles {
    fn of(data: &[f64]) -> Option<Self> {
        (!data.is_empty()).then(|| Quantiles {
            p05: quantile(data, 0.05),
            p50: quantile(data, 0.5),
            p95: quantile(data, 0.95),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub x: Vec<f64>,
    pub ratio: Vec<f64>,
    pub running_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl From<CheckRecord> for BandCheck {
    fn from(r: CheckRecord) -> Self {
        BandCheck {
            name: r.name,
            value: r.value,
            bound: r.bound,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilReport {
    pub kernel: String,
    pub alpha: f64,
    pub theta: f64,
    pub seed: u64,
    pub denominator_kind: Denominator,
    pub indices: Vec<u32>,
    pub points: Vec<f64>,
    pub denominators: Vec<f64>,
    pub replications: Vec<Replication>,
    pub terminal: Vec<f64>,
    pub summary: Option<Quantiles>,
    pub checks: Vec<BandCheck>,
    pub pass: bool,
}

impl LilReport {
    pub fn monotone(&self) -> bool {
        self.replications
            .iter()
            .all(|r| r.running_max.windows(2).all(|w| w[1] >= w[0]))
    }

    pub fn fraction_at_most(&self, level: f64) -> f64 {
        fraction(&self.terminal, |v| v <= level)
    }

    pub fn fraction_at_least(&self, level: f64) -> f64 {
        fraction(&self.terminal, |v| v >= level)
    }
}

fn fraction(v: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().filter(|&&x| pred(x)).count() as f64 / v.len() as f64
}

/// `log log (1/t)`, defined when `1/t > e`.
pub fn log_log_inv(t: f64) -> Result<f64> {
    let ll = (-t.ln()).ln();
    if ll > 0.0 && ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::DegenerateGrid(format!("log log(1/t) <= 0 at t = {t}")))
    }
}

/// Running maxima of `X(t_j)/(den(t_j) log log 1/t_j)` over the grid.
pub fn running_maxima(x: &[f64], den: &[f64], loglog: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let ratio: Vec<f64> = x.iter().zip(den).zip(loglog).map(|((x, d), l)| x / (d * l)).collect();
    let mut best = f64::NEG_INFINITY;
    let running = ratio
        .iter()
        .map(|&r| {
            best = best.max(r);
            best
        })
        .collect();
    (ratio, running)
}

pub fn run_lil_experiment(spec: &LilSpec) -> Result<LilReport> {
    if spec.reps == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    spec.family.validate()?;
    let grid = Grid::geometric(spec.theta, spec.l, spec.n)?;
    let loglog = grid.points.iter().map(|&t| log_log_inv(t)).collect::<Result<Vec<_>>>()?;
    let m = build_kernel_matrix(&spec.family, &grid)?.entries;
    let tol = Tolerance::default();
    let denominators: Vec<f64> = match spec.denominator {
        Denominator::Diagonal => m.diagonal().iter().copied().collect(),
        Denominator::DiagonalPlusPotential => {
            let mu = spec
                .mu
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("denominator u+f needs a measure".into()))?;
            grid.points
                .iter()
                .enumerate()
                .map(|(k, &t)| Ok(m[(k, k)] + left_potential(&spec.family, mu, t, &tol)?))
                .collect::<Result<_>>()?
        }
    };
    let batch = sample_permanental(&PermanentalSpec::new(spec.alpha, m), spec.reps, spec.seed)?;
    let replications: Vec<Replication> = batch
        .values
        .into_iter()
        .map(|x| {
            let (ratio, running_max) = running_maxima(&x, &denominators, &loglog);
            Replication { x, ratio, running_max }
        })
        .collect();
    let terminal: Vec<f64> = replications.iter().map(|r| *r.running_max.last().expect("grid")).collect();
    let mut report = LilReport {
        kernel: spec.family.label(),
        alpha: spec.alpha,
        theta: spec.theta,
        seed: spec.seed,
        denominator_kind: spec.denominator,
        indices: (spec.l..=spec.n).collect(),
        points: grid.points.clone(),
        denominators,
        replications,
        summary: Quantiles::of(&terminal),
        terminal,
        checks: Vec::new(),
        pass: false,
    };
    report.checks = band_checks(&report, &spec.bands);
    report.pass = report.checks.iter().all(|c| c.pass);
    Ok(report)
}

fn band_checks(report: &LilReport, bands: &Bands) -> Vec<BandCheck> {
    let mut out = Vec::new();
    if let Some((lo, hi)) = bands.median {
        let med = quantile(&report.terminal, 0.5);
        out.push(CheckRecord::at_least("median_terminal>=lo", med, lo).into());
        out.push(CheckRecord::at_most("median_terminal<=hi", med, hi).into());
    }
    if let Some((level, frac)) = bands.upper {
        out.push(CheckRecord::at_least(format!("fraction_terminal<={}", g12(level)), report.fraction_at_most(level), frac).into());
    }
    if let Some((level, frac)) = bands.lower {
        out.push(CheckRecord::at_least(format!("fraction_terminal>={}", g12(level)), report.fraction_at_least(level), frac).into());
    }
    out.push(BandCheck {
        name: "running_max_nondecreasing".into(),
        value: if report.monotone() { 1.0 } else { 0.0 },
        bound: 1.0,
        pass: report.monotone(),
    });
    out
}

/// Inputs of the envelope probability estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub alpha: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub l: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Normalised kernel on the grid `θ^i`, `i = 1..=n`, for the envelope estimate.
#[derive(Debug, Clone)]
pub enum EnvelopeKernel {
    /// `x ∧ y`, normalised in closed form: `M̄_ij = θ^{|i−j|/2}`. Avoids the
    /// underflow of `θ^i` at large `i`.
    MinKernel,
    /// Independent coordinates: `M̄ = I`, so `E_i/u(t_i,t_i) = ξ_i`.
    PureGamma,
    /// Any base family, evaluated on the grid then normalised.
    Family(KernelFamily),
}

impl EnvelopeKernel {
    fn normalized(&self, theta: f64, n: usize) -> Result<DMatrix<f64>> {
        match self {
            EnvelopeKernel::MinKernel => Ok(DMatrix::from_fn(n, n, |i, j| {
                theta.powf((i as f64 - j as f64).abs() / 2.0)
            })),
            EnvelopeKernel::PureGamma => Ok(DMatrix::identity(n, n)),
            EnvelopeKernel::Family(f) => {
                let grid = Grid::geometric(theta, 1, n as u32)?;
                normalize_matrix(&build_kernel_matrix(f, &grid)?.entries)
            }
        }
    }
}

impl FromStr for EnvelopeKernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(EnvelopeKernel::MinKernel),
            "gamma" => Ok(EnvelopeKernel::PureGamma),
            other => Err(Error::Config(format!("unknown envelope kernel '{other}' (min, gamma)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeEstimate {
    pub n: usize,
    pub l: usize,
    pub threshold: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Monte-Carlo estimate of
/// `P(max_{l≤i≤n} E_i/(u(t_i,t_i) log i) > (1−ε)/(1+2θ))` with the gamma
/// envelope `E_i = a_i^{-1} ξ_i`, for each `n` in `ns`.
///
/// `E_i/u(t_i,t_i) = ξ_i / Ā_ii` with `Ā = M̄⁻¹`. Replication `r` uses the
/// same `ξ_1, ξ_2, …` for every `n`.
pub fn estimate_envelope_prob(kernel: &EnvelopeKernel, spec: &EnvelopeSpec, ns: &[usize]) -> Result<Vec<EnvelopeEstimate>> {
    if spec.l < 2 {
        return Err(Error::DegenerateGrid("need l >= 2 so that log i > 0".into()));
    }
    if !(spec.epsilon > 0.0 && spec.epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {}", spec.epsilon)));
    }
    if spec.reps == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    let gamma = Gamma::new(spec.alpha, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let threshold = (1.0 - spec.epsilon) / (1.0 + 2.0 * spec.theta);
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let xis: Vec<Vec<f64>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(spec.seed, rep as u64);
            (0..n_max).map(|_| gamma.sample(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let bound = 1.0 - (spec.l as f64 + 1.0) / (n as f64 + 1.0);
        if n < spec.l {
            out.push(EnvelopeEstimate {
                n,
                l: spec.l,
                threshold,
                estimate: 0.0,
                std_error: 0.0,
                bound,
                pass: bound <= 0.0,
            });
            continue;
        }
        let abar = lu_inverse(&kernel.normalized(spec.theta, n)?)?;
        // Row i−1 of the matrix is grid index i.
        let scale: Vec<f64> = (spec.l..=n).map(|i| abar[(i - 1, i - 1)] * (i as f64).ln()).collect();
        let hits = xis
            .iter()
            .filter(|xi| (spec.l..=n).zip(&scale).any(|(i, s)| xi[i - 1] / s > threshold))
            .count();
        let p = hits as f64 / spec.reps as f64;
        out.push(EnvelopeEstimate {
            n,
            l: spec.l,
            threshold,
            estimate: p,
            std_error: (p * (1.0 - p) / spec.reps as f64).sqrt(),
            bound,
            pass: p >= bound,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (csv, json)"))),
        }
    }
}

/// Reports that can be written as CSV; JSON comes from serde.
pub trait Tabular: Serialize {
    fn write_csv(&self, w: &mut dyn Write) -> Result<()>;
}

impl Tabular for LilReport {
    fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "rep,j,t,X,denominator,ratio,running_max")?;
        for (rep, r) in self.replications.iter().enumerate() {
            for k in 0..self.points.len() {
                writeln!(
                    w,
                    "{rep},{},{},{},{},{},{}",
                    self.indices[k],
                    g12(self.points[k]),
                    g12(r.x[k]),
                    g12(self.denominators[k]),
                    g12(r.ratio[k]),
                    g12(r.running_max[k])
                )?;
            }
        }
        Ok(())
    }
}

impl Tabular for Vec<EnvelopeEstimate> {
    fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "n,l,threshold,estimate,std_error,bound,pass")?;
        for e in self {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                e.n,
                e.l,
                g12(e.threshold),
                g12(e.estimate),
                g12(e.std_error),
                g12(e.bound),
                e.pass
            )?;
        }
        Ok(())
    }
}

/// JSON with sorted keys; floats use the shortest representation that reads
/// back to the same value.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let value = serde_json::to_value(report)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

pub fn write_report<T: Tabular>(report: &T, w: &mut dyn Write, format: Format) -> Result<()> {
    match format {
        Format::Csv => report.write_csv(w),
        Format::Json => Ok(w.write_all(to_json(report)?.as_bytes())?),
    }
}

pub fn emit_report<T: Tabular>(report: &T, path: &Path, format: Format) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_report(report, &mut w, format)?;
    w.flush()?;
    Ok(())
}
