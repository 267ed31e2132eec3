//! Gamma variables, chi-square processes and permanental vectors.
//!
//! Every replication owns a ChaCha8 stream: the master seed fixes the key and
//! the replication number selects the stream, so batches do not depend on how
//! rayon schedules the work.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Gamma as GammaLaw};

use crate::error::{Error, Result};
use crate::format::g12;
use crate::matrixlab::{lu_inverse, symmetrizable};

/// RNG for replication `rep` under `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn half_integer_order(alpha: f64) -> Option<u32> {
    let k = 2.0 * alpha;
    (k >= 1.0 && k.fract() == 0.0 && k <= u32::MAX as f64).then_some(k as u32)
}

/// Gamma(α, 1) draws: sums of `2α` squared normals halved when `2α` is an
/// integer, Marsaglia–Tsang otherwise.
struct GammaSource {
    order: Option<u32>,
    fallback: Gamma<f64>,
}

impl GammaSource {
    fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let fallback = Gamma::new(alpha, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(GammaSource {
            order: half_integer_order(alpha),
            fallback,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.order {
            Some(k) => {
                let mut s = 0.0;
                for _ in 0..k {
                    let z: f64 = rng.sample(StandardNormal);
                    s += z * z;
                }
                0.5 * s
            }
            None => self.fallback.sample(rng),
        }
    }
}

/// `count` iid `scale·Gamma(α)` variables.
pub fn sample_gamma(alpha: f64, scale: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let src = GammaSource::new(alpha)?;
    let mut rng = replication_rng(seed, 0);
    Ok((0..count).map(|_| scale * src.draw(&mut rng)).collect())
}

/// Lower-triangular `L` (n × rank) with `P M Pᵀ ≈ L Lᵀ` undone, i.e. `M ≈ L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Factor {
    pub l: DMatrix<f64>,
    pub jitter: f64,
}

const JITTER_LADDER: [f64; 6] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

fn pivoted_cholesky(m: &DMatrix<f64>, jitter: f64) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
    let stop = 1e-14 * scale * n as f64;
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] += jitter * scale;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = DMatrix::zeros(n, n);
    for k in 0..n {
        let (best, &piv) = (k..n)
            .map(|i| (i, &a[(perm[i], perm[i])]))
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("nonempty");
        if piv < -stop {
            return None;
        }
        if piv <= stop {
            // Remaining Schur complement is numerically zero: rank-deficient PSD.
            let lowest = (k..n).map(|i| a[(perm[i], perm[i])]).fold(f64::INFINITY, f64::min);
            return (lowest >= -stop).then(|| l.columns(0, k).into_owned());
        }
        perm.swap(k, best);
        let p = perm[k];
        let d = piv.sqrt();
        l[(p, k)] = d;
        for &q in &perm[(k + 1)..] {
            l[(q, k)] = a[(q, p)] / d;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let (qi, qj) = (perm[i], perm[j]);
                a[(qi, qj)] -= l[(qi, k)] * l[(qj, k)];
            }
        }
    }
    Some(l)
}

/// Pivoted Cholesky with the jitter ladder `0, 1e-12, …, 1e-8` (relative to
/// the largest diagonal entry).
pub fn psd_factor(m: &DMatrix<f64>) -> Result<Factor> {
    check_symmetric(m)?;
    for &jitter in &JITTER_LADDER {
        if let Some(l) = pivoted_cholesky(m, jitter) {
            return Ok(Factor { l, jitter });
        }
    }
    Err(Error::NotPsd {
        jitter: *JITTER_LADDER.last().expect("ladder"),
    })
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    let tol = 1e-12 * m.amax().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).amax() > tol {
        return Err(Error::NotSamplable("kernel matrix is not symmetric".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingRoute {
    ChiSquare,
    Symmetrized,
    MarginalsOnly,
    Envelope,
}

impl fmt::Display for SamplingRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SamplingRoute::ChiSquare => "chi_square",
            SamplingRoute::Symmetrized => "symmetrized",
            SamplingRoute::MarginalsOnly => "marginals_only",
            SamplingRoute::Envelope => "envelope",
        };
        f.write_str(s)
    }
}

/// Replications × grid points, all entries nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<Vec<f64>>,
    pub points: Vec<f64>,
    pub seed: u64,
    pub route: SamplingRoute,
}

impl SampleBatch {
    pub fn reps(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// One row per replication, header = grid values.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = self.points.iter().map(|&t| g12(t)).collect();
        writeln!(w, "{}", header.join(","))?;
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|&v| g12(v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn default_points(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64).collect()
}

/// `Y_j = Σ_{i≤k} η_i(t_j)²/2` with `η_i` iid `N(0, M)`.
pub fn sample_chi_square(m: &DMatrix<f64>, k: u32, reps: usize, seed: u64) -> Result<SampleBatch> {
    if k == 0 {
        return Err(Error::InvalidParameter("chi-square order must be at least 1".into()));
    }
    let factor = psd_factor(m)?;
    let l = &factor.l;
    let (n, rank) = l.shape();
    let values: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep as u64);
            let mut y = vec![0.0; n];
            let mut z = vec![0.0; rank];
            for _ in 0..k {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for (j, yj) in y.iter_mut().enumerate() {
                    let eta: f64 = (0..rank).map(|c| l[(j, c)] * z[c]).sum();
                    *yj += 0.5 * eta * eta;
                }
            }
            y
        })
        .collect();
    Ok(SampleBatch {
        values,
        points: default_points(n),
        seed,
        route: SamplingRoute::ChiSquare,
    })
}

/// An α-permanental vector with kernel `kernel`, sampled by `route` when
/// given, otherwise by the first route that applies.
#[derive(Debug, Clone)]
pub struct PermanentalSpec {
    pub alpha: f64,
    pub kernel: DMatrix<f64>,
    pub points: Option<Vec<f64>>,
    pub route: Option<SamplingRoute>,
}

impl PermanentalSpec {
    pub fn new(alpha: f64, kernel: DMatrix<f64>) -> Self {
        PermanentalSpec {
            alpha,
            kernel,
            points: None,
            route: None,
        }
    }

    pub fn with_points(mut self, points: Vec<f64>) -> Self {
        self.points = Some(points);
        self
    }

    pub fn with_route(mut self, route: SamplingRoute) -> Self {
        self.route = Some(route);
        self
    }
}

/// Chi-square route for symmetric kernels, the symmetric similarity partner
/// for symmetrizable ones. Non-symmetrizable kernels and orders with `2α`
/// not an integer are refused: no exact sampler exists for them.
pub fn sample_permanental(spec: &PermanentalSpec, reps: usize, seed: u64) -> Result<SampleBatch> {
    let k = &spec.kernel;
    let mut batch = match spec.route {
        Some(SamplingRoute::Envelope) => sample_gamma_envelope(k, spec.alpha, reps, seed)?,
        Some(SamplingRoute::MarginalsOnly) => sample_marginals(k, spec.alpha, reps, seed)?,
        route => {
            let order = half_integer_order(spec.alpha).ok_or_else(|| {
                Error::NotSamplable(format!("2*alpha = {} is not a positive integer", 2.0 * spec.alpha))
            })?;
            let symmetric = check_symmetric(k).is_ok();
            if symmetric && route != Some(SamplingRoute::Symmetrized) {
                sample_chi_square(k, order, reps, seed)?
            } else if route == Some(SamplingRoute::ChiSquare) {
                return Err(Error::NotSamplable("chi-square route needs a symmetric kernel".into()));
            } else {
                let sym = symmetrizable(k);
                let s = sym.s.ok_or_else(|| {
                    Error::NotSamplable(format!(
                        "kernel is not symmetrizable ({})",
                        sym.reason.unwrap_or_default()
                    ))
                })?;
                let mut b = sample_chi_square(&s, order, reps, seed)?;
                b.route = SamplingRoute::Symmetrized;
                b
            }
        }
    };
    if let Some(p) = &spec.points {
        batch.points = p.clone();
    }
    Ok(batch)
}

/// Independent coordinates with the correct Gamma(α, K_ii) marginals; the
/// joint law is not the permanental one.
fn sample_marginals(k: &DMatrix<f64>, alpha: f64, reps: usize, seed: u64) -> Result<SampleBatch> {
    let diag: Vec<f64> = k.diagonal().iter().copied().collect();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::NonpositiveDiagonal(i));
    }
    independent_gammas(&diag, alpha, reps, seed, SamplingRoute::MarginalsOnly)
}

/// `(a_i^{-1} ξ^{(i)})` with `a_i` the diagonal of `K⁻¹` and `ξ^{(i)}` iid
/// Gamma(α): a stochastic lower envelope of the permanental vector.
pub fn sample_gamma_envelope(k: &DMatrix<f64>, alpha: f64, reps: usize, seed: u64) -> Result<SampleBatch> {
    let a = lu_inverse(k)?;
    let scales = envelope_scales(&a)?;
    independent_gammas(&scales, alpha, reps, seed, SamplingRoute::Envelope)
}

/// `1/a_i` from the inverse kernel.
pub fn envelope_scales(inverse: &DMatrix<f64>) -> Result<Vec<f64>> {
    inverse
        .diagonal()
        .iter()
        .enumerate()
        .map(|(i, &a)| if a > 0.0 { Ok(1.0 / a) } else { Err(Error::NonpositiveDiagonal(i)) })
        .collect()
}

fn independent_gammas(scales: &[f64], alpha: f64, reps: usize, seed: u64, route: SamplingRoute) -> Result<SampleBatch> {
    let src = GammaSource::new(alpha)?;
    let values = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep as u64);
            scales.iter().map(|&c| c * src.draw(&mut rng)).collect()
        })
        .collect();
    Ok(SampleBatch {
        values,
        points: default_points(scales.len()),
        seed,
        route,
    })
}

/// Sample mean and standard error of `exp(−Σ s_i X_i)`.
pub fn mc_laplace(batch: &SampleBatch, s: &[f64]) -> Result<(f64, f64)> {
    let n = batch.reps();
    if n == 0 {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    let vals: Vec<f64> = batch
        .values
        .iter()
        .map(|row| (-row.iter().zip(s).map(|(x, si)| x * si).sum::<f64>()).exp())
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok((mean, 0.0));
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

/// One-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// KS test of `samples` against `scale·Gamma(α)` at the 1% level
/// (asymptotic critical value `1.62762/√N`).
pub fn ks_gamma_test(samples: &[f64], alpha: f64, scale: f64) -> Result<KsOutcome> {
    let law = GammaLaw::new(alpha, 1.0 / scale).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let statistic = ks_statistic(samples, |x| law.cdf(x));
    let critical = 1.62762 / (samples.len() as f64).sqrt();
    Ok(KsOutcome {
        statistic,
        critical,
        pass: statistic < critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use crate::matrixlab::{build_kernel_matrix, log_laplace, Grid};

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn min_matrix(points: &[f64]) -> DMatrix<f64> {
        build_kernel_matrix(&KernelFamily::min_kernel(), &Grid::from_points(points.to_vec()).unwrap())
            .unwrap()
            .entries
    }

    #[test]
    fn gamma_moments() {
        let n = 100_000;
        for &(alpha, scale) in &[(1.0, 1.0), (2.0, 1.0), (0.7, 2.0)] {
            let xs = sample_gamma(alpha, scale, n, 11).unwrap();
            let m = mean(&xs);
            let sd = alpha.sqrt() * scale / (n as f64).sqrt();
            assert!((m - alpha * scale).abs() < 3.0 * sd, "alpha={alpha}: {m}");
            let m2 = xs.iter().map(|x| (x / scale).powi(2)).sum::<f64>() / n as f64;
            let want = alpha * (alpha + 1.0);
            assert!((m2 - want).abs() < 0.05 * want);
        }
        assert!(sample_gamma(-1.0, 1.0, 1, 0).is_err());
    }

    #[test]
    fn factor_handles_singular_psd() {
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let m = &v * v.transpose();
        let f = psd_factor(&m).unwrap();
        assert_eq!(f.l.ncols(), 1);
        assert!((&f.l * f.l.transpose() - &m).amax() < 1e-12);
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(psd_factor(&neg), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn chi_square_means() {
        let m = DMatrix::from_element(1, 1, 1.0);
        let b = sample_chi_square(&m, 1, 40_000, 3).unwrap();
        let c = b.column(0);
        assert!((mean(&c) - 0.5).abs() < 3.0 * (0.5f64).sqrt() / 200.0);

        let m = min_matrix(&[0.9, 0.5, 0.2]);
        let b = sample_chi_square(&m, 3, 40_000, 4).unwrap();
        for j in 0..3 {
            let c = b.column(j);
            let want = 1.5 * m[(j, j)];
            let sd = (1.5f64).sqrt() * m[(j, j)] / 200.0;
            assert!((mean(&c) - want).abs() < 3.0 * sd, "j={j}");
            assert!(c.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn laplace_transform_matches_determinant() {
        let m = min_matrix(&[0.75, 0.5, 0.25]);
        let b = sample_chi_square(&m, 2, 50_000, 5).unwrap();
        let s = [0.5, 2.0, 0.1];
        let (est, se) = mc_laplace(&b, &s).unwrap();
        let exact = log_laplace(&m, 1.0, &s).unwrap().exp();
        assert!((est - exact).abs() < 3.0 * se, "{est} vs {exact} (se {se})");
        assert_eq!(mc_laplace(&b, &[0.0; 3]).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn routes() {
        let m = min_matrix(&[0.75, 0.5, 0.25]);
        let b = sample_permanental(&PermanentalSpec::new(1.0, m.clone()), 10, 1).unwrap();
        assert_eq!(b, sample_chi_square(&m, 2, 10, 1).unwrap());

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[1.0, 2.0, 0.5]));
        let k = &d * &m * lu_inverse(&d).unwrap();
        let b = sample_permanental(&PermanentalSpec::new(1.0, k), 10, 1).unwrap();
        assert_eq!(b.route, SamplingRoute::Symmetrized);

        let mut aug = m.clone();
        aug[(0, 1)] += 0.3;
        let err = sample_permanental(&PermanentalSpec::new(1.0, aug), 10, 1).unwrap_err();
        assert!(matches!(err, Error::NotSamplable(_)));
        let err = sample_permanental(&PermanentalSpec::new(0.7, m), 10, 1).unwrap_err();
        assert!(matches!(err, Error::NotSamplable(_)));
    }

    #[test]
    fn envelope() {
        let k = DMatrix::from_element(1, 1, 2.5);
        let b = sample_gamma_envelope(&k, 1.0, 8, 9).unwrap();
        assert_eq!(b.values[0][0], sample_gamma(1.0, 2.5, 1, 9).unwrap()[0]);

        let m = min_matrix(&[0.8, 0.4, 0.2, 0.1]);
        let scales = envelope_scales(&lu_inverse(&m).unwrap()).unwrap();
        for (j, c) in scales.iter().enumerate() {
            assert!(*c <= m[(j, j)] * (1.0 + 1e-12));
        }
        let b = sample_gamma_envelope(&m, 2.0, 40_000, 2).unwrap();
        for (j, c) in scales.iter().enumerate() {
            let col = b.column(j);
            let sd = (2.0f64).sqrt() * c / 200.0;
            assert!((mean(&col) - 2.0 * c).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn marginals_pass_ks() {
        let m = min_matrix(&[0.9, 0.3]);
        let b = sample_chi_square(&m, 2, 10_000, 21).unwrap();
        for j in 0..2 {
            let ks = ks_gamma_test(&b.column(j), 1.0, m[(j, j)]).unwrap();
            assert!(ks.pass, "{ks:?}");
        }
        let wrong = ks_gamma_test(&b.column(0), 1.0, 2.0 * m[(0, 0)]).unwrap();
        assert!(!wrong.pass);
    }

    #[test]
    fn reproducible_across_pool_sizes() {
        let m = min_matrix(&[0.75, 0.5, 0.25]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_chi_square(&m, 1, 257, 77).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn csv_layout() {
        let b = SampleBatch {
            values: vec![vec![0.5, 1.0 / 3.0]],
            points: vec![0.5, 0.25],
            seed: 0,
            route: SamplingRoute::ChiSquare,
        };
        let mut out = Vec::new();
        b.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0.5,0.25\n0.5,0.333333333333\n");
    }
}
