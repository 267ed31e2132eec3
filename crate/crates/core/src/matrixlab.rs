//! Kernel matrices on grids and the identities of the augmented matrices
//!
//! ```text
//! U_f     = [[1, fᵀ], [1, M + 1fᵀ]]
//! U_{f,g} = [[1, fᵀ], [g, M + gfᵀ]]
//! ```
//!
//! whose inverses are known in closed form in terms of `M⁻¹`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::KernelFamily;
use crate::measure::{AugmentedKernel, FiniteMeasure};

/// Absolute tolerance for identity checks, before scaling by matrix norms.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Anything that can be evaluated as a two-point kernel.
pub trait Kernel {
    fn value(&self, x: f64, y: f64) -> Result<f64>;
    fn describe(&self) -> String;
    fn is_symmetric(&self) -> bool;
}

impl Kernel for KernelFamily {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(x, y)
    }
    fn describe(&self) -> String {
        self.label()
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

impl Kernel for AugmentedKernel {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(x, y)
    }
    fn describe(&self) -> String {
        self.label()
    }
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// Strictly decreasing points in `(0, 1)`, usually `t_j = θ^j`, `l ≤ j ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
    pub theta: Option<f64>,
    /// Exponent of the first point when geometric.
    pub first_index: Option<u32>,
}

impl Grid {
    pub fn geometric(theta: f64, l: u32, n: u32) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0,1), got {theta}")));
        }
        if l < 1 || l > n {
            return Err(Error::InvalidParameter(format!("need 1 <= l <= n, got l={l}, n={n}")));
        }
        let points: Vec<f64> = (l..=n).map(|j| theta.powi(j as i32)).collect();
        if points.iter().any(|&t| t <= 0.0) {
            return Err(Error::DegenerateGrid(format!("theta^{n} underflows")));
        }
        Ok(Grid {
            points,
            theta: Some(theta),
            first_index: Some(l),
        })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateGrid("empty grid".into()));
        }
        if points.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::DegenerateGrid("grid points must lie in (0,1)".into()));
        }
        if points.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::DegenerateGrid("grid points must be strictly decreasing".into()));
        }
        Ok(Grid {
            points,
            theta: None,
            first_index: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exponent `j` of the `k`-th point of a geometric grid.
    pub fn index(&self, k: usize) -> Option<u32> {
        self.first_index.map(|l| l + k as u32)
    }
}

#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub points: Vec<f64>,
    pub label: String,
    pub augmented: bool,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().copied().collect()
    }
}

/// `M_ij = u(t_i, t_j)`.
pub fn build_kernel_matrix<K: Kernel + ?Sized>(kernel: &K, grid: &Grid) -> Result<KernelMatrix> {
    let n = grid.len();
    let t = &grid.points;
    let mut m = DMatrix::zeros(n, n);
    let symmetric = kernel.is_symmetric();
    for i in 0..n {
        for j in 0..n {
            if symmetric && j < i {
                m[(i, j)] = m[(j, i)];
                continue;
            }
            let v = kernel.value(t[i], t[j])?;
            if !v.is_finite() {
                return Err(Error::Domain(format!("kernel is not finite at ({}, {})", t[i], t[j])));
            }
            m[(i, j)] = v;
        }
    }
    Ok(KernelMatrix {
        entries: m,
        points: t.clone(),
        label: kernel.describe(),
        augmented: false,
    })
}

/// The `(n+1)×(n+1)` matrix of an augmented kernel: `U_f`, or `U_{f,g}` with
/// a second factor.
pub fn build_augmented_matrix(kernel: &AugmentedKernel, grid: &Grid) -> Result<KernelMatrix> {
    let base = build_kernel_matrix(&kernel.base, grid)?;
    let f = grid.points.iter().map(|&t| kernel.f(t)).collect::<Result<Vec<_>>>()?;
    let g = grid.points.iter().map(|&t| kernel.g(t)).collect::<Result<Vec<_>>>()?;
    let mut pts = vec![f64::NAN];
    pts.extend(&grid.points);
    Ok(KernelMatrix {
        entries: build_ufg(&base.entries, &f, &g)?,
        points: pts,
        label: kernel.label(),
        augmented: true,
    })
}

/// Inverse by LU with partial pivoting.
pub fn lu_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    let inv = m.clone().lu().try_inverse().ok_or(Error::Singular)?;
    if inv.iter().all(|v| v.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::Singular)
    }
}

fn base_inverse(m: &DMatrix<f64>, f: &[f64], g: &[f64]) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if !m.is_square() || f.len() != n || g.len() != n {
        return Err(Error::InvalidParameter(format!(
            "shape mismatch: M is {}x{}, |f| = {}, |g| = {}",
            m.nrows(),
            m.ncols(),
            f.len(),
            g.len()
        )));
    }
    lu_inverse(m).map_err(|_| Error::SingularBase)
}

pub fn build_uf(m: &DMatrix<f64>, f: &[f64]) -> Result<DMatrix<f64>> {
    build_ufg(m, f, &vec![1.0; f.len()])
}

pub fn build_ufg(m: &DMatrix<f64>, f: &[f64], g: &[f64]) -> Result<DMatrix<f64>> {
    base_inverse(m, f, g)?;
    let n = m.nrows();
    Ok(DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, j) => f[j - 1],
        (i, 0) => g[i - 1],
        (i, j) => m[(i - 1, j - 1)] + g[i - 1] * f[j - 1],
    }))
}

pub fn inverse_uf_formula(m: &DMatrix<f64>, f: &[f64]) -> Result<DMatrix<f64>> {
    inverse_ufg_formula(m, f, &vec![1.0; f.len()])
}

/// `[[1+ρ', −fᵀM⁻¹], [−M⁻¹g, M⁻¹]]` with `ρ' = fᵀM⁻¹g`.
pub fn inverse_ufg_formula(m: &DMatrix<f64>, f: &[f64], g: &[f64]) -> Result<DMatrix<f64>> {
    let w = base_inverse(m, f, g)?;
    let n = m.nrows();
    let fv = DVector::from_column_slice(f);
    let gv = DVector::from_column_slice(g);
    let top = w.tr_mul(&fv); // (fᵀW)ᵀ
    let left = &w * &gv;
    let rho = fv.dot(&left);
    Ok(DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0 + rho,
        (0, j) => -top[j - 1],
        (i, 0) => -left[i - 1],
        (i, j) => w[(i - 1, j - 1)],
    }))
}

/// `max_ij |(AB − I)_ij|`.
pub fn identity_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let p = a * b;
    let n = p.nrows();
    (p - DMatrix::<f64>::identity(n, n)).amax()
}

/// `M̄_ij = M_ij / (M_ii M_jj)^{1/2}`.
pub fn normalize_matrix(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.diagonal();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonpositiveDiagonal(i));
    }
    let s = d.map(|v| 1.0 / v.sqrt());
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if i == j {
            1.0
        } else {
            m[(i, j)] * s[i] * s[j]
        }
    }))
}

/// Nonpositive off-diagonal entries and entrywise nonnegative inverse, both up
/// to `1e-10` scaled by the respective max-norm.
pub fn is_m_matrix(a: &DMatrix<f64>) -> Result<bool> {
    let inv = lu_inverse(a)?;
    let tol_a = IDENTITY_TOL * a.amax().max(1.0);
    let tol_inv = IDENTITY_TOL * inv.amax().max(1.0);
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] > tol_a {
                return Ok(false);
            }
        }
    }
    Ok(inv.iter().all(|&v| v >= -tol_inv))
}

/// Result of testing `K = D S D⁻¹` with `S` symmetric and `D` positive diagonal.
#[derive(Debug, Clone)]
pub struct Symmetrization {
    pub symmetrizable: bool,
    pub d: Option<DVector<f64>>,
    pub s: Option<DMatrix<f64>>,
    pub reason: Option<String>,
}

impl Symmetrization {
    fn refuse(reason: String) -> Self {
        Symmetrization {
            symmetrizable: false,
            d: None,
            s: None,
            reason: Some(reason),
        }
    }
}

const CYCLE_TOL: f64 = 1e-10;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn symmetrizable(k: &DMatrix<f64>) -> Symmetrization {
    let n = k.nrows();
    if !k.is_square() {
        return Symmetrization::refuse("matrix is not square".into());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (k[(i, j)], k[(j, i)]);
            if a * b < 0.0 || ((a == 0.0) != (b == 0.0)) {
                return Symmetrization::refuse(format!("sign pattern differs at ({i}, {j})"));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for l in (j + 1)..n {
                let fwd = k[(i, j)] * k[(j, l)] * k[(l, i)];
                let bwd = k[(i, l)] * k[(l, j)] * k[(j, i)];
                if !rel_close(fwd, bwd, CYCLE_TOL) {
                    return Symmetrization::refuse(format!(
                        "3-cycle ({i},{j},{l}) products differ: {fwd:e} vs {bwd:e}"
                    ));
                }
            }
        }
    }
    // Spanning forest of the nonzero pattern; d_j = d_i (K_ji/K_ij)^{1/2}.
    let mut d = DVector::from_element(n, f64::NAN);
    for root in 0..n {
        if !d[root].is_nan() {
            continue;
        }
        d[root] = 1.0;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if j != i && d[j].is_nan() && k[(i, j)] != 0.0 {
                    d[j] = d[i] * (k[(j, i)] / k[(i, j)]).sqrt();
                    stack.push(j);
                }
            }
        }
    }
    let s = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * d[j] / d[i]);
    for i in 0..n {
        for j in (i + 1)..n {
            if !rel_close(s[(i, j)], s[(j, i)], CYCLE_TOL) {
                return Symmetrization::refuse(format!("witness fails at ({i}, {j})"));
            }
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    Symmetrization {
        symmetrizable: true,
        d: Some(d),
        s: Some(s),
        reason: None,
    }
}

/// One named numeric check: `value` against `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckRecord {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckRecord {
            name: name.into(),
            value,
            bound,
            pass: value >= bound,
        }
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} value={:.12e} bound={:.12e} {}",
            self.name,
            self.value,
            self.bound,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Identity checks for the closed-form inverses of `U_f` and `U_{f,g}`.
pub fn identity_checks(m: &DMatrix<f64>, f: &[f64], g: &[f64]) -> Result<Vec<CheckRecord>> {
    let scale = |a: &DMatrix<f64>, b: &DMatrix<f64>| IDENTITY_TOL * (a.amax() * b.amax()).max(1.0);
    let w = base_inverse(m, f, g)?;
    let n = m.nrows();
    let mut out = Vec::new();
    for (tag, gg) in [("uf", vec![1.0; n]), ("ufg", g.to_vec())] {
        let u = build_ufg(m, f, &gg)?;
        let inv = inverse_ufg_formula(m, f, &gg)?;
        let tol = scale(&u, &inv);
        out.push(CheckRecord::at_most(format!("{tag}.product_identity"), identity_residual(&u, &inv), tol));
        out.push(CheckRecord::at_most(format!("{tag}.left_identity"), identity_residual(&inv, &u), tol));
        let diag_gap = (0..n).map(|i| (inv[(i + 1, i + 1)] - w[(i, i)]).abs()).fold(0.0, f64::max);
        out.push(CheckRecord::at_most(format!("{tag}.diagonal_identity"), diag_gap, tol));
    }
    Ok(out)
}

/// Diagnostics for the inverse-diagonal bounds used on geometric grids.
///
/// With `a_i` the diagonal of `U_f⁻¹` (equal to `(M⁻¹)_{kk}` at the grid point
/// `t_k` behind row `i`), records
/// `a_i u(t_k,t_k) ≤ 1+2θ`, `a_i K_ii ≥ 1` for every row of the augmented `K`,
/// the off-diagonal bound `M̄_kl ≤ θ`, and `(M̄⁻¹)_kk ≤ 1/(1−θ)`.
/// Violations are reported, not raised.
pub fn diag_bound_check(base: &KernelFamily, mu: &FiniteMeasure, grid: &Grid) -> Result<Vec<CheckRecord>> {
    let theta = grid
        .theta
        .ok_or_else(|| Error::InvalidParameter("diagonal bounds need a geometric grid".into()))?;
    let aug = AugmentedKernel::new(base.clone(), mu.clone())?;
    let m = build_kernel_matrix(base, grid)?.entries;
    let k = build_augmented_matrix(&aug, grid)?.entries;
    let f: Vec<f64> = (0..grid.len()).map(|j| k[(0, j + 1)]).collect();
    let kinv = inverse_uf_formula(&m, &f)?;
    let mbar = normalize_matrix(&m)?;
    let abar = lu_inverse(&mbar)?;
    let n = grid.len();
    let mut out = Vec::new();
    for kk in 0..n {
        let label = grid.index(kk).map_or(kk as u32, |j| j);
        let a = kinv[(kk + 1, kk + 1)];
        out.push(CheckRecord::at_most(
            format!("upper.a_u[j={label}]"),
            a * m[(kk, kk)],
            1.0 + 2.0 * theta + 1e-8,
        ));
    }
    for i in 0..=n {
        out.push(CheckRecord::at_least(
            format!("lower.a_K[i={i}]"),
            kinv[(i, i)] * k[(i, i)],
            1.0 - 1e-10,
        ));
    }
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(mbar[(i, j)]);
            }
        }
    }
    out.push(CheckRecord::at_most("offdiag.normalized_max", off, theta + 1e-12));
    let abar_max = (0..n).map(|i| abar[(i, i)]).fold(0.0, f64::max);
    out.push(CheckRecord::at_most("normalized_inverse_diag_max", abar_max, 1.0 / (1.0 - theta) + 1e-10));
    Ok(out)
}

/// `−α log det(I + K diag(s))`, the log of the permanental Laplace transform.
pub fn log_laplace(k: &DMatrix<f64>, alpha: f64, s: &[f64]) -> Result<f64> {
    let n = k.nrows();
    if !k.is_square() || s.len() != n {
        return Err(Error::InvalidParameter("shape mismatch in log_laplace".into()));
    }
    if s.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter("s must be nonnegative".into()));
    }
    let mut shifted = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * s[j]);
    for i in 0..n {
        shifted[(i, i)] += 1.0;
    }
    let lu = shifted.lu();
    let mut sign = lu.p().determinant::<f64>();
    let mut log_abs = 0.0;
    for v in lu.u().diagonal().iter() {
        if *v == 0.0 || !v.is_finite() {
            return Err(Error::SingularShift);
        }
        sign *= v.signum();
        log_abs += v.abs().ln();
    }
    if sign <= 0.0 {
        return Err(Error::SingularShift);
    }
    Ok(-alpha * log_abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn min_matrix(points: &[f64]) -> DMatrix<f64> {
        build_kernel_matrix(&KernelFamily::min_kernel(), &Grid::from_points(points.to_vec()).unwrap())
            .unwrap()
            .entries
    }

    #[test]
    fn min_kernel_matrix() {
        let m = min_matrix(&[0.5, 0.25]);
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 0.25, 0.25]));
    }

    #[test]
    fn grids() {
        let g = Grid::geometric(0.5, 3, 5).unwrap();
        assert_eq!(g.points, vec![0.125, 0.0625, 0.03125]);
        assert_eq!(g.index(2), Some(5));
        assert!(Grid::geometric(1.0, 1, 2).is_err());
        assert!(Grid::from_points(vec![0.2, 0.5]).is_err());
        assert!(Grid::from_points(vec![1.5]).is_err());
    }

    #[test]
    fn one_by_one_inverses() {
        let (u, phi, g) = (0.7, 0.3, 1.9);
        let m = DMatrix::from_element(1, 1, u);
        let uf = build_uf(&m, &[phi]).unwrap();
        assert_eq!(uf, DMatrix::from_row_slice(2, 2, &[1.0, phi, 1.0, u + phi]));
        let inv = inverse_uf_formula(&m, &[phi]).unwrap();
        let direct = lu_inverse(&uf).unwrap();
        assert!((inv - direct).amax() < 1e-14);
        let expect = DMatrix::from_row_slice(2, 2, &[1.0 + g * phi / u, -phi / u, -g / u, 1.0 / u]);
        let invg = inverse_ufg_formula(&m, &[phi], &[g]).unwrap();
        assert!((&invg - &expect).amax() < 1e-14);
        assert!((invg - lu_inverse(&build_ufg(&m, &[phi], &[g]).unwrap()).unwrap()).amax() < 1e-14);
    }

    #[test]
    fn singular_base_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(build_uf(&m, &[0.0, 0.0]), Err(Error::SingularBase));
        assert_eq!(inverse_uf_formula(&m, &[0.0, 0.0]), Err(Error::SingularBase));
    }

    #[test]
    fn normalization() {
        let m = min_matrix(&[0.5, 0.25]);
        let mbar = normalize_matrix(&m).unwrap();
        assert!((mbar[(0, 1)] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(mbar.diagonal(), DVector::from_element(2, 1.0));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(normalize_matrix(&bad), Err(Error::NonpositiveDiagonal(1)));
    }

    #[test]
    fn m_matrices() {
        assert!(is_m_matrix(&DMatrix::identity(3, 3)).unwrap());
        let inv = lu_inverse(&min_matrix(&[0.9, 0.6, 0.3, 0.1])).unwrap();
        assert!(is_m_matrix(&inv).unwrap());
        assert!(!is_m_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap());
        assert_eq!(is_m_matrix(&DMatrix::zeros(2, 2)), Err(Error::Singular));
    }

    #[test]
    fn symmetrizability() {
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.3, 0.5, 1.0, 0.2, 0.3, 0.2, 3.0]);
        let plain = symmetrizable(&s);
        assert!(plain.symmetrizable);
        assert_eq!(plain.d.unwrap(), DVector::from_element(3, 1.0));

        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 3.0, 0.2]));
        let k = &d * &s * lu_inverse(&d).unwrap();
        let sym = symmetrizable(&k);
        assert!(sym.symmetrizable);
        assert!((sym.s.unwrap() - &s).amax() < 1e-12);

        let aug = AugmentedKernel::new(KernelFamily::min_kernel(), FiniteMeasure::dirac(0.5)).unwrap();
        let grid = Grid::from_points(vec![0.8, 0.4, 0.2]).unwrap();
        let k = build_kernel_matrix(&aug, &grid).unwrap().entries;
        let r = symmetrizable(&k);
        assert!(!r.symmetrizable);
        assert!(r.reason.unwrap().contains("3-cycle"));
    }

    #[test]
    fn laplace_examples() {
        let k = DMatrix::from_element(1, 1, 0.8);
        assert!((log_laplace(&k, 1.5, &[2.0]).unwrap() + 1.5 * (1.0f64 + 1.6).ln()).abs() < 1e-15);
        let m = min_matrix(&[0.75, 0.5, 0.25]);
        assert_eq!(log_laplace(&m, 1.0, &[0.0; 3]).unwrap(), 0.0);
        // Cofactor expansion of I + M.
        let a = DMatrix::from_fn(3, 3, |i, j| m[(i, j)] + if i == j { 1.0 } else { 0.0 });
        let det = a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
            - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
            + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]);
        assert!((log_laplace(&m, 1.0, &[1.0; 3]).unwrap() + det.ln()).abs() < 1e-12);
        let neg = DMatrix::from_element(1, 1, -1.0);
        assert_eq!(log_laplace(&neg, 1.0, &[1.0]), Err(Error::SingularShift));
    }

    #[test]
    fn diagonal_bounds_for_min_kernel() {
        let grid = Grid::geometric(0.5, 1, 10).unwrap();
        let recs = diag_bound_check(&KernelFamily::min_kernel(), &FiniteMeasure::dirac(0.5), &grid).unwrap();
        assert!(recs.iter().filter(|r| r.name.starts_with("lower")).all(|r| r.pass));
        // Interior points sit at (1+θ)/(1−θ); only the grid ends reach 1/(1−θ).
        let upper: Vec<f64> = recs.iter().filter(|r| r.name.starts_with("upper")).map(|r| r.value).collect();
        assert!((upper[4] - 3.0).abs() < 1e-9);
        assert!((upper[9] - 2.0).abs() < 1e-9);
    }

    fn pd_matrix(n: usize, raw: &[f64]) -> DMatrix<f64> {
        let b = DMatrix::from_fn(n, n, |i, j| raw[(i * n + j) % raw.len()]);
        b.transpose() * &b + DMatrix::identity(n, n) * (n as f64)
    }

    proptest! {
        #[test]
        fn augmented_inverses_hold(
            n in 1usize..10,
            raw in prop::collection::vec(-1.0f64..1.0, 100),
            fs in prop::collection::vec(0.0f64..2.0, 10),
            gs in prop::collection::vec(0.0f64..2.0, 10),
        ) {
            let m = pd_matrix(n, &raw);
            for rec in identity_checks(&m, &fs[..n], &gs[..n]).unwrap() {
                prop_assert!(rec.pass, "{}", rec);
            }
        }

        #[test]
        fn diagonal_similarity_preserves_laplace(
            raw in prop::collection::vec(-1.0f64..1.0, 16),
            d in prop::collection::vec(0.2f64..5.0, 4),
            s in prop::collection::vec(0.0f64..3.0, 4),
        ) {
            let sm = pd_matrix(4, &raw);
            let dm = DMatrix::from_diagonal(&DVector::from_column_slice(&d));
            let k = &dm * &sm * lu_inverse(&dm).unwrap();
            let sym = symmetrizable(&k);
            prop_assert!(sym.symmetrizable);
            let a = log_laplace(&k, 1.0, &s).unwrap();
            let b = log_laplace(&sym.s.unwrap(), 1.0, &s).unwrap();
            prop_assert!((a - b).abs() <= 1e-10);
        }

        #[test]
        fn inverse_m_matrix_diagonal_dominates(pts in prop::collection::btree_set(1u32..999, 2..8)) {
            let mut t: Vec<f64> = pts.into_iter().map(|p| p as f64 / 1000.0).collect();
            t.reverse();
            let m = min_matrix(&t);
            let a = lu_inverse(&m).unwrap();
            prop_assert!(is_m_matrix(&a).unwrap());
            for i in 0..t.len() {
                prop_assert!(a[(i, i)] * m[(i, i)] >= 1.0 - 1e-10);
            }
        }
    }
}
