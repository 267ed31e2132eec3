use nalgebra::DMatrix;
use permanental::kernels::{v_tilde_beta, KernelFamily};
use permanental::matrixlab::{is_m_matrix, lu_inverse, normalize_matrix};
use permanental::measure::increment_bound;
use permanental::{
    build_kernel_matrix, c_example1, c_example3, c_example4, left_potential, phi, run_lil_experiment, sigma0_sq,
    sigma_beta_sq, u_beta, v_beta, CharExponent, DiffusionPair, FiniteMeasure, Grid, LilSpec, ScaleFunction,
    Tolerance,
};
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn exponent() -> impl Strategy<Value = CharExponent> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|g| CharExponent::brownian(g).unwrap()),
        (1.1f64..2.0, 0.2f64..5.0).prop_map(|(p, c)| CharExponent::stable(p, c).unwrap()),
    ]
}

fn atoms(lo: f64, hi: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((lo..hi, 0.05f64..2.0), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma0_variance_triangle(psi in exponent(), x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let lhs = (sigma0_sq(&psi, y, &tol()).unwrap() - sigma0_sq(&psi, x - y, &tol()).unwrap()).abs();
        prop_assert!(lhs <= sigma0_sq(&psi, x, &tol()).unwrap() + 1e-8);
    }

    #[test]
    fn phi_between_zero_and_smaller_variance(psi in exponent(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let p = phi(&psi, x, y, &tol()).unwrap();
        let cap = sigma0_sq(&psi, x, &tol()).unwrap().min(sigma0_sq(&psi, y, &tol()).unwrap());
        prop_assert!(p >= -1e-9 && p <= cap + 1e-9, "phi {p} cap {cap}");
    }

    #[test]
    fn phi_polarization(psi in exponent(), s in 0.01f64..3.0, t in 0.01f64..3.0) {
        let lhs = phi(&psi, s, s, &tol()).unwrap() + phi(&psi, t, t, &tol()).unwrap()
            - 2.0 * phi(&psi, s, t, &tol()).unwrap();
        let rhs = sigma0_sq(&psi, t - s, &tol()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn gaussian_increment_inequality(psi in exponent(), beta in 0.2f64..3.0, t in -4.0f64..4.0, s in -4.0f64..4.0) {
        let st = sigma_beta_sq(&psi, beta, t, &tol()).unwrap();
        let ss = sigma_beta_sq(&psi, beta, s, &tol()).unwrap();
        let u0 = u_beta(&psi, beta, 0.0, &tol()).unwrap();
        let w = 2.0 * u0 / (u_beta(&psi, beta, t, &tol()).unwrap() + u_beta(&psi, beta, s, &tol()).unwrap());
        prop_assert!((st - ss).abs() <= w * sigma_beta_sq(&psi, beta, t - s, &tol()).unwrap() + 1e-8);
    }

    #[test]
    fn brownian_potential_closed_form(beta in 0.1f64..5.0, gamma in 0.1f64..5.0, x in 0.0f64..10.0) {
        let rate = (beta / gamma).sqrt();
        prop_assume!(rate * x <= 20.0);
        let exact = (-rate * x).exp() / (2.0 * (beta * gamma).sqrt());
        let got = u_beta(&CharExponent::brownian(gamma).unwrap(), beta, x, &tol()).unwrap();
        prop_assert!(((got - exact) / exact).abs() <= 1e-6, "{got} vs {exact}");
    }

    #[test]
    fn diffusion_diagonal_is_linear_at_zero(k in 0.1f64..5.0, x in 1e-8f64..1e-5) {
        let pair = DiffusionPair::exponential(k).unwrap();
        let r = v_tilde_beta(&pair, x, x).unwrap() / (pair.rho0() * x);
        prop_assert!((r - 1.0).abs() <= 0.01, "{r}");
    }

    #[test]
    fn left_potential_is_continuous(at in atoms(0.1, 2.0), delta in 0.05f64..0.5) {
        let mu = FiniteMeasure::from_atoms(at).unwrap();
        let fam = KernelFamily::min_kernel();
        let mass = mu.total_mass().unwrap();
        let h = delta / 200.0;
        let mut prev = left_potential(&fam, &mu, 0.0, &tol()).unwrap();
        for i in 1..=200 {
            let f = left_potential(&fam, &mu, i as f64 * h, &tol()).unwrap();
            prop_assert!((f - prev).abs() <= mass * h + 1e-12);
            prev = f;
        }
        let b = increment_bound(&fam, &mu, delta, 40, &tol()).unwrap();
        prop_assert!(b.constant.is_finite() && b.constant <= mass + 1e-9);
    }

    #[test]
    fn killed_diffusion_ratio_below_support(at in atoms(0.2, 3.0), frac in 0.01f64..0.99) {
        let mu = FiniteMeasure::from_atoms(at.clone()).unwrap();
        let lowest = at.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
        let x = frac * lowest;
        let fam = KernelFamily::DiffusionKilledAtZero { scale: ScaleFunction::Identity };
        let f = left_potential(&fam, &mu, x, &tol()).unwrap();
        prop_assert!((f / x - mu.total_mass().unwrap()).abs() <= 1e-12);
    }

    // The normalised x∧y matrix on θ^j is θ^{|i−j|/2}: off-diagonals reach
    // θ^{1/2}, not θ, and the inverse diagonal is (1+θ)/(1−θ) inside the grid.
    #[test]
    fn min_kernel_normalised_structure(theta in 0.05f64..0.95, n in 3u32..30) {
        let grid = Grid::geometric(theta, 1, n).unwrap();
        let m = build_kernel_matrix(&KernelFamily::min_kernel(), &grid).unwrap().entries;
        let mbar = normalize_matrix(&m).unwrap();
        let k = n as usize;
        for i in 0..k {
            for j in 0..k {
                let want = theta.powf((i as f64 - j as f64).abs() / 2.0);
                prop_assert!((mbar[(i, j)] - want).abs() <= 1e-12);
            }
        }
        let abar = lu_inverse(&mbar).unwrap();
        for i in 0..k {
            prop_assert!(abar[(i, i)] <= (1.0 + theta) / (1.0 - theta) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn m_matrix_diagonal_product(n in 2usize..8, off in prop::collection::vec(0.0f64..1.0, 64), slack in 0.01f64..2.0) {
        // Strictly diagonally dominant Z-matrix, hence an M-matrix.
        let mut a = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { -off[(i * n + j) % off.len()] });
        for i in 0..n {
            let row: f64 = (0..n).map(|j| a[(i, j)].abs()).sum();
            a[(i, i)] = row + slack;
        }
        prop_assert!(is_m_matrix(&a).unwrap());
        let m = lu_inverse(&a).unwrap();
        for i in 0..n {
            prop_assert!(a[(i, i)] * m[(i, i)] >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn constants_never_exceed_mass(pos in atoms(0.1, 3.0), neg in atoms(-3.0, -0.1), k in 0.2f64..3.0) {
        let mut both = pos.clone();
        both.extend(neg);
        let line = FiniteMeasure::from_atoms(both).unwrap();
        let half_line = FiniteMeasure::from_atoms(pos).unwrap();
        let r = c_example1(&CharExponent::brownian(1.0).unwrap(), &line).unwrap();
        prop_assert!(r.total <= r.mass + 1e-9);
        let r = c_example3(&ScaleFunction::Identity, &half_line).unwrap();
        prop_assert!(r.total <= r.mass + 1e-12);
        let r = c_example4(&DiffusionPair::exponential(k).unwrap(), &half_line).unwrap();
        prop_assert!(r.total <= r.mass + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lil_reruns_identical_and_monotone(seed in any::<u64>()) {
        let mut spec = LilSpec::killed_brownian(seed);
        spec.reps = 20;
        spec.n = 20;
        let a = run_lil_experiment(&spec).unwrap();
        prop_assert!(a.monotone());
        let b = run_lil_experiment(&spec).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn exponential_killed_diagonal_matches_variance_near_zero() {
    for psi in [CharExponent::brownian(1.0).unwrap(), CharExponent::stable(1.5, 1.0).unwrap()] {
        let x = 1e-6;
        let r = v_beta(&psi, 1.0, x, x, &tol()).unwrap() / sigma_beta_sq(&psi, 1.0, x, &tol()).unwrap();
        assert!((r - 1.0).abs() <= 1e-3, "{} {r}", psi.label());
    }
}
