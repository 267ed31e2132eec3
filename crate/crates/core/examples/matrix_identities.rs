// Bordered kernel matrices, their closed-form inverses and the diagonal bounds.

use permanental::matrixlab::{
    build_augmented_matrix, diag_bound_check, identity_checks, identity_residual, is_m_matrix, lu_inverse,
    symmetrizable,
};
use permanental::{
    build_kernel_matrix, build_uf, inverse_uf_formula, AugmentedKernel, FiniteMeasure, Grid, KernelFamily, Result,
};

pub fn run_example() -> Result<()> {
    let base = KernelFamily::min_kernel();
    let grid = Grid::geometric(0.5, 1, 8)?;
    let m = build_kernel_matrix(&base, &grid)?.entries;
    let f: Vec<f64> = grid.points.iter().map(|t| 2.0 * t).collect();

    let uf = build_uf(&m, &f)?;
    let inv = inverse_uf_formula(&m, &f)?;
    println!("|U_f * formula - I|_inf = {:.3e}", identity_residual(&uf, &inv));
    println!("inverse of x^y on the grid is an M-matrix: {}", is_m_matrix(&lu_inverse(&m)?)?);

    let mu = FiniteMeasure::dirac(0.75);
    let aug = AugmentedKernel::new(base.clone(), mu.clone())?;
    let k = build_augmented_matrix(&aug, &grid)?.entries;
    let sym = symmetrizable(&k);
    println!("augmented kernel symmetrizable: {} {:?}", sym.symmetrizable, sym.reason);

    let g = vec![1.0; grid.len()];
    for r in identity_checks(&m, &f, &g)? {
        println!("{r}");
    }
    // The interior a_i u(t,t) exceed 1+2θ for x ∧ y: reported, not hidden.
    for r in diag_bound_check(&base, &mu, &grid)?.iter().filter(|r| !r.name.starts_with("lower")) {
        println!("{r}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
