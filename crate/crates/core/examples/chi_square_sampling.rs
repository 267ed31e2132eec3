// Sampling a permanental vector of order α = 1 as half a sum of two squared
// Gaussian vectors, then checking it against the Laplace transform and the
// gamma marginals.

use permanental::matrixlab::log_laplace;
use permanental::sampler::{ks_gamma_test, mc_laplace};
use permanental::{build_kernel_matrix, sample_permanental, Grid, KernelFamily, PermanentalSpec, Result};

pub fn run_example() -> Result<()> {
    let grid = Grid::from_points(vec![0.9, 0.5, 0.2])?;
    let km = build_kernel_matrix(&KernelFamily::min_kernel(), &grid)?;
    let alpha = 1.0;
    let spec = PermanentalSpec::new(alpha, km.entries.clone()).with_points(km.points.clone());
    let batch = sample_permanental(&spec, 20_000, 7)?;
    println!("route {} reps {}", batch.route, batch.reps());

    for s in [[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.5, 2.0, 0.1]] {
        let exact = log_laplace(&km.entries, alpha, &s)?.exp();
        let (mc, se) = mc_laplace(&batch, &s)?;
        println!("s={s:?}: MC {mc:.5} +- {se:.5}, exact {exact:.5}");
    }

    for j in 0..grid.len() {
        let ks = ks_gamma_test(&batch.column(j), alpha, km.entries[(j, j)])?;
        println!("KS at t={}: D={:.4} crit={:.4} pass={}", grid.points[j], ks.statistic, ks.critical, ks.pass);
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
