// Left potentials and the augmented kernel u(x,y) + g(x)f(y).

use permanental::measure::{increment_bound, Density};
use permanental::{AugmentedKernel, FiniteMeasure, KernelFamily, Result, ScaleFunction, Tolerance};

pub fn run_example() -> Result<()> {
    let tol = Tolerance::default();
    let base = KernelFamily::DiffusionKilledAtZero {
        scale: ScaleFunction::Identity,
    };

    // Two atoms plus a flat piece on [2,3].
    let mu = FiniteMeasure::from_atoms(vec![(0.5, 1.0), (1.5, 0.25)])?.with_density(Density::constant(2.0, 3.0, 0.5)?);
    println!("|mu| = {}", mu.total_mass()?);

    let aug = AugmentedKernel::new(base.clone(), mu.clone())?;
    for t in [0.1, 0.5, 1.0, 2.5] {
        // For x ∧ y and t below the support f(t) = t |mu|.
        println!("f({t}) = {:.10}", aug.f(t)?);
    }
    println!("K(0,0.3) = {:.6}  K(0.3,0) = {:.6}", aug.eval(0.0, 0.3)?, aug.eval(0.3, 0.0)?);

    let nu = FiniteMeasure::dirac(2.0);
    let two = AugmentedKernel::new(base.clone(), mu.clone())?.with_second_factor(nu)?;
    println!("two factors: g(0.3) = {:.6}, K(0.3,0.4) = {:.6}", two.g(0.3)?, two.eval(0.3, 0.4)?);

    let b = increment_bound(&base, &mu, 0.01, 50, &tol)?;
    println!(
        "sup |f(x)-f(y)|/(u(x,x)-2u(x,y)+u(y,y))^(1/2) ~ {:.6} at {:?} over {} pairs",
        b.constant, b.worst_pair, b.pairs
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
