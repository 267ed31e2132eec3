// The LIL constants of the four worked examples.

use permanental::kernels::KernelFamily;
use permanental::quadrature::Tolerance;
use permanental::{
    c_example1, c_example2, c_example3, c_example4, t_over_sigma_limit, CharExponent, DiffusionPair, FiniteMeasure,
    Result, ScaleFunction,
};

pub fn run_example() -> Result<()> {
    let mu = FiniteMeasure::from_atoms(vec![(1.0, 0.5), (2.0, 0.5)])?;

    let brownian = CharExponent::brownian(1.0)?;
    let lim = t_over_sigma_limit(&KernelFamily::LevyKilledAtZero { psi: brownian.clone() }, &Tolerance::default())?;
    println!("t/sigma0^2(t) -> {:?}", lim.kind);
    let r = c_example1(&brownian, &mu)?;
    println!("example 1 (Brownian): total {:.6}, 1+total {:.6}", r.total, r.lil_constant());

    let stable = CharExponent::stable(1.5, 1.0)?;
    println!("example 1 (stable 1.5): total {:.6}", c_example1(&stable, &mu)?.total);

    let fam = KernelFamily::LevyExpKilledAtZero { psi: stable, beta: 1.0 };
    let r = c_example2(&fam, &mu)?;
    println!("example 2: total {:.6} (upper bound: {})", r.total, r.upper_bound);

    let r = c_example3(&ScaleFunction::Identity, &FiniteMeasure::dirac(0.5))?;
    println!("example 3: total {:.6}", r.total);

    let r = c_example4(&DiffusionPair::exponential(1.0)?, &mu)?;
    println!("example 4: total {:.6}, extras {:?}", r.total, r.extras);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
