// Building kernels from a JSON config, the same documents `--config` reads.

use permanental::{Config, Result, Tolerance};

const DOC: &str = r#"{
  "family": "levy_exp_killed_at_zero",
  "psi": {"stable": {"p": 1.5, "c": 1.0}},
  "beta": 1.0,
  "mu": {"atoms": [[1.0, 0.5], [2.0, 0.5]], "density": null}
}"#;

pub fn run_example() -> Result<()> {
    let cfg = Config::from_json(DOC)?;
    let fam = cfg.kernel_family()?;
    println!("{}", fam.label());
    println!("sigma^2(0.5) = {:.10}", fam.sigma_sq(0.5, &Tolerance::default())?);
    if let Some(mu) = cfg.measure()? {
        println!("|mu| = {}", mu.total_mass()?);
    }

    let mut partial = Config::from_json(r#"{"k": 2.0}"#)?;
    partial.infer_family();
    println!("inferred: {}", partial.kernel_family()?.label());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
