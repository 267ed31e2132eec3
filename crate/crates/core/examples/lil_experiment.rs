// Desk-scale law of the iterated logarithm for the killed Brownian kernel.

use permanental::experiment::{write_report, Format};
use permanental::{run_lil_experiment, FiniteMeasure, LilSpec, Result};

pub fn run_example() -> Result<()> {
    let spec = LilSpec::killed_brownian(2024);
    let report = run_lil_experiment(&spec)?;
    if let Some(q) = &report.summary {
        println!("terminal running max: p05 {:.3} p50 {:.3} p95 {:.3}", q.p05, q.p50, q.p95);
    }
    for c in &report.checks {
        println!("{} {:.4} vs {:.4}: {}", c.name, c.value, c.bound, if c.pass { "PASS" } else { "FAIL" });
    }

    // Enlarged denominator u(t,t) + f(t).
    let spec = LilSpec::killed_brownian(2024).with_potential(FiniteMeasure::dirac(0.5));
    let report = run_lil_experiment(&spec)?;
    println!("with f: share <= 1.2 is {:.3}", report.fraction_at_most(1.2));

    let mut head = Vec::new();
    write_report(&report, &mut head, Format::Csv)?;
    let text = String::from_utf8_lossy(&head);
    for line in text.lines().take(3) {
        println!("{line}");
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
