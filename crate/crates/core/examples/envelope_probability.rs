// Probability that the gamma envelope crosses (1−ε)/(1+2θ) somewhere in
// [l, n], against 1 − (l+1)/(n+1).

use permanental::{estimate_envelope_prob, EnvelopeKernel, EnvelopeSpec, Result};

pub fn run_example() -> Result<()> {
    let spec = EnvelopeSpec {
        alpha: 1.0,
        theta: 0.1,
        epsilon: 0.5,
        l: 5,
        reps: 2000,
        seed: 11,
    };
    for (name, kernel) in [("min", EnvelopeKernel::MinKernel), ("gamma", EnvelopeKernel::PureGamma)] {
        for e in estimate_envelope_prob(&kernel, &spec, &[10, 50, 500])? {
            println!(
                "{name:5} n={:4} estimate {:.4} +- {:.4} bound {:.4} {}",
                e.n,
                e.estimate,
                e.std_error,
                e.bound,
                if e.pass { "PASS" } else { "FAIL" }
            );
        }
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
