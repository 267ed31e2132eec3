// Potential densities against their closed forms.
//
// For ψ(λ) = γλ² the β-potential is e^{−√(β/γ)|x|}/(2√(βγ)), and
// ψ(λ) = λ² gives σ⁰²(x) = |x|.

use permanental::{sigma0_sq, u_beta, v_beta, CharExponent, KernelFamily, Result, Tolerance};

pub fn run_example() -> Result<()> {
    let tol = Tolerance::default();
    for (beta, gamma) in [(1.0, 1.0), (2.0, 0.5)] {
        let psi = CharExponent::brownian(gamma)?;
        for x in [0.0, 0.1, 1.0, 10.0] {
            let got = u_beta(&psi, beta, x, &tol)?;
            let exact = (-(beta / gamma).sqrt() * x).exp() / (2.0 * (beta * gamma).sqrt());
            println!("u^{beta}(x={x:<4}) gamma={gamma}: {got:.12e}  exact {exact:.12e}");
        }
    }

    let psi = CharExponent::brownian(1.0)?;
    for x in [1e-3, 1.0, 10.0] {
        println!("sigma0^2({x}) = {:.10}", sigma0_sq(&psi, x, &tol)?);
    }

    // Stable p = 1.5: σ⁰² is a multiple of |x|^{1/2}.
    let stable = CharExponent::stable(1.5, 1.0)?;
    let a = sigma0_sq(&stable, 0.25, &tol)?;
    let b = sigma0_sq(&stable, 1.0, &tol)?;
    println!("stable 1.5: sigma0^2(1)/sigma0^2(1/4) = {:.8} (expect 2)", b / a);

    let v = v_beta(&psi, 1.0, 0.5, 0.7, &tol)?;
    let fam = KernelFamily::LevyExpKilledAtZero { psi, beta: 1.0 };
    println!("v^1(0.5,0.7) = {v:.10}, via family {:.10}", fam.eval(0.5, 0.7)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
