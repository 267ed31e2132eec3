//! Permanental processes built from killed Markov kernels.
//!
//! The pieces, roughly in the order a user meets them:
//!
//! - [`exponent`] and [`kernels`]: characteristic exponents and the potential
//!   densities they generate (`u^β`, `σ²`, `v^β`, the diffusion kernels),
//!   computed by oscillatory quadrature in [`quadrature`].
//! - [`measure`]: finite measures, left potentials `f(t) = ∫u(t,x)dμ(x)` and
//!   the augmented kernels `u(x,y) + g(x)f(y)`.
//! - [`matrixlab`]: kernel matrices on grids, the closed-form inverses of the
//!   bordered matrices `U_f`, `U_{f,g}`, M-matrix and symmetrizability checks.
//! - [`sampler`]: chi-square sampling of permanental vectors with
//!   reproducible per-replication streams, gamma envelopes, KS tests.
//! - [`asymptotics`]: limits of `t/σ²(t)` and the LIL constants of the four
//!   worked examples.
//! - [`experiment`]: desk-scale LIL runs and the envelope probability,
//!   with CSV/JSON reports.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example
//! kernel_oracles` is a good first one. The `permanental` binary wraps the same
//! calls, see [`cli`].
//!
//! ```
//! use permanental::{u_beta, CharExponent, Tolerance};
//!
//! let psi = CharExponent::brownian(1.0).unwrap();
//! let u = u_beta(&psi, 1.0, 1.0, &Tolerance::default()).unwrap();
//! assert!((u - (-1.0f64).exp() / 2.0).abs() < 1e-8);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod exponent;
pub mod format;
pub mod kernels;
pub mod matrixlab;
pub mod measure;
pub mod quadrature;
pub mod sampler;

pub use asymptotics::{
    c_example1, c_example2, c_example3, c_example4, ratio_limit, t_over_sigma_limit, ConstantReport, LimitKind,
};
pub use config::Config;
pub use diffusion::{DiffusionPair, ScaleFunction};
pub use error::{Error, Result};
pub use experiment::{
    emit_report, estimate_envelope_prob, run_lil_experiment, EnvelopeKernel, EnvelopeSpec, Format, LilReport,
    LilSpec,
};
pub use exponent::{check_integrability, psi_ratio_bound, CharExponent};
pub use kernels::{phi, sigma0_sq, sigma_beta_sq, sigma_sq_derivative, u_beta, v_beta, KernelFamily};
pub use matrixlab::{build_kernel_matrix, build_uf, build_ufg, inverse_uf_formula, inverse_ufg_formula, Grid};
pub use measure::{left_potential, AugmentedKernel, FiniteMeasure};
pub use quadrature::Tolerance;
pub use sampler::{sample_permanental, PermanentalSpec, SampleBatch};
