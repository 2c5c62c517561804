//! Disorder laws, environments, and convex-order couplings.

pub mod convex;
pub mod coupling;
mod environment;
mod law;

pub use convex::{convex_order_check, convex_order_check_with, ConvexOrderOptions, ConvexOrderReport, ScalarLaw};
pub use coupling::{
    certify_coupling, coupling_g, coupling_g_sup, sample_zv, zv_masses, CouplingCertificate, CouplingParams,
    GSupReport, GValue, ZvMasses,
};
pub use environment::{sample_environment, Environment, MAX_DIM};
pub use law::{DisorderLaw, LawSpec, TableLaw};

use rand::Rng;

/// `λ(β)` for `law`.
pub fn log_mgf(law: &DisorderLaw, beta: f64) -> crate::Result<f64> {
    law.log_mgf(beta)
}

/// One draw of `ζ_β = e^{βω - λ(β)}`.
pub fn sample_zeta<R: Rng + ?Sized>(law: &DisorderLaw, beta: f64, rng: &mut R) -> f64 {
    law.sample_zeta(beta, rng)
}
