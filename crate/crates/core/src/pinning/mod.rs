//! Pinning kernels `𝒦(n)`, the tilt exponent `φ(v)`, the renewal series
//! `𝒵_{v,m}` and the renewal upper bound on fractional moments.

mod chaos;
mod kernel;
mod phi;
mod renewal;

pub use chaos::{chaos_upper_bound_check, ChaosReport};
pub use kernel::{kernel_exact_beta0, kernel_mc, KernelMeta, KernelTable};
pub use phi::{phi_of_v, phi_of_v_with, PhiSolution, TailFit, TailMode};
pub use renewal::{renewal_log_series, renewal_series, RenewalBound};
