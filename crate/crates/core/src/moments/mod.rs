//! Monte Carlo moments of `W_n`, growth-rate fits, and the empirical checks
//! of the moment inequalities.

mod checks;
mod growth;
mod replica;
mod spine;

pub use checks::{
    bridge_constant, bridge_from_logs, bridge_inequality_check, concentration_check, concentration_constant, cp_ratio,
    martingale_cp, martingale_increment_check, paley_zygmund_check, phi_k, BridgeReport, ConcentrationReport,
    ConcentrationRow, IncrementReport, MartingaleConstant, PaleyZygmundReport, Verdict, SIGMAS,
};
pub use growth::{
    fp_from_rows, fp_growth_fit, fp_growth_fit_mc, fp_proxy_curve, free_energy_estimate, free_energy_from_rows,
    FpCurvePoint, GrowthFit,
};
pub(crate) use replica::check_replicas;
pub use spine::{fp_growth_fit_spine, mc_moment_spine, spine_log_partitions};
pub use replica::{
    mc_functional, mc_moment, mc_moment_series, mean_se, observe_at, replica_log_partitions, replicate, Functional,
    MomentEstimate,
};
