//! Point-to-point weights, partition functions and localization observables
//! for a single environment.

mod field;
mod localize;
mod second_moment;

pub use field::{env_log_zeta, log_partition_path, normalized_partition, point_to_point, sweep, WeightField};
pub use localize::{
    endpoint_overlap, endpoint_overlap_with, path_overlap, path_overlap_with, LocalizationReport, MARGINAL_TOLERANCE,
};
pub use second_moment::{log_second_moment_exact, second_moment_exact};
