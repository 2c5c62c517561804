//! Random-walk slices, the difference walk, collision sums and `β₂`.

mod collision;
mod geometry;
mod walk;

pub use collision::{
    beta2_bound, beta2_bound_from, collision_gamma, collision_sum, return_probabilities, return_probabilities_dense,
    Beta2Report, CollisionSum, DifferenceKernel, TailBand, MAX_COLLISION_HORIZON,
};
pub(crate) use collision::unit_steps;
pub use geometry::ConeBox;
pub use walk::{srw_step, WalkSlice};
