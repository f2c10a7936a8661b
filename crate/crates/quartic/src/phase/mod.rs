//! Smooth phase-space cutoffs, their time derivatives, commutators and
//! operator-norm estimation.

mod cutoff;
mod operator;
mod opnorm;
mod smooth;

pub use cutoff::{
    apply_cutoff, ddt_cutoff, directional_partition, CutoffSpec, Domain, Geometry, Orientation,
    Profile, Sign, Threshold,
};
pub use operator::{
    commutator_apply, dense_matrix, Chain, Commutator, Diagonal, Identity, LinearOp, Multiplier,
};
pub use opnorm::{op_norm_estimate, op_norm_estimate_seeded, NormEstimate, POWER_SEED};
pub use smooth::{smooth_step, smooth_step_derivative, SmoothStep};
