//! Time evolution under the interaction classes, by Strang splitting around the
//! exact free multiplier.

mod duhamel;
mod evolve;
mod interaction;
mod run;
mod strang;

pub use duhamel::{duhamel_residual, DuhamelObserver};
pub use evolve::{
    checkpoint_path, evolve, evolve_with, latest_checkpoint, EvolveOptions, Observer, ObserverState, Sample,
    StoredSample, Trajectory,
};
pub use interaction::{
    interaction_eval, InteractionKind, InteractionSpec, LocalizedPotential, Modulation,
    PowerNonlinearity,
};
pub use run::{
    band_limit, envelope, required_box_length, GaussianPacket, InitialData, RunConfig,
    ScatteringParams, Schedule,
};
pub use strang::{interaction_field, step_strang, Stepper};
