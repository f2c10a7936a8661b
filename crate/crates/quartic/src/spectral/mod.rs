//! Periodic grids, the transform contract, Fourier multipliers, the exact
//! free flow and the norms used by the diagnostics.

mod checkpoint;
mod fft;
mod field;
mod grid;
mod multiplier;
mod norms;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, Checkpoint,
};
pub use field::{ComplexField, Rep};
pub use grid::{make_grid, signed_index, GridSpec, MAX_DIM, MIN_POINTS};
pub use multiplier::{
    apply_multiplier, apply_symbol, free_phases, free_propagate, free_propagate_spectrum,
    quartic_symbol, symbol_values,
};
pub use norms::{norms_and_moments, NormKind};
