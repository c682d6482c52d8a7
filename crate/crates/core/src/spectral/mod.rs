//! Grids, fields, transforms and cutoff functions.

pub mod cutoffs;
mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod synth;

pub use cutoffs::{make_cutoffs, CutoffSpec};
pub use field::{Field, Representation, Symbol};
pub use grid::{validate_adequacy, GridSpec, ADEQUACY_FACTOR};
