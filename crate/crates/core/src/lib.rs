//! Control-pulse synthesis for a fully controllable three-atom cell, and a
//! simulator for a 9-qubit device built from four such cells arranged as a
//! two-level tree.
//!
//! The pipeline: [`cell_model`] builds the cell Hamiltonians, [`propagator`]
//! evolves them over 64 piecewise-constant intervals, [`control`] finds the
//! identity vector and refines it toward target gates from [`gates`], and
//! [`device`] compiles and runs circuits such as the 512-point Fourier
//! transform, either with exact gates or with synthesized pulses.

pub mod cell_model;
pub mod control;
pub mod device;
pub mod error;
pub mod formats;
pub mod gates;
pub mod linalg;
pub mod propagator;

pub use cell_model::{CellParams, HamiltonianTriple};
pub use error::{Error, Result};
