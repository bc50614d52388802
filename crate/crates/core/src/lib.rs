//! Simulation toolkit for quantum signal processing (QSP) and the quantum
//! singular value transformation (QSVT).
//!
//! The crate is organised bottom-up:
//!
//! * [`qsp_core`] evaluates single-qubit phase sequences and converts between conventions.
//! * [`poly_approx`] builds certified Chebyshev approximations of the target functions.
//! * [`phase_solver`] finds phases realizing a target polynomial.
//! * [`block_encoding`] embeds matrices into unitaries.
//! * [`qsvt_engine`] applies phase sequences to block encodings.
//! * [`algorithms`] runs search, thresholding, phase estimation, simulation and inversion.

// `!(x > 0.0)` style guards are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod block_encoding;
pub mod error;
pub mod phase_solver;
pub mod poly_approx;
pub mod qsp_core;
pub mod qsvt_engine;

pub use algorithms::{Mode, PhaseEstimate, RunRecord};
pub use block_encoding::{BlockEncoding, ComplexMatrix, ComplexVector};
pub use error::{QsvtError, Result};
pub use poly_approx::{ApproxSpec, ChebyshevPoly, FitResult, Parity};
pub use qsp_core::{Basis, Convention, Layout, PhaseSequence, ProcessingKind, SignalKind, Su2Matrix};
pub use qsvt_engine::QsvtProgram;
