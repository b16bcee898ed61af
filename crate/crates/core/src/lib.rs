//! Localizing time-frequency transforms sampled on low-discrepancy point sets.
//!
//! Atoms are indexed by time `a`, frequency `b` and an oscillation parameter
//! `c in [0, 1]`. Analysis evaluates inner products at a finite sample of
//! phase space; synthesis sums the weighted atoms back and
//! [`frame_op::apply_inverse_frame`] corrects for the frame operator.

pub mod baselines;
pub mod error;
pub mod frame_op;
pub mod lds;
pub mod processing;
pub mod ltft_core;

pub use error::{Error, Result};
