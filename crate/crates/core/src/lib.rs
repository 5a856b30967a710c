//! Exact simulation of the liar machine, its discrepancy from the linear
//! machine, parity forcing, and the pathological liar game it models.

pub mod certified;
pub mod chipfield;
pub mod discrepancy;
pub mod error;
pub mod liargame;
pub mod numerics;
pub mod parityforge;

mod limbs;

pub use error::{Error, Result};
