//! Simulation core for a hybrid quantum memory: a current-biased Josephson
//! junction (CBJJ) coupled through a transmission-line resonator (TLR) to
//! nitrogen-vacancy ensembles (NVE).
//!
//! Everything here works without `std`; an allocator is required.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod device;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod lindblad;
pub mod protocols;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, Ket, Operator, SpaceLayout};
pub use linalg::{CMatrix, CVector, C64};
