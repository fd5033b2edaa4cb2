//! Work and heat statistics of a two-level quantum Otto engine monitored by
//! repeated projective energy measurements or by repeated pointer contacts.
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]
// `!(a > b)` is deliberate: NaN inputs must fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod core_states;
pub mod engine;
pub mod error;
pub mod gamma;
pub mod lattice_engine;
pub mod mat;
pub mod mixture;
pub mod pathsum_oracle;
pub mod quad;
pub mod thermal_maps;

pub use engine::{Engine, LatticePoint, Observable, Scheme};
pub use error::{OttoError, Result};
pub use mat::{Mat2, Superop, C64};
