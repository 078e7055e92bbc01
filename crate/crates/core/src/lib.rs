//! Exact analysis of surrogate-loss and link pairs.
//!
//! Everything except [`lower_bound`] works over arbitrary precision
//! rationals, so certificates are exact rather than approximate.
#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod elicitation;
pub mod linalg;
pub mod lower_bound;
pub mod lp;
pub mod model;
pub mod polyhedra;
pub mod rational;
pub mod verifier;
pub mod zoo;
