//! Executable certificates for contextuality, causal order and joint
//! measurability.

#![allow(clippy::needless_range_loop)]

pub mod causality;
pub mod invariants;
pub mod jointmeas;
pub mod lopf;
pub mod opt;
pub mod quantum;
pub mod rational;
pub mod scenario;
pub mod witness;
