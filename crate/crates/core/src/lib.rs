#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod beamspace;
pub mod channel;
pub mod error;
pub mod gp_lse;
pub mod harness;
pub mod linalg;
pub mod phase_retrieval;
pub mod rng;
pub mod validation;

pub use error::{Error, Result};
