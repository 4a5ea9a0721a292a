#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod cli;
pub mod critical;
pub mod error;
pub mod expansion;
pub mod potential;
pub mod powerseries;
pub mod quadrature;
pub mod roots;
pub mod phasescan;
pub mod theta;

pub use error::{Error, Result};
