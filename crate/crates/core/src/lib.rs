//! Finite dividing-line analysis of real-valued evaluation tables.
//!
//! A table `T[row][col]` is read as a family of functions (the columns) on a
//! finite set of points (the rows). The detectors measure how far the family
//! is from stability: ladders and alternations for the order property,
//! shattered column sets for the independence property, pointwise chains for
//! the strict order property, and empirical-measure tuple counts for
//! Talagrand's stability. Every positive finding carries a witness that can
//! be re-checked against the table with [`validate_witness`].
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

mod error;
mod lp;
mod search;
mod table;

pub mod classify;
pub mod definability;
pub mod generators;
pub mod ip;
pub mod op;
pub mod sop;
pub mod talagrand;
pub mod witness;

pub use error::{Axis, Error};
pub use search::{derive_seed, Found, DEFAULT_NODE_BUDGET};
pub use table::{Epsilon, EvalTable, ThresholdPair};
pub use witness::{
    validate_witness, AltVariant, AlternationWitness, ChainWitness, LadderWitness, ShatterWitness,
    StepChainWitness, Verdict, Violation, Witness,
};
