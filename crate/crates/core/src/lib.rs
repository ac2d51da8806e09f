#![no_std]
//! Formula translation, r-types, finite-witness satisfaction and path
//! guessing over finite fragments of labelled Z-chain structures.

extern crate alloc;

pub mod error;
pub mod formula;
pub mod guessing;
pub mod indiscern;
pub mod ma;
pub mod model;
pub mod satisfaction;
pub mod tree;

pub use error::{Error, FormulaError, ModelError};
