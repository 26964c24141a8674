#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod axioms;
pub mod chronology;
pub mod element;
pub mod error;
pub mod evolution;
pub mod genealogy;
pub mod intervals;
pub mod lazy;
pub mod maps;
pub mod measure;
pub mod reduce;
