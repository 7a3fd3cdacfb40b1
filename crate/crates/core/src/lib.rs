// SPDX-License-Identifier: Apache-2.0

//! Behavioral simulator and table compiler for memristor analog CAMs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod cell;
pub mod compiler;
pub mod config;
pub mod cost;
pub mod device;
pub mod error;
pub mod tree;

pub use error::{AcamError, Result};
