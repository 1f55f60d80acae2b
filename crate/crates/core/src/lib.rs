// SPDX-License-Identifier: Apache-2.0

//! A retargetable gate-level quantum compiler.
//!
//! Programs are built from [`ir::Kernel`]s of gates and compiled against an
//! optional [`platform::Platform`] loaded from a JSON hardware description.
//! The pipeline in [`pipeline`] decomposes, optimizes, maps, schedules and
//! finally emits cQASM text and a latency-compensated timing trace. The
//! state-vector simulator in [`sim`] is the reference used to check that
//! each pass preserves the circuit's meaning.
//!
//! ```
//! use qlc_core::examples::bell;
//! use qlc_core::pipeline::{compile, CompileOptions};
//!
//! let out = compile(&bell(), None, &CompileOptions::default()).unwrap();
//! assert!(out.cqasm.starts_with("version 1.0\nqubits 2\n"));
//! ```

pub mod decompose;
pub mod emit;
pub mod error;
pub mod examples;
pub mod ir;
pub mod map;
pub mod optimize;
pub mod pipeline;
pub mod platform;
pub mod schedule;
pub mod sim;

pub use error::Error;
