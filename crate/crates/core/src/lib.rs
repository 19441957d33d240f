// SPDX-License-Identifier: Apache-2.0

//! Compiler and runtime for parallel synchronous programs: gate-level
//! netlists levelized into branch-free bitsliced code and simulated over
//! N independent lanes packed in a machine word.

pub mod codegen;
pub mod designs;
pub mod frontend;
pub mod lanes;
pub mod levelize;
pub mod metrics;
pub mod netlist;
pub mod random;
pub mod runtime;
