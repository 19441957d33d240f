// SPDX-License-Identifier: Apache-2.0

//! Lowering to branch-free bitwise programs, C emission and instruction
//! accounting.

pub mod emit;
pub mod ir_text;
pub mod isa;
pub mod program;
pub mod tally;

pub use emit::{control_flow_tokens, emit_source, EmitError, EmitOptions, SourceArtifact};
pub use ir_text::{from_ir_text, to_ir_text, IrParseError};
pub use isa::{IsaKind, IsaProfile, Mnemonic};
pub use program::{lower, BitProgram, Instr, Operand, OutputSlot, ProgramError, StateSlot};
pub use tally::{tally, InstructionBreakdown};
