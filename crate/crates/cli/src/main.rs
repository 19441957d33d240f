// SPDX-License-Identifier: Apache-2.0

//! `psp`: compile, simulate, measure and transpose parallel synchronous
//! programs.
//!
//! Exit status: 0 ok, 1 usage, 2 parse, 3 validation, 4 simulation mismatch.

mod commands;
mod transpose;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psp::codegen::IsaKind;
use psp::frontend::SourceFormat;
use psp::lanes::LaneWidth;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "psp", version, about = "Netlist to bitsliced parallel synchronous program toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a netlist to C source or program IR; prints gate stats and
    /// the instruction breakdown.
    Compile(CompileArgs),
    /// Run a design over a stimulus and write the trace.
    Simulate(SimulateArgs),
    /// Print the JSON metrics report of a compiled design.
    Stats(StatsArgs),
    /// Convert per-lane values to bit planes, or back with --unslice.
    Transpose(TransposeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    /// Netlist file (.blif or .json).
    pub input: std::path::PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<SourceFormat>,
    /// Target profile: arm-m4, risc-v, msp430, avr or portable.
    #[arg(long, default_value = "arm-m4", value_parser = parse_isa)]
    pub isa: IsaKind,
    /// Lanes per word: 8, 16, 32 or 64.
    #[arg(long, default_value = "32", value_parser = parse_width)]
    pub width: LaneWidth,
    /// Remove logic that reaches no output or flip-flop before compiling.
    #[arg(long)]
    pub prune_dead: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitKind {
    Source,
    Ir,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, value_enum, default_value = "source")]
    pub emit: EmitKind,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
    /// Omit per-instruction mnemonic comments in emitted source.
    #[arg(long)]
    pub no_annotate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Lowered branch-free program.
    Program,
    /// Levelized netlist.
    Leveled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    Planes,
    Lanes,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Stimulus CSV; random stimulus from --seed when omitted.
    #[arg(long)]
    pub stimulus: Option<std::path::PathBuf>,
    /// Ticks to run; defaults to the stimulus length.
    #[arg(long)]
    pub ticks: Option<usize>,
    /// Seed for random stimulus.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "program")]
    pub engine: Engine,
    /// Cross-check against the other engine and the event-driven reference.
    #[arg(long)]
    pub check: bool,
    /// Trace CSV path; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value = "planes")]
    pub layout: Layout,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Random ticks used for the repeatability check.
    #[arg(long, default_value_t = 64)]
    pub ticks: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct TransposeArgs {
    /// Per-lane CSV (or plane CSV with --unslice).
    pub input: std::path::PathBuf,
    /// Bits per value.
    #[arg(long)]
    pub bits: u32,
    #[arg(long, default_value = "32", value_parser = parse_width)]
    pub width: LaneWidth,
    /// Plane CSV back to per-lane values.
    #[arg(long)]
    pub unslice: bool,
    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

fn parse_isa(s: &str) -> Result<IsaKind, String> {
    s.parse()
}

fn parse_width(s: &str) -> Result<LaneWidth, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<SourceFormat, String> {
    s.parse()
}

/// A failed command: exit status and message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Compile(a) => commands::compile(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Transpose(a) => transpose::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
