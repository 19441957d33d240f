// SPDX-License-Identifier: Apache-2.0

//! Netlist readers and writers for external interchange formats.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::netlist::{Netlist, NetlistError};

mod blif;
mod synth_json;

pub use blif::{emit_blif, parse_blif, EmitBlifError};
pub use synth_json::{emit_synth_json, parse_synth_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceFormat {
    BlifStructural,
    SynthJson,
}

impl SourceFormat {
    /// Infers the format from a `.blif` or `.json` extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "blif" => Some(SourceFormat::BlifStructural),
            "json" => Some(SourceFormat::SynthJson),
            _ => None,
        }
    }
}

impl FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blif" => Ok(SourceFormat::BlifStructural),
            "synth-json" | "json" => Ok(SourceFormat::SynthJson),
            other => Err(format!("unknown format `{other}` (expected blif or synth-json)")),
        }
    }
}

/// Location is a 1-based line number. For JSON input the line comes from the
/// JSON parser when available, otherwise it is 0 and the snippet names the
/// offending construct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub message: String,
    pub snippet: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)?;
        if !self.snippet.is_empty() {
            write!(f, "\n  | {}", self.snippet)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("{}", format_diagnostics(.0))]
    Parse(Vec<ParseDiagnostic>),
    #[error(transparent)]
    Invalid(#[from] NetlistError),
}

fn format_diagnostics(diags: &[ParseDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("parse error at {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse(text: &str, format: SourceFormat) -> Result<Netlist, FrontendError> {
    match format {
        SourceFormat::BlifStructural => parse_blif(text),
        SourceFormat::SynthJson => parse_synth_json(text),
    }
}
