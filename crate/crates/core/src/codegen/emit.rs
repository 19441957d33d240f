// SPDX-License-Identifier: Apache-2.0

//! C source emission for a [`BitProgram`].
//!
//! The translation unit holds the flip-flop planes as two file-scope arrays
//! (current and next), a reset function, and the entry function. The entry
//! function body is eval (straight-line logic, output writes, next-state
//! writes) followed by update (next copied to current).

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::program::{BitProgram, Operand};
use crate::netlist::group_ports;

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum",
    "extern", "float", "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return",
    "short", "signed", "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned", "void",
    "volatile", "while", "_Bool", "_Complex", "_Imaginary", "main",
];

#[derive(Clone, Copy, Debug)]
pub struct EmitOptions {
    /// Trailing `/* MNEMONIC */` comment per instruction.
    pub annotate: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions { annotate: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamDirection {
    Input,
    Output,
}

/// One C parameter: `words` machine words, one per bit of the port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CParam {
    pub name: String,
    pub direction: ParamDirection,
    pub words: usize,
    pub is_array: bool,
}

#[derive(Clone, Debug)]
pub struct SourceArtifact {
    pub text: String,
    pub entry: String,
    pub reset: String,
    pub word_type: String,
    pub params: Vec<CParam>,
}

impl SourceArtifact {
    /// Text of the entry function body, between its braces.
    pub fn entry_body(&self) -> &str {
        let sig = format!("void {}(", self.entry);
        let start = self.text.find(&sig).expect("entry function present");
        let open = start + self.text[start..].find('{').expect("entry body");
        let close = open + self.text[open..].find("\n}").expect("entry body end");
        &self.text[open + 1..close]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("ports `{first}` and `{second}` both map to C identifier `{ident}`")]
    IdentifierCollision {
        first: String,
        second: String,
        ident: String,
    },
    #[error("port `{port}` maps to reserved identifier `{ident}`")]
    Reserved { port: String, ident: String },
    #[error("design name `{0}` does not yield a C identifier")]
    BadDesignName(String),
}

/// Maps an arbitrary name to a C identifier.
pub fn c_identifier(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.chars().next().is_none_or(|c| c.is_ascii_digit()) {
        s.insert(0, '_');
    }
    s
}

struct Binding<'a> {
    bp: &'a BitProgram,
    input_expr: Vec<String>,
    cur: String,
}

impl Binding<'_> {
    fn operand(&self, op: Operand) -> String {
        match op {
            Operand::Reg(r) => format!("psp_v{r}"),
            Operand::Input(i) => self.input_expr[i as usize].clone(),
            Operand::State(s) => format!("{}[{s}]", self.cur),
            Operand::Const(false) => "0".to_string(),
            Operand::Const(true) => "psp_ones".to_string(),
        }
    }

    fn uses_ones(&self) -> bool {
        let bp = self.bp;
        bp.instrs
            .iter()
            .flat_map(|i| i.operands())
            .chain(bp.outputs.iter().map(|o| o.value))
            .chain(bp.dffs.iter().map(|d| d.next))
            .any(|op| op == Operand::Const(true))
    }
}

pub fn emit_source(bp: &BitProgram, options: EmitOptions) -> Result<SourceArtifact, EmitError> {
    let design = c_identifier(&bp.name);
    if design.is_empty() || design == "_" {
        return Err(EmitError::BadDesignName(bp.name.clone()));
    }
    let word = format!("{design}_word");
    let cur = format!("{design}_cur");
    let nxt = format!("{design}_nxt");
    let entry = format!("{design}_psp");
    let reset = format!("{design}_reset");
    let reserved = [&word, &cur, &nxt, &entry, &reset];

    let in_groups = group_ports(bp.inputs.iter().map(String::as_str));
    let out_groups = group_ports(bp.outputs.iter().map(|o| o.name.as_str()));

    let mut taken: HashMap<String, String> = HashMap::new();
    let mut params = Vec::new();
    for (dir, groups) in [(ParamDirection::Input, &in_groups), (ParamDirection::Output, &out_groups)] {
        for g in groups.iter() {
            let ident = c_identifier(&g.name);
            if C_KEYWORDS.contains(&ident.as_str())
                || ident.starts_with("psp_")
                || reserved.iter().any(|r| **r == ident)
            {
                return Err(EmitError::Reserved {
                    port: g.name.clone(),
                    ident,
                });
            }
            if let Some(first) = taken.insert(ident.clone(), g.name.clone()) {
                return Err(EmitError::IdentifierCollision {
                    first,
                    second: g.name.clone(),
                    ident,
                });
            }
            params.push(CParam {
                name: ident,
                direction: dir,
                words: g.width(),
                is_array: g.bus,
            });
        }
    }

    let mut input_expr = vec![String::new(); bp.inputs.len()];
    for (g, p) in in_groups.iter().zip(&params) {
        for (bit, &slot) in g.slots.iter().enumerate() {
            input_expr[slot] = if p.is_array {
                format!("{}[{bit}]", p.name)
            } else {
                p.name.clone()
            };
        }
    }
    let mut output_lvalue = vec![String::new(); bp.outputs.len()];
    for (g, p) in out_groups.iter().zip(&params[in_groups.len()..]) {
        for (bit, &slot) in g.slots.iter().enumerate() {
            output_lvalue[slot] = if p.is_array {
                format!("{}[{bit}]", p.name)
            } else {
                format!("*{}", p.name)
            };
        }
    }
    let bind = Binding {
        bp,
        input_expr,
        cur: cur.clone(),
    };

    let ctype = match bp.width.lanes() {
        8 => "uint8_t",
        16 => "uint16_t",
        32 => "uint32_t",
        _ => "uint64_t",
    };
    let dffs = bp.dffs.len();

    let mut s = String::new();
    writeln!(
        s,
        "/* {}: parallel synchronous program, {} lanes, {} lowering. Generated; do not edit. */",
        bp.name,
        bp.width,
        bp.isa.profile().display_name
    )
    .unwrap();
    writeln!(s, "#include <stdint.h>\n").unwrap();
    writeln!(s, "typedef {ctype} {word};\n").unwrap();
    if dffs > 0 {
        writeln!(s, "static {word} {cur}[{dffs}];").unwrap();
        writeln!(s, "static {word} {nxt}[{dffs}];\n").unwrap();
    }

    writeln!(s, "void {reset}(void)\n{{").unwrap();
    for (i, d) in bp.dffs.iter().enumerate() {
        let v = if d.init { format!("({word})~({word})0") } else { "0".to_string() };
        writeln!(s, "    {cur}[{i}] = {v}; /* {} */", d.name.replace("*/", "* /")).unwrap();
        writeln!(s, "    {nxt}[{i}] = {v};").unwrap();
    }
    writeln!(s, "}}\n").unwrap();

    let sig: Vec<String> = params
        .iter()
        .map(|p| match (p.direction, p.is_array) {
            (ParamDirection::Input, true) => format!("const {word} {}[{}]", p.name, p.words),
            (ParamDirection::Input, false) => format!("{word} {}", p.name),
            (ParamDirection::Output, true) => format!("{word} {}[{}]", p.name, p.words),
            (ParamDirection::Output, false) => format!("{word} *{}", p.name),
        })
        .collect();
    let sig = if sig.is_empty() { "void".to_string() } else { sig.join(", ") };
    writeln!(s, "void {entry}({sig})\n{{").unwrap();
    if bind.uses_ones() {
        writeln!(s, "    const {word} psp_ones = ({word})~({word})0;").unwrap();
    }
    for ins in &bp.instrs {
        let a = bind.operand(ins.a);
        let b = ins.b.map(|b| bind.operand(b)).unwrap_or_default();
        write!(s, "    const {word} psp_v{} = ({word})({});", ins.dest, ins.op.c_expr(&a, &b)).unwrap();
        if options.annotate {
            write!(s, " /* {} */", ins.op).unwrap();
        }
        s.push('\n');
    }
    for (o, lvalue) in bp.outputs.iter().zip(&output_lvalue) {
        writeln!(s, "    {lvalue} = {};", bind.operand(o.value)).unwrap();
    }
    for (i, d) in bp.dffs.iter().enumerate() {
        writeln!(s, "    {nxt}[{i}] = {};", bind.operand(d.next)).unwrap();
    }
    for i in 0..dffs {
        writeln!(s, "    {cur}[{i}] = {nxt}[{i}];").unwrap();
    }
    writeln!(s, "}}").unwrap();

    Ok(SourceArtifact {
        text: s,
        entry,
        reset,
        word_type: word,
        params,
    })
}

/// Control-flow tokens that must not appear in an entry body.
pub const CONTROL_FLOW_TOKENS: &[&str] = &["if", "else", "for", "while", "do", "goto", "switch", "case", "return", "?"];

/// Control-flow tokens present in `body`, by identifier-boundary match.
pub fn control_flow_tokens(body: &str) -> Vec<String> {
    let mut found = Vec::new();
    let mut word = String::new();
    for c in body.chars().chain(std::iter::once(' ')) {
        if c.is_ascii_alphanumeric() || c == '_' {
            word.push(c);
            continue;
        }
        if CONTROL_FLOW_TOKENS.contains(&word.as_str()) {
            found.push(std::mem::take(&mut word));
        }
        word.clear();
        if c == '?' {
            found.push("?".into());
        }
    }
    found
}
