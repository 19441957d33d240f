// SPDX-License-Identifier: Apache-2.0

//! Line-oriented text form of a [`BitProgram`].
//!
//! ```text
//! width 32; inputs 2; outputs 1; dffs 1;
//! design toggle
//! isa arm-m4
//! input i0 en
//! output o0 q
//! dff s0 0 q
//! eor v0 s0 i0
//! out o0 s0
//! next s0 v0
//! ```
//!
//! Instruction lines are `op dest src1 [src2]`. Operands are `vN`
//! (register), `iN` (input), `sN` (current state), `#0` and `#1`.

use std::fmt::Write as _;

use thiserror::Error;

use super::isa::{IsaKind, Mnemonic};
use super::program::{BitProgram, Instr, Operand, OutputSlot, StateSlot};
use crate::lanes::LaneWidth;

pub fn to_ir_text(bp: &BitProgram) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "width {}; inputs {}; outputs {}; dffs {};",
        bp.width,
        bp.inputs.len(),
        bp.outputs.len(),
        bp.dffs.len()
    )
    .unwrap();
    writeln!(s, "design {}", bp.name).unwrap();
    writeln!(s, "isa {}", bp.isa).unwrap();
    for (i, name) in bp.inputs.iter().enumerate() {
        writeln!(s, "input i{i} {name}").unwrap();
    }
    for (i, o) in bp.outputs.iter().enumerate() {
        writeln!(s, "output o{i} {}", o.name).unwrap();
    }
    for (i, d) in bp.dffs.iter().enumerate() {
        writeln!(s, "dff s{i} {} {}", u8::from(d.init), d.name).unwrap();
    }
    for ins in &bp.instrs {
        write!(s, "{} v{} {}", ins.op.name().to_ascii_lowercase(), ins.dest, ins.a).unwrap();
        if let Some(b) = ins.b {
            write!(s, " {b}").unwrap();
        }
        s.push('\n');
    }
    for (i, o) in bp.outputs.iter().enumerate() {
        writeln!(s, "out o{i} {}", o.value).unwrap();
    }
    for (i, d) in bp.dffs.iter().enumerate() {
        writeln!(s, "next s{i} {}", d.next).unwrap();
    }
    s
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct IrParseError {
    pub line: usize,
    pub message: String,
}

fn parse_operand(tok: &str) -> Option<Operand> {
    match tok {
        "#0" => return Some(Operand::Const(false)),
        "#1" => return Some(Operand::Const(true)),
        _ => {}
    }
    let (prefix, num) = tok.split_at(1);
    let num: u32 = num.parse().ok()?;
    match prefix {
        "v" => Some(Operand::Reg(num)),
        "i" => Some(Operand::Input(num)),
        "s" => Some(Operand::State(num)),
        _ => None,
    }
}

fn parse_slot(tok: &str, prefix: char, expected: usize) -> Option<()> {
    let n: usize = tok.strip_prefix(prefix)?.parse().ok()?;
    (n == expected).then_some(())
}

pub fn from_ir_text(text: &str) -> Result<BitProgram, IrParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let fail = |line: usize, message: String| IrParseError { line, message };

    let (hline, header) = lines
        .next()
        .ok_or_else(|| fail(1, "empty program text".into()))?;
    let mut counts = [None::<usize>; 4];
    let mut width = None;
    for field in header.split(';').map(str::trim).filter(|f| !f.is_empty()) {
        let (key, value) = field
            .split_once(' ')
            .ok_or_else(|| fail(hline, format!("malformed header field `{field}`")))?;
        let value = value.trim();
        match key {
            "width" => width = Some(value.parse::<LaneWidth>().map_err(|e| fail(hline, e))?),
            "inputs" | "outputs" | "dffs" => {
                let idx = ["inputs", "outputs", "dffs"].iter().position(|k| *k == key).unwrap();
                counts[idx] = Some(
                    value
                        .parse()
                        .map_err(|_| fail(hline, format!("bad count `{value}`")))?,
                );
            }
            other => return Err(fail(hline, format!("unknown header field `{other}`"))),
        }
    }
    let width = width.ok_or_else(|| fail(hline, "header lacks width".into()))?;
    let [Some(n_in), Some(n_out), Some(n_dff), _] = counts else {
        return Err(fail(hline, "header must give inputs, outputs and dffs".into()));
    };

    let mut bp = BitProgram {
        name: String::new(),
        isa: IsaKind::Portable,
        width,
        inputs: Vec::new(),
        outputs: Vec::new(),
        dffs: Vec::new(),
        instrs: Vec::new(),
    };
    let mut outs_seen = 0;
    let mut next_seen = 0;
    for (line, text) in lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let bad = |what: &str| fail(line, format!("{what}: `{text}`"));
        match toks[0] {
            "design" => bp.name = toks.get(1).copied().unwrap_or_default().to_string(),
            "isa" => {
                bp.isa = toks
                    .get(1)
                    .ok_or_else(|| bad("missing isa"))?
                    .parse()
                    .map_err(|e: String| fail(line, e))?
            }
            "input" => {
                let [_, slot, name] = toks[..] else { return Err(bad("expected `input iN name`")) };
                parse_slot(slot, 'i', bp.inputs.len()).ok_or_else(|| bad("input slots must be dense"))?;
                bp.inputs.push(name.to_string());
            }
            "output" => {
                let [_, slot, name] = toks[..] else { return Err(bad("expected `output oN name`")) };
                parse_slot(slot, 'o', bp.outputs.len()).ok_or_else(|| bad("output slots must be dense"))?;
                bp.outputs.push(OutputSlot {
                    name: name.to_string(),
                    value: Operand::Const(false),
                });
            }
            "dff" => {
                let [_, slot, init, name] = toks[..] else { return Err(bad("expected `dff sN init name`")) };
                parse_slot(slot, 's', bp.dffs.len()).ok_or_else(|| bad("dff slots must be dense"))?;
                let init = match init {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad("init must be 0 or 1")),
                };
                bp.dffs.push(StateSlot {
                    name: name.to_string(),
                    init,
                    next: Operand::Const(false),
                });
            }
            "out" => {
                let [_, slot, value] = toks[..] else { return Err(bad("expected `out oN value`")) };
                parse_slot(slot, 'o', outs_seen).ok_or_else(|| bad("out lines must follow slot order"))?;
                let value = parse_operand(value).ok_or_else(|| bad("bad operand"))?;
                bp.outputs
                    .get_mut(outs_seen)
                    .ok_or_else(|| bad("undeclared output"))?
                    .value = value;
                outs_seen += 1;
            }
            "next" => {
                let [_, slot, value] = toks[..] else { return Err(bad("expected `next sN value`")) };
                parse_slot(slot, 's', next_seen).ok_or_else(|| bad("next lines must follow slot order"))?;
                let value = parse_operand(value).ok_or_else(|| bad("bad operand"))?;
                bp.dffs
                    .get_mut(next_seen)
                    .ok_or_else(|| bad("undeclared dff"))?
                    .next = value;
                next_seen += 1;
            }
            op => {
                let op: Mnemonic = op.parse().map_err(|e: String| fail(line, e))?;
                let (dest, a, b) = match toks[1..] {
                    [d, a] => (d, a, None),
                    [d, a, b] => (d, a, Some(b)),
                    _ => return Err(bad("expected `op dest src1 [src2]`")),
                };
                let Some(Operand::Reg(dest)) = parse_operand(dest) else {
                    return Err(bad("destination must be a register"));
                };
                let a = parse_operand(a).ok_or_else(|| bad("bad operand"))?;
                let b = b
                    .map(|b| parse_operand(b).ok_or_else(|| bad("bad operand")))
                    .transpose()?;
                bp.instrs.push(Instr { op, dest, a, b });
            }
        }
    }
    if bp.inputs.len() != n_in || bp.outputs.len() != n_out || bp.dffs.len() != n_dff {
        return Err(fail(hline, "slot declarations disagree with header counts".into()));
    }
    if outs_seen != n_out || next_seen != n_dff {
        return Err(fail(hline, "every output and dff needs an `out`/`next` line".into()));
    }
    bp.check().map_err(|e| fail(0, e.to_string()))?;
    Ok(bp)
}
