// SPDX-License-Identifier: Apache-2.0

//! Branch-free bitwise programs over virtual registers, and lowering from a
//! levelized netlist.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::isa::{IsaKind, Mnemonic, Src};
use crate::lanes::LaneWidth;
use crate::levelize::LeveledProgram;
use crate::netlist::{CellKind, NetId, Netlist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    /// Virtual register, defined exactly once.
    Reg(u32),
    /// Primary input slot.
    Input(u32),
    /// Current-state plane of a flip-flop.
    State(u32),
    /// All-zeros (`false`) or all-ones (`true`).
    Const(bool),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Reg(r) => write!(f, "v{r}"),
            Operand::Input(i) => write!(f, "i{i}"),
            Operand::State(s) => write!(f, "s{s}"),
            Operand::Const(false) => f.write_str("#0"),
            Operand::Const(true) => f.write_str("#1"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Instr {
    pub op: Mnemonic,
    pub dest: u32,
    pub a: Operand,
    /// `None` for unary mnemonics.
    pub b: Option<Operand>,
}

impl Instr {
    pub fn operands(&self) -> impl Iterator<Item = Operand> + '_ {
        std::iter::once(self.a).chain(self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSlot {
    pub name: String,
    pub init: bool,
    /// Value committed to the next-state plane each tick.
    pub next: Operand,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputSlot {
    pub name: String,
    pub value: Operand,
}

/// Straight-line program for one synchronous tick over N lanes.
///
/// Evaluation reads inputs and current-state planes, runs `instrs` in order,
/// writes outputs, and writes each flip-flop's next-state plane. There is no
/// control flow, so the instruction count is a constant of the program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitProgram {
    pub name: String,
    pub isa: IsaKind,
    pub width: LaneWidth,
    pub inputs: Vec<String>,
    pub outputs: Vec<OutputSlot>,
    pub dffs: Vec<StateSlot>,
    pub instrs: Vec<Instr>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProgramError {
    #[error("instruction {index}: register v{reg} defined twice")]
    Redefined { index: usize, reg: u32 },
    #[error("instruction {index}: v{reg} used before definition")]
    UseBeforeDef { index: usize, reg: u32 },
    #[error("instruction {index}: {what} out of range")]
    SlotOutOfRange { index: usize, what: String },
    #[error("instruction {index}: `{op}` is not available on {isa}")]
    ForeignMnemonic { index: usize, op: Mnemonic, isa: IsaKind },
    #[error("instruction {index}: `{op}` takes {expected} operand(s)")]
    Arity { index: usize, op: Mnemonic, expected: usize },
}

impl BitProgram {
    pub fn reg_count(&self) -> usize {
        self.instrs.iter().map(|i| i.dest as usize + 1).max().unwrap_or(0)
    }

    /// Logic instructions per tick (the executed-op count excludes the
    /// per-flip-flop update copies; see the runtime).
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Checks SSA form, operand ranges and the profile's mnemonic set.
    pub fn check(&self) -> Result<(), ProgramError> {
        let profile = self.isa.profile();
        let mut defined = vec![false; self.reg_count()];
        let check_operand = |index: usize, op: Operand, defined: &[bool]| -> Result<(), ProgramError> {
            match op {
                Operand::Reg(r) if !defined.get(r as usize).copied().unwrap_or(false) => {
                    Err(ProgramError::UseBeforeDef { index, reg: r })
                }
                Operand::Input(i) if i as usize >= self.inputs.len() => Err(ProgramError::SlotOutOfRange {
                    index,
                    what: format!("input i{i}"),
                }),
                Operand::State(s) if s as usize >= self.dffs.len() => Err(ProgramError::SlotOutOfRange {
                    index,
                    what: format!("state s{s}"),
                }),
                _ => Ok(()),
            }
        };
        for (index, ins) in self.instrs.iter().enumerate() {
            if !profile.logic.contains(&ins.op) {
                return Err(ProgramError::ForeignMnemonic {
                    index,
                    op: ins.op,
                    isa: self.isa,
                });
            }
            if ins.op.arity() != 1 + usize::from(ins.b.is_some()) {
                return Err(ProgramError::Arity {
                    index,
                    op: ins.op,
                    expected: ins.op.arity(),
                });
            }
            for op in ins.operands() {
                check_operand(index, op, &defined)?;
            }
            let slot = &mut defined[ins.dest as usize];
            if *slot {
                return Err(ProgramError::Redefined { index, reg: ins.dest });
            }
            *slot = true;
        }
        let end = self.instrs.len();
        for op in self
            .outputs
            .iter()
            .map(|o| o.value)
            .chain(self.dffs.iter().map(|d| d.next))
        {
            check_operand(end, op, &defined)?;
        }
        Ok(())
    }
}

/// Lowers a levelized netlist gate by gate through the profile's table.
pub fn lower(p: &LeveledProgram, n: &Netlist, isa: IsaKind, width: LaneWidth) -> BitProgram {
    let profile = isa.profile();
    let mut value: HashMap<NetId, Operand> = HashMap::new();
    for (i, port) in n.inputs.iter().enumerate() {
        value.insert(port.net, Operand::Input(i as u32));
    }
    for (j, dff) in p.dffs.iter().enumerate() {
        value.insert(dff.q, Operand::State(j as u32));
    }

    let mut instrs = Vec::new();
    let mut next_reg = 0u32;
    for &id in &p.schedule {
        let cell = n.cell(id);
        let result = match cell.kind {
            CellKind::Const0 => Operand::Const(false),
            CellKind::Const1 => Operand::Const(true),
            kind => {
                let fanin: Vec<Operand> = cell.inputs.iter().map(|net| value[net]).collect();
                let mut steps: Vec<Operand> = Vec::new();
                for step in profile.lowering(kind) {
                    let resolve = |s: Src| match s {
                        Src::In(i) => fanin[i as usize],
                        Src::Step(i) => steps[i as usize],
                        Src::Ones => Operand::Const(true),
                    };
                    let a = resolve(step.a);
                    let b = (step.op.arity() == 2).then(|| resolve(step.b));
                    let dest = next_reg;
                    next_reg += 1;
                    instrs.push(Instr { op: step.op, dest, a, b });
                    steps.push(Operand::Reg(dest));
                }
                *steps.last().expect("combinational kind with empty lowering")
            }
        };
        value.insert(cell.output, result);
    }

    BitProgram {
        name: n.name.clone(),
        isa,
        width,
        inputs: n.inputs.iter().map(|port| port.name.clone()).collect(),
        outputs: n
            .outputs
            .iter()
            .map(|port| OutputSlot {
                name: port.name.clone(),
                value: value[&port.net],
            })
            .collect(),
        dffs: p
            .dffs
            .iter()
            .map(|d| StateSlot {
                name: n.net_label(d.q),
                init: d.init,
                next: value[&d.d],
            })
            .collect(),
        instrs,
    }
}
