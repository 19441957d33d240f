// SPDX-License-Identifier: Apache-2.0

//! Lane-parallel execution of synchronous programs.
//!
//! A [`Machine`] packs N independent single-bit machines into words: lane
//! `i` is bit `i`. Each tick is `eval` (outputs and next state from current
//! state and inputs, sampled post-eval) followed by `update` (next state
//! becomes current).

mod batch;
mod stimulus;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

pub use batch::{map_jobs, map_sequential, simulate_batch};
#[cfg(feature = "parallel")]
pub use batch::map_parallel;
pub use stimulus::{format_word, parse_word, Stimulus, StimulusError, Trace, TraceLayout};

use crate::codegen::{BitProgram, Operand};
use crate::lanes::{splat, LaneWidth};
use crate::levelize::{levelize_with, LevelizeError, LeveledProgram, TieBreak};
use crate::netlist::{CellKind, Netlist};

/// A netlist with its schedule.
#[derive(Clone, Debug)]
pub struct LeveledDesign {
    pub netlist: Netlist,
    pub program: LeveledProgram,
}

impl LeveledDesign {
    pub fn new(netlist: Netlist) -> Result<Self, LevelizeError> {
        Self::with_tie_break(netlist, TieBreak::Ascending)
    }

    pub fn with_tie_break(netlist: Netlist, tie: TieBreak) -> Result<Self, LevelizeError> {
        let program = levelize_with(&netlist, tie)?;
        Ok(LeveledDesign { netlist, program })
    }
}

/// Program executed by a machine, shared read-only between machines.
#[derive(Clone, Debug)]
pub enum Program {
    Leveled(Arc<LeveledDesign>),
    Lowered(Arc<BitProgram>),
}

impl From<LeveledDesign> for Program {
    fn from(d: LeveledDesign) -> Self {
        Program::Leveled(Arc::new(d))
    }
}

impl From<BitProgram> for Program {
    fn from(bp: BitProgram) -> Self {
        Program::Lowered(Arc::new(bp))
    }
}

impl Program {
    pub fn name(&self) -> &str {
        match self {
            Program::Leveled(d) => &d.netlist.name,
            Program::Lowered(bp) => &bp.name,
        }
    }

    pub fn input_names(&self) -> Vec<String> {
        match self {
            Program::Leveled(d) => d.netlist.inputs.iter().map(|p| p.name.clone()).collect(),
            Program::Lowered(bp) => bp.inputs.clone(),
        }
    }

    pub fn output_names(&self) -> Vec<String> {
        match self {
            Program::Leveled(d) => d.netlist.outputs.iter().map(|p| p.name.clone()).collect(),
            Program::Lowered(bp) => bp.outputs.iter().map(|o| o.name.clone()).collect(),
        }
    }

    pub fn dff_inits(&self) -> Vec<bool> {
        match self {
            Program::Leveled(d) => d.program.dffs.iter().map(|s| s.init).collect(),
            Program::Lowered(bp) => bp.dffs.iter().map(|s| s.init).collect(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("missing input port(s): {}", .0.join(", "))]
    MissingInputs(Vec<String>),
    #[error("unknown input port(s): {}", .0.join(", "))]
    UnknownInputs(Vec<String>),
    #[error("expected {expected} input words, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("input `{port}` value {value:#x} has bits beyond lane {lanes}")]
    LaneOverflow { port: String, value: u64, lanes: usize },
    #[error("stimulus has {available} ticks, {requested} requested")]
    StimulusTooShort { available: usize, requested: usize },
    #[error("stimulus ports do not match the program's inputs")]
    StimulusPorts,
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
}

/// N single-bit machines in one word per state bit.
#[derive(Clone, Debug)]
pub struct Machine {
    program: Program,
    width: LaneWidth,
    cur: Vec<u64>,
    nxt: Vec<u64>,
    tick: u64,
    /// Per-net words (leveled) or per-register words (lowered).
    scratch: Vec<u64>,
    last_ops: u64,
}

impl Machine {
    pub fn new(program: impl Into<Program>, width: LaneWidth) -> Self {
        let program = program.into();
        let scratch = match &program {
            Program::Leveled(d) => vec![0; d.netlist.net_count()],
            Program::Lowered(bp) => vec![0; bp.reg_count()],
        };
        let d = program.dff_inits().len();
        let mut m = Machine {
            program,
            width,
            cur: vec![0; d],
            nxt: vec![0; d],
            tick: 0,
            scratch,
            last_ops: 0,
        };
        m.reset();
        m
    }

    /// Machine over a lowered program at the program's own width.
    pub fn lowered(bp: impl Into<Arc<BitProgram>>) -> Self {
        let bp = bp.into();
        let width = bp.width;
        Self::new(Program::Lowered(bp), width)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn width(&self) -> LaneWidth {
        self.width
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn state(&self) -> &[u64] {
        &self.cur
    }

    pub fn next_state(&self) -> &[u64] {
        &self.nxt
    }

    /// Ops executed by the latest eval plus one update copy per flip-flop.
    pub fn ops_last_tick(&self) -> u64 {
        self.last_ops + self.cur.len() as u64
    }

    pub fn reset(&mut self) {
        for (i, init) in self.program.dff_inits().into_iter().enumerate() {
            self.cur[i] = splat(init, self.width);
            self.nxt[i] = self.cur[i];
        }
        self.tick = 0;
        self.last_ops = 0;
    }

    /// Eval with input words in port declaration order.
    pub fn eval_words(&mut self, inputs: &[u64]) -> Result<Vec<u64>, RuntimeError> {
        let names = self.program.input_names();
        if inputs.len() != names.len() {
            return Err(RuntimeError::InputCount {
                expected: names.len(),
                got: inputs.len(),
            });
        }
        let mask = self.width.mask();
        if let Some((i, &value)) = inputs.iter().enumerate().find(|(_, &v)| v & !mask != 0) {
            return Err(RuntimeError::LaneOverflow {
                port: names[i].clone(),
                value,
                lanes: self.width.lanes(),
            });
        }
        Ok(self.eval_unchecked(inputs))
    }

    /// Eval with named inputs; returns named outputs.
    pub fn eval(&mut self, inputs: &BTreeMap<String, u64>) -> Result<BTreeMap<String, u64>, RuntimeError> {
        let names = self.program.input_names();
        let missing: Vec<String> = names.iter().filter(|n| !inputs.contains_key(*n)).cloned().collect();
        if !missing.is_empty() {
            return Err(RuntimeError::MissingInputs(missing));
        }
        let unknown: Vec<String> = inputs.keys().filter(|k| !names.contains(k)).cloned().collect();
        if !unknown.is_empty() {
            return Err(RuntimeError::UnknownInputs(unknown));
        }
        let words: Vec<u64> = names.iter().map(|n| inputs[n]).collect();
        let out = self.eval_words(&words)?;
        Ok(self.program.output_names().into_iter().zip(out).collect())
    }

    fn eval_unchecked(&mut self, inputs: &[u64]) -> Vec<u64> {
        let mask = self.width.mask();
        let mut ops = 0u64;
        let outputs = match &self.program {
            Program::Leveled(d) => {
                let n = &d.netlist;
                let nets = &mut self.scratch;
                for (port, &w) in n.inputs.iter().zip(inputs) {
                    nets[port.net.index()] = w;
                }
                for (slot, &w) in d.program.dffs.iter().zip(&self.cur) {
                    nets[slot.q.index()] = w;
                }
                let mut fanin = [0u64; 3];
                for &id in &d.program.schedule {
                    let cell = n.cell(id);
                    for (f, net) in fanin.iter_mut().zip(&cell.inputs) {
                        *f = nets[net.index()];
                    }
                    nets[cell.output.index()] = cell.kind.eval_word(&fanin[..cell.inputs.len()]) & mask;
                    if !matches!(cell.kind, CellKind::Const0 | CellKind::Const1) {
                        ops += 1;
                    }
                }
                for (slot, nx) in d.program.dffs.iter().zip(self.nxt.iter_mut()) {
                    *nx = nets[slot.d.index()];
                }
                n.outputs.iter().map(|p| nets[p.net.index()]).collect()
            }
            Program::Lowered(bp) => {
                let regs = &mut self.scratch;
                let cur = &self.cur;
                let read = |regs: &[u64], op: Operand| match op {
                    Operand::Reg(r) => regs[r as usize],
                    Operand::Input(i) => inputs[i as usize],
                    Operand::State(s) => cur[s as usize],
                    Operand::Const(c) => splat(c, self.width),
                };
                for ins in &bp.instrs {
                    let a = read(regs, ins.a);
                    let b = ins.b.map_or(0, |b| read(regs, b));
                    regs[ins.dest as usize] = ins.op.apply(a, b) & mask;
                    ops += 1;
                }
                for (slot, nx) in bp.dffs.iter().zip(self.nxt.iter_mut()) {
                    *nx = read(regs, slot.next);
                }
                bp.outputs.iter().map(|o| read(regs, o.value)).collect()
            }
        };
        self.last_ops = ops;
        outputs
    }

    /// Commits next state; an update without a preceding eval recommits the
    /// last computed next state.
    pub fn update(&mut self) {
        self.cur.copy_from_slice(&self.nxt);
        self.tick += 1;
    }

    /// Eval then update for each of `ticks` stimulus rows.
    pub fn run(&mut self, stimulus: &Stimulus, ticks: usize) -> Result<Trace, RuntimeError> {
        if stimulus.ports() != self.program.input_names().as_slice() {
            return Err(RuntimeError::StimulusPorts);
        }
        if stimulus.len() < ticks {
            return Err(RuntimeError::StimulusTooShort {
                available: stimulus.len(),
                requested: ticks,
            });
        }
        let mut trace = Trace::new(self.program.output_names(), self.width);
        for row in stimulus.rows().take(ticks) {
            let out = self.eval_words(row)?;
            trace.push(out, self.ops_last_tick());
            self.update();
        }
        Ok(trace)
    }
}
