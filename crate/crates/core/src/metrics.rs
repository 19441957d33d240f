// SPDX-License-Identifier: Apache-2.0

//! Instruction accounting, timing repeatability, and an event-driven
//! reference simulator.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::codegen::{lower, tally, IsaKind, InstructionBreakdown};
use crate::lanes::{splat, LaneWidth};
use crate::levelize::{levelize, LevelizeError};
use crate::netlist::{netlist_stats, validate_netlist, CellKind, GateStats, NetId, Netlist, NetlistError, ValidationReport};
use crate::random::{random_stimulus, rng};
use crate::runtime::{Machine, Program, RuntimeError, Stimulus, Trace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("overhead of an empty breakdown is undefined")]
    EmptyBreakdown,
}

/// Share of marshalling instructions (MOV, STR, LDR) among all instructions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverheadReport {
    pub moves: u64,
    pub total: u64,
    pub ratio: f64,
}

pub fn overhead(b: &InstructionBreakdown) -> Result<OverheadReport, MetricsError> {
    let total = b.total();
    if total == 0 {
        return Err(MetricsError::EmptyBreakdown);
    }
    let moves = b.moves();
    Ok(OverheadReport {
        moves,
        total,
        ratio: moves as f64 / total as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepeatabilityReport {
    pub ops_per_tick: Vec<u64>,
    pub min: u64,
    pub max: u64,
    pub constant: bool,
}

impl RepeatabilityReport {
    pub fn from_counts(counts: &[u64]) -> Self {
        let min = counts.iter().copied().min().unwrap_or(0);
        let max = counts.iter().copied().max().unwrap_or(0);
        RepeatabilityReport {
            ops_per_tick: counts.to_vec(),
            min,
            max,
            constant: min == max,
        }
    }
}

pub fn repeatability(t: &Trace) -> RepeatabilityReport {
    RepeatabilityReport::from_counts(t.ops())
}

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("netlist is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("stimulus ports do not match the netlist's inputs")]
    Ports,
    #[error("stimulus has {available} ticks, {requested} requested")]
    TooShort { available: usize, requested: usize },
}

/// Change-propagation simulation with two-phase flip-flop commit.
///
/// Each tick, changed inputs and flip-flop outputs schedule their fan-out
/// cells on a FIFO queue; a cell whose output changes schedules its own
/// fan-out. Once the queue drains, outputs are sampled and flip-flops
/// commit. The trace's op column is the number of cell evaluations, which
/// varies with the data.
pub fn event_driven_reference(n: &Netlist, s: &Stimulus, ticks: usize, width: LaneWidth) -> Result<Trace, ReferenceError> {
    let report = validate_netlist(n);
    if !report.ok {
        return Err(ReferenceError::Invalid(report));
    }
    if s.ports().iter().ne(n.inputs.iter().map(|p| &p.name)) {
        return Err(ReferenceError::Ports);
    }
    if s.len() < ticks {
        return Err(ReferenceError::TooShort {
            available: s.len(),
            requested: ticks,
        });
    }
    let mask = width.mask();
    let fanout = n.fanout();
    let dffs: Vec<_> = n.dff_ids().collect();
    let mut value = vec![0u64; n.net_count()];
    let mut state: Vec<u64> = dffs.iter().map(|&c| splat(n.dff_init_bit(c), width)).collect();
    let mut queued = vec![false; n.cells.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut trace = Trace::new(n.outputs.iter().map(|p| p.name.clone()).collect(), width);

    let schedule = |net: NetId, queue: &mut VecDeque<usize>, queued: &mut [bool]| {
        for c in &fanout[net.index()] {
            if !n.cell(*c).kind.is_sequential() && !std::mem::replace(&mut queued[c.index()], true) {
                queue.push_back(c.index());
            }
        }
    };

    for (tick, row) in s.rows().take(ticks).enumerate() {
        let mut set = |net: NetId, w: u64, queue: &mut VecDeque<usize>, queued: &mut [bool]| {
            if tick == 0 || value[net.index()] != w {
                value[net.index()] = w;
                schedule(net, queue, queued);
            }
        };
        for (port, &w) in n.inputs.iter().zip(row) {
            set(port.net, w, &mut queue, &mut queued);
        }
        for (&ff, &w) in dffs.iter().zip(&state) {
            set(n.cell(ff).output, w, &mut queue, &mut queued);
        }
        if tick == 0 {
            // cells without fan-in (constants) never receive an event
            for (i, cell) in n.cells.iter().enumerate() {
                if !cell.kind.is_sequential() && !std::mem::replace(&mut queued[i], true) {
                    queue.push_back(i);
                }
            }
        }
        let mut evals = 0u64;
        while let Some(ci) = queue.pop_front() {
            queued[ci] = false;
            let cell = &n.cells[ci];
            let ins: Vec<u64> = cell.inputs.iter().map(|x| value[x.index()]).collect();
            let out = cell.kind.eval_word(&ins) & mask;
            evals += 1;
            if out != value[cell.output.index()] || matches!(cell.kind, CellKind::Const0 | CellKind::Const1) {
                value[cell.output.index()] = out;
                schedule(cell.output, &mut queue, &mut queued);
            }
        }
        trace.push(n.outputs.iter().map(|p| value[p.net.index()]).collect(), evals);
        for (i, &ff) in dffs.iter().enumerate() {
            state[i] = value[n.cell(ff).inputs[0].index()];
        }
    }
    Ok(trace)
}

/// Machine-readable summary of one compiled design.
#[derive(Clone, Debug, Serialize)]
pub struct StatsReport {
    pub design: String,
    pub isa: String,
    pub width: usize,
    pub breakdown: InstructionBreakdown,
    pub overhead: OverheadReport,
    pub repeatable: bool,
    pub gate_stats: GateStats,
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Levelize(#[from] LevelizeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Lowers, tallies, and checks repeatability over `ticks` random ticks.
pub fn stats_report(n: &Netlist, isa: IsaKind, width: LaneWidth, seed: u64, ticks: usize) -> Result<StatsReport, StatsError> {
    let gate_stats = netlist_stats(n)?;
    let p = levelize(n)?;
    let bp = lower(&p, n, isa, width);
    let breakdown = tally(&bp);
    let overhead = overhead(&breakdown).unwrap_or(OverheadReport {
        moves: 0,
        total: 0,
        ratio: 0.0,
    });
    let stim = random_stimulus(&mut rng(seed), &bp.inputs, width, ticks);
    let trace = Machine::new(Program::from(bp), width).run(&stim, ticks)?;
    Ok(StatsReport {
        design: n.name.clone(),
        isa: isa.to_string(),
        width: width.lanes(),
        breakdown,
        overhead,
        repeatable: repeatability(&trace).constant,
        gate_stats,
    })
}
