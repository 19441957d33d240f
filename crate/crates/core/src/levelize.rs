// SPDX-License-Identifier: Apache-2.0

//! Topological scheduling of the combinational part of a netlist.
//!
//! Sources are primary inputs and flip-flop outputs, sinks are primary
//! outputs and flip-flop data inputs. The result is a straight-line order in
//! which every gate follows all of its drivers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::netlist::{validate_netlist, CellId, DiagnosticKind, Driver, NetId, Netlist, ValidationReport};

/// Tie-break among ready cells. `Ascending` (declaration order) is the
/// canonical schedule; `Descending` exists to test schedule invariance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    Ascending,
    Descending,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DffSlot {
    pub cell: CellId,
    pub q: NetId,
    pub d: NetId,
    pub init: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeveledProgram {
    /// Combinational cells in evaluation order.
    pub schedule: Vec<CellId>,
    /// Level per cell index; 0 for flip-flops (they are sources).
    pub level: Vec<u32>,
    /// Primary input nets, then flip-flop outputs.
    pub sources: Vec<NetId>,
    /// Primary output nets, then flip-flop data inputs.
    pub sinks: Vec<NetId>,
    pub dffs: Vec<DffSlot>,
}

impl LeveledProgram {
    pub fn depth(&self) -> u32 {
        self.level.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Error)]
pub enum LevelizeError {
    #[error("combinational cycle through cells {}", format_cycle(.0))]
    CombinationalCycle(Vec<CellId>),
    #[error("netlist is not structurally valid:\n{0}")]
    Invalid(ValidationReport),
}

fn format_cycle(cells: &[CellId]) -> String {
    let mut parts: Vec<String> = cells.iter().map(ToString::to_string).collect();
    if let Some(first) = cells.first() {
        parts.push(first.to_string());
    }
    parts.join(" -> ")
}

pub fn levelize(n: &Netlist) -> Result<LeveledProgram, LevelizeError> {
    levelize_with(n, TieBreak::Ascending)
}

/// Kahn's algorithm over combinational cells, ready set ordered by
/// declaration index.
pub fn levelize_with(n: &Netlist, tie: TieBreak) -> Result<LeveledProgram, LevelizeError> {
    let report = validate_netlist(n);
    if report
        .errors()
        .any(|d| d.kind != DiagnosticKind::CombinationalCycle)
    {
        return Err(LevelizeError::Invalid(report));
    }

    let drivers = n.drivers();
    let comb_driver = |net: NetId| -> Option<CellId> {
        match drivers[net.index()] {
            Some(Driver::Cell(c)) if !n.cell(c).kind.is_sequential() => Some(c),
            _ => None,
        }
    };

    let cell_count = n.cells.len();
    let mut pending = vec![0usize; cell_count];
    let mut succ: Vec<Vec<CellId>> = vec![Vec::new(); cell_count];
    for id in n.cell_ids() {
        let cell = n.cell(id);
        if cell.kind.is_sequential() {
            continue;
        }
        for &net in &cell.inputs {
            if let Some(d) = comb_driver(net) {
                pending[id.index()] += 1;
                succ[d.index()].push(id);
            }
        }
    }

    let key = |id: CellId| match tie {
        TieBreak::Ascending => id.0 as i64,
        TieBreak::Descending => -(id.0 as i64),
    };
    let mut ready: BinaryHeap<Reverse<(i64, CellId)>> = n
        .cell_ids()
        .filter(|&id| !n.cell(id).kind.is_sequential() && pending[id.index()] == 0)
        .map(|id| Reverse((key(id), id)))
        .collect();

    let mut level = vec![0u32; cell_count];
    let mut schedule = Vec::with_capacity(cell_count);
    while let Some(Reverse((_, id))) = ready.pop() {
        level[id.index()] = 1 + n
            .cell(id)
            .inputs
            .iter()
            .filter_map(|&net| comb_driver(net))
            .map(|d| level[d.index()])
            .max()
            .unwrap_or(0);
        schedule.push(id);
        for &s in &succ[id.index()] {
            pending[s.index()] -= 1;
            if pending[s.index()] == 0 {
                ready.push(Reverse((key(s), s)));
            }
        }
    }

    let comb_count = n.cells.iter().filter(|c| !c.kind.is_sequential()).count();
    if schedule.len() != comb_count {
        return Err(LevelizeError::CombinationalCycle(find_cycle(n, &pending, comb_driver)));
    }

    let dffs: Vec<DffSlot> = n
        .dff_ids()
        .map(|id| DffSlot {
            cell: id,
            q: n.cell(id).output,
            d: n.cell(id).inputs[0],
            init: n.dff_init_bit(id),
        })
        .collect();
    let sources = n
        .inputs
        .iter()
        .map(|p| p.net)
        .chain(dffs.iter().map(|d| d.q))
        .collect();
    let sinks = n
        .outputs
        .iter()
        .map(|p| p.net)
        .chain(dffs.iter().map(|d| d.d))
        .collect();
    Ok(LeveledProgram {
        schedule,
        level,
        sources,
        sinks,
        dffs,
    })
}

/// Walks predecessors among unscheduled cells until one repeats. Every
/// unscheduled cell has at least one unscheduled combinational driver, so
/// the walk must close a loop.
fn find_cycle(n: &Netlist, pending: &[usize], comb_driver: impl Fn(NetId) -> Option<CellId>) -> Vec<CellId> {
    let start = n
        .cell_ids()
        .find(|&id| !n.cell(id).kind.is_sequential() && pending[id.index()] > 0)
        .expect("cycle reported without unscheduled cells");
    let mut seen_at = vec![usize::MAX; n.cells.len()];
    let mut path = Vec::new();
    let mut cur = start;
    while seen_at[cur.index()] == usize::MAX {
        seen_at[cur.index()] = path.len();
        path.push(cur);
        cur = n
            .cell(cur)
            .inputs
            .iter()
            .filter_map(|&net| comb_driver(net))
            .find(|d| pending[d.index()] > 0)
            .expect("unscheduled cell without unscheduled driver");
    }
    // path runs against signal flow; reverse so it reads driver -> reader
    let mut cycle = path.split_off(seen_at[cur.index()]);
    cycle.reverse();
    cycle
}

/// Independent check of the levelize postcondition, edge by edge.
pub fn verify_levels(p: &LeveledProgram, n: &Netlist) -> bool {
    let cell_count = n.cells.len();
    if p.level.len() != cell_count {
        return false;
    }
    let mut position = vec![usize::MAX; cell_count];
    for (pos, &id) in p.schedule.iter().enumerate() {
        if id.index() >= cell_count || n.cell(id).kind.is_sequential() || position[id.index()] != usize::MAX {
            return false;
        }
        position[id.index()] = pos;
    }
    // every combinational cell exactly once
    if n
        .cell_ids()
        .any(|id| !n.cell(id).kind.is_sequential() && position[id.index()] == usize::MAX)
    {
        return false;
    }

    // Driver lookup by scanning outputs, not via Netlist::drivers.
    let mut driver_of = vec![None; n.net_count()];
    for (i, cell) in n.cells.iter().enumerate() {
        if !cell.kind.is_sequential() {
            driver_of[cell.output.index()] = Some(i);
        }
    }
    for &id in &p.schedule {
        let mut expected = 0;
        for net in &n.cell(id).inputs {
            if let Some(d) = driver_of[net.index()] {
                if position[d] >= position[id.index()] || p.level[d] >= p.level[id.index()] {
                    return false;
                }
                expected = expected.max(p.level[d]);
            }
        }
        if p.level[id.index()] != expected + 1 {
            return false;
        }
    }
    for id in n.cell_ids() {
        if n.cell(id).kind.is_sequential() && p.level[id.index()] != 0 {
            return false;
        }
    }

    let dff_ids: Vec<CellId> = n.dff_ids().collect();
    if p.dffs.len() != dff_ids.len() {
        return false;
    }
    for (slot, &id) in p.dffs.iter().zip(&dff_ids) {
        let cell = n.cell(id);
        if slot.cell != id || slot.q != cell.output || slot.d != cell.inputs[0] || slot.init != n.dff_init_bit(id) {
            return false;
        }
    }
    let sources: Vec<NetId> = n.inputs.iter().map(|p| p.net).chain(p.dffs.iter().map(|d| d.q)).collect();
    let sinks: Vec<NetId> = n.outputs.iter().map(|p| p.net).chain(p.dffs.iter().map(|d| d.d)).collect();
    p.sources == sources && p.sinks == sinks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{CellKind, NetlistBuilder};

    #[test]
    fn chain_levels() {
        let mut b = NetlistBuilder::new("chain");
        let x = b.input("x");
        // declare in reverse so the schedule has to reorder
        let n1 = b.net(None);
        let n2 = b.net(None);
        let n3 = b.net(None);
        let c3 = b.cell_into(CellKind::Not1, &[n2], n3);
        let c2 = b.cell_into(CellKind::Not1, &[n1], n2);
        let c1 = b.cell_into(CellKind::Not1, &[x], n1);
        b.output("y", n3);
        let n = b.finish();
        let p = levelize(&n).unwrap();
        assert_eq!(p.schedule, vec![c1, c2, c3]);
        assert_eq!(
            [p.level[c1.index()], p.level[c2.index()], p.level[c3.index()]],
            [1, 2, 3]
        );
        assert!(verify_levels(&p, &n));
    }

    #[test]
    fn independent_cells_keep_declaration_order() {
        let mut b = NetlistBuilder::new("pair");
        let x = b.input("x");
        let y = b.input("y");
        let a = b.and(x, y);
        let c = b.and(y, x);
        b.output("a", a);
        b.output("c", c);
        let n = b.finish();
        let p = levelize(&n).unwrap();
        assert_eq!(p.schedule, vec![CellId(0), CellId(1)]);
        assert_eq!(p.level, vec![1, 1]);
        let rev = levelize_with(&n, TieBreak::Descending).unwrap();
        assert_eq!(rev.schedule, vec![CellId(1), CellId(0)]);
        assert!(verify_levels(&rev, &n));
    }

    #[test]
    fn swapped_schedule_fails_verification() {
        let mut b = NetlistBuilder::new("chain");
        let x = b.input("x");
        let a = b.not(x);
        let c = b.not(a);
        b.output("y", c);
        let n = b.finish();
        let mut p = levelize(&n).unwrap();
        p.schedule.swap(0, 1);
        assert!(!verify_levels(&p, &n));
    }

    #[test]
    fn wrong_level_fails_verification() {
        let mut b = NetlistBuilder::new("chain");
        let x = b.input("x");
        let a = b.not(x);
        b.output("y", a);
        let n = b.finish();
        let mut p = levelize(&n).unwrap();
        p.level[0] = 2;
        assert!(!verify_levels(&p, &n));
    }

    #[test]
    fn cycle_lists_full_loop() {
        let mut b = NetlistBuilder::new("cyc");
        let x = b.input("x");
        let n1 = b.net(None);
        let n2 = b.net(None);
        let n3 = b.net(None);
        let c0 = b.cell_into(CellKind::And2, &[x, n3], n1);
        let c1 = b.cell_into(CellKind::Not1, &[n1], n2);
        let c2 = b.cell_into(CellKind::Not1, &[n2], n3);
        b.output("y", n3);
        match levelize(&b.finish()) {
            Err(LevelizeError::CombinationalCycle(cells)) => {
                let mut sorted = cells.clone();
                sorted.sort();
                assert_eq!(sorted, vec![c0, c1, c2]);
                // consecutive entries follow signal flow
                let pos = |c| cells.iter().position(|&x| x == c).unwrap();
                assert_eq!((pos(c0) + 1) % 3, pos(c1));
                assert_eq!((pos(c1) + 1) % 3, pos(c2));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn dff_sources_and_sinks() {
        let mut b = NetlistBuilder::new("toggle");
        let en = b.input("en");
        let (ff, q) = b.dff("q", true);
        let d = b.xor(q, en);
        b.connect_dff(ff, d);
        b.output("q", q);
        let n = b.finish();
        let p = levelize(&n).unwrap();
        assert_eq!(p.sources, vec![en, q]);
        assert_eq!(p.sinks, vec![q, d]);
        assert_eq!(p.dffs.len(), 1);
        assert!(p.dffs[0].init);
        assert_eq!(p.schedule.len(), 1);
        assert!(verify_levels(&p, &n));
    }

    #[test]
    fn constants_are_level_one() {
        let mut b = NetlistBuilder::new("k");
        let k = b.gate(CellKind::Const1, &[]);
        let y = b.not(k);
        b.output("y", y);
        let n = b.finish();
        let p = levelize(&n).unwrap();
        assert_eq!(p.level, vec![1, 2]);
    }

    #[test]
    fn invalid_netlist_rejected() {
        let mut b = NetlistBuilder::new("u");
        let f = b.net(None);
        let y = b.not(f);
        b.output("y", y);
        assert!(matches!(levelize(&b.finish()), Err(LevelizeError::Invalid(_))));
    }
}
