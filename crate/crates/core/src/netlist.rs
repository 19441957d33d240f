// SPDX-License-Identifier: Apache-2.0

//! Synchronous gate-level netlist IR.
//!
//! A [`Netlist`] is a flat list of cells from a fixed generic library plus
//! named primary ports. Every net has exactly one driver: a cell output or a
//! primary input. Constants are modelled as zero-input driver cells so the
//! single-driver rule stays uniform.
//!
//! Construction never validates. [`validate_netlist`] is total over any
//! representable value and reports every violated invariant.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NetId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl CellId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Generic cell library.
///
/// Fan-in order is significant: `AndNot2` is `a & !b`, `OrNot2` is `a | !b`
/// and `Mux2` takes `(sel, a, b)` computing `sel ? a : b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellKind {
    And2,
    Or2,
    Xor2,
    Nand2,
    Nor2,
    AndNot2,
    OrNot2,
    Not1,
    Mux2,
    Dff,
    Const0,
    Const1,
}

impl CellKind {
    pub const ALL: [CellKind; 12] = [
        CellKind::And2,
        CellKind::Or2,
        CellKind::Xor2,
        CellKind::Nand2,
        CellKind::Nor2,
        CellKind::AndNot2,
        CellKind::OrNot2,
        CellKind::Not1,
        CellKind::Mux2,
        CellKind::Dff,
        CellKind::Const0,
        CellKind::Const1,
    ];

    /// Kinds evaluated by the combinational schedule (everything but `Dff`).
    pub const COMBINATIONAL: [CellKind; 11] = [
        CellKind::And2,
        CellKind::Or2,
        CellKind::Xor2,
        CellKind::Nand2,
        CellKind::Nor2,
        CellKind::AndNot2,
        CellKind::OrNot2,
        CellKind::Not1,
        CellKind::Mux2,
        CellKind::Const0,
        CellKind::Const1,
    ];

    pub fn arity(self) -> usize {
        match self {
            CellKind::Const0 | CellKind::Const1 => 0,
            CellKind::Not1 | CellKind::Dff => 1,
            CellKind::Mux2 => 3,
            _ => 2,
        }
    }

    pub fn is_sequential(self) -> bool {
        self == CellKind::Dff
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::And2 => "AND2",
            CellKind::Or2 => "OR2",
            CellKind::Xor2 => "XOR2",
            CellKind::Nand2 => "NAND2",
            CellKind::Nor2 => "NOR2",
            CellKind::AndNot2 => "ANDNOT2",
            CellKind::OrNot2 => "ORNOT2",
            CellKind::Not1 => "NOT1",
            CellKind::Mux2 => "MUX2",
            CellKind::Dff => "DFF",
            CellKind::Const0 => "CONST0",
            CellKind::Const1 => "CONST1",
        }
    }

    /// Word-wide Boolean semantics of a combinational kind. Every lane of the
    /// word is evaluated independently; the caller masks to the lane width.
    ///
    /// `Dff` has no combinational meaning and evaluates as identity on its
    /// data input.
    pub fn eval_word(self, ins: &[u64]) -> u64 {
        match self {
            CellKind::And2 => ins[0] & ins[1],
            CellKind::Or2 => ins[0] | ins[1],
            CellKind::Xor2 => ins[0] ^ ins[1],
            CellKind::Nand2 => !(ins[0] & ins[1]),
            CellKind::Nor2 => !(ins[0] | ins[1]),
            CellKind::AndNot2 => ins[0] & !ins[1],
            CellKind::OrNot2 => ins[0] | !ins[1],
            CellKind::Not1 => !ins[0],
            CellKind::Mux2 => (ins[0] & ins[1]) | (!ins[0] & ins[2]),
            CellKind::Dff => ins[0],
            CellKind::Const0 => 0,
            CellKind::Const1 => !0,
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown cell kind `{0}`")]
pub struct UnknownCellKind(pub String);

impl FromStr for CellKind {
    type Err = UnknownCellKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CellKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownCellKind(s.to_string()))
    }
}

impl Serialize for GateStats {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        for (kind, count) in self.nonzero() {
            map.serialize_entry(kind.name(), &count)?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub kind: CellKind,
    pub inputs: Vec<NetId>,
    pub output: NetId,
}

/// A named single-bit primary port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub net: NetId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Netlist {
    pub name: String,
    /// Optional label per net; the vector length is the net count.
    pub net_names: Vec<Option<String>>,
    pub cells: Vec<Cell>,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    /// Initial value per DFF cell. Missing entries mean 0.
    pub dff_init: BTreeMap<CellId, bool>,
}

impl Netlist {
    pub fn new(name: impl Into<String>) -> Self {
        Netlist {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn net_count(&self) -> usize {
        self.net_names.len()
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.cells.len() as u32).map(CellId)
    }

    pub fn dff_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cell_ids()
            .filter(|&id| self.cells[id.index()].kind.is_sequential())
    }

    pub fn dff_init_bit(&self, id: CellId) -> bool {
        self.dff_init.get(&id).copied().unwrap_or(false)
    }

    /// Label for diagnostics and emitted text: the net name if any, else `nK`.
    pub fn net_label(&self, net: NetId) -> String {
        match self.net_names.get(net.index()) {
            Some(Some(name)) => name.clone(),
            _ => net.to_string(),
        }
    }

    /// Driver of every net, assuming the netlist is valid. Nets driven by a
    /// primary input map to `Driver::Input`.
    pub fn drivers(&self) -> Vec<Option<Driver>> {
        let mut drivers = vec![None; self.net_count()];
        for (i, port) in self.inputs.iter().enumerate() {
            if let Some(slot) = drivers.get_mut(port.net.index()) {
                *slot = Some(Driver::Input(i));
            }
        }
        for id in self.cell_ids() {
            if let Some(slot) = drivers.get_mut(self.cells[id.index()].output.index()) {
                *slot = Some(Driver::Cell(id));
            }
        }
        drivers
    }

    /// Cells reading each net.
    pub fn fanout(&self) -> Vec<Vec<CellId>> {
        let mut fanout = vec![Vec::new(); self.net_count()];
        for id in self.cell_ids() {
            for net in &self.cells[id.index()].inputs {
                if let Some(list) = fanout.get_mut(net.index()) {
                    list.push(id);
                }
            }
        }
        fanout
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Cell(CellId),
}

/// Incremental construction helper used by the frontends and design builders.
///
/// Keeps a construction log (kinds in insertion order) so a builder's own
/// census can be checked against [`netlist_stats`].
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    netlist: Netlist,
    log: Vec<CellKind>,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            netlist: Netlist::new(name),
            log: Vec::new(),
        }
    }

    pub fn net(&mut self, name: Option<String>) -> NetId {
        let id = NetId(self.netlist.net_names.len() as u32);
        self.netlist.net_names.push(name);
        id
    }

    pub fn input(&mut self, name: impl Into<String>) -> NetId {
        let name = name.into();
        let net = self.net(Some(name.clone()));
        self.netlist.inputs.push(Port { name, net });
        net
    }

    /// Declares an existing net as a primary input.
    pub fn input_port(&mut self, name: impl Into<String>, net: NetId) {
        self.netlist.inputs.push(Port {
            name: name.into(),
            net,
        });
    }

    /// `width` input bits named `name[0]..name[width-1]`, LSB first.
    pub fn input_bus(&mut self, name: &str, width: usize) -> Vec<NetId> {
        (0..width).map(|i| self.input(format!("{name}[{i}]"))).collect()
    }

    pub fn output(&mut self, name: impl Into<String>, net: NetId) {
        self.netlist.outputs.push(Port {
            name: name.into(),
            net,
        });
    }

    pub fn output_bus(&mut self, name: &str, nets: &[NetId]) {
        for (i, &net) in nets.iter().enumerate() {
            self.output(format!("{name}[{i}]"), net);
        }
    }

    /// Adds a cell driving an existing net.
    pub fn cell_into(&mut self, kind: CellKind, inputs: &[NetId], output: NetId) -> CellId {
        let id = CellId(self.netlist.cells.len() as u32);
        self.netlist.cells.push(Cell {
            kind,
            inputs: inputs.to_vec(),
            output,
        });
        self.log.push(kind);
        id
    }

    /// Adds a cell driving a fresh anonymous net and returns that net.
    pub fn gate(&mut self, kind: CellKind, inputs: &[NetId]) -> NetId {
        let out = self.net(None);
        self.cell_into(kind, inputs, out);
        out
    }

    pub fn and(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(CellKind::And2, &[a, b])
    }

    pub fn or(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(CellKind::Or2, &[a, b])
    }

    pub fn xor(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(CellKind::Xor2, &[a, b])
    }

    pub fn and_not(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(CellKind::AndNot2, &[a, b])
    }

    pub fn not(&mut self, a: NetId) -> NetId {
        self.gate(CellKind::Not1, &[a])
    }

    pub fn mux(&mut self, sel: NetId, a: NetId, b: NetId) -> NetId {
        self.gate(CellKind::Mux2, &[sel, a, b])
    }

    /// Declares a flip-flop output whose data input is connected later with
    /// [`NetlistBuilder::connect_dff`].
    pub fn dff(&mut self, name: impl Into<String>, init: bool) -> (CellId, NetId) {
        let q = self.net(Some(name.into()));
        // Placeholder fan-in, replaced by connect_dff.
        let id = self.cell_into(CellKind::Dff, &[q], q);
        if init {
            self.netlist.dff_init.insert(id, true);
        }
        (id, q)
    }

    pub fn connect_dff(&mut self, dff: CellId, d: NetId) {
        let cell = &mut self.netlist.cells[dff.index()];
        debug_assert_eq!(cell.kind, CellKind::Dff);
        cell.inputs = vec![d];
    }

    pub fn set_init(&mut self, dff: CellId, init: bool) {
        if init {
            self.netlist.dff_init.insert(dff, true);
        } else {
            self.netlist.dff_init.remove(&dff);
        }
    }

    pub fn name_net(&mut self, net: NetId, name: impl Into<String>) {
        self.netlist.net_names[net.index()] = Some(name.into());
    }

    pub fn log(&self) -> &[CellKind] {
        &self.log
    }

    pub fn finish(self) -> Netlist {
        self.netlist
    }

    pub fn finish_with_log(self) -> (Netlist, Vec<CellKind>) {
        (self.netlist, self.log)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    NetOutOfRange,
    UndrivenNet,
    MultiDrivenNet,
    BadArity,
    CombinationalCycle,
    DuplicatePortName,
    InitOnNonDff,
    UnusedNet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
    pub cells: Vec<CellId>,
    pub nets: Vec<NetId>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn has(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.diagnostics.is_empty() {
            return f.write_str("ok");
        }
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("netlist `{name}` failed validation:\n{report}")]
    Invalid {
        name: String,
        report: ValidationReport,
    },
}

struct Reporter<'a> {
    netlist: &'a Netlist,
    diagnostics: Vec<Diagnostic>,
}

impl Reporter<'_> {
    fn push(
        &mut self,
        severity: Severity,
        kind: DiagnosticKind,
        message: String,
        cells: Vec<CellId>,
        nets: Vec<NetId>,
    ) {
        self.diagnostics.push(Diagnostic {
            severity,
            kind,
            message,
            cells,
            nets,
        });
    }

    fn label(&self, net: NetId) -> String {
        if net.index() < self.netlist.net_count() {
            self.netlist.net_label(net)
        } else {
            net.to_string()
        }
    }
}

/// Checks every structural invariant and returns all violations.
pub fn validate_netlist(n: &Netlist) -> ValidationReport {
    let mut r = Reporter {
        netlist: n,
        diagnostics: Vec::new(),
    };
    let net_count = n.net_count();
    let in_range = |net: NetId| net.index() < net_count;

    for id in n.cell_ids() {
        let cell = n.cell(id);
        if cell.inputs.len() != cell.kind.arity() {
            r.push(
                Severity::Error,
                DiagnosticKind::BadArity,
                format!(
                    "cell {id} ({}) has {} fan-ins, expected {}",
                    cell.kind,
                    cell.inputs.len(),
                    cell.kind.arity()
                ),
                vec![id],
                vec![],
            );
        }
        for &net in cell.inputs.iter().chain(std::iter::once(&cell.output)) {
            if !in_range(net) {
                r.push(
                    Severity::Error,
                    DiagnosticKind::NetOutOfRange,
                    format!("cell {id} references {net}, but only {net_count} nets exist"),
                    vec![id],
                    vec![net],
                );
            }
        }
    }
    for port in n.inputs.iter().chain(&n.outputs) {
        if !in_range(port.net) {
            r.push(
                Severity::Error,
                DiagnosticKind::NetOutOfRange,
                format!(
                    "port `{}` references {}, but only {net_count} nets exist",
                    port.name, port.net
                ),
                vec![],
                vec![port.net],
            );
        }
    }

    // Drivers: primary inputs and cell outputs.
    let mut input_drivers: Vec<Vec<&str>> = vec![Vec::new(); net_count];
    let mut cell_drivers: Vec<Vec<CellId>> = vec![Vec::new(); net_count];
    for port in &n.inputs {
        if in_range(port.net) {
            input_drivers[port.net.index()].push(&port.name);
        }
    }
    for id in n.cell_ids() {
        let out = n.cell(id).output;
        if in_range(out) {
            cell_drivers[out.index()].push(id);
        }
    }
    for net in (0..net_count as u32).map(NetId) {
        let ins = &input_drivers[net.index()];
        let cells = &cell_drivers[net.index()];
        if ins.len() + cells.len() > 1 {
            let mut who: Vec<String> = ins.iter().map(|p| format!("input `{p}`")).collect();
            who.extend(cells.iter().map(|c| format!("cell {c}")));
            r.push(
                Severity::Error,
                DiagnosticKind::MultiDrivenNet,
                format!(
                    "net `{}` has {} drivers: {}",
                    r.label(net),
                    who.len(),
                    who.join(", ")
                ),
                cells.clone(),
                vec![net],
            );
        }
    }
    let driven = |net: NetId| {
        in_range(net)
            && (!input_drivers[net.index()].is_empty() || !cell_drivers[net.index()].is_empty())
    };

    let mut read = vec![false; net_count];
    for id in n.cell_ids() {
        for &net in &n.cell(id).inputs {
            if !in_range(net) {
                continue;
            }
            read[net.index()] = true;
            if !driven(net) {
                r.push(
                    Severity::Error,
                    DiagnosticKind::UndrivenNet,
                    format!("net `{}` read by cell {id} has no driver", r.label(net)),
                    vec![id],
                    vec![net],
                );
            }
        }
    }
    for port in &n.outputs {
        if !in_range(port.net) {
            continue;
        }
        read[port.net.index()] = true;
        if !driven(port.net) {
            r.push(
                Severity::Error,
                DiagnosticKind::UndrivenNet,
                format!(
                    "net `{}` feeding output `{}` has no driver",
                    r.label(port.net),
                    port.name
                ),
                vec![],
                vec![port.net],
            );
        }
    }
    for net in (0..net_count as u32).map(NetId) {
        if !read[net.index()] && !driven(net) {
            r.push(
                Severity::Warning,
                DiagnosticKind::UnusedNet,
                format!("net `{}` is neither driven nor read", r.label(net)),
                vec![],
                vec![net],
            );
        }
    }

    for (dir, ports) in [("input", &n.inputs), ("output", &n.outputs)] {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for port in ports.iter() {
            *seen.entry(port.name.as_str()).or_default() += 1;
        }
        for (name, count) in seen {
            if count > 1 {
                r.push(
                    Severity::Error,
                    DiagnosticKind::DuplicatePortName,
                    format!("{dir} port name `{name}` declared {count} times"),
                    vec![],
                    vec![],
                );
            }
        }
    }
    let input_names: std::collections::BTreeSet<&str> =
        n.inputs.iter().map(|p| p.name.as_str()).collect();
    for port in &n.outputs {
        if input_names.contains(port.name.as_str()) {
            r.push(
                Severity::Error,
                DiagnosticKind::DuplicatePortName,
                format!("port name `{}` used for both an input and an output", port.name),
                vec![],
                vec![],
            );
        }
    }

    for &id in n.dff_init.keys() {
        match n.cells.get(id.index()) {
            Some(c) if c.kind.is_sequential() => {}
            _ => r.push(
                Severity::Error,
                DiagnosticKind::InitOnNonDff,
                format!("initial value given for {id}, which is not a DFF"),
                vec![id],
                vec![],
            ),
        }
    }

    for cycle in combinational_cycles(n) {
        let nets: Vec<NetId> = cycle.iter().map(|&c| n.cell(c).output).collect();
        let names: Vec<String> = nets.iter().map(|&net| format!("`{}`", r.label(net))).collect();
        r.push(
            Severity::Error,
            DiagnosticKind::CombinationalCycle,
            format!("combinational cycle through net(s) {}", names.join(", ")),
            cycle,
            nets,
        );
    }

    let ok = !r.diagnostics.iter().any(|d| d.severity == Severity::Error);
    ValidationReport {
        ok,
        diagnostics: r.diagnostics,
    }
}

/// Strongly connected components of the combinational cell graph that
/// contain a cycle (size > 1, or a self-loop). Iterative Tarjan so deep
/// chains cannot overflow the stack.
fn combinational_cycles(n: &Netlist) -> Vec<Vec<CellId>> {
    let net_count = n.net_count();
    // Combinational driver per net. With multiple drivers any edge is kept;
    // the multi-driver diagnostic covers that case.
    let mut comb_driver: Vec<Vec<usize>> = vec![Vec::new(); net_count];
    for (i, cell) in n.cells.iter().enumerate() {
        if !cell.kind.is_sequential() && cell.output.index() < net_count {
            comb_driver[cell.output.index()].push(i);
        }
    }
    // succ[c] = cells whose fan-in is driven by combinational cell c
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n.cells.len()];
    for (i, cell) in n.cells.iter().enumerate() {
        if cell.kind.is_sequential() {
            continue;
        }
        for net in &cell.inputs {
            if let Some(ds) = comb_driver.get(net.index()) {
                for &d in ds {
                    succ[d].push(i);
                }
            }
        }
    }

    const UNVISITED: usize = usize::MAX;
    let count = n.cells.len();
    let mut index = vec![UNVISITED; count];
    let mut low = vec![0usize; count];
    let mut on_stack = vec![false; count];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut out = Vec::new();

    for root in 0..count {
        if index[root] != UNVISITED || n.cells[root].kind.is_sequential() {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut edge)) = work.last_mut() {
            if *edge < succ[v].len() {
                let w = succ[v][*edge];
                *edge += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let cyclic = scc.len() > 1 || succ[v].contains(&v);
                    if cyclic {
                        scc.sort_unstable();
                        out.push(scc.into_iter().map(|c| CellId(c as u32)).collect());
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Per-kind cell census. Kinds with no cells read as zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GateStats {
    counts: BTreeMap<CellKind, usize>,
}

impl GateStats {
    pub fn from_kinds(kinds: impl IntoIterator<Item = CellKind>) -> Self {
        let mut counts = BTreeMap::new();
        for kind in kinds {
            *counts.entry(kind).or_insert(0) += 1;
        }
        GateStats { counts }
    }

    pub fn get(&self, kind: CellKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (CellKind, usize)> + '_ {
        self.counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&k, &c)| (k, c))
    }
}

impl fmt::Display for GateStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.nonzero().map(|(k, c)| format!("{k}:{c}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Exact per-kind census of a valid netlist.
pub fn netlist_stats(n: &Netlist) -> Result<GateStats, NetlistError> {
    let report = validate_netlist(n);
    if !report.ok {
        return Err(NetlistError::Invalid {
            name: n.name.clone(),
            report,
        });
    }
    Ok(GateStats::from_kinds(n.cells.iter().map(|c| c.kind)))
}

/// Returns the netlist unchanged if valid, or the report as an error.
pub fn ensure_valid(n: Netlist) -> Result<Netlist, NetlistError> {
    let report = validate_netlist(&n);
    if report.ok {
        Ok(n)
    } else {
        Err(NetlistError::Invalid {
            name: n.name.clone(),
            report,
        })
    }
}

/// Removes cells with no structural path to a primary output or to a DFF
/// that itself reaches an output. Net ids are preserved.
pub fn prune_dead(n: &Netlist) -> Netlist {
    let drivers = n.drivers();
    let mut live = vec![false; n.cells.len()];
    let mut work: Vec<NetId> = n.outputs.iter().map(|p| p.net).collect();
    while let Some(net) = work.pop() {
        if let Some(Some(Driver::Cell(c))) = drivers.get(net.index()) {
            if !live[c.index()] {
                live[c.index()] = true;
                work.extend(n.cell(*c).inputs.iter().copied());
            }
        }
    }
    let mut out = Netlist {
        name: n.name.clone(),
        net_names: n.net_names.clone(),
        cells: Vec::new(),
        inputs: n.inputs.clone(),
        outputs: n.outputs.clone(),
        dff_init: BTreeMap::new(),
    };
    for id in n.cell_ids() {
        if live[id.index()] {
            let new_id = CellId(out.cells.len() as u32);
            if n.cell(id).kind.is_sequential() && n.dff_init_bit(id) {
                out.dff_init.insert(new_id, true);
            }
            out.cells.push(n.cell(id).clone());
        }
    }
    out
}

/// Splits `name[idx]` into `(name, idx)`.
pub fn split_bus_name(name: &str) -> Option<(&str, usize)> {
    let open = name.rfind('[')?;
    let idx = name.strip_suffix(']')?.get(open + 1..)?.parse().ok()?;
    Some((&name[..open], idx))
}

/// Ports that share a base name, `x[0]..x[k-1]`, in bit order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortGroup {
    pub name: String,
    /// Positions in the original port list, LSB first.
    pub slots: Vec<usize>,
    /// Declared as indexed bits rather than a plain scalar name.
    pub bus: bool,
}

impl PortGroup {
    pub fn width(&self) -> usize {
        self.slots.len()
    }
}

/// Groups single-bit port names into buses. A base name forms a bus when
/// its indices are exactly `0..k` and no scalar port has the same name;
/// anything else stays a scalar group of its own. Order follows the first
/// bit of each group.
pub fn group_ports<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<PortGroup> {
    let names: Vec<&str> = names.into_iter().collect();
    let mut by_base: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    for (slot, name) in names.iter().enumerate() {
        if let Some((base, idx)) = split_bus_name(name) {
            by_base.entry(base).or_default().push((idx, slot));
        }
    }
    let scalars: std::collections::HashSet<&str> = names
        .iter()
        .copied()
        .filter(|n| split_bus_name(n).is_none())
        .collect();
    let mut buses: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (base, mut bits) in by_base {
        bits.sort_unstable();
        let dense = bits.iter().enumerate().all(|(i, &(idx, _))| i == idx);
        if dense && !scalars.contains(base) {
            buses.insert(base, bits.into_iter().map(|(_, slot)| slot).collect());
        }
    }
    let mut out = Vec::new();
    let mut done = std::collections::HashSet::new();
    for (slot, name) in names.iter().enumerate() {
        match split_bus_name(name) {
            Some((base, _)) if buses.contains_key(base) => {
                if done.insert(base) {
                    out.push(PortGroup {
                        name: base.to_string(),
                        slots: buses[base].clone(),
                        bus: true,
                    });
                }
            }
            _ => out.push(PortGroup {
                name: name.to_string(),
                slots: vec![slot],
                bus: false,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_netlist() -> Netlist {
        let mut b = NetlistBuilder::new("and");
        let x = b.input("x");
        let y = b.input("y");
        let z = b.and(x, y);
        b.output("z", z);
        b.finish()
    }

    #[test]
    fn minimal_and_is_ok() {
        let report = validate_netlist(&and_netlist());
        assert!(report.ok, "{report}");
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn not_self_loop_is_a_cycle() {
        let mut b = NetlistBuilder::new("loop");
        let n = b.net(Some("n".into()));
        b.cell_into(CellKind::Not1, &[n], n);
        b.output("y", n);
        let report = validate_netlist(&b.finish());
        assert!(!report.ok);
        let cycles: Vec<_> = report
            .diagnostics
            .iter()
            .filter(|d| d.kind == DiagnosticKind::CombinationalCycle)
            .collect();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].nets, vec![n]);
        assert!(cycles[0].message.contains("`n`"));
    }

    #[test]
    fn two_drivers_listed() {
        let mut b = NetlistBuilder::new("md");
        let x = b.input("x");
        let out = b.net(Some("o".into()));
        let c0 = b.cell_into(CellKind::Not1, &[x], out);
        let c1 = b.cell_into(CellKind::Not1, &[x], out);
        b.output("o", out);
        let report = validate_netlist(&b.finish());
        assert!(!report.ok);
        let md: Vec<_> = report
            .diagnostics
            .iter()
            .filter(|d| d.kind == DiagnosticKind::MultiDrivenNet)
            .collect();
        assert_eq!(md.len(), 1);
        assert_eq!(md[0].cells, vec![c0, c1]);
    }

    #[test]
    fn bad_arity_and_out_of_range_are_reported_not_panics() {
        let n = Netlist {
            name: "bad".into(),
            net_names: vec![None; 2],
            cells: vec![
                Cell {
                    kind: CellKind::And2,
                    inputs: vec![NetId(0)],
                    output: NetId(1),
                },
                Cell {
                    kind: CellKind::Mux2,
                    inputs: vec![NetId(0), NetId(7), NetId(1)],
                    output: NetId(9),
                },
            ],
            inputs: vec![Port {
                name: "x".into(),
                net: NetId(0),
            }],
            outputs: vec![],
            dff_init: BTreeMap::from([(CellId(0), true)]),
        };
        let report = validate_netlist(&n);
        assert!(!report.ok);
        assert!(report.has(DiagnosticKind::BadArity));
        assert!(report.has(DiagnosticKind::NetOutOfRange));
        assert!(report.has(DiagnosticKind::InitOnNonDff));
    }

    #[test]
    fn undriven_fanin() {
        let mut b = NetlistBuilder::new("u");
        let x = b.input("x");
        let floating = b.net(Some("f".into()));
        let y = b.and(x, floating);
        b.output("y", y);
        let report = validate_netlist(&b.finish());
        assert!(!report.ok);
        assert!(report.has(DiagnosticKind::UndrivenNet));
    }

    #[test]
    fn dff_feedback_is_not_a_cycle() {
        let mut b = NetlistBuilder::new("toggle");
        let (ff, q) = b.dff("q", false);
        let d = b.not(q);
        b.connect_dff(ff, d);
        b.output("q", q);
        assert!(validate_netlist(&b.finish()).ok);
    }

    #[test]
    fn duplicate_port_names() {
        let mut b = NetlistBuilder::new("dup");
        let x = b.input("x");
        let y = b.input("x");
        let z = b.and(x, y);
        b.output("z", z);
        let report = validate_netlist(&b.finish());
        assert!(report.has(DiagnosticKind::DuplicatePortName));
    }

    #[test]
    fn stats_census() {
        assert_eq!(netlist_stats(&Netlist::new("empty")).unwrap().total(), 0);
        for kind in CellKind::ALL {
            assert_eq!(netlist_stats(&Netlist::new("empty")).unwrap().get(kind), 0);
        }

        let mut b = NetlistBuilder::new("s");
        let x = b.input("x");
        let a1 = b.and(x, x);
        let a2 = b.and(a1, x);
        let (ff, q) = b.dff("q", false);
        let a3 = b.and(a2, q);
        b.connect_dff(ff, a3);
        b.output("y", a3);
        let stats = netlist_stats(&b.finish()).unwrap();
        assert_eq!(stats.get(CellKind::And2), 3);
        assert_eq!(stats.get(CellKind::Dff), 1);
        assert_eq!(stats.total(), 4);
        assert_eq!(stats.to_string(), "{AND2:3, DFF:1}");
    }

    #[test]
    fn stats_rejects_invalid() {
        let mut b = NetlistBuilder::new("loop");
        let n = b.net(None);
        b.cell_into(CellKind::Not1, &[n], n);
        assert!(matches!(
            netlist_stats(&b.finish()),
            Err(NetlistError::Invalid { .. })
        ));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in CellKind::ALL {
            assert_eq!(kind.name().parse::<CellKind>().unwrap(), kind);
        }
        assert!("BUF".parse::<CellKind>().is_err());
    }

    #[test]
    fn port_grouping() {
        let groups = group_ports(["a[1]", "start", "a[0]", "b[2]", "b[0]", "x[0]"]);
        let names: Vec<(&str, usize, bool)> =
            groups.iter().map(|g| (g.name.as_str(), g.width(), g.bus)).collect();
        assert_eq!(
            names,
            [("a", 2, true), ("start", 1, false), ("b[2]", 1, false), ("b[0]", 1, false), ("x", 1, true)]
        );
        assert_eq!(groups[0].slots, vec![2, 0]);
        assert_eq!(split_bus_name("q[10]"), Some(("q", 10)));
    }

    #[test]
    fn prune_keeps_live_logic() {
        let mut b = NetlistBuilder::new("p");
        let x = b.input("x");
        let live = b.not(x);
        let _dead = b.and(x, live);
        b.output("y", live);
        let pruned = prune_dead(&b.finish());
        assert_eq!(pruned.cells.len(), 1);
        assert!(validate_netlist(&pruned).ok);
    }
}
