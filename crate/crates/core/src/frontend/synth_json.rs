// SPDX-License-Identifier: Apache-2.0

//! Reader and writer for the JSON netlist format written by open-source
//! synthesis tools (`write_json`), restricted to fine-grained internal gates.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::{FrontendError, ParseDiagnostic};
use crate::netlist::{ensure_valid, split_bus_name, CellKind, NetId, Netlist, NetlistBuilder};

#[derive(Deserialize)]
struct JsonDesign {
    #[serde(default)]
    modules: Map<String, Value>,
}

#[derive(Deserialize)]
struct JsonModule {
    #[serde(default)]
    ports: Map<String, Value>,
    #[serde(default)]
    cells: Map<String, Value>,
    #[serde(default)]
    netnames: Map<String, Value>,
    #[serde(default)]
    processes: Option<Value>,
    #[serde(default)]
    memories: Option<Value>,
}

#[derive(Deserialize)]
struct JsonPort {
    direction: String,
    bits: Vec<Bit>,
}

#[derive(Deserialize)]
struct JsonCell {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    connections: Map<String, Value>,
}

#[derive(Deserialize)]
struct JsonNetname {
    bits: Vec<Bit>,
    #[serde(default)]
    hide_name: u8,
    #[serde(default)]
    attributes: Map<String, Value>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Bit {
    Index(u64),
    Const(String),
}

/// Gate type → (our kind, pin names in our fan-in order, output pin).
fn gate_pins(ty: &str) -> Option<(CellKind, &'static [&'static str], &'static str)> {
    Some(match ty {
        "$_AND_" => (CellKind::And2, &["A", "B"], "Y"),
        "$_OR_" => (CellKind::Or2, &["A", "B"], "Y"),
        "$_XOR_" => (CellKind::Xor2, &["A", "B"], "Y"),
        "$_NAND_" => (CellKind::Nand2, &["A", "B"], "Y"),
        "$_NOR_" => (CellKind::Nor2, &["A", "B"], "Y"),
        "$_ANDNOT_" => (CellKind::AndNot2, &["A", "B"], "Y"),
        "$_ORNOT_" => (CellKind::OrNot2, &["A", "B"], "Y"),
        "$_NOT_" => (CellKind::Not1, &["A"], "Y"),
        // $_MUX_ is Y = S ? B : A
        "$_MUX_" => (CellKind::Mux2, &["S", "B", "A"], "Y"),
        "$_DFF_P_" => (CellKind::Dff, &["D"], "Q"),
        _ => return None,
    })
}

fn diag(text: &str, needle: &str, message: impl Into<String>) -> FrontendError {
    let line = text
        .lines()
        .position(|l| l.contains(needle))
        .map_or(0, |i| i + 1);
    let snippet = if line > 0 {
        text.lines().nth(line - 1).unwrap_or_default().trim().to_string()
    } else {
        needle.to_string()
    };
    FrontendError::Parse(vec![ParseDiagnostic {
        line,
        message: message.into(),
        snippet,
    }])
}

struct Nets {
    by_bit: HashMap<u64, NetId>,
    const_nets: [Option<NetId>; 2],
}

impl Nets {
    fn bit(&mut self, b: &mut NetlistBuilder, bit: u64) -> NetId {
        *self.by_bit.entry(bit).or_insert_with(|| b.net(None))
    }

    fn constant(&mut self, b: &mut NetlistBuilder, value: bool) -> NetId {
        let slot = &mut self.const_nets[usize::from(value)];
        *slot.get_or_insert_with(|| {
            let kind = if value { CellKind::Const1 } else { CellKind::Const0 };
            b.gate(kind, &[])
        })
    }

    fn resolve(
        &mut self,
        b: &mut NetlistBuilder,
        bit: &Bit,
        text: &str,
        context: &str,
    ) -> Result<NetId, FrontendError> {
        match bit {
            Bit::Index(i) => Ok(self.bit(b, *i)),
            Bit::Const(s) if s == "0" => Ok(self.constant(b, false)),
            Bit::Const(s) if s == "1" => Ok(self.constant(b, true)),
            Bit::Const(s) => Err(diag(
                text,
                context,
                format!("undefined constant bit `{s}` in {context}"),
            )),
        }
    }
}

/// Parses a single-module synthesized JSON netlist.
pub fn parse_synth_json(text: &str) -> Result<Netlist, FrontendError> {
    let design: JsonDesign = serde_json::from_str(text).map_err(|e| {
        FrontendError::Parse(vec![ParseDiagnostic {
            line: e.line(),
            message: format!("malformed JSON: {e}"),
            snippet: text.lines().nth(e.line().saturating_sub(1)).unwrap_or_default().trim().to_string(),
        }])
    })?;
    if design.modules.len() != 1 {
        let names: Vec<&str> = design.modules.keys().map(String::as_str).collect();
        return Err(diag(
            text,
            "\"modules\"",
            format!(
                "expected exactly one module, found {} ({})",
                names.len(),
                names.join(", ")
            ),
        ));
    }
    let (module_name, module) = design.modules.into_iter().next().unwrap();
    let module: JsonModule = serde_json::from_value(module)
        .map_err(|e| diag(text, &format!("\"{module_name}\""), format!("malformed module: {e}")))?;
    if module.processes.as_ref().is_some_and(non_empty) {
        return Err(diag(
            text,
            "\"processes\"",
            "module contains processes (unsynthesized behavioral constructs); run proc and techmap first",
        ));
    }
    if module.memories.as_ref().is_some_and(non_empty) {
        return Err(diag(text, "\"memories\"", "module contains memories, which are not supported"));
    }

    let mut b = NetlistBuilder::new(module_name.as_str());
    let mut nets = Nets {
        by_bit: HashMap::new(),
        const_nets: [None, None],
    };

    let clock_only = clock_only_bits(&module, text)?;

    let mut outputs: Vec<(String, Vec<Bit>)> = Vec::new();
    for (name, value) in &module.ports {
        let port: JsonPort = serde_json::from_value(value.clone())
            .map_err(|e| diag(text, &format!("\"{name}\""), format!("malformed port `{name}`: {e}")))?;
        let bit_names = flatten_names(name, port.bits.len());
        match port.direction.as_str() {
            "input" => {
                for (bit, bit_name) in port.bits.iter().zip(bit_names) {
                    if matches!(bit, Bit::Index(i) if clock_only.contains(i)) {
                        continue;
                    }
                    let Bit::Index(i) = bit else {
                        return Err(diag(
                            text,
                            &format!("\"{name}\""),
                            format!("input port `{name}` has a constant bit"),
                        ));
                    };
                    let net = nets.bit(&mut b, *i);
                    b.name_net(net, bit_name.clone());
                    b.input_port(bit_name, net);
                }
            }
            "output" => outputs.push((name.clone(), port.bits)),
            other => {
                return Err(diag(
                    text,
                    &format!("\"{name}\""),
                    format!("port `{name}` has unsupported direction `{other}`"),
                ))
            }
        }
    }

    for (cell_name, value) in &module.cells {
        let needle = format!("\"{cell_name}\"");
        let cell: JsonCell = serde_json::from_value(value.clone())
            .map_err(|e| diag(text, &needle, format!("malformed cell `{cell_name}`: {e}")))?;
        let Some((kind, in_pins, out_pin)) = gate_pins(&cell.kind) else {
            return Err(diag(text, &needle, unsupported_cell(cell_name, &cell.kind)));
        };
        let mut pin = |pin: &str| -> Result<NetId, FrontendError> {
            let bits: Vec<Bit> = cell
                .connections
                .get(pin)
                .cloned()
                .map(serde_json::from_value)
                .transpose()
                .map_err(|e| diag(text, &needle, format!("cell `{cell_name}` pin {pin}: {e}")))?
                .ok_or_else(|| diag(text, &needle, format!("cell `{cell_name}` ({}) is missing pin {pin}", cell.kind)))?;
            if bits.len() != 1 {
                return Err(diag(
                    text,
                    &needle,
                    format!("cell `{cell_name}` pin {pin} must be 1 bit wide, got {}", bits.len()),
                ));
            }
            nets.resolve(&mut b, &bits[0], text, cell_name)
        };
        let ins = in_pins.iter().map(|p| pin(p)).collect::<Result<Vec<_>, _>>()?;
        let out = pin(out_pin)?;
        let expected: Vec<&str> = match kind {
            CellKind::Dff => vec!["C", "D", "Q"],
            _ => in_pins.iter().copied().chain([out_pin]).collect(),
        };
        if let Some(extra) = cell.connections.keys().find(|k| !expected.contains(&k.as_str())) {
            return Err(diag(
                text,
                &needle,
                format!("cell `{cell_name}` ({}) has unexpected pin {extra}", cell.kind),
            ));
        }
        b.cell_into(kind, &ins, out);
    }

    for (name, bits) in outputs {
        for (bit, bit_name) in bits.iter().zip(flatten_names(&name, bits.len())) {
            let net = nets.resolve(&mut b, bit, text, &name)?;
            b.output(bit_name, net);
        }
    }

    let mut netlist = b.finish();
    apply_netnames(&mut netlist, &module.netnames, &nets.by_bit);
    if let Some(dup) = duplicate_port(&netlist) {
        return Err(diag(text, &dup, format!("duplicate port name `{dup}`")));
    }
    ensure_valid(netlist).map_err(FrontendError::from)
}

/// The flip-flop clock is the synchronous tick itself, so an input bit used
/// only as a `C` pin is dropped. More than one clock bit is rejected.
fn clock_only_bits(
    module: &JsonModule,
    text: &str,
) -> Result<std::collections::HashSet<u64>, FrontendError> {
    let mut clocks = std::collections::BTreeSet::new();
    let mut other = std::collections::HashSet::new();
    for (cell_name, value) in &module.cells {
        let Some(conns) = value.get("connections").and_then(Value::as_object) else {
            continue;
        };
        let is_dff = value.get("type").and_then(Value::as_str) == Some("$_DFF_P_");
        for (pin, bits) in conns {
            for bit in bits.as_array().into_iter().flatten().filter_map(Value::as_u64) {
                if is_dff && pin == "C" {
                    clocks.insert(bit);
                } else {
                    other.insert(bit);
                }
            }
        }
        if clocks.len() > 1 {
            return Err(diag(
                text,
                &format!("\"{cell_name}\""),
                format!("cell `{cell_name}` uses a second clock; only one clock domain is supported"),
            ));
        }
    }
    for value in module.ports.values() {
        if value.get("direction").and_then(Value::as_str) == Some("output") {
            for bit in value.get("bits").and_then(Value::as_array).into_iter().flatten() {
                if let Some(b) = bit.as_u64() {
                    other.insert(b);
                }
            }
        }
    }
    Ok(clocks.into_iter().filter(|b| !other.contains(b)).collect())
}

fn non_empty(v: &Value) -> bool {
    match v {
        Value::Object(m) => !m.is_empty(),
        Value::Array(a) => !a.is_empty(),
        Value::Null => false,
        _ => true,
    }
}

fn unsupported_cell(name: &str, ty: &str) -> String {
    if ty.starts_with("$_") && (ty.contains("DFF") || ty.contains("DLATCH") || ty.contains("SR_")) {
        format!(
            "cell `{name}` has type `{ty}`; only positive-edge `$_DFF_P_` flip-flops without enable/reset are supported"
        )
    } else if ty.starts_with('$') && !ty.starts_with("$_") {
        format!("cell `{name}` has coarse-grained type `{ty}` (unsynthesized construct); map to fine-grained gates first")
    } else if ty.starts_with("$_") {
        format!("cell `{name}` has unknown gate type `{ty}`")
    } else {
        format!("cell `{name}` instantiates module `{ty}`; hierarchical designs must be flattened")
    }
}

fn flatten_names(name: &str, width: usize) -> Vec<String> {
    if width == 1 {
        vec![name.to_string()]
    } else {
        (0..width).map(|i| format!("{name}[{i}]")).collect()
    }
}

fn duplicate_port(n: &Netlist) -> Option<String> {
    let mut seen = std::collections::HashSet::new();
    n.inputs
        .iter()
        .chain(&n.outputs)
        .find(|p| !seen.insert(p.name.as_str()))
        .map(|p| p.name.clone())
}

/// Names unnamed nets from `netnames` and picks up `init` attributes on
/// flip-flop outputs.
fn apply_netnames(n: &mut Netlist, netnames: &Map<String, Value>, by_bit: &HashMap<u64, NetId>) {
    let dff_by_output: HashMap<NetId, crate::netlist::CellId> =
        n.dff_ids().map(|id| (n.cell(id).output, id)).collect();
    for (name, value) in netnames {
        let Ok(entry) = serde_json::from_value::<JsonNetname>(value.clone()) else {
            continue;
        };
        let init = entry.attributes.get("init").and_then(init_bits);
        for (i, bit) in entry.bits.iter().enumerate() {
            let Bit::Index(idx) = bit else { continue };
            let Some(&net) = by_bit.get(idx) else { continue };
            if entry.hide_name == 0 && n.net_names[net.index()].is_none() {
                n.net_names[net.index()] = Some(if entry.bits.len() == 1 {
                    name.clone()
                } else {
                    format!("{name}[{i}]")
                });
            }
            if let (Some(bits), Some(&dff)) = (&init, dff_by_output.get(&net)) {
                if bits.get(i).copied().unwrap_or(false) {
                    n.dff_init.insert(dff, true);
                }
            }
        }
    }
}

/// Init attribute as LSB-first bits. Accepts a binary string (MSB first)
/// or an integer.
fn init_bits(v: &Value) -> Option<Vec<bool>> {
    match v {
        Value::String(s) => Some(s.chars().rev().map(|c| c == '1').collect()),
        Value::Number(num) => {
            let x = num.as_u64()?;
            Some((0..64).map(|i| (x >> i) & 1 == 1).collect())
        }
        _ => None,
    }
}

/// Writes a netlist in the synthesized JSON format. Bus ports named
/// `x[0]..x[k-1]` are regrouped into one multi-bit port `x`; flip-flops
/// get a positive-edge clock input `clk`, which is added as a port if the
/// netlist has any flip-flops.
pub fn emit_synth_json(n: &Netlist) -> String {
    let bit_of = |net: NetId| -> Value { json!(net.0 as u64 + 2) };
    let clk_bit = n.net_count() as u64 + 2;
    let const_of: HashMap<NetId, &'static str> = n
        .cells
        .iter()
        .filter_map(|c| match c.kind {
            CellKind::Const0 => Some((c.output, "0")),
            CellKind::Const1 => Some((c.output, "1")),
            _ => None,
        })
        .collect();
    let operand = |net: NetId| -> Value {
        match const_of.get(&net) {
            Some(&s) => json!(s),
            None => bit_of(net),
        }
    };

    let mut ports = Map::new();
    for (dir, list) in [("input", &n.inputs), ("output", &n.outputs)] {
        for (name, nets) in group_buses(list.iter().map(|p| (p.name.as_str(), p.net))) {
            let bits: Vec<Value> = nets.iter().map(|&net| operand(net)).collect();
            ports.insert(name, json!({ "direction": dir, "bits": bits }));
        }
    }
    let has_dff = n.cells.iter().any(|c| c.kind.is_sequential());
    if has_dff {
        ports.insert("clk".into(), json!({ "direction": "input", "bits": [clk_bit] }));
    }

    let mut cells = Map::new();
    let mut netnames = Map::new();
    for id in n.cell_ids() {
        let cell = n.cell(id);
        let (ty, conns) = match cell.kind {
            CellKind::Const0 | CellKind::Const1 => continue,
            CellKind::Dff => {
                if n.dff_init_bit(id) {
                    netnames.insert(
                        format!("$init${}", id.0),
                        json!({ "hide_name": 1, "bits": [bit_of(cell.output)], "attributes": { "init": "1" } }),
                    );
                }
                (
                    "$_DFF_P_",
                    json!({ "C": [clk_bit], "D": [operand(cell.inputs[0])], "Q": [bit_of(cell.output)] }),
                )
            }
            CellKind::Mux2 => (
                "$_MUX_",
                json!({
                    "A": [operand(cell.inputs[2])],
                    "B": [operand(cell.inputs[1])],
                    "S": [operand(cell.inputs[0])],
                    "Y": [bit_of(cell.output)],
                }),
            ),
            CellKind::Not1 => (
                "$_NOT_",
                json!({ "A": [operand(cell.inputs[0])], "Y": [bit_of(cell.output)] }),
            ),
            kind => {
                let ty = match kind {
                    CellKind::And2 => "$_AND_",
                    CellKind::Or2 => "$_OR_",
                    CellKind::Xor2 => "$_XOR_",
                    CellKind::Nand2 => "$_NAND_",
                    CellKind::Nor2 => "$_NOR_",
                    CellKind::AndNot2 => "$_ANDNOT_",
                    CellKind::OrNot2 => "$_ORNOT_",
                    _ => unreachable!(),
                };
                (
                    ty,
                    json!({
                        "A": [operand(cell.inputs[0])],
                        "B": [operand(cell.inputs[1])],
                        "Y": [bit_of(cell.output)],
                    }),
                )
            }
        };
        cells.insert(
            format!("$gate${}", id.0),
            json!({ "hide_name": 1, "type": ty, "connections": conns }),
        );
    }
    for net in (0..n.net_count() as u32).map(NetId) {
        if let Some(name) = &n.net_names[net.index()] {
            if const_of.contains_key(&net) {
                continue;
            }
            netnames
                .entry(name.clone())
                .or_insert_with(|| json!({ "hide_name": 0, "bits": [bit_of(net)], "attributes": {} }));
        }
    }

    let mut modules = Map::new();
    modules.insert(
        n.name.clone(),
        json!({ "attributes": {}, "ports": ports, "cells": cells, "netnames": netnames }),
    );
    let doc = json!({ "creator": "psp emit_synth_json", "modules": modules });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON serialization cannot fail");
    s.push('\n');
    s
}

/// Groups `x[0]..x[k-1]` (k ≥ 2, contiguous, in order) into one bus.
fn group_buses<'a>(ports: impl Iterator<Item = (&'a str, NetId)>) -> Vec<(String, Vec<NetId>)> {
    let ports: Vec<(&str, NetId)> = ports.collect();
    let mut by_base: BTreeMap<&str, Vec<(usize, NetId)>> = BTreeMap::new();
    for &(name, net) in &ports {
        if let Some((base, idx)) = split_bus_name(name) {
            by_base.entry(base).or_default().push((idx, net));
        }
    }
    let is_bus = |base: &str| {
        by_base.get(base).is_some_and(|bits| {
            bits.len() >= 2 && bits.iter().enumerate().all(|(i, &(idx, _))| i == idx)
        }) && !ports.iter().any(|(n, _)| *n == base)
    };
    let mut out = Vec::new();
    let mut emitted = std::collections::HashSet::new();
    for &(name, net) in &ports {
        match split_bus_name(name) {
            Some((base, _)) if is_bus(base) => {
                if emitted.insert(base) {
                    out.push((base.to_string(), by_base[base].iter().map(|&(_, n)| n).collect()));
                }
            }
            _ => out.push((name.to_string(), vec![net])),
        }
    }
    out
}
