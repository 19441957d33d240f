// SPDX-License-Identifier: Apache-2.0

//! Structural BLIF subset: `.model`, `.inputs`, `.outputs`, `.gate`,
//! `.latch`, `.end`. Gates use the generic library names with pins
//! `a`, `b`, `o` (and `s` for `MUX2`). `.names` tables are rejected.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{FrontendError, ParseDiagnostic};
use crate::netlist::{ensure_valid, CellKind, NetId, Netlist, NetlistBuilder};

/// Pin names per gate kind, fan-in order first, output last.
fn pins(kind: CellKind) -> &'static [&'static str] {
    match kind {
        CellKind::Not1 => &["a", "o"],
        CellKind::Mux2 => &["s", "a", "b", "o"],
        CellKind::Const0 | CellKind::Const1 => &["o"],
        CellKind::Dff => &[],
        _ => &["a", "b", "o"],
    }
}

struct Line {
    number: usize,
    text: String,
}

/// Joins `\` continuations and strips `#` comments, keeping the number of
/// the first physical line of each logical line.
fn logical_lines(text: &str) -> Vec<Line> {
    let mut out = Vec::new();
    let mut pending: Option<Line> = None;
    for (i, raw) in text.lines().enumerate() {
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let (body, continues) = match stripped.trim_end().strip_suffix('\\') {
            Some(b) => (b, true),
            None => (stripped, false),
        };
        let line = pending.get_or_insert_with(|| Line {
            number: i + 1,
            text: String::new(),
        });
        line.text.push(' ');
        line.text.push_str(body);
        if !continues {
            let line = pending.take().unwrap();
            if !line.text.trim().is_empty() {
                out.push(line);
            }
        }
    }
    if let Some(line) = pending {
        if !line.text.trim().is_empty() {
            out.push(line);
        }
    }
    out
}

struct Parser {
    builder: NetlistBuilder,
    nets: HashMap<String, NetId>,
}

impl Parser {
    fn net(&mut self, name: &str) -> NetId {
        if let Some(&id) = self.nets.get(name) {
            return id;
        }
        let id = self.builder.net(Some(name.to_string()));
        self.nets.insert(name.to_string(), id);
        id
    }
}

fn err(line: &Line, message: impl Into<String>) -> FrontendError {
    FrontendError::Parse(vec![ParseDiagnostic {
        line: line.number,
        message: message.into(),
        snippet: line.text.trim().to_string(),
    }])
}

/// Parses structural BLIF into a validated netlist.
pub fn parse_blif(text: &str) -> Result<Netlist, FrontendError> {
    let lines = logical_lines(text);
    let mut parser: Option<Parser> = None;
    let mut inputs: Vec<(String, &Line)> = Vec::new();
    let mut outputs: Vec<(String, &Line)> = Vec::new();
    let mut ended = false;

    for line in &lines {
        let mut tokens = line.text.split_whitespace();
        let keyword = tokens.next().unwrap_or_default();
        let args: Vec<&str> = tokens.collect();
        if ended {
            return Err(err(line, "content after `.end` (multiple models are not supported)"));
        }
        if keyword != ".model" && parser.is_none() {
            return Err(err(line, format!("expected `.model`, found `{keyword}`")));
        }
        match keyword {
            ".model" => {
                if parser.is_some() {
                    return Err(err(line, "nested `.model` (hierarchical designs must be flattened)"));
                }
                let name = args.first().copied().unwrap_or("top");
                parser = Some(Parser {
                    builder: NetlistBuilder::new(name),
                    nets: HashMap::new(),
                });
            }
            ".inputs" => inputs.extend(args.iter().map(|a| (a.to_string(), line))),
            ".outputs" => outputs.extend(args.iter().map(|a| (a.to_string(), line))),
            ".gate" => {
                let p = parser.as_mut().unwrap();
                let Some(&gate) = args.first() else {
                    return Err(err(line, "`.gate` without a gate name"));
                };
                let kind: CellKind = gate
                    .parse()
                    .ok()
                    .filter(|k: &CellKind| !k.is_sequential())
                    .ok_or_else(|| err(line, format!("unknown gate `{gate}`")))?;
                let expected = pins(kind);
                let mut bound: Vec<Option<&str>> = vec![None; expected.len()];
                for conn in &args[1..] {
                    let Some((pin, net)) = conn.split_once('=') else {
                        return Err(err(line, format!("malformed connection `{conn}`, expected pin=net")));
                    };
                    let Some(slot) = expected.iter().position(|&p| p == pin) else {
                        return Err(err(line, format!("gate {gate} has no pin `{pin}`")));
                    };
                    if bound[slot].replace(net).is_some() {
                        return Err(err(line, format!("pin `{pin}` connected twice")));
                    }
                }
                if args.len() - 1 != expected.len() {
                    return Err(err(
                        line,
                        format!(
                            "arity mismatch: {gate} takes {} connections ({}), got {}",
                            expected.len(),
                            expected.join(", "),
                            args.len() - 1
                        ),
                    ));
                }
                let names: Vec<&str> = bound.into_iter().map(Option::unwrap).collect();
                let (ins, out) = names.split_at(names.len() - 1);
                let ins: Vec<NetId> = ins.iter().map(|n| p.net(n)).collect();
                let out = p.net(out[0]);
                p.builder.cell_into(kind, &ins, out);
            }
            ".latch" => {
                let p = parser.as_mut().unwrap();
                let init = match args.as_slice() {
                    [_, _] => None,
                    [_, _, init] => Some(*init),
                    [_, _, ty, _ctrl] => {
                        check_latch_type(line, ty)?;
                        None
                    }
                    [_, _, ty, _ctrl, init] => {
                        check_latch_type(line, ty)?;
                        Some(*init)
                    }
                    _ => return Err(err(line, "`.latch` expects: input output [type control] [init]")),
                };
                let init = match init {
                    None | Some("0") | Some("2") | Some("3") => false,
                    Some("1") => true,
                    Some(other) => return Err(err(line, format!("invalid latch init value `{other}`"))),
                };
                let d = p.net(args[0]);
                let q = p.net(args[1]);
                let id = p.builder.cell_into(CellKind::Dff, &[d], q);
                p.builder.set_init(id, init);
            }
            ".names" => {
                return Err(err(
                    line,
                    "`.names` logic tables are not supported; map to the generic gate library first",
                ))
            }
            ".subckt" => return Err(err(line, "`.subckt` is not supported; flatten the design first")),
            ".clock" => {}
            ".end" => ended = true,
            other => return Err(err(line, format!("unsupported directive `{other}`"))),
        }
    }

    let Some(mut p) = parser else {
        return Err(FrontendError::Parse(vec![ParseDiagnostic {
            line: 1,
            message: "no `.model` found".into(),
            snippet: String::new(),
        }]));
    };
    let mut port_line: HashMap<String, usize> = HashMap::new();
    for (name, line) in inputs.iter().chain(&outputs) {
        if let Some(prev) = port_line.insert(name.clone(), line.number) {
            return Err(err(line, format!("duplicate port name `{name}` (first declared on line {prev})")));
        }
    }
    // Ports are registered last so that nets referenced before their
    // `.inputs` declaration still resolve to the same id.
    for (name, _) in &inputs {
        let net = p.net(name);
        p.builder.input_port(name.clone(), net);
    }
    for (name, _) in &outputs {
        let net = p.net(name);
        p.builder.output(name.clone(), net);
    }
    ensure_valid(p.builder.finish()).map_err(FrontendError::from)
}

fn check_latch_type(line: &Line, ty: &str) -> Result<(), FrontendError> {
    if ty == "re" {
        Ok(())
    } else {
        Err(err(
            line,
            format!("latch type `{ty}` not supported; only rising-edge (`re`) flip-flops"),
        ))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EmitBlifError {
    #[error("output `{0}` shares its net with another port; BLIF cannot alias port names without a buffer")]
    AliasedPort(String),
    #[error("netlist failed validation:\n{0}")]
    Invalid(crate::netlist::ValidationReport),
}

/// Serializes a valid netlist as structural BLIF. Net names are port names
/// where a net is a port, the net label otherwise (made unique).
pub fn emit_blif(n: &Netlist) -> Result<String, EmitBlifError> {
    let report = crate::netlist::validate_netlist(n);
    if !report.ok {
        return Err(EmitBlifError::Invalid(report));
    }
    let mut names: Vec<Option<String>> = vec![None; n.net_count()];
    let mut used: HashMap<String, NetId> = HashMap::new();
    for port in n.inputs.iter().chain(&n.outputs) {
        if names[port.net.index()].is_some() {
            return Err(EmitBlifError::AliasedPort(port.name.clone()));
        }
        names[port.net.index()] = Some(port.name.clone());
        used.insert(port.name.clone(), port.net);
    }
    for net in (0..n.net_count() as u32).map(NetId) {
        if names[net.index()].is_some() {
            continue;
        }
        let base = match &n.net_names[net.index()] {
            Some(name) if !name.is_empty() && !name.contains(char::is_whitespace) && !name.contains(['=', '#']) => name.clone(),
            _ => format!("n{}", net.0),
        };
        let mut candidate = base.clone();
        let mut k = 1;
        while used.contains_key(&candidate) {
            candidate = format!("{base}${k}");
            k += 1;
        }
        used.insert(candidate.clone(), net);
        names[net.index()] = Some(candidate);
    }
    let name = |net: NetId| names[net.index()].as_deref().unwrap();

    let mut s = String::new();
    let model = if n.name.is_empty() { "top" } else { n.name.as_str() };
    writeln!(s, ".model {model}").unwrap();
    if !n.inputs.is_empty() {
        write!(s, ".inputs").unwrap();
        for p in &n.inputs {
            write!(s, " {}", p.name).unwrap();
        }
        writeln!(s).unwrap();
    }
    if !n.outputs.is_empty() {
        write!(s, ".outputs").unwrap();
        for p in &n.outputs {
            write!(s, " {}", p.name).unwrap();
        }
        writeln!(s).unwrap();
    }
    for id in n.cell_ids() {
        let cell = n.cell(id);
        if cell.kind.is_sequential() {
            let init = u8::from(n.dff_init_bit(id));
            writeln!(s, ".latch {} {} {init}", name(cell.inputs[0]), name(cell.output)).unwrap();
            continue;
        }
        write!(s, ".gate {}", cell.kind).unwrap();
        let pin_names = pins(cell.kind);
        for (pin, &net) in pin_names.iter().zip(&cell.inputs) {
            write!(s, " {pin}={}", name(net)).unwrap();
        }
        writeln!(s, " {}={}", pin_names[pin_names.len() - 1], name(cell.output)).unwrap();
    }
    writeln!(s, ".end").unwrap();
    Ok(s)
}
