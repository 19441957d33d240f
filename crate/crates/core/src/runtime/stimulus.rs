// SPDX-License-Identifier: Apache-2.0

//! Stimulus and trace tables, and their CSV form.
//!
//! A header names one column per input port. A plain column holds one lane
//! word per row (hex with `0x`, binary with `0b`, or decimal). A column
//! named `lane.<port>` holds per-lane integers for a whole port group
//! (`a` for `a[0]..a[k-1]`), whitespace-separated, or a single value
//! broadcast to every lane; it is sliced over the group's bits. An empty
//! cell holds the previous tick's value.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lanes::{slice, unslice, LaneWidth, SliceError};
use crate::netlist::{group_ports, PortGroup};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StimulusError {
    #[error("csv: {0}")]
    Csv(String),
    #[error("missing input column(s): {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("column `{0}` names no input port")]
    UnknownColumn(String),
    #[error("input `{0}` is given by more than one column")]
    Duplicate(String),
    #[error("row {row}, column `{column}`: {message}")]
    Value { row: usize, column: String, message: String },
    #[error("row {row}: expected {expected} fields, got {got}")]
    RowLength { row: usize, expected: usize, got: usize },
}

pub fn parse_word(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(&h.replace('_', ""), 16)
    } else if let Some(b) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u64::from_str_radix(&b.replace('_', ""), 2)
    } else {
        t.parse::<u64>()
    };
    parsed.map_err(|_| format!("`{t}` is not a hex, binary or decimal integer"))
}

/// `0x`-prefixed hex padded to the lane width.
pub fn format_word(w: u64, width: LaneWidth) -> String {
    format!("0x{:0digits$x}", w, digits = width.hex_digits())
}

/// Input words per tick, in port declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stimulus {
    ports: Vec<String>,
    width: LaneWidth,
    rows: Vec<Vec<u64>>,
}

enum Column {
    Plane(usize),
    Lanes(PortGroup),
    Ignored,
}

impl Stimulus {
    pub fn new(ports: Vec<String>, width: LaneWidth) -> Self {
        Stimulus {
            ports,
            width,
            rows: Vec::new(),
        }
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn width(&self) -> LaneWidth {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn row(&self, tick: usize) -> &[u64] {
        &self.rows[tick]
    }

    pub fn row_mut(&mut self, tick: usize) -> &mut [u64] {
        &mut self.rows[tick]
    }

    /// Appends one tick of words; panics on a length mismatch.
    pub fn push(&mut self, words: Vec<u64>) {
        assert_eq!(words.len(), self.ports.len(), "stimulus row length");
        self.rows.push(words);
    }

    /// Appends one tick given per-lane integers for every port group.
    pub fn push_lanes(&mut self, groups: &[(&str, &[u64])]) -> Result<(), StimulusError> {
        let given: BTreeMap<&str, &[u64]> = groups.iter().copied().collect();
        let mut row = vec![0u64; self.ports.len()];
        let mut missing = Vec::new();
        for g in group_ports(self.ports.iter().map(String::as_str)) {
            let Some(values) = given.get(g.name.as_str()) else {
                missing.push(g.name.clone());
                continue;
            };
            let planes = slice(values, g.width() as u32, self.width).map_err(|e| StimulusError::Value {
                row: self.rows.len(),
                column: format!("lane.{}", g.name),
                message: e.to_string(),
            })?;
            for (&slot, p) in g.slots.iter().zip(planes) {
                row[slot] = p;
            }
        }
        if !missing.is_empty() {
            return Err(StimulusError::Missing(missing));
        }
        for name in given.keys() {
            if !group_ports(self.ports.iter().map(String::as_str)).iter().any(|g| g.name == *name) {
                return Err(StimulusError::UnknownColumn(name.to_string()));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn from_csv(text: &str, ports: &[String], width: LaneWidth) -> Result<Self, StimulusError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| StimulusError::Csv(e.to_string()))?
            .clone();
        let groups = group_ports(ports.iter().map(String::as_str));

        let mut covered = vec![false; ports.len()];
        let mut columns = Vec::new();
        for name in header.iter() {
            let col = if let Some(g) = name.strip_prefix("lane.") {
                let group = groups
                    .iter()
                    .find(|pg| pg.name == g)
                    .ok_or_else(|| StimulusError::UnknownColumn(name.to_string()))?;
                Column::Lanes(group.clone())
            } else if let Some(i) = ports.iter().position(|p| p == name) {
                Column::Plane(i)
            } else if name == "tick" {
                Column::Ignored
            } else {
                return Err(StimulusError::UnknownColumn(name.to_string()));
            };
            let slots: Vec<usize> = match &col {
                Column::Plane(i) => vec![*i],
                Column::Lanes(g) => g.slots.clone(),
                Column::Ignored => vec![],
            };
            for s in slots {
                if std::mem::replace(&mut covered[s], true) {
                    return Err(StimulusError::Duplicate(ports[s].clone()));
                }
            }
            columns.push(col);
        }
        let mut missing = Vec::new();
        for g in &groups {
            let absent: Vec<usize> = g.slots.iter().copied().filter(|&s| !covered[s]).collect();
            if absent.len() == g.slots.len() {
                missing.push(g.name.clone());
            } else {
                missing.extend(absent.iter().map(|&s| ports[s].clone()));
            }
        }
        if !missing.is_empty() {
            return Err(StimulusError::Missing(missing));
        }

        let mut stim = Stimulus::new(ports.to_vec(), width);
        for (r, record) in reader.records().enumerate() {
            // data rows are numbered from 1, after the header
            let row_no = r + 1;
            let record = record.map_err(|e| StimulusError::Csv(e.to_string()))?;
            if record.len() != columns.len() {
                return Err(StimulusError::RowLength {
                    row: row_no,
                    expected: columns.len(),
                    got: record.len(),
                });
            }
            let mut words = stim.rows.last().cloned().unwrap_or_else(|| vec![0; ports.len()]);
            for ((col, cell), name) in columns.iter().zip(record.iter()).zip(header.iter()) {
                let fail = |message: String| StimulusError::Value {
                    row: row_no,
                    column: name.to_string(),
                    message,
                };
                if cell.is_empty() {
                    if stim.rows.is_empty() && !matches!(col, Column::Ignored) {
                        return Err(fail("hold (empty cell) has no previous tick".into()));
                    }
                    continue;
                }
                match col {
                    Column::Ignored => {}
                    Column::Plane(i) => {
                        let w = parse_word(cell).map_err(fail)?;
                        if w & !width.mask() != 0 {
                            return Err(fail(format!("{w:#x} has bits beyond lane {}", width.lanes())));
                        }
                        words[*i] = w;
                    }
                    Column::Lanes(g) => {
                        let values = cell
                            .split_whitespace()
                            .map(parse_word)
                            .collect::<Result<Vec<u64>, String>>()
                            .map_err(fail)?;
                        let values = match values.len() {
                            1 => vec![values[0]; width.lanes()],
                            n if n == width.lanes() => values,
                            n => return Err(fail(format!("{n} lane values, expected 1 or {}", width.lanes()))),
                        };
                        let planes = slice(&values, g.width() as u32, width).map_err(|e: SliceError| fail(e.to_string()))?;
                        for (&s, p) in g.slots.iter().zip(planes) {
                            words[s] = p;
                        }
                    }
                }
            }
            stim.rows.push(words);
        }
        Ok(stim)
    }

    /// CSV with one plane column per port.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.ports).unwrap();
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_word(x, self.width))).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceLayout {
    /// One lane-word column per output bit.
    #[default]
    Planes,
    /// One `lane.<port>` column per output group with per-lane integers.
    Lanes,
}

/// Output words per tick, post-eval, plus executed ops per tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    ports: Vec<String>,
    width: LaneWidth,
    rows: Vec<Vec<u64>>,
    ops: Vec<u64>,
}

impl Trace {
    pub fn new(ports: Vec<String>, width: LaneWidth) -> Self {
        Trace {
            ports,
            width,
            rows: Vec::new(),
            ops: Vec::new(),
        }
    }

    pub fn push(&mut self, outputs: Vec<u64>, ops: u64) {
        self.rows.push(outputs);
        self.ops.push(ops);
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn width(&self) -> LaneWidth {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn ops(&self) -> &[u64] {
        &self.ops
    }

    pub fn port_index(&self, name: &str) -> Option<usize> {
        self.ports.iter().position(|p| p == name)
    }

    /// Word of output `name` at `tick`.
    pub fn word(&self, tick: usize, name: &str) -> Option<u64> {
        Some(self.rows.get(tick)?[self.port_index(name)?])
    }

    /// Per-lane integers of output group `name` at `tick`.
    pub fn lane_values(&self, tick: usize, name: &str) -> Option<Vec<u64>> {
        let g = group_ports(self.ports.iter().map(String::as_str))
            .into_iter()
            .find(|g| g.name == name)?;
        let row = self.rows.get(tick)?;
        let planes: Vec<u64> = g.slots.iter().map(|&s| row[s]).collect();
        Some(unslice(&planes, self.width).expect("group width within 64"))
    }

    /// Output values only, ignoring op counts.
    pub fn same_outputs(&self, other: &Trace) -> bool {
        self.ports == other.ports && self.rows == other.rows
    }

    /// Bit `lane` of every output at every tick.
    pub fn lane(&self, lane: usize) -> Vec<Vec<bool>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|w| (w >> lane) & 1 == 1).collect())
            .collect()
    }

    pub fn to_csv(&self, layout: TraceLayout) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let groups = group_ports(self.ports.iter().map(String::as_str));
        let mut header = vec!["tick".to_string()];
        match layout {
            TraceLayout::Planes => header.extend(self.ports.iter().cloned()),
            TraceLayout::Lanes => header.extend(groups.iter().map(|g| format!("lane.{}", g.name))),
        }
        header.push("ops".into());
        w.write_record(&header).unwrap();
        for (t, (row, ops)) in self.rows.iter().zip(&self.ops).enumerate() {
            let mut rec = vec![t.to_string()];
            match layout {
                TraceLayout::Planes => rec.extend(row.iter().map(|&x| format_word(x, self.width))),
                TraceLayout::Lanes => {
                    for g in &groups {
                        let planes: Vec<u64> = g.slots.iter().map(|&s| row[s]).collect();
                        let vals = unslice(&planes, self.width).expect("group width within 64");
                        rec.push(vals.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
                    }
                }
            }
            rec.push(ops.to_string());
            w.write_record(&rec).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ports() -> Vec<String> {
        ["a[0]", "a[1]", "start"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn words() {
        assert_eq!(parse_word("0x1F"), Ok(31));
        assert_eq!(parse_word("0b101"), Ok(5));
        assert_eq!(parse_word("12"), Ok(12));
        assert!(parse_word("z").is_err());
        assert_eq!(format_word(0xA, LaneWidth::W16), "0x000a");
    }

    #[test]
    fn lane_columns_broadcast_and_hold() {
        let csv = "lane.a,start\n3,0xff\n,0\n1 2 3 0 0 0 0 0,\n";
        let s = Stimulus::from_csv(csv, &ports(), LaneWidth::W8).unwrap();
        assert_eq!(s.row(0), &[0xFF, 0xFF, 0xFF]);
        assert_eq!(s.row(1), &[0xFF, 0xFF, 0]);
        assert_eq!(s.row(2), &[0b101, 0b110, 0]);
    }

    #[test]
    fn errors_name_ports_and_rows() {
        let e = Stimulus::from_csv("start\n1\n", &ports(), LaneWidth::W8).unwrap_err();
        assert_eq!(e, StimulusError::Missing(vec!["a".into()]));
        let e = Stimulus::from_csv("lane.a,start\n4,0\n", &ports(), LaneWidth::W8).unwrap_err();
        assert!(matches!(e, StimulusError::Value { row: 1, .. }), "{e}");
        let e = Stimulus::from_csv("lane.a,start\n,0\n", &ports(), LaneWidth::W8).unwrap_err();
        assert!(e.to_string().contains("hold"));
        let e = Stimulus::from_csv("lane.a,start,zz\n1,0,0\n", &ports(), LaneWidth::W8).unwrap_err();
        assert_eq!(e, StimulusError::UnknownColumn("zz".into()));
        let e = Stimulus::from_csv("lane.a,a[0],start\n1,0,0\n", &ports(), LaneWidth::W8).unwrap_err();
        assert_eq!(e, StimulusError::Duplicate("a[0]".into()));
    }

    #[test]
    fn plane_csv_round_trip() {
        let mut s = Stimulus::new(ports(), LaneWidth::W16);
        s.push(vec![1, 0xFFFF, 7]);
        s.push(vec![0, 2, 3]);
        assert_eq!(Stimulus::from_csv(&s.to_csv(), &ports(), LaneWidth::W16).unwrap(), s);
    }

    #[test]
    fn trace_layouts() {
        let mut t = Trace::new(vec!["q[0]".into(), "q[1]".into(), "done".into()], LaneWidth::W8);
        t.push(vec![0b01, 0b10, 0b11], 9);
        assert_eq!(t.lane_values(0, "q").unwrap()[..3], [1, 2, 0]);
        let csv = t.to_csv(TraceLayout::Lanes);
        assert_eq!(csv, "tick,lane.q,lane.done,ops\n0,1 2 0 0 0 0 0 0,1 1 0 0 0 0 0 0,9\n");
        assert!(t.to_csv(TraceLayout::Planes).starts_with("tick,q[0],q[1],done,ops\n0,0x01,0x02,0x03,9"));
    }
}
