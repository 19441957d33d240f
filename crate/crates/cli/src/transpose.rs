// SPDX-License-Identifier: Apache-2.0

//! Per-lane value tables to bit-plane tables and back.
//!
//! Lane CSV: a header of variable names, one row per lane, decimal values.
//! Consecutive groups of `width` rows form one batch; the final batch may be
//! short. Plane CSV: header `lanes,plane,<names...>`, `bits` rows per batch,
//! `lanes` being the batch's lane count and each cell one hex lane word.

use std::fmt::Write as _;

use psp::lanes::{slice, unslice, LaneWidth};
use psp::runtime::{format_word, parse_word};

use crate::commands::{read_text, write_out};
use crate::{Failure, TransposeArgs};

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes())
}

pub fn run(args: &TransposeArgs) -> Result<(), Failure> {
    if args.bits == 0 || args.bits > 64 {
        return Err(Failure::usage(format!("--bits {} is outside 1..=64", args.bits)));
    }
    let text = read_text(&args.input)?;
    let out = if args.unslice {
        planes_to_lanes(&text, args.bits, args.width)
    } else {
        lanes_to_planes(&text, args.bits, args.width)
    }
    .map_err(|f| Failure {
        code: f.code,
        message: format!("{}: {}", args.input.display(), f.message),
    })?;
    write_out(args.output.as_deref(), &out)
}

pub fn lanes_to_planes(text: &str, bits: u32, width: LaneWidth) -> Result<String, Failure> {
    let mut rd = reader(text);
    let names: Vec<String> = rd
        .headers()
        .map_err(|e| Failure::parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let limit = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let row_no = i + 2;
        let rec = rec.map_err(|e| Failure::parse(format!("row {row_no}: {e}")))?;
        let vals = rec
            .iter()
            .zip(&names)
            .map(|(cell, name)| {
                let v = parse_word(cell).map_err(|m| Failure::parse(format!("row {row_no}, column `{name}`: {m}")))?;
                if v > limit {
                    return Err(Failure::invalid(format!(
                        "row {row_no}, column `{name}`: value {v} does not fit in {bits} bits"
                    )));
                }
                Ok(v)
            })
            .collect::<Result<Vec<u64>, Failure>>()?;
        rows.push(vals);
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["lanes".to_string(), "plane".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).unwrap();
    for batch in rows.chunks(width.lanes()) {
        let per_var: Vec<Vec<u64>> = (0..names.len())
            .map(|c| {
                let mut lanes: Vec<u64> = batch.iter().map(|r| r[c]).collect();
                lanes.resize(width.lanes(), 0);
                slice(&lanes, bits, width).expect("values checked against bit width")
            })
            .collect();
        for j in 0..bits as usize {
            let mut rec = vec![batch.len().to_string(), j.to_string()];
            rec.extend(per_var.iter().map(|p| format_word(p[j], width)));
            w.write_record(&rec).unwrap();
        }
    }
    Ok(String::from_utf8(w.into_inner().unwrap()).unwrap())
}

pub fn planes_to_lanes(text: &str, bits: u32, width: LaneWidth) -> Result<String, Failure> {
    let mut rd = reader(text);
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| Failure::parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 || header[0] != "lanes" || header[1] != "plane" {
        return Err(Failure::parse("plane CSV must start with columns `lanes,plane`"));
    }
    let names = &header[2..];
    let mut out = String::new();
    writeln!(out, "{}", names.join(",")).unwrap();

    let records: Vec<(usize, csv::StringRecord)> = rd
        .records()
        .enumerate()
        .map(|(i, r)| r.map(|r| (i + 2, r)).map_err(|e| Failure::parse(format!("row {}: {e}", i + 2))))
        .collect::<Result<_, _>>()?;
    if !records.len().is_multiple_of(bits as usize) {
        return Err(Failure::invalid(format!(
            "{} plane rows is not a multiple of --bits {bits}",
            records.len()
        )));
    }
    for batch in records.chunks(bits as usize) {
        let mut lanes = None;
        let mut planes: Vec<Vec<u64>> = vec![Vec::new(); names.len()];
        for (j, (row_no, rec)) in batch.iter().enumerate() {
            let field = |c: usize| rec.get(c).unwrap_or("");
            let l: usize = field(0)
                .parse()
                .map_err(|_| Failure::parse(format!("row {row_no}: bad lane count `{}`", field(0))))?;
            if l == 0 || l > width.lanes() || lanes.is_some_and(|x| x != l) {
                return Err(Failure::invalid(format!("row {row_no}: lane count {l} is inconsistent")));
            }
            lanes = Some(l);
            if field(1) != j.to_string() {
                return Err(Failure::invalid(format!("row {row_no}: expected plane {j}, found `{}`", field(1))));
            }
            for (c, name) in names.iter().enumerate() {
                let w = parse_word(field(c + 2))
                    .map_err(|m| Failure::parse(format!("row {row_no}, column `{name}`: {m}")))?;
                if w & !width.mask() != 0 {
                    return Err(Failure::invalid(format!(
                        "row {row_no}, column `{name}`: {w:#x} exceeds {} lanes",
                        width.lanes()
                    )));
                }
                planes[c].push(w);
            }
        }
        let values: Vec<Vec<u64>> = planes
            .iter()
            .map(|p| unslice(p, width).expect("1..=64 planes"))
            .collect();
        for lane in 0..lanes.unwrap() {
            let row: Vec<String> = values.iter().map(|v| v[lane].to_string()).collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_short_batch() {
        let text = "x,y\n1,2\n3,0\n7,5\n";
        let planes = lanes_to_planes(text, 3, LaneWidth::W8).unwrap();
        assert_eq!(planes, "lanes,plane,x,y\n3,0,0x07,0x04\n3,1,0x06,0x01\n3,2,0x04,0x04\n");
        assert_eq!(planes_to_lanes(&planes, 3, LaneWidth::W8).unwrap(), text);
    }

    #[test]
    fn out_of_range_names_row() {
        let f = lanes_to_planes("x\n1\n9\n", 3, LaneWidth::W8).unwrap_err();
        assert_eq!(f.code, 3);
        assert!(f.message.contains("row 3"), "{}", f.message);
    }
}
