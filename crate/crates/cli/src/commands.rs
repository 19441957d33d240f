// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use psp::codegen::{emit_source, lower, tally, to_ir_text, EmitOptions};
use psp::frontend::{parse, FrontendError, SourceFormat};
use psp::metrics::{event_driven_reference, overhead, repeatability, stats_report};
use psp::netlist::{group_ports, netlist_stats, prune_dead, Netlist};
use psp::random::{random_stimulus, rng};
use psp::runtime::{LeveledDesign, Machine, Program, RuntimeError, Stimulus, StimulusError, Trace, TraceLayout};

use crate::{CompileArgs, DesignArgs, EmitKind, Engine, Failure, Layout, SimulateArgs, StatsArgs};

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &DesignArgs) -> Result<Netlist, Failure> {
    let format = match args.format {
        Some(f) => f,
        None => SourceFormat::from_path(&args.input).ok_or_else(|| {
            Failure::usage(format!(
                "{}: cannot infer format from extension; pass --format blif|synth-json",
                args.input.display()
            ))
        })?,
    };
    let text = read_text(&args.input)?;
    let n = parse(&text, format).map_err(|e| {
        let msg = format!("{}: {e}", args.input.display());
        match e {
            FrontendError::Parse(_) => Failure::parse(msg),
            FrontendError::Invalid(_) => Failure::invalid(msg),
        }
    })?;
    Ok(if args.prune_dead { prune_dead(&n) } else { n })
}

fn leveled(n: Netlist) -> Result<LeveledDesign, Failure> {
    LeveledDesign::new(n).map_err(|e| Failure::invalid(e.to_string()))
}

pub fn compile(args: &CompileArgs) -> Result<(), Failure> {
    let d = &args.design;
    let n = load(d)?;
    let design = leveled(n)?;
    let bp = lower(&design.program, &design.netlist, d.isa, d.width);
    let artifact = match args.emit {
        EmitKind::Source => {
            emit_source(&bp, EmitOptions { annotate: !args.no_annotate })
                .map_err(|e| Failure::invalid(e.to_string()))?
                .text
        }
        EmitKind::Ir => to_ir_text(&bp),
    };
    write_out(args.output.as_deref(), &artifact)?;

    let gates = netlist_stats(&design.netlist).map_err(|e| Failure::invalid(e.to_string()))?;
    let breakdown = tally(&bp);
    let mut summary = String::new();
    writeln!(
        summary,
        "{}: {} gates {gates}, depth {}, {} flip-flops",
        design.netlist.name,
        gates.total(),
        design.program.depth(),
        bp.dffs.len()
    )
    .unwrap();
    writeln!(summary, "{} x{}: {} instructions per tick {breakdown}", d.isa, d.width, breakdown.total()).unwrap();
    if let Ok(o) = overhead(&breakdown) {
        writeln!(summary, "move overhead {}/{} = {:.4}", o.moves, o.total, o.ratio).unwrap();
    }
    if let Some(p) = &args.output {
        writeln!(summary, "wrote {}", p.display()).unwrap();
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn stimulus_failure(path: &Path, e: StimulusError) -> Failure {
    let msg = format!("{}: {e}", path.display());
    match e {
        StimulusError::Csv(_) | StimulusError::Value { .. } | StimulusError::RowLength { .. } => Failure::parse(msg),
        StimulusError::Missing(_) | StimulusError::UnknownColumn(_) | StimulusError::Duplicate(_) => {
            Failure::invalid(msg)
        }
    }
}

fn runtime_failure(e: RuntimeError) -> Failure {
    Failure::invalid(e.to_string())
}

fn first_difference(a: &Trace, b: &Trace) -> String {
    for (t, (ra, rb)) in a.rows().iter().zip(b.rows()).enumerate() {
        for (i, (x, y)) in ra.iter().zip(rb).enumerate() {
            if x != y {
                return format!("tick {t}, output `{}`: {x:#x} vs {y:#x}", a.ports()[i]);
            }
        }
    }
    format!("trace lengths {} vs {}", a.len(), b.len())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let d = &args.design;
    let n = load(d)?;
    let design = leveled(n)?;
    let netlist = design.netlist.clone();
    let ports: Vec<String> = netlist.inputs.iter().map(|p| p.name.clone()).collect();
    let mut notes = String::new();

    let stimulus = match &args.stimulus {
        Some(path) => Stimulus::from_csv(&read_text(path)?, &ports, d.width).map_err(|e| stimulus_failure(path, e))?,
        None => {
            let ticks = args.ticks.unwrap_or(64);
            writeln!(notes, "random stimulus, seed {}", args.seed).unwrap();
            random_stimulus(&mut rng(args.seed), &ports, d.width, ticks)
        }
    };
    let ticks = args.ticks.unwrap_or(stimulus.len());

    let bp = lower(&design.program, &netlist, d.isa, d.width);
    let lowered = Program::from(bp);
    let leveled = Program::from(design);
    let (primary, other) = match args.engine {
        Engine::Program => (lowered, leveled),
        Engine::Leveled => (leveled, lowered),
    };
    let trace = Machine::new(primary, d.width).run(&stimulus, ticks).map_err(runtime_failure)?;

    if args.check {
        let second = Machine::new(other, d.width).run(&stimulus, ticks).map_err(runtime_failure)?;
        if !trace.same_outputs(&second) {
            return Err(Failure::mismatch(format!(
                "engines disagree at {}",
                first_difference(&trace, &second)
            )));
        }
        let reference = event_driven_reference(&netlist, &stimulus, ticks, d.width)
            .map_err(|e| Failure::invalid(e.to_string()))?;
        if !trace.same_outputs(&reference) {
            return Err(Failure::mismatch(format!(
                "event-driven reference disagrees at {}",
                first_difference(&trace, &reference)
            )));
        }
        writeln!(notes, "check: leveled, lowered and event-driven traces agree").unwrap();
    }

    let layout = match args.layout {
        Layout::Planes => TraceLayout::Planes,
        Layout::Lanes => TraceLayout::Lanes,
    };
    write_out(args.output.as_deref(), &trace.to_csv(layout))?;

    let rep = repeatability(&trace);
    writeln!(
        notes,
        "{} ticks, ops per tick {}{}",
        trace.len(),
        rep.max,
        if rep.constant { " (constant)" } else { " (varies)" }
    )
    .unwrap();
    let lanes = d.width.lanes();
    for g in group_ports(trace.ports().iter().map(String::as_str)) {
        if g.bus || g.width() != 1 {
            continue;
        }
        let slot = g.slots[0];
        let high: Vec<String> = (0..lanes)
            .map(|l| trace.rows().iter().filter(|r| r[slot] >> l & 1 == 1).count().to_string())
            .collect();
        let first: Vec<String> = (0..lanes)
            .map(|l| {
                trace
                    .rows()
                    .iter()
                    .position(|r| r[slot] >> l & 1 == 1)
                    .map_or("-".to_string(), |t| t.to_string())
            })
            .collect();
        writeln!(notes, "{}: high ticks per lane: {}", g.name, high.join(" ")).unwrap();
        writeln!(notes, "{}: first high tick per lane: {}", g.name, first.join(" ")).unwrap();
    }
    if args.output.is_some() {
        print!("{notes}");
    } else {
        eprint!("{notes}");
    }
    Ok(())
}

pub fn stats(args: &StatsArgs) -> Result<(), Failure> {
    let d = &args.design;
    let n = load(d)?;
    let report = stats_report(&n, d.isa, d.width, args.seed, args.ticks).map_err(|e| Failure::invalid(e.to_string()))?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_out(args.output.as_deref(), &json)
}
