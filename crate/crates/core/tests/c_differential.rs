// SPDX-License-Identifier: Apache-2.0

//! Emitted C, compiled by the host toolchain, reproduces the interpreter's
//! traces. Skipped when no `cc` is on the path.

use std::fmt::Write as _;
use std::process::Command;

use psp::codegen::emit::ParamDirection;
use psp::codegen::{control_flow_tokens, emit_source, lower, EmitOptions, IsaKind, SourceArtifact};
use psp::designs::bundled;
use psp::lanes::LaneWidth;
use psp::levelize::levelize;
use psp::netlist::{group_ports, Netlist};
use psp::random::{random_netlist, random_stimulus, rng, RandomNetlistConfig};
use psp::runtime::{Machine, Stimulus, Trace};

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

/// A `main` that drives the entry function with `stim` and prints every
/// output word per tick in port order.
fn harness(art: &SourceArtifact, n: &Netlist, stim: &Stimulus) -> String {
    let w = &art.word_type;
    let ins = group_ports(n.inputs.iter().map(|p| p.name.as_str()));
    let outs = group_ports(n.outputs.iter().map(|p| p.name.as_str()));
    let (in_params, out_params) = art.params.split_at(ins.len());
    let mut s = String::from("#include <stdio.h>\nint main(void)\n{\n");
    writeln!(s, "    {}();", art.reset).unwrap();
    for row in stim.rows() {
        s.push_str("    {\n");
        for (g, p) in ins.iter().zip(in_params) {
            let vals: Vec<String> = g.slots.iter().map(|&i| format!("({w}){}ull", row[i])).collect();
            writeln!(s, "        {w} {}[{}] = {{{}}};", p.name, g.width(), vals.join(", ")).unwrap();
        }
        for (g, p) in outs.iter().zip(out_params) {
            writeln!(s, "        {w} {}[{}] = {{0}};", p.name, g.width()).unwrap();
        }
        let args: Vec<String> = art
            .params
            .iter()
            .map(|p| match (p.direction, p.is_array) {
                (ParamDirection::Input, false) => format!("{}[0]", p.name),
                _ => p.name.clone(),
            })
            .collect();
        writeln!(s, "        {}({});", art.entry, args.join(", ")).unwrap();
        let mut order = vec![String::new(); n.outputs.len()];
        for (g, p) in outs.iter().zip(out_params) {
            for (bit, &slot) in g.slots.iter().enumerate() {
                order[slot] = format!("{}[{bit}]", p.name);
            }
        }
        for expr in order {
            writeln!(s, "        printf(\"%llx \", (unsigned long long){expr});").unwrap();
        }
        s.push_str("        printf(\"\\n\");\n    }\n");
    }
    s.push_str("    return 0;\n}\n");
    s
}

fn run_c(n: &Netlist, isa: IsaKind, width: LaneWidth, stim: &Stimulus, tag: &str) -> (Trace, Vec<Vec<u64>>) {
    let bp = lower(&levelize(n).unwrap(), n, isa, width);
    let art = emit_source(&bp, EmitOptions::default()).unwrap();
    assert!(control_flow_tokens(art.entry_body()).is_empty());
    let dir = std::env::temp_dir().join(format!("psp-cdiff-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("prog.c");
    let exe = dir.join("prog");
    std::fs::write(&src, format!("{}\n{}", art.text, harness(&art, n, stim))).unwrap();
    let cc = Command::new("cc")
        .args(["-std=c99", "-O1", "-Wall", "-Werror", "-Wno-unused-variable", "-o"])
        .arg(&exe)
        .arg(&src)
        .output()
        .unwrap();
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let out = Command::new(&exe).output().unwrap();
    let rows = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().map(|h| u64::from_str_radix(h, 16).unwrap()).collect())
        .collect();
    std::fs::remove_dir_all(&dir).ok();
    let trace = Machine::new(bp, width).run(stim, stim.len()).unwrap();
    (trace, rows)
}

#[test]
fn compiled_designs_match_interpreter() {
    if !have_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    for (i, (_, n)) in bundled().into_iter().enumerate() {
        let ports: Vec<String> = n.inputs.iter().map(|p| p.name.clone()).collect();
        for (isa, width) in [(IsaKind::ArmCortexM4, LaneWidth::W32), (IsaKind::RiscV, LaneWidth::W64), (IsaKind::Avr, LaneWidth::W8)] {
            let stim = random_stimulus(&mut rng(i as u64), &ports, width, 24);
            let (trace, rows) = run_c(&n, isa, width, &stim, &format!("d{i}-{isa}"));
            assert_eq!(trace.rows(), rows.as_slice(), "{} {isa}", n.name);
        }
    }
}

#[test]
fn compiled_random_netlists_match_interpreter() {
    if !have_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let mut r = rng(99);
    for k in 0..8 {
        let n = random_netlist(&mut r, RandomNetlistConfig::default());
        let ports: Vec<String> = n.inputs.iter().map(|p| p.name.clone()).collect();
        let stim = random_stimulus(&mut r, &ports, LaneWidth::W16, 16);
        let (trace, rows) = run_c(&n, IsaKind::Portable, LaneWidth::W16, &stim, &format!("r{k}"));
        assert_eq!(trace.rows(), rows.as_slice());
    }
}
