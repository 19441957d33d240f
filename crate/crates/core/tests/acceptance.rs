// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;

use psp::codegen::{control_flow_tokens, emit_source, lower, tally, EmitOptions, IsaKind, Mnemonic};
use psp::designs::{build_gcd, build_pwm, build_simon_round, bundled, gcd_steps, SimonVariant};
use psp::lanes::{slice, unslice, LaneWidth};
use psp::levelize::levelize;
use psp::metrics::{event_driven_reference, overhead, repeatability};
use psp::netlist::{CellKind, Netlist, NetlistBuilder};
use psp::random::{random_netlist, random_stimulus, rng, RandomNetlistConfig};
use psp::runtime::{map_jobs, simulate_batch, LeveledDesign, Machine, Program, Stimulus, Trace};

type Outcome = Result<String, String>;
type SimonCase = ((u16, u16), [u16; 4]);
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ports(n: &Netlist) -> Vec<String> {
    n.inputs.iter().map(|p| p.name.clone()).collect()
}

fn lowered(n: &Netlist, isa: IsaKind, width: LaneWidth) -> Program {
    Program::from(lower(&levelize(n).unwrap(), n, isa, width))
}

fn euclid(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        euclid(b, a % b)
    }
}

struct GcdRun {
    traces: Vec<Trace>,
    pairs: Vec<(u64, u64)>,
}

const GCD_PAIRS: usize = 1000;
const GCD_TICKS: usize = 20;

fn gcd_experiment() -> GcdRun {
    let n = build_gcd(4);
    let width = LaneWidth::W32;
    let mut r = rng(1);
    let pairs: Vec<(u64, u64)> = (0..GCD_PAIRS)
        .map(|_| (r.random_range(1..16), r.random_range(1..16)))
        .collect();
    let stimuli: Vec<Stimulus> = pairs
        .chunks(width.lanes())
        .map(|chunk| {
            let mut a: Vec<u64> = chunk.iter().map(|p| p.0).collect();
            let mut b: Vec<u64> = chunk.iter().map(|p| p.1).collect();
            a.resize(width.lanes(), 1);
            b.resize(width.lanes(), 1);
            let mut s = Stimulus::new(ports(&n), width);
            for t in 0..GCD_TICKS {
                let start = vec![u64::from(t == 0); width.lanes()];
                s.push_lanes(&[("a", &a), ("b", &b), ("start", &start)]).unwrap();
            }
            s
        })
        .collect();
    let program = lowered(&n, IsaKind::ArmCortexM4, width);
    let traces = simulate_batch(&program, width, &stimuli, GCD_TICKS)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    GcdRun { traces, pairs }
}

fn done_ticks(run: &GcdRun) -> Vec<Option<usize>> {
    let mut out = Vec::new();
    for (batch, trace) in run.traces.iter().enumerate() {
        for lane in 0..32 {
            if batch * 32 + lane < run.pairs.len() {
                out.push((0..trace.len()).find(|&t| trace.word(t, "done").unwrap() >> lane & 1 == 1));
            }
        }
    }
    out
}

fn criterion_1(run: &GcdRun, elapsed: Duration) -> Outcome {
    let done = done_ticks(run);
    for (i, &(a, b)) in run.pairs.iter().enumerate() {
        let (batch, lane) = (i / 32, i % 32);
        let expected_tick = 1 + gcd_steps(a, b).unwrap() as usize;
        let tick = done[i].ok_or_else(|| format!("pair ({a},{b}) never finished"))?;
        ensure(tick == expected_tick, || format!("pair ({a},{b}): done at tick {tick}, expected {expected_tick}"))?;
        let q = run.traces[batch].lane_values(tick, "q").unwrap()[lane];
        ensure(q == euclid(a, b), || format!("pair ({a},{b}): q = {q}, gcd = {}", euclid(a, b)))?;
    }
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{} pairs in {} runs of 32 lanes, {:.3} s", run.pairs.len(), run.traces.len(), elapsed.as_secs_f64()))
}

fn criterion_2(run: &GcdRun) -> Outcome {
    let counts: Vec<u64> = run.traces.iter().flat_map(|t| t.ops().iter().copied()).collect();
    let rep = psp::metrics::RepeatabilityReport::from_counts(&counts);
    ensure(rep.constant, || format!("op count ranges {}..{}", rep.min, rep.max))?;
    ensure(run.traces.iter().all(|t| repeatability(t).constant), || "a run had varying op counts".into())?;
    let distinct: BTreeSet<usize> = done_ticks(run).into_iter().flatten().collect();
    ensure(distinct.len() > 1, || "ticks-to-done did not vary".into())?;
    Ok(format!(
        "{} ops every tick over {} ticks; ticks-to-done spans {:?}",
        rep.max,
        counts.len(),
        distinct
    ))
}

fn criterion_3() -> Outcome {
    let started = Instant::now();
    let n = build_pwm(8);
    let width = LaneWidth::W32;
    let program = lowered(&n, IsaKind::ArmCortexM4, width);
    let ticks = 512;
    for batch in 0..8u64 {
        let duties: Vec<u64> = (0..32).map(|l| batch * 32 + l).collect();
        let mut s = Stimulus::new(ports(&n), width);
        for t in 0..ticks {
            s.push_lanes(&[("duty", &duties), ("load", &[u64::from(t == 0); 32])]).unwrap();
        }
        let trace = Machine::new(program.clone(), width).run(&s, ticks).unwrap();
        for (lane, &d) in duties.iter().enumerate() {
            let bit = |t: usize| trace.word(t, "out").unwrap() >> lane & 1;
            let high = (0..256).map(bit).sum::<u64>();
            ensure(high == d, || format!("duty {d}: {high} high ticks in one period"))?;
            ensure((0..256).all(|t| bit(t) == bit(t + 256)), || format!("duty {d}: not periodic in 256 ticks"))?;
            if d > 0 {
                ensure((0..128).any(|t| bit(t) != bit(t + 128)), || format!("duty {d}: period shorter than 256"))?;
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(2), || format!("took {elapsed:?}"))?;
    Ok(format!("duties 0..=255 in 8 batches, period 256, {:.3} s", elapsed.as_secs_f64()))
}

fn criterion_4() -> Outcome {
    use Mnemonic::*;
    let n = build_gcd(4);
    let marshal = [Mov, Str, Ldr];
    let table: [(IsaKind, &[Mnemonic]); 4] = [
        (IsaKind::ArmCortexM4, &[And, Bic, Eor, Mov, Mvn, Orn, Orr]),
        (IsaKind::RiscV, &[And, Or, Xor]),
        (IsaKind::Msp430, &[And, Bic, Bis, Xor]),
        (IsaKind::Avr, &[And, Com, Eor, Or]),
    ];
    let mut used = Vec::new();
    for (isa, allowed) in table {
        let bp = lower(&levelize(&n).unwrap(), &n, isa, LaneWidth::W32);
        for m in bp.instrs.iter().map(|i| i.op).chain(tally(&bp).mnemonics()) {
            ensure(allowed.contains(&m) || marshal.contains(&m), || format!("{isa} uses {m}"))?;
        }
        let set: BTreeSet<String> = bp.instrs.iter().map(|i| i.op.to_string()).collect();
        used.push(format!("{isa} {{{}}}", set.into_iter().collect::<Vec<_>>().join(",")));
    }
    Ok(used.join("; "))
}

fn differential(n: &Netlist, s: &Stimulus, ticks: usize, width: LaneWidth, isa: IsaKind) -> Result<(), String> {
    let lev = Machine::new(LeveledDesign::new(n.clone()).unwrap(), width).run(s, ticks).unwrap();
    let low = Machine::new(lowered(n, isa, width), width).run(s, ticks).unwrap();
    let ev = event_driven_reference(n, s, ticks, width).unwrap();
    ensure(lev.same_outputs(&low), || format!("{}: leveled and lowered traces differ", n.name))?;
    ensure(lev.same_outputs(&ev), || format!("{}: leveled and event-driven traces differ", n.name))
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let width = LaneWidth::W32;
    for (i, (_, n)) in bundled().iter().enumerate() {
        for isa in IsaKind::ALL {
            let s = random_stimulus(&mut rng(100 + i as u64), &ports(n), width, 100);
            differential(n, &s, 100, width, isa)?;
        }
    }
    let seeds: Vec<u64> = (0..200).collect();
    let results = map_jobs(&seeds, |&seed| {
        let mut r = rng(1000 + seed);
        let n = random_netlist(&mut r, RandomNetlistConfig::default());
        let isa = IsaKind::ALL[seed as usize % IsaKind::ALL.len()];
        let s = random_stimulus(&mut r, &ports(&n), width, 50);
        differential(&n, &s, 50, width, isa).map_err(|e| format!("seed {seed}: {e}"))
    });
    results.into_iter().collect::<Result<Vec<()>, String>>()?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "3 designs x 5 profiles x 100 ticks, 200 random netlists x 50 ticks, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_6() -> Outcome {
    let width = LaneWidth::W32;
    let mut trials = 0;
    for (i, (_, n)) in bundled().iter().enumerate() {
        let program = lowered(n, IsaKind::ArmCortexM4, width);
        let mut r = rng(200 + i as u64);
        for trial in 0..100 {
            let ticks = 40;
            let base = random_stimulus(&mut r, &ports(n), width, ticks);
            let lane = r.random_range(0..32);
            let mut pert = base.clone();
            for t in 0..ticks {
                for w in pert.row_mut(t) {
                    *w ^= (r.random::<u64>() & 1) << lane;
                }
            }
            let a = Machine::new(program.clone(), width).run(&base, ticks).unwrap();
            let b = Machine::new(program.clone(), width).run(&pert, ticks).unwrap();
            let others = !(1u64 << lane);
            for (ra, rb) in a.rows().iter().zip(b.rows()) {
                for (x, y) in ra.iter().zip(rb) {
                    ensure(x & others == y & others, || format!("{} trial {trial}: lane {lane} leaked", n.name))?;
                }
            }
            trials += 1;
        }
    }
    Ok(format!("{trials} perturbation trials over 3 designs"))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    for width in [LaneWidth::W8, LaneWidth::W32, LaneWidth::W64] {
        for _ in 0..1000 {
            let bits = r.random_range(1..=64u32);
            let mask = if bits == 64 { u64::MAX } else { (1 << bits) - 1 };
            let v: Vec<u64> = (0..width.lanes()).map(|_| r.random::<u64>() & mask).collect();
            ensure(unslice(&slice(&v, bits, width).unwrap(), width).unwrap() == v, || "unslice(slice(v)) != v".into())?;
            let p: Vec<u64> = (0..bits).map(|_| r.random::<u64>() & width.mask()).collect();
            ensure(slice(&unslice(&p, width).unwrap(), bits, width).unwrap() == p, || "slice(unslice(p)) != p".into())?;
        }
    }
    Ok("1000 vectors each way at N = 8, 32, 64".into())
}

/// Truth table of each kind, written out independently of the library.
fn reference_gate(kind: CellKind, x: &[bool]) -> bool {
    match kind {
        CellKind::And2 => x[0] && x[1],
        CellKind::Or2 => x[0] || x[1],
        CellKind::Xor2 => x[0] != x[1],
        CellKind::Nand2 => !(x[0] && x[1]),
        CellKind::Nor2 => !(x[0] || x[1]),
        CellKind::AndNot2 => x[0] && !x[1],
        CellKind::OrNot2 => x[0] || !x[1],
        CellKind::Not1 => !x[0],
        CellKind::Mux2 => {
            if x[0] {
                x[1]
            } else {
                x[2]
            }
        }
        CellKind::Const0 => false,
        CellKind::Const1 => true,
        CellKind::Dff => unreachable!(),
    }
}

fn criterion_8() -> Outcome {
    let mut rows = 0;
    for kind in CellKind::ALL.into_iter().filter(|k| !k.is_sequential()) {
        let arity = kind.arity();
        let mut b = NetlistBuilder::new("one");
        let ins: Vec<_> = (0..arity).map(|i| b.input(format!("x{i}"))).collect();
        let y = b.gate(kind, &ins);
        b.output("y", y);
        let n = b.finish();
        // lane r carries truth-table row r
        let words: Vec<u64> = (0..arity)
            .map(|i| (0..8u64).filter(|r| r >> i & 1 == 1).fold(0, |w, r| w | 1 << r))
            .collect();
        for isa in IsaKind::ALL {
            let bp = lower(&levelize(&n).unwrap(), &n, isa, LaneWidth::W8);
            let out = Machine::new(bp, LaneWidth::W8).eval_words(&words).unwrap()[0];
            for r in 0..(1usize << arity) {
                let x: Vec<bool> = (0..arity).map(|i| r >> i & 1 == 1).collect();
                ensure((out >> r & 1 == 1) == reference_gate(kind, &x), || format!("{kind} on {isa}, row {r}"))?;
                rows += 1;
            }
        }
    }
    Ok(format!("{rows} truth-table rows over 11 kinds x 5 profiles"))
}

fn criterion_9() -> Outcome {
    let n = build_gcd(4);
    let t = tally(&lower(&levelize(&n).unwrap(), &n, IsaKind::ArmCortexM4, LaneWidth::W32));
    let o = overhead(&t).unwrap();
    ensure((0.40..=0.65).contains(&o.ratio), || format!("ratio {:.4} outside [0.40, 0.65]", o.ratio))?;
    Ok(format!("arm-m4 {t}, {}/{} = {:.4}", o.moves, o.total, o.ratio))
}

fn criterion_10() -> Outcome {
    let width = LaneWidth::W32;
    let mut checked = 0;
    for (_, n) in bundled() {
        for isa in IsaKind::ALL {
            let bp = lower(&levelize(&n).unwrap(), &n, isa, width);
            let art = emit_source(&bp, EmitOptions::default()).map_err(|e| e.to_string())?;
            let tokens = control_flow_tokens(art.entry_body());
            ensure(tokens.is_empty(), || format!("{} {isa}: {tokens:?}", n.name))?;
            let expected = (bp.len() + bp.dffs.len()) as u64;
            let program = Program::from(bp);
            for seed in 0..5 {
                let s = random_stimulus(&mut rng(seed), &ports(&n), width, 30);
                let trace = Machine::new(program.clone(), width).run(&s, 30).unwrap();
                ensure(trace.ops().iter().all(|&o| o == expected), || format!("{} {isa}: op count varies", n.name))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} design/profile pairs: no control-flow tokens, constant op counts"))
}

/// Scalar Simon32/64 written from the cipher definition.
fn simon_reference(pt: (u16, u16), key: [u16; 4]) -> (u16, u16) {
    const Z0: u64 = 0x19c3_522f_b386_a45f;
    let mut k = [0u16; 32];
    k[..4].copy_from_slice(&key);
    for i in 4..32 {
        let mut tmp = k[i - 1].rotate_right(3) ^ k[i - 3];
        tmp ^= tmp.rotate_right(1);
        let z = ((Z0 >> ((i - 4) % 62)) & 1) as u16;
        k[i] = !k[i - 4] ^ tmp ^ z ^ 3;
    }
    let (mut x, mut y) = pt;
    for ki in k {
        let f = (x.rotate_left(1) & x.rotate_left(8)) ^ x.rotate_left(2);
        (x, y) = (y ^ f ^ ki, x);
    }
    (x, y)
}

fn criterion_11() -> Outcome {
    ensure(
        simon_reference((0x6565, 0x6877), [0x0100, 0x0908, 0x1110, 0x1918]) == (0xc69b, 0xe9bb),
        || "scalar reference fails the known answer".into(),
    )?;
    let v = SimonVariant::Simon32_64;
    let n = build_simon_round(v);
    let width = LaneWidth::W32;
    let program = lowered(&n, IsaKind::ArmCortexM4, width);
    let ticks = v.rounds() + 2;
    let mut r = rng(11);
    let batches: Vec<Vec<SimonCase>> = (0..100)
        .map(|b| {
            (0..32)
                .map(|lane| {
                    if b == 0 && lane == 0 {
                        ((0x6565, 0x6877), [0x0100, 0x0908, 0x1110, 0x1918])
                    } else {
                        ((r.random(), r.random()), r.random())
                    }
                })
                .collect()
        })
        .collect();
    let results = map_jobs(&batches, |batch| {
        let schedules: Vec<Vec<u16>> = batch.iter().map(|(_, k)| psp::designs::simon::key_schedule(*k)).collect();
        let mut s = Stimulus::new(ports(&n), width);
        for t in 0..ticks {
            let px: Vec<u64> = batch.iter().map(|(p, _)| u64::from(p.0)).collect();
            let py: Vec<u64> = batch.iter().map(|(p, _)| u64::from(p.1)).collect();
            let key: Vec<u64> = schedules
                .iter()
                .map(|ks| if (1..=v.rounds()).contains(&t) { u64::from(ks[t - 1]) } else { 0 })
                .collect();
            let load = vec![u64::from(t == 0); 32];
            s.push_lanes(&[("pt_x", &px), ("pt_y", &py), ("key", &key), ("load", &load)]).unwrap();
        }
        let trace = Machine::new(program.clone(), width).run(&s, ticks).unwrap();
        let cx = trace.lane_values(v.rounds() + 1, "ct_x").unwrap();
        let cy = trace.lane_values(v.rounds() + 1, "ct_y").unwrap();
        for (lane, &(pt, key)) in batch.iter().enumerate() {
            let want = simon_reference(pt, key);
            if (cx[lane] as u16, cy[lane] as u16) != want {
                return Err(format!("lane {lane}: got {:04x} {:04x}, want {:04x} {:04x}", cx[lane], cy[lane], want.0, want.1));
            }
        }
        Ok(())
    });
    results.into_iter().collect::<Result<Vec<()>, String>>()?;
    Ok("known answer c69b e9bb; 100 batches x 32 lanes of random key and plaintext".into())
}

fn main() {
    let started = Instant::now();
    let run = gcd_experiment();
    let gcd_elapsed = started.elapsed();

    let criteria: Vec<(&str, Check)> = vec![
        ("GCD correctness", Box::new(|| criterion_1(&run, gcd_elapsed))),
        ("repeatable timing", Box::new(|| criterion_2(&run))),
        ("PWM timing arithmetic", Box::new(criterion_3)),
        ("ISA conformance", Box::new(criterion_4)),
        ("differential simulation", Box::new(criterion_5)),
        ("lane non-interference", Box::new(criterion_6)),
        ("transpose round-trip", Box::new(criterion_7)),
        ("lowering soundness", Box::new(criterion_8)),
        ("overhead band", Box::new(criterion_9)),
        ("branch-freedom", Box::new(criterion_10)),
        ("Simon32/64 known-answer", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
