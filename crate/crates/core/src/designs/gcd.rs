// SPDX-License-Identifier: Apache-2.0

//! Subtractive GCD: a two-state control FSM (IDLE, RUN) in one flip-flop
//! and two k-bit registers.
//!
//! In IDLE with `start`, the registers load `a` and `b` and the FSM enters
//! RUN. In RUN, while the registers differ, the larger is replaced by the
//! difference; when they are equal, `done` is high for that tick, `q` holds
//! the result and the FSM returns to IDLE. `start` is ignored during RUN.
//! Inputs must be nonzero: `(x, 0)` never terminates.

use super::{subtract, DesignSpec, Direction, PortRole};
use crate::netlist::{Netlist, NetlistBuilder};

pub fn gcd_spec(k: usize, taps: bool) -> DesignSpec {
    let mut s = DesignSpec::new(gcd_name(k), &[("k", k as u32), ("taps", taps as u32)])
        .port("a", k, Direction::Input, PortRole::Data)
        .port("b", k, Direction::Input, PortRole::Data)
        .port("start", 1, Direction::Input, PortRole::Control)
        .port("q", k, Direction::Output, PortRole::Data)
        .port("done", 1, Direction::Output, PortRole::Status);
    if taps {
        s = s
            .port("reg_a", k, Direction::Output, PortRole::Status)
            .port("reg_b", k, Direction::Output, PortRole::Status)
            .port("run", 1, Direction::Output, PortRole::Status);
    }
    s
}

fn gcd_name(k: usize) -> String {
    format!("gcd{k}")
}

pub fn build_gcd(k: usize) -> Netlist {
    build(k, false)
}

/// GCD with the registers and FSM state exposed as extra outputs.
pub fn build_gcd_with_taps(k: usize) -> Netlist {
    build(k, true)
}

fn build(k: usize, taps: bool) -> Netlist {
    assert!(k >= 1, "gcd data width must be at least 1");
    let mut b = NetlistBuilder::new(gcd_name(k));
    let a = b.input_bus("a", k);
    let bb = b.input_bus("b", k);
    let start = b.input("start");

    let (run_ff, run) = b.dff("run", false);
    let (a_ffs, reg_a): (Vec<_>, Vec<_>) = (0..k).map(|i| b.dff(format!("reg_a[{i}]"), false)).unzip();
    let (b_ffs, reg_b): (Vec<_>, Vec<_>) = (0..k).map(|i| b.dff(format!("reg_b[{i}]"), false)).unzip();

    let mut ne = None;
    for i in 0..k {
        let x = b.xor(reg_a[i], reg_b[i]);
        ne = Some(match ne {
            None => x,
            Some(acc) => b.or(acc, x),
        });
    }
    let eq = b.not(ne.unwrap());

    let (a_minus_b, a_lt_b) = subtract(&mut b, &reg_a, &reg_b);
    let (b_minus_a, a_gt_b) = subtract(&mut b, &reg_b, &reg_a);

    let load = b.and_not(start, run);
    let upd_a = b.and(run, a_gt_b);
    let upd_b = b.and(run, a_lt_b);
    for i in 0..k {
        let keep_a = b.mux(upd_a, a_minus_b[i], reg_a[i]);
        let next_a = b.mux(load, a[i], keep_a);
        b.connect_dff(a_ffs[i], next_a);
        let keep_b = b.mux(upd_b, b_minus_a[i], reg_b[i]);
        let next_b = b.mux(load, bb[i], keep_b);
        b.connect_dff(b_ffs[i], next_b);
    }
    let not_eq = b.not(eq);
    let run_next = b.mux(run, not_eq, start);
    b.connect_dff(run_ff, run_next);

    let done = b.and(run, eq);
    b.output_bus("q", &reg_a);
    b.output("done", done);
    if taps {
        b.output_bus("reg_a", &reg_a);
        b.output_bus("reg_b", &reg_b);
        b.output("run", run);
    }
    b.finish()
}

/// Subtract-loop steps before the registers are equal; `None` if a zero
/// input makes the loop diverge.
pub fn gcd_steps(mut a: u64, mut b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return (a == b).then_some(0);
    }
    let mut steps = 0;
    while a != b {
        if a > b {
            a -= b;
        } else {
            b -= a;
        }
        steps += 1;
    }
    Some(steps)
}
