// SPDX-License-Identifier: Apache-2.0

//! Pulse-width modulator: a free-running r-bit counter and a duty register
//! loaded when `load` is high; `out = counter < duty`, so duty 0 is always
//! low and the period is 2^r ticks. The comparator sees the loaded duty on
//! the load tick itself, so a period starts at the load tick.

use super::{less_than, DesignSpec, Direction, PortRole};
use crate::netlist::{Netlist, NetlistBuilder};

pub fn pwm_spec(r: usize) -> DesignSpec {
    DesignSpec::new(format!("pwm{r}"), &[("r", r as u32)])
        .port("duty", r, Direction::Input, PortRole::Data)
        .port("load", 1, Direction::Input, PortRole::Control)
        .port("out", 1, Direction::Output, PortRole::Data)
}

pub fn build_pwm(r: usize) -> Netlist {
    assert!(r >= 1, "pwm resolution must be at least 1");
    let mut b = NetlistBuilder::new(format!("pwm{r}"));
    let duty = b.input_bus("duty", r);
    let load = b.input("load");

    let (cnt_ffs, cnt): (Vec<_>, Vec<_>) = (0..r).map(|i| b.dff(format!("count[{i}]"), false)).unzip();
    let (duty_ffs, held): (Vec<_>, Vec<_>) = (0..r).map(|i| b.dff(format!("duty_reg[{i}]"), false)).unzip();

    let mut carry = None;
    for i in 0..r {
        let next = match carry {
            None => b.not(cnt[i]),
            Some(c) => b.xor(cnt[i], c),
        };
        b.connect_dff(cnt_ffs[i], next);
        if i + 1 == r {
            break;
        }
        carry = Some(match carry {
            None => cnt[i],
            Some(c) => b.and(cnt[i], c),
        });
    }
    let effective: Vec<_> = (0..r).map(|i| b.mux(load, duty[i], held[i])).collect();
    for (&ff, &d) in duty_ffs.iter().zip(&effective) {
        b.connect_dff(ff, d);
    }
    let out = less_than(&mut b, &cnt, &effective);
    b.output("out", out);
    b.finish()
}
