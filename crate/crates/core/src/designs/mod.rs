// SPDX-License-Identifier: Apache-2.0

//! Builders for the bundled example designs.

mod gcd;
mod pwm;
pub mod simon;

use std::fmt;

use serde::Serialize;

pub use gcd::{build_gcd, build_gcd_with_taps, gcd_spec, gcd_steps};
pub use pwm::{build_pwm, pwm_spec};
pub use simon::{build_simon_round, simon_spec, SimonVariant};

use crate::netlist::{group_ports, Netlist, NetlistBuilder, NetId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PortRole {
    Data,
    Control,
    Status,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PortSpec {
    pub name: String,
    pub width: usize,
    pub direction: Direction,
    pub role: PortRole,
}

/// Name, parameters and port manifest of a built design.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignSpec {
    pub name: String,
    pub params: Vec<(String, u32)>,
    pub ports: Vec<PortSpec>,
}

impl DesignSpec {
    fn new(name: impl Into<String>, params: &[(&str, u32)]) -> Self {
        DesignSpec {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            ports: Vec::new(),
        }
    }

    fn port(mut self, name: &str, width: usize, direction: Direction, role: PortRole) -> Self {
        self.ports.push(PortSpec {
            name: name.into(),
            width,
            direction,
            role,
        });
        self
    }

    /// Whether the netlist's grouped ports are exactly this manifest, in order.
    pub fn matches(&self, n: &Netlist) -> bool {
        let grouped = |ports: &[crate::netlist::Port]| -> Vec<(String, usize)> {
            group_ports(ports.iter().map(|p| p.name.as_str()))
                .into_iter()
                .map(|g| (g.name.clone(), g.width()))
                .collect()
        };
        let want = |dir: Direction| -> Vec<(String, usize)> {
            self.ports
                .iter()
                .filter(|p| p.direction == dir)
                .map(|p| (p.name.clone(), p.width))
                .collect()
        };
        n.name == self.name && grouped(&n.inputs) == want(Direction::Input) && grouped(&n.outputs) == want(Direction::Output)
    }

    pub fn port_width(&self, name: &str) -> Option<usize> {
        self.ports.iter().find(|p| p.name == name).map(|p| p.width)
    }
}

impl fmt::Display for DesignSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, p) in self.ports.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let dir = if p.direction == Direction::Input { "in" } else { "out" };
            write!(f, "{dir} {}[{}]", p.name, p.width)?;
        }
        f.write_str(")")
    }
}

/// Every bundled design at its default parameters.
pub fn bundled() -> Vec<(DesignSpec, Netlist)> {
    vec![
        (gcd_spec(4, false), build_gcd(4)),
        (pwm_spec(8), build_pwm(8)),
        (simon_spec(SimonVariant::Simon32_64), build_simon_round(SimonVariant::Simon32_64)),
    ]
}

/// Ripple subtractor `x - y`: difference bits (LSB first) and final borrow.
pub(crate) fn subtract(b: &mut NetlistBuilder, x: &[NetId], y: &[NetId]) -> (Vec<NetId>, NetId) {
    assert_eq!(x.len(), y.len());
    let mut diff = Vec::with_capacity(x.len());
    let mut borrow: Option<NetId> = None;
    for (&xi, &yi) in x.iter().zip(y) {
        let t = b.xor(xi, yi);
        let (d, bo) = match borrow {
            None => (t, b.and_not(yi, xi)),
            Some(bin) => {
                let d = b.xor(t, bin);
                let g = b.and_not(yi, xi);
                let p = b.and_not(bin, t);
                (d, b.or(g, p))
            }
        };
        diff.push(d);
        borrow = Some(bo);
    }
    (diff, borrow.expect("subtractor of width >= 1"))
}

/// Borrow-only chain: `x < y` unsigned.
pub(crate) fn less_than(b: &mut NetlistBuilder, x: &[NetId], y: &[NetId]) -> NetId {
    assert_eq!(x.len(), y.len());
    let mut borrow: Option<NetId> = None;
    for (&xi, &yi) in x.iter().zip(y) {
        let g = b.and_not(yi, xi);
        borrow = Some(match borrow {
            None => g,
            Some(bin) => {
                let t = b.xor(xi, yi);
                let p = b.and_not(bin, t);
                b.or(g, p)
            }
        });
    }
    borrow.expect("comparator of width >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::validate_netlist;
    use crate::runtime::{LeveledDesign, Machine};
    use crate::lanes::LaneWidth;

    #[test]
    fn bundled_designs_validate_and_match_manifest() {
        for (spec, n) in bundled() {
            let report = validate_netlist(&n);
            assert!(report.ok, "{}: {report}", spec.name);
            assert!(spec.matches(&n), "{spec}");
        }
    }

    #[test]
    fn arithmetic_helpers_exhaustive() {
        let mut b = NetlistBuilder::new("arith");
        let x = b.input_bus("x", 3);
        let y = b.input_bus("y", 3);
        let (d, bo) = subtract(&mut b, &x, &y);
        let lt = less_than(&mut b, &x, &y);
        b.output_bus("d", &d);
        b.output("bo", bo);
        b.output("lt", lt);
        let mut m = Machine::new(LeveledDesign::new(b.finish()).unwrap(), LaneWidth::W64);
        let xs: Vec<u64> = (0..64).map(|i| i & 7).collect();
        let ys: Vec<u64> = (0..64).map(|i| i >> 3).collect();
        let mut words = crate::lanes::slice(&xs, 3, LaneWidth::W64).unwrap();
        words.extend(crate::lanes::slice(&ys, 3, LaneWidth::W64).unwrap());
        let out = m.eval_words(&words).unwrap();
        let d = crate::lanes::unslice(&out[..3], LaneWidth::W64).unwrap();
        for lane in 0..64 {
            assert_eq!(d[lane], xs[lane].wrapping_sub(ys[lane]) & 7);
            assert_eq!((out[3] >> lane) & 1 == 1, xs[lane] < ys[lane]);
            assert_eq!((out[4] >> lane) & 1 == 1, xs[lane] < ys[lane]);
        }
    }
}
