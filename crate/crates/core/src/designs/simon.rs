// SPDX-License-Identifier: Apache-2.0

//! Simon32/64 round datapath and a scalar reference.
//!
//! The round netlist holds the cipher state `(x, y)` in flip-flops. With
//! `load` high the state takes `pt_x`/`pt_y`; otherwise it advances one
//! round `(x, y) -> (y ^ f(x) ^ k, x)` with `f(x) = (x<<<1 & x<<<8) ^ x<<<2`,
//! using round key `k`. Outputs `ct_x`/`ct_y` show the current state, so
//! after a load tick and R round ticks the ciphertext appears at tick R+1.
//! The key schedule runs on the host ([`key_schedule`]).

use super::{DesignSpec, Direction, PortRole};
use crate::netlist::{NetId, Netlist, NetlistBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimonVariant {
    Simon32_64,
}

impl SimonVariant {
    pub fn word_bits(self) -> usize {
        16
    }

    pub fn key_words(self) -> usize {
        4
    }

    pub fn rounds(self) -> usize {
        32
    }

    pub fn name(self) -> &'static str {
        "simon32_64"
    }
}

impl std::str::FromStr for SimonVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simon32_64" | "simon32/64" => Ok(SimonVariant::Simon32_64),
            other => Err(format!("unsupported Simon variant `{other}` (supported: simon32_64)")),
        }
    }
}

pub fn simon_spec(v: SimonVariant) -> DesignSpec {
    let n = v.word_bits();
    DesignSpec::new(v.name(), &[("n", n as u32), ("m", v.key_words() as u32), ("rounds", v.rounds() as u32)])
        .port("pt_x", n, Direction::Input, PortRole::Data)
        .port("pt_y", n, Direction::Input, PortRole::Data)
        .port("key", n, Direction::Input, PortRole::Data)
        .port("load", 1, Direction::Input, PortRole::Control)
        .port("ct_x", n, Direction::Output, PortRole::Data)
        .port("ct_y", n, Direction::Output, PortRole::Data)
}

/// Bit `i` of `x <<< s` is bit `i - s` of `x`.
fn rotl(x: &[NetId], s: usize) -> Vec<NetId> {
    let n = x.len();
    (0..n).map(|i| x[(i + n - s) % n]).collect()
}

pub fn build_simon_round(v: SimonVariant) -> Netlist {
    let n = v.word_bits();
    let mut b = NetlistBuilder::new(v.name());
    let pt_x = b.input_bus("pt_x", n);
    let pt_y = b.input_bus("pt_y", n);
    let key = b.input_bus("key", n);
    let load = b.input("load");

    let (x_ffs, x): (Vec<_>, Vec<_>) = (0..n).map(|i| b.dff(format!("x[{i}]"), false)).unzip();
    let (y_ffs, y): (Vec<_>, Vec<_>) = (0..n).map(|i| b.dff(format!("y[{i}]"), false)).unzip();

    let (r1, r8, r2) = (rotl(&x, 1), rotl(&x, 8), rotl(&x, 2));
    for i in 0..n {
        let t = b.and(r1[i], r8[i]);
        let f = b.xor(t, r2[i]);
        let fy = b.xor(f, y[i]);
        let round_x = b.xor(fy, key[i]);
        let next_x = b.mux(load, pt_x[i], round_x);
        b.connect_dff(x_ffs[i], next_x);
        let next_y = b.mux(load, pt_y[i], x[i]);
        b.connect_dff(y_ffs[i], next_y);
    }
    b.output_bus("ct_x", &x);
    b.output_bus("ct_y", &y);
    b.finish()
}

const Z0: &str = "11111010001001010110000111001101111101000100101011000011100110";

/// Round keys from the master key words `k[0..4]` (`k[0]` used first).
pub fn key_schedule(key: [u16; 4]) -> Vec<u16> {
    let (m, t) = (4, 32);
    let z: Vec<u16> = Z0.bytes().map(|c| u16::from(c - b'0')).collect();
    let mut k = key.to_vec();
    for i in m..t {
        let mut tmp = k[i - 1].rotate_right(3);
        tmp ^= k[i - 3];
        tmp ^= tmp.rotate_right(1);
        k.push(!k[i - m] ^ tmp ^ z[(i - m) % 62] ^ 3);
    }
    k
}

/// Scalar Simon32/64 encryption of `(x, y)` under `key` (`key[0]` lowest).
pub fn encrypt(x: u16, y: u16, key: [u16; 4]) -> (u16, u16) {
    let f = |x: u16| (x.rotate_left(1) & x.rotate_left(8)) ^ x.rotate_left(2);
    key_schedule(key)
        .into_iter()
        .fold((x, y), |(x, y), k| (y ^ f(x) ^ k, x))
}
