// SPDX-License-Identifier: Apache-2.0

//! Seeded generators for random netlists and stimuli.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lanes::LaneWidth;
use crate::netlist::{CellKind, NetId, Netlist, NetlistBuilder};
use crate::runtime::Stimulus;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct RandomNetlistConfig {
    pub max_cells: usize,
    pub max_dffs: usize,
    pub max_inputs: usize,
    pub max_outputs: usize,
}

impl Default for RandomNetlistConfig {
    fn default() -> Self {
        RandomNetlistConfig {
            max_cells: 64,
            max_dffs: 8,
            max_inputs: 6,
            max_outputs: 6,
        }
    }
}

/// A random valid netlist: combinational cells draw fan-in only from
/// earlier nets, so the logic is acyclic; flip-flops close loops.
/// `max_cells` bounds combinational and sequential cells together.
pub fn random_netlist(rng: &mut impl Rng, cfg: RandomNetlistConfig) -> Netlist {
    let mut b = NetlistBuilder::new("random");
    let n_in = rng.random_range(1..=cfg.max_inputs.max(1));
    let n_dff = rng.random_range(0..=cfg.max_dffs.min(cfg.max_cells.saturating_sub(1)));
    let n_comb = rng.random_range(1..=(cfg.max_cells - n_dff).max(1));

    let mut nets: Vec<NetId> = (0..n_in).map(|i| b.input(format!("i{i}"))).collect();
    let dffs: Vec<_> = (0..n_dff)
        .map(|i| {
            let init = rng.random_bool(0.5);
            let (ff, q) = b.dff(format!("r{i}"), init);
            nets.push(q);
            ff
        })
        .collect();
    for _ in 0..n_comb {
        let kind = if rng.random_ratio(1, 20) {
            if rng.random_bool(0.5) { CellKind::Const0 } else { CellKind::Const1 }
        } else {
            let logic = &CellKind::COMBINATIONAL[..];
            loop {
                let k = logic[rng.random_range(0..logic.len())];
                if k.arity() > 0 {
                    break k;
                }
            }
        };
        let fanin: Vec<NetId> = (0..kind.arity()).map(|_| nets[rng.random_range(0..nets.len())]).collect();
        let y = b.gate(kind, &fanin);
        nets.push(y);
    }
    for ff in dffs {
        let d = nets[rng.random_range(0..nets.len())];
        b.connect_dff(ff, d);
    }
    let n_out = rng.random_range(1..=cfg.max_outputs.max(1)).min(nets.len());
    let mut chosen: Vec<NetId> = Vec::new();
    while chosen.len() < n_out {
        // bias towards late nets so deep logic is observed
        let lo = nets.len() / 2;
        let pick = if rng.random_bool(0.7) { rng.random_range(lo..nets.len()) } else { rng.random_range(0..nets.len()) };
        if !chosen.contains(&nets[pick]) {
            chosen.push(nets[pick]);
        }
    }
    for (i, net) in chosen.into_iter().enumerate() {
        b.output(format!("o{i}"), net);
    }
    b.finish()
}

/// Uniform random lane words for every input at every tick.
pub fn random_stimulus(rng: &mut impl Rng, ports: &[String], width: LaneWidth, ticks: usize) -> Stimulus {
    let mut s = Stimulus::new(ports.to_vec(), width);
    for _ in 0..ticks {
        s.push(ports.iter().map(|_| rng.random::<u64>() & width.mask()).collect());
    }
    s
}
