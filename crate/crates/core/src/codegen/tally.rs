// SPDX-License-Identifier: Apache-2.0

//! Instruction breakdown under a bounded-register cost model.
//!
//! Logic mnemonics are counted one-to-one from the program. Marshalling
//! (MOV, STR, LDR) is estimated by a single forward linear scan over the
//! profile's `registers`:
//!
//! - inputs and current-state planes live in memory and are loaded with LDR
//!   on first use and after eviction;
//! - every output or next-state write is a STR issued right after the value
//!   is computed; a sink fed directly by a source costs LDR+STR, by a
//!   constant MOV+STR;
//! - when registers run out, the resident value with the furthest next use
//!   is evicted; evicting a computed value that has no memory copy costs a
//!   STR, and reloading it later costs a LDR;
//! - two-address mnemonics overwrite their first operand, so a first operand
//!   still needed later is first copied with MOV (commutative operations
//!   swap operands instead when that avoids the copy);
//! - constants are immediates in the second operand position when the
//!   profile allows, otherwise they are materialized with MOV;
//! - the update epilogue costs one LDR and one STR per flip-flop.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};

use super::isa::{IsaProfile, Mnemonic};
use super::program::{BitProgram, Operand};

/// Per-mnemonic instruction counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstructionBreakdown {
    counts: BTreeMap<Mnemonic, u64>,
}

impl InstructionBreakdown {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (Mnemonic, u64)>) -> Self {
        let mut b = Self::new();
        for (m, c) in counts {
            b.add(m, c);
        }
        b
    }

    pub fn add(&mut self, m: Mnemonic, count: u64) {
        if count > 0 {
            *self.counts.entry(m).or_default() += count;
        }
    }

    pub fn get(&self, m: Mnemonic) -> u64 {
        self.counts.get(&m).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// MOV + STR + LDR.
    pub fn moves(&self) -> u64 {
        self.counts.iter().filter(|(m, _)| m.is_move()).map(|(_, c)| c).sum()
    }

    /// Nonzero entries in report column order.
    pub fn iter(&self) -> impl Iterator<Item = (Mnemonic, u64)> + '_ {
        self.counts.iter().map(|(&m, &c)| (m, c))
    }

    pub fn mnemonics(&self) -> impl Iterator<Item = Mnemonic> + '_ {
        self.counts.keys().copied()
    }

    pub fn scaled(&self, factor: u64) -> Self {
        Self::from_counts(self.iter().map(|(m, c)| (m, c * factor)))
    }
}

impl fmt::Display for InstructionBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (m, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}:{c}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for InstructionBreakdown {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.counts.len()))?;
        for (m, c) in self.iter() {
            map.serialize_entry(m.name(), &c)?;
        }
        map.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Value {
    Source(Operand),
    Const(bool),
    Reg(u32),
}

impl Value {
    fn of(op: Operand) -> Value {
        match op {
            Operand::Reg(r) => Value::Reg(r),
            Operand::Const(c) => Value::Const(c),
            src => Value::Source(src),
        }
    }
}

#[derive(Clone, Copy)]
struct Resident {
    value: Value,
    /// Computed value without a memory copy.
    dirty: bool,
}

struct Scan<'a> {
    profile: &'a IsaProfile,
    out: InstructionBreakdown,
    regs: Vec<Option<Resident>>,
    home: HashMap<Value, usize>,
    /// Ascending instruction indices at which each value is read.
    uses: HashMap<Value, Vec<usize>>,
    cursor: HashMap<Value, usize>,
}

impl Scan<'_> {
    fn next_use(&self, v: Value, after: usize) -> Option<usize> {
        let list = self.uses.get(&v)?;
        let start = self.cursor.get(&v).copied().unwrap_or(0);
        list[start..].iter().copied().find(|&u| u > after)
    }

    fn advance(&mut self, v: Value, now: usize) {
        if let Some(list) = self.uses.get(&v) {
            let c = self.cursor.entry(v).or_default();
            while *c < list.len() && list[*c] <= now {
                *c += 1;
            }
        }
    }

    fn free(&mut self, v: Value) {
        if let Some(r) = self.home.remove(&v) {
            self.regs[r] = None;
        }
    }

    /// A free register, evicting the furthest-next-use value not in `pinned`.
    fn alloc(&mut self, now: usize, pinned: &[Value]) -> usize {
        if let Some(r) = self.regs.iter().position(Option::is_none) {
            return r;
        }
        let victim = self
            .regs
            .iter()
            .enumerate()
            .filter_map(|(r, slot)| slot.map(|s| (r, s)))
            .filter(|(_, s)| !pinned.contains(&s.value))
            .max_by_key(|(r, s)| (self.next_use(s.value, now).unwrap_or(usize::MAX), std::cmp::Reverse(*r)))
            .map(|(r, _)| r)
            .expect("register file smaller than one instruction's operands");
        let s = self.regs[victim].take().unwrap();
        self.home.remove(&s.value);
        if s.dirty {
            self.out.add(Mnemonic::Str, 1);
        }
        victim
    }

    fn place(&mut self, r: usize, value: Value, dirty: bool) {
        self.regs[r] = Some(Resident { value, dirty });
        self.home.insert(value, r);
    }

    /// Brings `v` into a register.
    fn ensure(&mut self, v: Value, now: usize, pinned: &[Value]) -> usize {
        if let Some(&r) = self.home.get(&v) {
            return r;
        }
        let r = self.alloc(now, pinned);
        let op = if matches!(v, Value::Const(_)) { Mnemonic::Mov } else { Mnemonic::Ldr };
        self.out.add(op, 1);
        self.place(r, v, false);
        r
    }

    fn live_after(&self, v: Value, now: usize) -> bool {
        self.next_use(v, now).is_some()
    }
}

/// Instruction breakdown of one tick of `bp` under the profile's cost model.
pub fn tally(bp: &BitProgram) -> InstructionBreakdown {
    let profile = bp.isa.profile();
    let regs = profile.registers;
    let mut uses: HashMap<Value, Vec<usize>> = HashMap::new();
    for (k, ins) in bp.instrs.iter().enumerate() {
        for op in ins.operands() {
            let list = uses.entry(Value::of(op)).or_default();
            if list.last() != Some(&k) {
                list.push(k);
            }
        }
    }
    let mut sinks: HashMap<u32, u64> = HashMap::new();
    let mut scan = Scan {
        profile,
        out: InstructionBreakdown::new(),
        regs: vec![None; regs],
        home: HashMap::new(),
        uses,
        cursor: HashMap::new(),
    };
    for value in bp.outputs.iter().map(|o| o.value).chain(bp.dffs.iter().map(|d| d.next)) {
        match value {
            Operand::Reg(r) => *sinks.entry(r).or_default() += 1,
            Operand::Const(_) => scan.out.add(Mnemonic::Mov, 1),
            _ => scan.out.add(Mnemonic::Ldr, 1),
        }
        if !matches!(value, Operand::Reg(_)) {
            scan.out.add(Mnemonic::Str, 1);
        }
    }

    for (k, ins) in bp.instrs.iter().enumerate() {
        let destructive = scan.profile.is_destructive(ins.op);
        let mut a = Value::of(ins.a);
        let mut b = ins.b.map(Value::of);

        if let Some(bv) = b {
            if ins.op.is_commutative() {
                let a_const = matches!(a, Value::Const(_));
                let b_const = matches!(bv, Value::Const(_));
                let prefer_swap = (a_const && !b_const)
                    || (destructive
                        && !a_const
                        && !b_const
                        && scan.live_after(a, k)
                        && !scan.live_after(bv, k));
                if prefer_swap {
                    (a, b) = (bv, Some(a));
                }
            }
        }

        let imm_b = matches!(b, Some(Value::Const(_))) && scan.profile.immediate_constants;
        let pinned: Vec<Value> = std::iter::once(a).chain(b).collect();
        let ra = scan.ensure(a, k, &pinned);
        if let Some(bv) = b.filter(|_| !imm_b) {
            scan.ensure(bv, k, &pinned);
        }

        scan.advance(a, k);
        if let Some(bv) = b {
            scan.advance(bv, k);
        }

        let dest = Value::Reg(ins.dest);
        let dest_reg = if destructive && scan.live_after(a, k) {
            // copy the first operand into a fresh register, then operate there
            scan.out.add(Mnemonic::Mov, 1);
            let r = scan.alloc(k, &pinned);
            scan.place(r, dest, true);
            r
        } else {
            for v in pinned.iter().copied() {
                if !scan.live_after(v, k) {
                    scan.free(v);
                }
            }
            let r = if destructive {
                ra
            } else {
                scan.alloc(k, &[])
            };
            scan.regs[r] = None;
            scan.place(r, dest, true);
            r
        };
        for v in pinned.iter().copied() {
            if !scan.live_after(v, k) {
                scan.free(v);
            }
        }
        scan.out.add(ins.op, 1);

        if let Some(&n) = sinks.get(&ins.dest) {
            scan.out.add(Mnemonic::Str, n);
            if let Some(slot) = scan.regs[dest_reg].as_mut() {
                slot.dirty = false;
            }
        }
        if !scan.live_after(dest, k) {
            scan.free(dest);
        }
    }

    let d = bp.dffs.len() as u64;
    scan.out.add(Mnemonic::Ldr, d);
    scan.out.add(Mnemonic::Str, d);
    scan.out
}
