// SPDX-License-Identifier: Apache-2.0

//! Target ISA profiles and their gate lowering tables.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::netlist::CellKind;

/// Instruction mnemonics across all profiles. Several names share one
/// semantics (`EOR`/`XOR`, `ORR`/`OR`/`BIS`, `MVN`/`COM`/`NOT`); they are
/// kept distinct so tallies read in each target's vocabulary.
///
/// Declaration order is the column order used in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Mnemonic {
    And,
    Orr,
    Or,
    Bis,
    Bic,
    Eor,
    Xor,
    Orn,
    Mvn,
    Com,
    Not,
    Mov,
    Str,
    Ldr,
}

impl Mnemonic {
    pub const ALL: [Mnemonic; 14] = [
        Mnemonic::And,
        Mnemonic::Orr,
        Mnemonic::Or,
        Mnemonic::Bis,
        Mnemonic::Bic,
        Mnemonic::Eor,
        Mnemonic::Xor,
        Mnemonic::Orn,
        Mnemonic::Mvn,
        Mnemonic::Com,
        Mnemonic::Not,
        Mnemonic::Mov,
        Mnemonic::Str,
        Mnemonic::Ldr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mnemonic::And => "AND",
            Mnemonic::Orr => "ORR",
            Mnemonic::Or => "OR",
            Mnemonic::Bis => "BIS",
            Mnemonic::Bic => "BIC",
            Mnemonic::Eor => "EOR",
            Mnemonic::Xor => "XOR",
            Mnemonic::Orn => "ORN",
            Mnemonic::Mvn => "MVN",
            Mnemonic::Com => "COM",
            Mnemonic::Not => "NOT",
            Mnemonic::Mov => "MOV",
            Mnemonic::Str => "STR",
            Mnemonic::Ldr => "LDR",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Mnemonic::Mvn | Mnemonic::Com | Mnemonic::Not | Mnemonic::Mov | Mnemonic::Str | Mnemonic::Ldr => 1,
            _ => 2,
        }
    }

    /// Register-move or memory instruction counted as marshalling overhead.
    pub fn is_move(self) -> bool {
        matches!(self, Mnemonic::Mov | Mnemonic::Str | Mnemonic::Ldr)
    }

    pub fn is_commutative(self) -> bool {
        matches!(
            self,
            Mnemonic::And | Mnemonic::Orr | Mnemonic::Or | Mnemonic::Bis | Mnemonic::Eor | Mnemonic::Xor
        )
    }

    /// Word semantics. Unary mnemonics ignore `b`.
    pub fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            Mnemonic::And => a & b,
            Mnemonic::Orr | Mnemonic::Or | Mnemonic::Bis => a | b,
            Mnemonic::Bic => a & !b,
            Mnemonic::Eor | Mnemonic::Xor => a ^ b,
            Mnemonic::Orn => a | !b,
            Mnemonic::Mvn | Mnemonic::Com | Mnemonic::Not => !a,
            Mnemonic::Mov | Mnemonic::Str | Mnemonic::Ldr => a,
        }
    }

    /// C expression for the operation over two operand expressions.
    pub fn c_expr(self, a: &str, b: &str) -> String {
        match self {
            Mnemonic::And => format!("{a} & {b}"),
            Mnemonic::Orr | Mnemonic::Or | Mnemonic::Bis => format!("{a} | {b}"),
            Mnemonic::Bic => format!("{a} & ~{b}"),
            Mnemonic::Eor | Mnemonic::Xor => format!("{a} ^ {b}"),
            Mnemonic::Orn => format!("{a} | ~{b}"),
            Mnemonic::Mvn | Mnemonic::Com | Mnemonic::Not => format!("~{a}"),
            Mnemonic::Mov | Mnemonic::Str | Mnemonic::Ldr => a.to_string(),
        }
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mnemonic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        Mnemonic::ALL
            .into_iter()
            .find(|m| m.name() == upper)
            .ok_or_else(|| format!("unknown mnemonic `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IsaKind {
    ArmCortexM4,
    RiscV,
    Msp430,
    Avr,
    Portable,
}

impl IsaKind {
    pub const ALL: [IsaKind; 5] = [
        IsaKind::ArmCortexM4,
        IsaKind::RiscV,
        IsaKind::Msp430,
        IsaKind::Avr,
        IsaKind::Portable,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            IsaKind::ArmCortexM4 => "arm-m4",
            IsaKind::RiscV => "risc-v",
            IsaKind::Msp430 => "msp430",
            IsaKind::Avr => "avr",
            IsaKind::Portable => "portable",
        }
    }

    pub fn profile(self) -> &'static IsaProfile {
        match self {
            IsaKind::ArmCortexM4 => &ARM_CORTEX_M4,
            IsaKind::RiscV => &RISC_V,
            IsaKind::Msp430 => &MSP430,
            IsaKind::Avr => &AVR,
            IsaKind::Portable => &PORTABLE,
        }
    }
}

impl fmt::Display for IsaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for IsaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "arm-m4" | "arm" | "cortex-m4" | "armcortexm4" => Ok(IsaKind::ArmCortexM4),
            "risc-v" | "riscv" | "rv32" => Ok(IsaKind::RiscV),
            "msp430" => Ok(IsaKind::Msp430),
            "avr" => Ok(IsaKind::Avr),
            "portable" | "c" => Ok(IsaKind::Portable),
            other => Err(format!(
                "unknown ISA `{other}` (expected arm-m4, risc-v, msp430, avr or portable)"
            )),
        }
    }
}

/// Operand of one lowering step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Src {
    /// The cell's n-th fan-in.
    In(u8),
    /// Result of an earlier step of the same lowering.
    Step(u8),
    /// The all-ones constant.
    Ones,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub op: Mnemonic,
    pub a: Src,
    /// Ignored for unary mnemonics.
    pub b: Src,
}

const fn un(op: Mnemonic, a: Src) -> Step {
    Step { op, a, b: a }
}

const fn bin(op: Mnemonic, a: Src, b: Src) -> Step {
    Step { op, a, b }
}

use Src::{In, Ones, Step as S};

/// A target profile. The last step of each lowering produces the cell
/// output. Constants and flip-flops have empty lowerings: constants fold
/// into operands and flip-flops are state planes.
#[derive(Debug)]
pub struct IsaProfile {
    pub kind: IsaKind,
    pub display_name: &'static str,
    /// Logic mnemonics the lowering may emit.
    pub logic: &'static [Mnemonic],
    /// Architectural registers available to the spill model.
    pub registers: usize,
    /// Whether a constant can be an immediate operand. Otherwise the
    /// constant is materialized into a register with MOV.
    pub immediate_constants: bool,
    /// Two-address mnemonics overwrite their first operand's register.
    pub destructive: &'static [Mnemonic],
    table: [&'static [Step]; 9],
}

impl IsaProfile {
    pub fn lowering(&self, kind: CellKind) -> &'static [Step] {
        let idx = match kind {
            CellKind::And2 => 0,
            CellKind::Or2 => 1,
            CellKind::Xor2 => 2,
            CellKind::Nand2 => 3,
            CellKind::Nor2 => 4,
            CellKind::AndNot2 => 5,
            CellKind::OrNot2 => 6,
            CellKind::Not1 => 7,
            CellKind::Mux2 => 8,
            CellKind::Dff | CellKind::Const0 | CellKind::Const1 => return &[],
        };
        self.table[idx]
    }

    pub fn is_destructive(&self, op: Mnemonic) -> bool {
        self.destructive.contains(&op)
    }

    /// Logic mnemonics plus the marshalling moves a tally may report.
    pub fn permitted(&self) -> Vec<Mnemonic> {
        let mut all: Vec<Mnemonic> = self.logic.to_vec();
        for m in [Mnemonic::Mov, Mnemonic::Str, Mnemonic::Ldr] {
            if !all.contains(&m) {
                all.push(m);
            }
        }
        all.sort();
        all
    }
}

use Mnemonic::*;

// Thumb-2 at -Os favors 16-bit encodings, which are two-address for
// AND/ORR/EOR/BIC. ORN only has a 32-bit three-address form.
pub static ARM_CORTEX_M4: IsaProfile = IsaProfile {
    kind: IsaKind::ArmCortexM4,
    display_name: "ARM Cortex-M4",
    logic: &[And, Bic, Eor, Mov, Mvn, Orn, Orr],
    registers: 14,
    immediate_constants: true,
    destructive: &[And, Orr, Eor, Bic],
    table: [
        &[bin(And, In(0), In(1))],
        &[bin(Orr, In(0), In(1))],
        &[bin(Eor, In(0), In(1))],
        &[bin(And, In(0), In(1)), un(Mvn, S(0))],
        &[bin(Orr, In(0), In(1)), un(Mvn, S(0))],
        &[bin(Bic, In(0), In(1))],
        &[bin(Orn, In(0), In(1))],
        &[un(Mvn, In(0))],
        &[bin(And, In(1), In(0)), bin(Bic, In(2), In(0)), bin(Orr, S(0), S(1))],
    ],
};

pub static RISC_V: IsaProfile = IsaProfile {
    kind: IsaKind::RiscV,
    display_name: "RISC-V",
    logic: &[And, Or, Xor],
    registers: 27,
    immediate_constants: true,
    destructive: &[],
    table: [
        &[bin(And, In(0), In(1))],
        &[bin(Or, In(0), In(1))],
        &[bin(Xor, In(0), In(1))],
        &[bin(And, In(0), In(1)), bin(Xor, S(0), Ones)],
        &[bin(Or, In(0), In(1)), bin(Xor, S(0), Ones)],
        &[bin(Xor, In(1), Ones), bin(And, In(0), S(0))],
        &[bin(Xor, In(1), Ones), bin(Or, In(0), S(0))],
        &[bin(Xor, In(0), Ones)],
        // b ^ (sel & (a ^ b))
        &[bin(Xor, In(1), In(2)), bin(And, In(0), S(0)), bin(Xor, In(2), S(1))],
    ],
};

pub static MSP430: IsaProfile = IsaProfile {
    kind: IsaKind::Msp430,
    display_name: "MSP430",
    logic: &[And, Bic, Bis, Xor],
    registers: 12,
    immediate_constants: true,
    destructive: &[And, Bic, Bis, Xor],
    table: [
        &[bin(And, In(0), In(1))],
        &[bin(Bis, In(0), In(1))],
        &[bin(Xor, In(0), In(1))],
        &[bin(And, In(0), In(1)), bin(Xor, S(0), Ones)],
        &[bin(Bis, In(0), In(1)), bin(Xor, S(0), Ones)],
        &[bin(Bic, In(0), In(1))],
        &[bin(Xor, In(1), Ones), bin(Bis, In(0), S(0))],
        &[bin(Xor, In(0), Ones)],
        &[bin(And, In(1), In(0)), bin(Bic, In(2), In(0)), bin(Bis, S(0), S(1))],
    ],
};

pub static AVR: IsaProfile = IsaProfile {
    kind: IsaKind::Avr,
    display_name: "AVR",
    logic: &[And, Com, Eor, Or],
    registers: 24,
    immediate_constants: false,
    destructive: &[And, Com, Eor, Or],
    table: [
        &[bin(And, In(0), In(1))],
        &[bin(Or, In(0), In(1))],
        &[bin(Eor, In(0), In(1))],
        &[bin(And, In(0), In(1)), un(Com, S(0))],
        &[bin(Or, In(0), In(1)), un(Com, S(0))],
        &[un(Com, In(1)), bin(And, In(0), S(0))],
        &[un(Com, In(1)), bin(Or, In(0), S(0))],
        &[un(Com, In(0))],
        &[bin(Eor, In(1), In(2)), bin(And, In(0), S(0)), bin(Eor, In(2), S(1))],
    ],
};

/// C operators only: `&`, `|`, `^`, `~`.
pub static PORTABLE: IsaProfile = IsaProfile {
    kind: IsaKind::Portable,
    display_name: "portable C",
    logic: &[And, Or, Xor, Not],
    registers: 16,
    immediate_constants: true,
    destructive: &[],
    table: [
        &[bin(And, In(0), In(1))],
        &[bin(Or, In(0), In(1))],
        &[bin(Xor, In(0), In(1))],
        &[bin(And, In(0), In(1)), un(Not, S(0))],
        &[bin(Or, In(0), In(1)), un(Not, S(0))],
        &[un(Not, In(1)), bin(And, In(0), S(0))],
        &[un(Not, In(1)), bin(Or, In(0), S(0))],
        &[un(Not, In(0))],
        // (sel & a) | (~sel & b)
        &[bin(And, In(0), In(1)), un(Not, In(0)), bin(And, S(1), In(2)), bin(Or, S(0), S(2))],
    ],
};

#[cfg(test)]
mod tests {
    use super::*;

    /// Evaluates a lowering on concrete fan-in words.
    fn run(steps: &[Step], ins: &[u64]) -> u64 {
        let mut vals: Vec<u64> = Vec::new();
        let get = |s: Src, vals: &[u64]| match s {
            In(i) => ins[i as usize],
            S(i) => vals[i as usize],
            Ones => !0,
        };
        for st in steps {
            let v = st.op.apply(get(st.a, &vals), get(st.b, &vals));
            vals.push(v);
        }
        *vals.last().unwrap()
    }

    #[test]
    fn every_kind_lowers_in_every_profile() {
        for isa in IsaKind::ALL {
            let p = isa.profile();
            for kind in CellKind::ALL {
                let steps = p.lowering(kind);
                let expect_empty = matches!(kind, CellKind::Dff | CellKind::Const0 | CellKind::Const1);
                assert_eq!(steps.is_empty(), expect_empty, "{isa} {kind}");
                for st in steps {
                    assert!(p.logic.contains(&st.op), "{isa} {kind} uses {}", st.op);
                }
            }
        }
    }

    #[test]
    fn truth_tables_match_cell_semantics() {
        for isa in IsaKind::ALL {
            let p = isa.profile();
            for kind in CellKind::COMBINATIONAL {
                let steps = p.lowering(kind);
                if steps.is_empty() {
                    continue;
                }
                let arity = kind.arity();
                for row in 0..(1u64 << arity) {
                    let ins: Vec<u64> = (0..arity).map(|i| if row >> i & 1 == 1 { !0 } else { 0 }).collect();
                    assert_eq!(run(steps, &ins), kind.eval_word(&ins), "{isa} {kind} row {row}");
                }
            }
        }
    }

    #[test]
    fn table_one_sets() {
        let names = |isa: IsaKind| -> Vec<&str> { isa.profile().logic.iter().map(|m| m.name()).collect() };
        assert_eq!(names(IsaKind::ArmCortexM4), ["AND", "BIC", "EOR", "MOV", "MVN", "ORN", "ORR"]);
        assert_eq!(names(IsaKind::RiscV), ["AND", "OR", "XOR"]);
        assert_eq!(names(IsaKind::Msp430), ["AND", "BIC", "BIS", "XOR"]);
        assert_eq!(names(IsaKind::Avr), ["AND", "COM", "EOR", "OR"]);
    }

    #[test]
    fn lowering_lengths() {
        assert_eq!(ARM_CORTEX_M4.lowering(CellKind::Not1), &[un(Mvn, In(0))]);
        assert_eq!(RISC_V.lowering(CellKind::Not1), &[bin(Xor, In(0), Ones)]);
        assert_eq!(RISC_V.lowering(CellKind::AndNot2).len(), 2);
        assert_eq!(ARM_CORTEX_M4.lowering(CellKind::AndNot2).len(), 1);
        assert_eq!(ARM_CORTEX_M4.lowering(CellKind::AndNot2)[0].op, Bic);
        assert_eq!(PORTABLE.lowering(CellKind::Mux2).len(), 4);
    }

    #[test]
    fn isa_names_parse() {
        for isa in IsaKind::ALL {
            assert_eq!(isa.cli_name().parse::<IsaKind>().unwrap(), isa);
        }
        assert!("x86".parse::<IsaKind>().is_err());
    }
}
