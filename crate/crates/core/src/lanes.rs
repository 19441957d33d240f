// SPDX-License-Identifier: Apache-2.0

//! Lane words and the slice/unslice transpose.
//!
//! Lane `i` of a word is bit `i`. A k-bit value per lane is stored as k
//! planes: plane `j` holds bit `j` of every lane.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Lanes per machine word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LaneWidth {
    W8,
    W16,
    W32,
    W64,
}

impl LaneWidth {
    pub const ALL: [LaneWidth; 4] = [LaneWidth::W8, LaneWidth::W16, LaneWidth::W32, LaneWidth::W64];

    pub fn lanes(self) -> usize {
        match self {
            LaneWidth::W8 => 8,
            LaneWidth::W16 => 16,
            LaneWidth::W32 => 32,
            LaneWidth::W64 => 64,
        }
    }

    pub fn mask(self) -> u64 {
        match self {
            LaneWidth::W64 => !0,
            w => (1u64 << w.lanes()) - 1,
        }
    }

    pub fn from_lanes(n: usize) -> Option<Self> {
        Some(match n {
            8 => LaneWidth::W8,
            16 => LaneWidth::W16,
            32 => LaneWidth::W32,
            64 => LaneWidth::W64,
            _ => return None,
        })
    }

    /// Hex digits needed for one word.
    pub fn hex_digits(self) -> usize {
        self.lanes() / 4
    }
}

impl fmt::Display for LaneWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lanes())
    }
}

impl FromStr for LaneWidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<usize>()
            .ok()
            .and_then(LaneWidth::from_lanes)
            .ok_or_else(|| format!("invalid word width `{s}` (expected 8, 16, 32 or 64)"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SliceError {
    #[error("expected {expected} lane values, got {got}")]
    LaneCount { expected: usize, got: usize },
    #[error("lane {lane}: value {value} does not fit in {bits} bits")]
    OutOfRange { lane: usize, value: u64, bits: u32 },
    #[error("bit width {0} is outside 1..=64")]
    BadBits(u32),
}

/// In-place transpose of a 64×64 bit matrix: afterwards bit `c` of row `r`
/// is the former bit `r` of row `c`. Recursive block swap, six rounds.
pub fn transpose64(rows: &mut [u64; 64]) {
    let mut width = 32;
    let mut mask: u64 = 0x0000_0000_FFFF_FFFF;
    while width != 0 {
        let mut k = 0;
        while k < 64 {
            // swap the high-column block of row k with the low-column block
            // of row k + width
            let t = ((rows[k] >> width) ^ rows[k + width]) & mask;
            rows[k] ^= t << width;
            rows[k + width] ^= t;
            k = (k + width + 1) & !width;
        }
        width >>= 1;
        mask ^= mask << width;
    }
}

/// Distributes `values` (one per lane, exactly `width.lanes()` of them)
/// over `bits` planes.
pub fn slice(values: &[u64], bits: u32, width: LaneWidth) -> Result<Vec<u64>, SliceError> {
    if bits == 0 || bits > 64 {
        return Err(SliceError::BadBits(bits));
    }
    if values.len() != width.lanes() {
        return Err(SliceError::LaneCount {
            expected: width.lanes(),
            got: values.len(),
        });
    }
    if bits < 64 {
        if let Some((lane, &value)) = values.iter().enumerate().find(|(_, &v)| v >> bits != 0) {
            return Err(SliceError::OutOfRange { lane, value, bits });
        }
    }
    let mut m = [0u64; 64];
    m[..values.len()].copy_from_slice(values);
    transpose64(&mut m);
    Ok(m[..bits as usize].iter().map(|&p| p & width.mask()).collect())
}

/// Inverse of [`slice`]: one value per lane from `planes`.
pub fn unslice(planes: &[u64], width: LaneWidth) -> Result<Vec<u64>, SliceError> {
    if planes.is_empty() || planes.len() > 64 {
        return Err(SliceError::BadBits(planes.len() as u32));
    }
    let mut m = [0u64; 64];
    for (dst, &p) in m.iter_mut().zip(planes) {
        *dst = p & width.mask();
    }
    transpose64(&mut m);
    Ok(m[..width.lanes()].to_vec())
}

/// Replicates one bit across all lanes.
pub fn splat(bit: bool, width: LaneWidth) -> u64 {
    if bit {
        width.mask()
    } else {
        0
    }
}
