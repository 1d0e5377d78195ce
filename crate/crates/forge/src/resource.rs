//! Abstract resource accounting, the artifact's stand-in for LUT/FF/BRAM counts.

use std::iter::Sum;
use std::ops::{Add, AddAssign};

/// Componentwise resource counts for one node or a whole design.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResourceVector {
    pub fp_add: u64,
    pub fp_mul: u64,
    /// sqrt / reciprocal units
    pub fp_special: u64,
    pub mux2: u64,
    pub register_bits: u64,
    pub memory_bits: u64,
    /// twiddle / constant storage
    pub rom_bits: u64,
}

impl ResourceVector {
    pub const ZERO: ResourceVector = ResourceVector {
        fp_add: 0,
        fp_mul: 0,
        fp_special: 0,
        mux2: 0,
        register_bits: 0,
        memory_bits: 0,
        rom_bits: 0,
    };

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &ResourceVector) -> bool {
        self.fp_add >= other.fp_add
            && self.fp_mul >= other.fp_mul
            && self.fp_special >= other.fp_special
            && self.mux2 >= other.mux2
            && self.register_bits >= other.register_bits
            && self.memory_bits >= other.memory_bits
            && self.rom_bits >= other.rom_bits
    }

    /// Scalar LUT proxy used by the mock synthesis model and the trend checks:
    /// 600*fp_add + 700*fp_mul + 1500*fp_special + mux2 + register_bits/8 + memory_bits/64.
    pub fn lut_equiv(&self) -> u64 {
        600 * self.fp_add
            + 700 * self.fp_mul
            + 1500 * self.fp_special
            + self.mux2
            + self.register_bits / 8
            + self.memory_bits / 64
    }
}

impl Add for ResourceVector {
    type Output = ResourceVector;

    fn add(self, rhs: ResourceVector) -> ResourceVector {
        ResourceVector {
            fp_add: self.fp_add + rhs.fp_add,
            fp_mul: self.fp_mul + rhs.fp_mul,
            fp_special: self.fp_special + rhs.fp_special,
            mux2: self.mux2 + rhs.mux2,
            register_bits: self.register_bits + rhs.register_bits,
            memory_bits: self.memory_bits + rhs.memory_bits,
            rom_bits: self.rom_bits + rhs.rom_bits,
        }
    }
}

impl AddAssign for ResourceVector {
    fn add_assign(&mut self, rhs: ResourceVector) {
        *self = *self + rhs;
    }
}

impl Sum for ResourceVector {
    fn sum<I: Iterator<Item = ResourceVector>>(iter: I) -> ResourceVector {
        iter.fold(ResourceVector::ZERO, |a, b| a + b)
    }
}

impl std::fmt::Display for ResourceVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "fp_add={} fp_mul={} fp_special={} mux2={} register_bits={} memory_bits={} rom_bits={} (lut_equiv={})",
            self.fp_add,
            self.fp_mul,
            self.fp_special,
            self.mux2,
            self.register_bits,
            self.memory_bits,
            self.rom_bits,
            self.lut_equiv()
        )
    }
}
