//! Stable 64-bit hashing (FNV-1a) for seed derivation. Independent of the
//! standard library's hasher so seeds survive toolchain upgrades.

pub const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

pub fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    let mut h = state;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn fnv1a_u64(state: u64, value: u64) -> u64 {
    fnv1a(state, &value.to_le_bytes())
}

/// Seed for one (design, iteration, global seed) triple.
pub fn noise_seed(design_key: &str, iteration: u32, global_seed: u64) -> u64 {
    let h = fnv1a(FNV_OFFSET, design_key.as_bytes());
    let h = fnv1a_u64(h, iteration as u64);
    fnv1a_u64(h, global_seed)
}

/// Seed for one design's tuning RNG.
pub fn design_seed(design_key: &str, global_seed: u64) -> u64 {
    let h = fnv1a(FNV_OFFSET, design_key.as_bytes());
    fnv1a_u64(h, global_seed)
}
