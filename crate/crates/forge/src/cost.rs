//! The timing cost table: pipeline latencies and combinational stage depths.
//!
//! Every node constructor draws its `latency_cycles` and `comb_depth` from
//! one `CostModel` so the numbers stay consistent across the crate. Absolute
//! values are model constants; only their ratios matter to the mock backend.

/// Pipeline latency and depth constants shared by all node builders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    /// Floating-point adder pipeline depth, cycles.
    pub fp_add_latency: u64,
    /// Floating-point multiplier pipeline depth, cycles.
    pub fp_mul_latency: u64,
    /// sqrt / reciprocal pipeline depth, cycles.
    pub fp_special_latency: u64,
    /// Logic levels in one adder stage.
    pub fp_add_depth: u32,
    /// Logic levels in one multiplier stage.
    pub fp_mul_depth: u32,
    /// Logic levels in one sqrt/reciprocal stage.
    pub fp_special_depth: u32,
    /// Logic levels in one butterfly stage (add pair plus the negate/rotate
    /// select on the same path).
    pub butterfly_stage_depth: u32,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            fp_add_latency: 3,
            fp_mul_latency: 4,
            fp_special_latency: 12,
            fp_add_depth: 6,
            fp_mul_depth: 8,
            fp_special_depth: 12,
            butterfly_stage_depth: 9,
        }
    }
}

impl CostModel {
    /// Switch-network depth of a permutation unit streamed `width` lanes/cycle.
    pub fn perm_depth(&self, width: usize) -> u32 {
        2 + ceil_log2(width.max(2)) as u32
    }
}

/// Smallest k with 2^k >= n (0 for n <= 1).
pub fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as u64
    }
}

/// log2 of a power of two; None otherwise.
pub fn exact_log2(n: usize) -> Option<u32> {
    if n.is_power_of_two() {
        Some(n.trailing_zeros())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
    }

    #[test]
    fn butterfly_stage_is_deepest_pipeline_element() {
        let c = CostModel::default();
        assert!(c.butterfly_stage_depth > c.fp_mul_depth);
        assert!(c.butterfly_stage_depth > c.perm_depth(16));
    }
}
