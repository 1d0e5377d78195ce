//! Streaming FFT plans: the four-step split n = W * (n/W) applied
//! recursively down to one fully unrolled butterfly, then flattened into the
//! alternating permute / butterfly-column / twiddle pipeline.
//!
//! One split level, with input index m = m1 + n1*m2 and output index
//! k = k2 + n2*k1 (n1 = W, n2 = n/W):
//!
//!   y[k2 + n2*k1] = sum_m1 w_n1^(m1*k1) * ( w_n^(m1*k2)
//!                     * sum_m2 w_n2^(m2*k2) * x[m1 + n1*m2] )
//!
//! which the stream realizes as: gather the W rows contiguously, run the
//! size-n2 sub-transform over each row, scale by the twiddle matrix, gather
//! columns, apply one butterfly column, and restore natural order.
//!
//! Flattening fuses adjacent permutations (commuting the diagonal twiddle
//! scaling through them), leaving exactly log_W(n) butterfly columns,
//! log_W(n) - 1 twiddle stages, and log_W(n) + 1 permutation units. The
//! fused permutations are fixed index maps; only for two-level plans are
//! they all plain transposes, deeper plans also need composite digit
//! permutations, which the same streaming permutation unit realizes.
//! Interior (block-local) permutations buffer only their own window, not the
//! whole frame.

use super::{BenchmarkKind, DesignPoint, Edge, EndpointRef, KernelPlan, KernelSize, PlanError, PlanIo};
use crate::cost::CostModel;
use crate::primitives::{NodeSpec, PermMap, PermStrategy};
use crate::sample::{Precision, Sample};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Roots-of-unity matrix Twid[m1][k2] = w_n^(m1*k2) with n = n1*n2 and
/// w_n = e^(-2*pi*i/n).
pub fn twiddle_matrix(n1: usize, n2: usize) -> Vec<Vec<Complex64>> {
    let n = n1 * n2;
    (0..n1)
        .map(|m1| {
            (0..n2)
                .map(|k2| {
                    let angle = -2.0 * PI * ((m1 * k2) % n) as f64 / n as f64;
                    Complex64::new(angle.cos(), angle.sin())
                })
                .collect()
        })
        .collect()
}

/// Intermediate stage before node construction. Permutations and twiddles
/// act per `window`-sized chunk of the frame.
#[derive(Clone, Debug)]
enum RawStage {
    Perm { window: usize, map: Vec<u32> },
    Butterfly,
    Twiddle { window: usize, factors: Vec<Complex64> },
}

fn stride_table(n0: usize, n1: usize) -> Vec<u32> {
    let map = PermMap::Stride { n0, n1 };
    map.to_table()
}

/// Recursive four-step expansion. Sub-stages keep their window; the stream
/// pushes the W row-subframes through them back to back.
fn fft_stages(n: usize, w: usize) -> Vec<RawStage> {
    if n == w {
        return vec![RawStage::Butterfly];
    }
    let n2 = n / w;
    let mut stages = vec![RawStage::Perm {
        window: n,
        map: stride_table(n2, w),
    }];
    stages.extend(fft_stages(n2, w));
    let factors: Vec<Complex64> = twiddle_matrix(w, n2).into_iter().flatten().collect();
    stages.push(RawStage::Twiddle { window: n, factors });
    stages.push(RawStage::Perm {
        window: n,
        map: stride_table(w, n2),
    });
    stages.push(RawStage::Butterfly);
    stages.push(RawStage::Perm {
        window: n,
        map: stride_table(n2, w),
    });
    stages
}

/// Gather index of a block-local permutation lifted to a larger window.
fn lifted_gather(map: &[u32], window: usize, q: usize) -> usize {
    let base = (q / window) * window;
    base + map[q % window] as usize
}

/// Compose "first P, then Q" into one gather table over `frame` positions.
fn fuse_perms(p: &RawStage, q: &RawStage, frame: usize) -> RawStage {
    let (RawStage::Perm { window: wp, map: mp }, RawStage::Perm { window: wq, map: mq }) = (p, q)
    else {
        unreachable!("fuse_perms takes two permutations")
    };
    let window = (*wp).max(*wq);
    debug_assert!(frame.is_multiple_of(window));
    let map: Vec<u32> = (0..window)
        .map(|pos| {
            let mid = lifted_gather(mq, *wq, pos);
            lifted_gather(mp, *wp, mid) as u32
        })
        .collect();
    RawStage::Perm { window, map }
}

/// Rewrite "first P, then T" as "first T', then P" so the permutations on
/// either side of a diagonal scaling can fuse. T'[P(q)] = T[q].
fn commute_twiddle_before_perm(p: &RawStage, t: &RawStage, frame: usize) -> (RawStage, RawStage) {
    let (RawStage::Perm { window: wp, map: mp }, RawStage::Twiddle { window: wt, factors }) = (p, t)
    else {
        unreachable!("expects a permutation followed by a twiddle")
    };
    let window = (*wp).max(*wt);
    debug_assert!(frame.is_multiple_of(window));
    let mut moved = vec![Complex64::new(1.0, 0.0); window];
    for q in 0..window {
        let src = lifted_gather(mp, *wp, q);
        moved[src] = factors[q % *wt];
    }
    (
        RawStage::Twiddle {
            window,
            factors: moved,
        },
        p.clone(),
    )
}

/// Fuse adjacent permutations (pulling twiddles leftward out of the way)
/// until the stage list alternates strictly.
fn normalize(mut stages: Vec<RawStage>, frame: usize) -> Vec<RawStage> {
    loop {
        let mut changed = false;
        let mut out: Vec<RawStage> = Vec::with_capacity(stages.len());
        for stage in stages.into_iter() {
            match (&stage, out.last()) {
                (RawStage::Twiddle { .. }, Some(RawStage::Perm { .. })) => {
                    let p = out.pop().unwrap();
                    let (t, p) = commute_twiddle_before_perm(&p, &stage, frame);
                    out.push(t);
                    out.push(p);
                    changed = true;
                }
                (RawStage::Perm { .. }, Some(RawStage::Perm { .. })) => {
                    let p = out.pop().unwrap();
                    out.push(fuse_perms(&p, &stage, frame));
                    changed = true;
                }
                _ => out.push(stage),
            }
        }
        stages = out;
        if !changed {
            return stages;
        }
    }
}

/// True when the gather table is the transpose of an n0 x n1 matrix.
fn as_stride(map: &[u32]) -> Option<(usize, usize)> {
    let window = map.len();
    for n0 in 1..=window {
        if !window.is_multiple_of(n0) {
            continue;
        }
        let n1 = window / n0;
        let stride = PermMap::Stride { n0, n1 };
        if (0..window).all(|q| stride.gather_index(q) == map[q] as usize) {
            return Some((n0, n1));
        }
    }
    None
}

pub fn build_fft(
    n: usize,
    w: usize,
    precision: Precision,
    strategy: PermStrategy,
) -> Result<KernelPlan, PlanError> {
    build_fft_with(n, w, precision, strategy, &CostModel::default())
}

pub fn build_fft_with(
    n: usize,
    w: usize,
    precision: Precision,
    strategy: PermStrategy,
    cost: &CostModel,
) -> Result<KernelPlan, PlanError> {
    if precision.is_real() {
        return Err(PlanError::NeedsComplex {
            benchmark: "fft",
            precision,
        });
    }
    if !matches!(w, 2 | 4 | 8 | 16) {
        return Err(PlanError::Primitive(
            crate::primitives::PrimitiveError::UnsupportedWidth(w),
        ));
    }
    // n must be a positive power of w
    let mut t = 0usize;
    let mut acc = 1usize;
    while acc < n {
        acc *= w;
        t += 1;
    }
    if acc != n || t == 0 {
        return Err(PlanError::SizeNotWidthPower { n, w });
    }

    let stages = normalize(fft_stages(n, w), n);
    let mut nodes = Vec::new();
    for stage in stages {
        match stage {
            RawStage::Perm { map, .. } => {
                let perm_map = match as_stride(&map) {
                    Some((n0, n1)) => PermMap::Stride { n0, n1 },
                    None => PermMap::Table(map),
                };
                nodes.push(NodeSpec::permute(perm_map, w, strategy, precision, cost)?);
            }
            RawStage::Butterfly => {
                nodes.push(NodeSpec::butterfly(w, precision, cost)?);
            }
            RawStage::Twiddle { factors, .. } => {
                let snapped: Vec<Sample> =
                    factors.iter().map(|&f| Sample::new(f, precision)).collect();
                nodes.push(NodeSpec::twiddle_mul(w, snapped, precision, cost));
            }
        }
    }

    let mut edges = Vec::with_capacity(nodes.len() + 1);
    edges.push(Edge::chain(EndpointRef::Input, EndpointRef::Node(0), w));
    for i in 1..nodes.len() {
        edges.push(Edge::chain(EndpointRef::Node(i - 1), EndpointRef::Node(i), w));
    }
    edges.push(Edge::chain(
        EndpointRef::Node(nodes.len() - 1),
        EndpointRef::Output,
        w,
    ));

    let meta = DesignPoint::new(BenchmarkKind::Fft, KernelSize::N(n), w, precision, strategy);
    let plan = KernelPlan {
        meta,
        nodes,
        edges,
        schedule: Vec::new(),
        io: PlanIo::symmetric(n, w),
    };
    debug_assert_eq!(plan.node_census().get("butterfly").copied().unwrap_or(0), t);
    debug_assert_eq!(
        plan.node_census().get("permutation").copied().unwrap_or(0),
        if t == 1 { 0 } else { t + 1 }
    );
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Precision::{C32, R32};

    #[test]
    fn twiddle_matrix_border_is_ones() {
        let tw = twiddle_matrix(4, 4);
        for entry in &tw[0] {
            assert_eq!(*entry, Complex64::new(1.0, 0.0));
        }
        for row in &tw {
            assert_eq!(row[0], Complex64::new(1.0, 0.0));
        }
        assert_eq!(tw.len(), 4);
        assert_eq!(tw[0].len(), 4);
    }

    #[test]
    fn twiddle_value_n16() {
        let tw = twiddle_matrix(4, 4);
        let expect = Complex64::new((PI / 8.0).cos(), -(PI / 8.0).sin());
        assert!((tw[1][1] - expect).norm() < 1e-15);
        assert!((tw[1][1].re - 0.92388).abs() < 1e-5);
        assert!((tw[1][1].im + 0.38268).abs() < 1e-5);
    }

    #[test]
    fn base_case_is_single_butterfly() {
        let plan = build_fft(4, 4, C32, PermStrategy::Sms).unwrap();
        assert_eq!(plan.nodes.len(), 1);
        let census = plan.node_census();
        assert_eq!(census.get("butterfly"), Some(&1));
        assert_eq!(census.get("permutation"), None);
    }

    #[test]
    fn n16_w4_census_is_3_2_1() {
        let plan = build_fft(16, 4, C32, PermStrategy::Sms).unwrap();
        let census = plan.node_census();
        assert_eq!(census.get("permutation"), Some(&3));
        assert_eq!(census.get("butterfly"), Some(&2));
        assert_eq!(census.get("pointwise"), Some(&1));
        // two-level plans use pure transposes
        for node in &plan.nodes {
            if let crate::primitives::NodeKind::Permute(spec) = &node.kind {
                assert!(matches!(spec.map, PermMap::Stride { .. }));
            }
        }
    }

    #[test]
    fn census_formula_holds_for_deeper_plans() {
        for (n, w) in [(64usize, 2usize), (64, 4), (64, 8), (256, 2), (256, 4), (256, 16)] {
            let plan = build_fft(n, w, C32, PermStrategy::Sms).unwrap();
            plan.validate().unwrap();
            let t = (n as f64).log(w as f64).round() as usize;
            let census = plan.node_census();
            assert_eq!(census.get("butterfly"), Some(&t), "n={n} w={w}");
            assert_eq!(census.get("permutation"), Some(&(t + 1)), "n={n} w={w}");
            if t >= 2 {
                assert_eq!(census.get("pointwise"), Some(&(t - 1)), "n={n} w={w}");
            }
        }
    }

    #[test]
    fn rejects_non_power_sizes_and_real_precision() {
        assert!(matches!(
            build_fft(24, 4, C32, PermStrategy::Sms),
            Err(PlanError::SizeNotWidthPower { .. })
        ));
        assert!(matches!(
            build_fft(16, 4, R32, PermStrategy::Sms),
            Err(PlanError::NeedsComplex { .. })
        ));
    }

    #[test]
    fn largest_plans_still_match_the_oracle() {
        use crate::sample::Frame;
        use crate::simulator::simulate;
        use rand_chacha::ChaCha8Rng;
        use rand_core::{RngCore, SeedableRng};

        let mut rng = ChaCha8Rng::seed_from_u64(4096);
        for (n, w) in [(4096usize, 16usize), (4096, 8), (1024, 4)] {
            let plan = build_fft(n, w, C32, PermStrategy::Sms).unwrap();
            let vals: Vec<Complex64> = (0..n)
                .map(|_| {
                    Complex64::new(
                        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
                        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
                    )
                })
                .collect();
            let frame = Frame::from_values(&vals, C32).unwrap();
            let (out, _) = simulate(&plan, &[frame]).unwrap();
            let reference = crate::oracle::oracle_dft(&vals);
            let mut num = 0.0;
            let mut den = 0.0;
            for (g, r) in out[0].values().iter().zip(&reference) {
                num += (g - r).norm_sqr();
                den += r.norm_sqr();
            }
            let err = (num / den).sqrt();
            assert!(err < 1e-4, "n={n} w={w} rel err {err}");
        }
    }
}
