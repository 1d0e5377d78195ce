//! Functional-with-timing execution of kernel plans.
//!
//! Values flow through the plan's nodes exactly as the hardware would
//! compute them (same precision, same summation trees); timing is accounted
//! per node rather than event-driven. Feed-forward plans are fully pipelined
//! with an initiation interval of one batch; QR executes its schedule of
//! dependent passes. NaN anywhere in a node's output is an error naming the
//! node, never a value.

use crate::kernels::{BenchmarkKind, EndpointRef, KernelPlan, Pass};
use crate::primitives::{
    self, NodeKind, NodeSpec, PrimitiveError, SpecialOp,
};
use crate::resource::ResourceVector;
use crate::sample::{Batch, Frame, Precision, Sample, SampleError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error("input frame {index} has {got} samples, plan expects {expect}")]
    FrameLength { index: usize, got: usize, expect: usize },
    #[error("input precision {got} does not match plan precision {expect}")]
    PrecisionMismatch { got: Precision, expect: Precision },
    #[error("gemm plan needs a constant preload frame before the stream")]
    MissingPreload,
    #[error("node {node} produced NaN")]
    NanProduced { node: String },
    #[error("plan structure: {0}")]
    Structure(String),
}

impl From<SampleError> for SimError {
    fn from(e: SampleError) -> SimError {
        SimError::Primitive(PrimitiveError::Sample(e))
    }
}

/// Timing bookkeeping for one simulation run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CycleStats {
    pub total_cycles: u64,
    /// Cycles until the first output batch (includes constant preload).
    pub fill_latency: u64,
    pub batches_in: u64,
    pub batches_out: u64,
    /// Cycles per accepted batch in steady state; 1 for feed-forward plans.
    pub steady_state_ii: u64,
}

/// Componentwise sum of the plan's node resource vectors.
pub fn census(plan: &KernelPlan) -> ResourceVector {
    plan.nodes.iter().map(|n| n.resources).sum()
}

/// Maximum combinational stage depth over all nodes. Registers bound every
/// node boundary, so chained nodes take the max, not the sum.
pub fn critical_depth(plan: &KernelPlan) -> u32 {
    plan.nodes.iter().map(|n| n.comb_depth).max().unwrap_or(0)
}

/// Longest Input->Output path through the node DAG, weighted by node latency.
fn longest_path_latency(plan: &KernelPlan) -> u64 {
    let n = plan.nodes.len();
    // arrival[i]: cycles until node i has produced its first output
    let mut arrival: Vec<Option<u64>> = vec![None; n];
    let mut frontier: Vec<usize> = Vec::new();
    for e in &plan.edges {
        if e.from == EndpointRef::Input {
            if let EndpointRef::Node(t) = e.to {
                frontier.push(t);
            }
        }
    }
    for _ in 0..=n {
        let mut next = Vec::new();
        for &t in &frontier {
            let from_inputs = plan
                .edges
                .iter()
                .filter(|e| e.to == EndpointRef::Node(t))
                .map(|e| match e.from {
                    EndpointRef::Node(s) => arrival[s].unwrap_or(0),
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            let total = from_inputs + plan.nodes[t].latency_cycles;
            if arrival[t] != Some(total) {
                arrival[t] = Some(total);
                for e in &plan.edges {
                    if e.from == EndpointRef::Node(t) {
                        if let EndpointRef::Node(next_t) = e.to {
                            next.push(next_t);
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    plan.edges
        .iter()
        .filter(|e| e.to == EndpointRef::Output)
        .map(|e| match e.from {
            EndpointRef::Node(s) => arrival[s].unwrap_or(plan.nodes[s].latency_cycles),
            _ => 0,
        })
        .max()
        .unwrap_or(0)
}

fn check_nan(frame: &Frame, node: &str) -> Result<(), SimError> {
    if frame.has_nan() {
        return Err(SimError::NanProduced {
            node: node.to_string(),
        });
    }
    Ok(())
}

/// Apply one single-input node to a whole frame.
fn apply_node(node: &NodeSpec, frame: &Frame) -> Result<Frame, SimError> {
    let out = match &node.kind {
        NodeKind::Permute(spec) => {
            let window = spec.window();
            if !frame.len().is_multiple_of(window) {
                return Err(SimError::Structure(format!(
                    "frame length {} not divisible by permutation window {window}",
                    frame.len()
                )));
            }
            let mut samples = Vec::with_capacity(frame.len());
            for chunk_start in (0..frame.len()).step_by(window) {
                for q in 0..window {
                    samples.push(frame.sample(chunk_start + spec.map.gather_index(q)));
                }
            }
            Frame::new(samples)?
        }
        NodeKind::Butterfly { width } => {
            let mut batches = Vec::new();
            for batch in frame.to_batches(*width)? {
                batches.push(primitives::dft_butterfly(*width, &batch)?);
            }
            Frame::from_batches(&batches)?
        }
        NodeKind::TwiddleMul { window, factors } => {
            let samples = frame
                .samples()
                .iter()
                .enumerate()
                .map(|(p, s)| s.mul(&factors[p % window]))
                .collect::<Result<Vec<_>, _>>()?;
            Frame::new(samples)?
        }
        NodeKind::MacArray { width } => {
            let w = *width;
            if frame.len() != 3 * w {
                return Err(SimError::FrameLength {
                    index: 0,
                    got: frame.len(),
                    expect: 3 * w,
                });
            }
            let batches = frame.to_batches(w)?;
            let out = primitives::mac_array(&batches[0], &batches[1], &batches[2])?;
            Frame::from_batches(&[out])?
        }
        NodeKind::AllReduce { .. } => {
            let batches = frame.to_batches(frame.len())?;
            Frame::from_batches(&[primitives::allreduce_tree(&batches[0])?])?
        }
        NodeKind::ReductionTree { .. } => {
            let batches = frame.to_batches(frame.len())?;
            let s = primitives::reduction_tree(&batches[0])?;
            Frame::new(vec![s])?
        }
        other => {
            return Err(SimError::Structure(format!(
                "node kind {:?} is not a single-input stream stage",
                other.label()
            )))
        }
    };
    check_nan(&out, &node.name)?;
    Ok(out)
}

/// Split a column-major frame into columns of `rows` samples.
fn columns_of(frame: &Frame, rows: usize) -> Vec<Vec<Sample>> {
    frame
        .samples()
        .chunks(rows)
        .map(|c| c.to_vec())
        .collect()
}

/// Execute a plan on streamed frames.
///
/// GEMM plans consume the A matrix as a leading preload frame (column-major,
/// m*k samples, loaded once into the AXPY constant banks) followed by one
/// column-major B frame per product; every other plan takes its input frames
/// directly. Outputs arrive one frame per streamed frame.
pub fn simulate(plan: &KernelPlan, inputs: &[Frame]) -> Result<(Vec<Frame>, CycleStats), SimError> {
    let precision = plan.meta.precision;
    for (index, frame) in inputs.iter().enumerate() {
        if frame.precision() != precision {
            return Err(SimError::PrecisionMismatch {
                got: frame.precision(),
                expect: precision,
            });
        }
        let expect = match (index, plan.io.preload) {
            (0, Some((len, _))) => len,
            _ => plan.io.frame_len,
        };
        if frame.len() != expect {
            return Err(SimError::FrameLength {
                index,
                got: frame.len(),
                expect,
            });
        }
    }

    let (preload, stream) = match plan.io.preload {
        Some(_) => {
            let Some((first, rest)) = inputs.split_first() else {
                return Err(SimError::MissingPreload);
            };
            (Some(first), rest)
        }
        None => (None, inputs),
    };

    let mut outputs = Vec::with_capacity(stream.len());
    for frame in stream {
        let out = match plan.meta.benchmark {
            BenchmarkKind::Gemm => run_gemm(plan, preload.ok_or(SimError::MissingPreload)?, frame)?,
            BenchmarkKind::Qr => run_qr(plan, frame)?,
            _ => {
                let mut current = frame.clone();
                for node in &plan.nodes {
                    current = apply_node(node, &current)?;
                }
                current
            }
        };
        outputs.push(out);
    }

    let batches_per_frame = (plan.io.frame_len / plan.io.in_width) as u64;
    let batches_in = batches_per_frame * stream.len() as u64;
    let stats = if plan.is_feed_forward() {
        let preload_cycles = plan
            .io
            .preload
            .map(|(len, width)| (len / width) as u64)
            .unwrap_or(0);
        let fill = preload_cycles + longest_path_latency(plan);
        CycleStats {
            total_cycles: if batches_in == 0 { 0 } else { fill + batches_in - 1 },
            fill_latency: fill,
            batches_in,
            batches_out: batches_in,
            steady_state_ii: 1,
        }
    } else {
        qr_stats(plan, stream.len() as u64)
    };
    Ok((outputs, stats))
}

fn run_gemm(plan: &KernelPlan, a_frame: &Frame, b_frame: &Frame) -> Result<Frame, SimError> {
    let Some((_, m)) = plan.io.preload else {
        return Err(SimError::MissingPreload);
    };
    let k = plan.io.in_width;
    let ncols = plan.io.frame_len / k;
    let precision = plan.meta.precision;
    let a_cols = columns_of(a_frame, m); // k columns of length m
    let b_cols = columns_of(b_frame, k);
    let zero = Batch::constant(Sample::zero(precision), m)?;

    let axpy_name = plan
        .nodes
        .iter()
        .find(|n| matches!(n.kind, NodeKind::Axpy { .. }))
        .map(|n| n.name.clone())
        .unwrap_or_else(|| "axpy".to_string());
    let reduce_name = plan
        .nodes
        .iter()
        .find(|n| matches!(n.kind, NodeKind::VectorReduce { .. }))
        .map(|n| n.name.clone())
        .unwrap_or_else(|| "vreduce".to_string());

    let mut out = Vec::with_capacity(m * ncols);
    for b_col in &b_cols {
        let mut partials: Vec<Batch> = Vec::with_capacity(k);
        for (i, a_col) in a_cols.iter().enumerate() {
            let a_col = Batch::new(a_col.clone())?;
            let t = primitives::axpy(b_col[i], &a_col, &zero)?;
            partials.push(t);
        }
        for b in &partials {
            if b.lanes().iter().any(|s| s.is_nan()) {
                return Err(SimError::NanProduced {
                    node: axpy_name.clone(),
                });
            }
        }
        // lane-wise adder tree, adjacent pairing
        while partials.len() > 1 {
            let mut next = Vec::with_capacity(partials.len() / 2 + 1);
            let mut iter = partials.chunks(2);
            for pair in &mut iter {
                if pair.len() == 2 {
                    let lanes = pair[0]
                        .lanes()
                        .iter()
                        .zip(pair[1].lanes())
                        .map(|(a, b)| a.add(b))
                        .collect::<Result<Vec<_>, _>>()?;
                    next.push(Batch::new(lanes)?);
                } else {
                    next.push(pair[0].clone());
                }
            }
            partials = next;
        }
        let column = Frame::new(partials[0].lanes().to_vec())?;
        check_nan(&column, &reduce_name)?;
        out.extend_from_slice(column.samples());
    }
    Ok(Frame::new(out)?)
}

/// Zero-pad to the next power of two so the reduction tree has a fixed shape.
fn padded(v: &[Sample], precision: Precision) -> Result<Batch, SimError> {
    let mut lanes = v.to_vec();
    let target = lanes.len().next_power_of_two();
    lanes.resize(target, Sample::zero(precision));
    Ok(Batch::new(lanes)?)
}

fn tree_dot(x: &[Sample], y: &[Sample], precision: Precision) -> Result<Sample, SimError> {
    let products = primitives::pointwise_mul(&padded(x, precision)?, &padded(y, precision)?)?;
    Ok(primitives::reduction_tree(&products)?)
}

fn run_qr(plan: &KernelPlan, frame: &Frame) -> Result<Frame, SimError> {
    let m = plan.io.in_width;
    let ncols = plan.io.frame_len / m;
    let precision = plan.meta.precision;
    let mut cols = columns_of(frame, m);
    let mut reflector: Option<(Vec<Sample>, Sample)> = None;

    for pass in &plan.schedule {
        match *pass {
            Pass::Reflector { column: k } => {
                let x: Vec<Sample> = cols[k][k..m].to_vec();
                let d1 = tree_dot(&x, &x, precision)?;
                let d2 = primitives::scalar_special(SpecialOp::Sqrt, d1)?;
                let sign = primitives::scalar_special(SpecialOp::Sign, x[0])?;
                let mut v = x.clone();
                v[0] = x[0].add(&sign.mul(&d2)?)?;
                let d3 = d1.sub(&x[0].mul(&x[0])?)?.add(&v[0].mul(&v[0])?)?;
                let recip = primitives::scalar_special(SpecialOp::Reciprocal, d3)?;
                let tau = Sample::real(-2.0, precision).mul(&recip)?;
                if tau.is_nan() {
                    return Err(SimError::NanProduced {
                        node: "reciprocal".to_string(),
                    });
                }
                reflector = Some((v, tau));
            }
            Pass::Update { column: k } => {
                let Some((v, tau)) = reflector.as_ref() else {
                    return Err(SimError::Structure(
                        "update pass before any reflector pass".to_string(),
                    ));
                };
                let v_batch = Batch::new(v.clone())?;
                for col in cols[k..ncols].iter_mut() {
                    let y: Vec<Sample> = col[k..m].to_vec();
                    let d4 = tree_dot(v, &y, precision)?;
                    let d5 = tau.mul(&d4)?;
                    let updated = primitives::axpy(d5, &v_batch, &Batch::new(y)?)?;
                    if updated.lanes().iter().any(|s| s.is_nan()) {
                        return Err(SimError::NanProduced {
                            node: "axpy".to_string(),
                        });
                    }
                    for (t, lane) in updated.lanes().iter().enumerate() {
                        col[k + t] = *lane;
                    }
                }
            }
        }
    }

    Ok(Frame::new(cols.into_iter().flatten().collect())?)
}

/// Schedule timing for QR: dependent passes share one dot-product datapath;
/// an update pass pipelines its remaining columns at one column per cycle.
/// The reflector's scalar updates (v0, d3, tau) ride the MAC-family latency.
fn qr_stats(plan: &KernelPlan, frames: u64) -> CycleStats {
    let ncols = (plan.io.frame_len / plan.io.in_width) as u64;
    let latency_of = |pred: &dyn Fn(&NodeSpec) -> bool| {
        plan.nodes
            .iter()
            .find(|n| pred(n))
            .map(|n| n.latency_cycles)
            .unwrap_or(0)
    };
    let dot = latency_of(&|n| matches!(n.kind, NodeKind::PointwiseMul { .. }))
        + latency_of(&|n| matches!(n.kind, NodeKind::ReductionTree { .. }));
    let sqrt = latency_of(&|n| matches!(n.kind, NodeKind::ScalarSpecial { op: SpecialOp::Sqrt }));
    let recip =
        latency_of(&|n| matches!(n.kind, NodeKind::ScalarSpecial { op: SpecialOp::Reciprocal }));
    let axpy = latency_of(&|n| matches!(n.kind, NodeKind::Axpy { .. }));

    let mut per_frame = 0u64;
    for k in 0..ncols {
        let reflector = dot + sqrt + axpy + recip;
        let update = dot + axpy + (ncols - k - 1);
        per_frame += reflector + update;
    }
    let batches_in = ncols * frames;
    CycleStats {
        total_cycles: per_frame * frames,
        fill_latency: per_frame.saturating_sub(ncols - 1),
        batches_in,
        batches_out: batches_in,
        steady_state_ii: per_frame.div_ceil(ncols),
    }
}
