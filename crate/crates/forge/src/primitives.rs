//! Primitive streaming units: MAC arrays, pointwise multiply, AXPY, the
//! butterfly family, streaming permutations, and scalar special functions.
//!
//! Each primitive comes in two views that must agree:
//! * a pure function on batches/frames (what the unit computes), and
//! * a [`NodeSpec`] builder (what the unit costs: latency, depth, resources).
//!
//! Resource formulas, complex precision (`cN`) with real counts in
//! parentheses, width `W`, element width `b` bits:
//!
//! | unit             | fp_add             | fp_mul   | other |
//! |------------------|--------------------|----------|-------|
//! | mac_array        | 4W (W)             | 4W (W)   |       |
//! | pointwise_mul    | 2W (0)             | 4W (W)   |       |
//! | axpy             | 4W (W)             | 4W (W)   | +W*b register_bits with a constant bank |
//! | butterfly(W)     | 2*W*log2(W) + 2*R  | 4*R      | R*b rom_bits; R = nontrivial rotations (0, 0, 2, 10 for W = 2, 4, 8, 16) |
//! | allreduce_tree   | 2*W*log2(W) (W*log2(W)) | 0   |       |
//! | reduction_tree   | 2*(W-1) (W-1)      | 0        |       |
//! | vector_reduce(k) | 2*W*(k-1) (W*(k-1))| 0        |       |
//! | twiddle_mul(L)   | 2W (0)             | 4W (W)   | L*b rom_bits |
//! | permutation(L)   | sms: 2*L*b memory_bits, 2*W*(W-1)*b mux2; registers: 2*L*b register_bits, L*b mux2; L = W is pass-through wiring (zero) |
//! | sqrt/reciprocal  | 1 fp_special       |          | sign is free wiring |
//!
//! Rotations by 1, -1, i or -i are wiring (a swap and/or negation) and cost
//! nothing; only the remaining roots of unity are counted as rotations R.

use crate::cost::{ceil_log2, exact_log2, CostModel};
use crate::resource::ResourceVector;
use crate::sample::{Batch, Frame, Precision, Sample, SampleError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PrimitiveError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("unsupported butterfly width {0} (supported: 2, 4, 8, 16)")]
    UnsupportedWidth(usize),
    #[error("width {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("frame length {len} does not factor as {n0}x{n1}")]
    BadFactorization { len: usize, n0: usize, n1: usize },
    #[error("permutation window {window} is not a multiple of stream width {width}")]
    WindowNotStreamable { window: usize, width: usize },
    #[error("{op}: domain error for input {value}")]
    Domain { op: &'static str, value: f64 },
}

/// Buffering strategy of a streaming permutation unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermStrategy {
    /// Input switches, banked memory, output switches.
    Sms,
    /// Full register bank.
    Registers,
}

impl fmt::Display for PermStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PermStrategy::Sms => "sms",
            PermStrategy::Registers => "registers",
        })
    }
}

impl std::str::FromStr for PermStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sms" => Ok(PermStrategy::Sms),
            "registers" => Ok(PermStrategy::Registers),
            other => Err(format!("unknown permutation strategy {other:?} (sms or registers)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialOp {
    Sqrt,
    Reciprocal,
    Sign,
}

impl fmt::Display for SpecialOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpecialOp::Sqrt => "sqrt",
            SpecialOp::Reciprocal => "reciprocal",
            SpecialOp::Sign => "sign",
        })
    }
}

/// Fixed index mapping realized by a permutation unit over one `window`.
///
/// The common case is the stride permutation (a matrix transpose); flattened
/// FFT plans also need composite digit permutations, which the same
/// switch-memory-switch or register microarchitecture realizes at the same
/// cost for any fixed mapping.
#[derive(Clone, Debug, PartialEq)]
pub enum PermMap {
    /// Transpose of an n0 x n1 row-major matrix: out[j*n0 + i] = in[i*n1 + j].
    Stride { n0: usize, n1: usize },
    /// Explicit gather table: out[q] = in[table[q]].
    Table(Vec<u32>),
}

impl PermMap {
    pub fn window(&self) -> usize {
        match self {
            PermMap::Stride { n0, n1 } => n0 * n1,
            PermMap::Table(t) => t.len(),
        }
    }

    /// Source index feeding output position `q`.
    pub fn gather_index(&self, q: usize) -> usize {
        match self {
            PermMap::Stride { n0, n1 } => (q % n0) * n1 + q / n0,
            PermMap::Table(t) => t[q] as usize,
        }
    }

    pub fn to_table(&self) -> Vec<u32> {
        (0..self.window()).map(|q| self.gather_index(q) as u32).collect()
    }
}

/// One configured permutation unit.
#[derive(Clone, Debug, PartialEq)]
pub struct PermuteSpec {
    pub map: PermMap,
    pub stream_width: usize,
    pub strategy: PermStrategy,
}

impl PermuteSpec {
    pub fn window(&self) -> usize {
        self.map.window()
    }
}

/// Primitive identifier plus the parameters execution needs.
#[derive(Clone, Debug)]
pub enum NodeKind {
    MacArray { width: usize },
    PointwiseMul { width: usize },
    /// Pointwise multiply against a stored factor table, applied per
    /// `window`-sized chunk of the stream.
    TwiddleMul { window: usize, factors: Vec<Sample> },
    Axpy { width: usize, constant_bank: bool },
    Butterfly { width: usize },
    AllReduce { width: usize },
    ReductionTree { width: usize },
    /// Lane-wise adder tree over `fan_in` input vectors.
    VectorReduce { width: usize, fan_in: usize },
    Permute(PermuteSpec),
    ScalarSpecial { op: SpecialOp },
}

impl NodeKind {
    /// Census label for node counting.
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::MacArray { .. } => "mac_array",
            NodeKind::PointwiseMul { .. } => "pointwise",
            NodeKind::TwiddleMul { .. } => "pointwise",
            NodeKind::Axpy { .. } => "axpy",
            NodeKind::Butterfly { .. } => "butterfly",
            NodeKind::AllReduce { .. } => "allreduce",
            NodeKind::ReductionTree { .. } => "reduction_tree",
            NodeKind::VectorReduce { .. } => "vector_reduce",
            NodeKind::Permute(_) => "permutation",
            NodeKind::ScalarSpecial { .. } => "scalar_special",
        }
    }
}

/// One primitive instance in a kernel plan: function parameters plus the
/// timing/resource model the simulator and backends consume.
#[derive(Clone, Debug)]
pub struct NodeSpec {
    pub name: String,
    pub kind: NodeKind,
    pub precision: Precision,
    /// Pipeline depth in cycles until the first output.
    pub latency_cycles: u64,
    /// Cycles between accepted batches; 1 for every unit here.
    pub initiation_interval: u64,
    pub resources: ResourceVector,
    /// Maximum combinational depth of one pipeline stage.
    pub comb_depth: u32,
}

/// Nontrivial rotation count of the recursive radix-2 elaboration of DFT_W.
/// Top-level twiddles omega_W^j for j in 1..W/2 minus those in {1,-1,i,-i},
/// plus two sub-butterflies of width W/2.
fn rotation_count(width: usize) -> u64 {
    match width {
        1 | 2 | 4 => 0,
        w => {
            let half = w / 2;
            let top = (1..half).filter(|&j| j * 4 != w).count() as u64;
            top + 2 * rotation_count(half)
        }
    }
}

/// Pipeline levels of DFT_W that carry a nontrivial rotation multiply.
fn rotation_levels(width: usize) -> u64 {
    (exact_log2(width).unwrap_or(0) as u64).saturating_sub(2)
}

impl NodeSpec {
    pub fn mac_array(width: usize, precision: Precision, cost: &CostModel) -> NodeSpec {
        let (adds, muls) = if precision.is_complex() {
            (4 * width as u64, 4 * width as u64)
        } else {
            (width as u64, width as u64)
        };
        let latency = if precision.is_complex() {
            cost.fp_mul_latency + 2 * cost.fp_add_latency
        } else {
            cost.fp_mul_latency + cost.fp_add_latency
        };
        NodeSpec {
            name: format!("mac{width}"),
            kind: NodeKind::MacArray { width },
            precision,
            latency_cycles: latency,
            initiation_interval: 1,
            resources: ResourceVector {
                fp_add: adds,
                fp_mul: muls,
                ..ResourceVector::ZERO
            },
            comb_depth: cost.fp_mul_depth,
        }
    }

    pub fn pointwise_mul(width: usize, precision: Precision, cost: &CostModel) -> NodeSpec {
        let (adds, muls) = if precision.is_complex() {
            (2 * width as u64, 4 * width as u64)
        } else {
            (0, width as u64)
        };
        let latency = if precision.is_complex() {
            cost.fp_mul_latency + cost.fp_add_latency
        } else {
            cost.fp_mul_latency
        };
        NodeSpec {
            name: format!("pointwise{width}"),
            kind: NodeKind::PointwiseMul { width },
            precision,
            latency_cycles: latency,
            initiation_interval: 1,
            resources: ResourceVector {
                fp_add: adds,
                fp_mul: muls,
                ..ResourceVector::ZERO
            },
            comb_depth: cost.fp_mul_depth,
        }
    }

    /// Pointwise multiply against constants held in ROM.
    pub fn twiddle_mul(
        stream_width: usize,
        factors: Vec<Sample>,
        precision: Precision,
        cost: &CostModel,
    ) -> NodeSpec {
        let window = factors.len();
        let base = NodeSpec::pointwise_mul(stream_width, precision, cost);
        NodeSpec {
            name: format!("twiddle{window}"),
            kind: NodeKind::TwiddleMul { window, factors },
            resources: ResourceVector {
                rom_bits: window as u64 * precision.bits(),
                ..base.resources
            },
            ..base
        }
    }

    pub fn axpy(
        width: usize,
        precision: Precision,
        constant_bank: bool,
        cost: &CostModel,
    ) -> NodeSpec {
        let mac = NodeSpec::mac_array(width, precision, cost);
        let register_bits = if constant_bank {
            width as u64 * precision.bits()
        } else {
            0
        };
        NodeSpec {
            name: format!("axpy{width}"),
            kind: NodeKind::Axpy {
                width,
                constant_bank,
            },
            resources: ResourceVector {
                register_bits,
                ..mac.resources
            },
            ..mac
        }
    }

    pub fn butterfly(
        width: usize,
        precision: Precision,
        cost: &CostModel,
    ) -> Result<NodeSpec, PrimitiveError> {
        if !matches!(width, 2 | 4 | 8 | 16) {
            return Err(PrimitiveError::UnsupportedWidth(width));
        }
        if precision.is_real() {
            return Err(PrimitiveError::Sample(SampleError::RealNotAllowed(precision)));
        }
        let stages = exact_log2(width).unwrap() as u64;
        let rotations = rotation_count(width);
        let latency = stages * cost.fp_add_latency + rotation_levels(width) * cost.fp_mul_latency;
        Ok(NodeSpec {
            name: format!("butterfly{width}"),
            kind: NodeKind::Butterfly { width },
            precision,
            latency_cycles: latency,
            initiation_interval: 1,
            resources: ResourceVector {
                fp_add: 2 * width as u64 * stages + 2 * rotations,
                fp_mul: 4 * rotations,
                rom_bits: rotations * precision.bits(),
                ..ResourceVector::ZERO
            },
            comb_depth: cost.butterfly_stage_depth,
        })
    }

    pub fn allreduce(
        width: usize,
        precision: Precision,
        cost: &CostModel,
    ) -> Result<NodeSpec, PrimitiveError> {
        let stages = exact_log2(width).ok_or(PrimitiveError::NotPowerOfTwo(width))? as u64;
        let adds = if precision.is_complex() { 2 } else { 1 } * width as u64 * stages;
        Ok(NodeSpec {
            name: format!("allreduce{width}"),
            kind: NodeKind::AllReduce { width },
            precision,
            latency_cycles: stages * cost.fp_add_latency,
            initiation_interval: 1,
            resources: ResourceVector {
                fp_add: adds,
                ..ResourceVector::ZERO
            },
            comb_depth: cost.fp_add_depth,
        })
    }

    pub fn reduction_tree(
        width: usize,
        precision: Precision,
        cost: &CostModel,
    ) -> Result<NodeSpec, PrimitiveError> {
        if !width.is_power_of_two() {
            return Err(PrimitiveError::NotPowerOfTwo(width));
        }
        let adds = if precision.is_complex() { 2 } else { 1 } * (width as u64 - 1);
        Ok(NodeSpec {
            name: format!("reduce{width}"),
            kind: NodeKind::ReductionTree { width },
            precision,
            latency_cycles: ceil_log2(width) * cost.fp_add_latency,
            initiation_interval: 1,
            resources: ResourceVector {
                fp_add: adds,
                ..ResourceVector::ZERO
            },
            comb_depth: cost.fp_add_depth,
        })
    }

    pub fn vector_reduce(
        width: usize,
        fan_in: usize,
        precision: Precision,
        cost: &CostModel,
    ) -> NodeSpec {
        let lane_adds = (fan_in as u64).saturating_sub(1);
        let adds = if precision.is_complex() { 2 } else { 1 } * width as u64 * lane_adds;
        NodeSpec {
            name: format!("vreduce{width}x{fan_in}"),
            kind: NodeKind::VectorReduce { width, fan_in },
            precision,
            latency_cycles: ceil_log2(fan_in) * cost.fp_add_latency,
            initiation_interval: 1,
            resources: ResourceVector {
                fp_add: adds,
                ..ResourceVector::ZERO
            },
            comb_depth: cost.fp_add_depth,
        }
    }

    /// Streaming permutation over `map.window()` elements, `stream_width`
    /// lanes per cycle. Fill latency is window/W; a window equal to the
    /// stream width is pass-through wiring.
    pub fn permute(
        map: PermMap,
        stream_width: usize,
        strategy: PermStrategy,
        precision: Precision,
        cost: &CostModel,
    ) -> Result<NodeSpec, PrimitiveError> {
        let window = map.window();
        if stream_width == 0 || !window.is_multiple_of(stream_width) {
            return Err(PrimitiveError::WindowNotStreamable {
                window,
                width: stream_width,
            });
        }
        let bits = precision.bits();
        let w = stream_width as u64;
        let n = window as u64;
        let resources = if window == stream_width {
            ResourceVector::ZERO
        } else {
            match strategy {
                PermStrategy::Sms => ResourceVector {
                    memory_bits: 2 * n * bits,
                    mux2: 2 * w * (w - 1) * bits,
                    ..ResourceVector::ZERO
                },
                PermStrategy::Registers => ResourceVector {
                    register_bits: 2 * n * bits,
                    mux2: n * bits,
                    ..ResourceVector::ZERO
                },
            }
        };
        let comb_depth = if window == stream_width {
            1
        } else {
            cost.perm_depth(stream_width)
        };
        Ok(NodeSpec {
            name: format!("perm{window}"),
            kind: NodeKind::Permute(PermuteSpec {
                map,
                stream_width,
                strategy,
            }),
            precision,
            latency_cycles: n / w,
            initiation_interval: 1,
            resources,
            comb_depth,
        })
    }

    pub fn scalar_special(op: SpecialOp, precision: Precision, cost: &CostModel) -> NodeSpec {
        let (units, latency, depth) = match op {
            SpecialOp::Sign => (0, 0, 1),
            _ => (1, cost.fp_special_latency, cost.fp_special_depth),
        };
        NodeSpec {
            name: format!("{op}"),
            kind: NodeKind::ScalarSpecial { op },
            precision,
            latency_cycles: latency,
            initiation_interval: 1,
            resources: ResourceVector {
                fp_special: units,
                ..ResourceVector::ZERO
            },
            comb_depth: depth,
        }
    }
}

/// Cost/latency model of a permutation unit for a window of `n` elements
/// streamed `w` lanes per cycle, realized by a stride permutation.
pub fn perm_node_spec(
    n: usize,
    w: usize,
    strategy: PermStrategy,
    precision: Precision,
) -> Result<NodeSpec, PrimitiveError> {
    NodeSpec::permute(
        PermMap::Stride { n0: n / w, n1: w },
        w,
        strategy,
        precision,
        &CostModel::default(),
    )
}

// ---------------------------------------------------------------------------
// Functional views
// ---------------------------------------------------------------------------

/// Lane-wise x*y + z.
pub fn mac_array(x: &Batch, y: &Batch, z: &Batch) -> Result<Batch, PrimitiveError> {
    x.check_same_shape(y)?;
    x.check_same_shape(z)?;
    let lanes = x
        .lanes()
        .iter()
        .zip(y.lanes())
        .zip(z.lanes())
        .map(|((a, b), c)| a.mul(b)?.add(c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Batch::new(lanes)?)
}

/// Lane-wise x*y (a MAC with z = 0).
pub fn pointwise_mul(x: &Batch, y: &Batch) -> Result<Batch, PrimitiveError> {
    x.check_same_shape(y)?;
    let lanes = x
        .lanes()
        .iter()
        .zip(y.lanes())
        .map(|(a, b)| a.mul(b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Batch::new(lanes)?)
}

/// Lane-wise a*y + z with a broadcast scalar.
pub fn axpy(a: Sample, y: &Batch, z: &Batch) -> Result<Batch, PrimitiveError> {
    y.check_same_shape(z)?;
    if a.precision() != y.precision() {
        return Err(SampleError::PrecisionMismatch(a.precision(), y.precision()).into());
    }
    let lanes = y
        .lanes()
        .iter()
        .zip(z.lanes())
        .map(|(yi, zi)| a.mul(yi)?.add(zi))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Batch::new(lanes)?)
}

fn dft_recursive(vals: &[Sample]) -> Result<Vec<Sample>, PrimitiveError> {
    let w = vals.len();
    if w == 1 {
        return Ok(vals.to_vec());
    }
    let precision = vals[0].precision();
    let even: Vec<Sample> = vals.iter().step_by(2).copied().collect();
    let odd: Vec<Sample> = vals.iter().skip(1).step_by(2).copied().collect();
    let even = dft_recursive(&even)?;
    let odd = dft_recursive(&odd)?;
    let half = w / 2;
    let mut out = vec![Sample::zero(precision); w];
    for k in 0..half {
        // omega_w^k; k = 0 is wiring, k = w/4 is a -i rotation (swap+negate).
        let t = if k == 0 {
            odd[k]
        } else if 4 * k == w {
            odd[k].rotate_neg_i()
        } else {
            let angle = -2.0 * PI * k as f64 / w as f64;
            let rot = Sample::new(Complex64::new(angle.cos(), angle.sin()), precision);
            rot.mul(&odd[k])?
        };
        out[k] = even[k].add(&t)?;
        out[k + half] = even[k].sub(&t)?;
    }
    Ok(out)
}

/// Fully unrolled DFT of one batch: y = DFT_W * x with DFT_W[j,k] = omega_W^(j*k),
/// elaborated by recursive radix-2 splitting.
pub fn dft_butterfly(width: usize, x: &Batch) -> Result<Batch, PrimitiveError> {
    if !matches!(width, 2 | 4 | 8 | 16) {
        return Err(PrimitiveError::UnsupportedWidth(width));
    }
    if x.precision().is_real() {
        return Err(PrimitiveError::Sample(SampleError::RealNotAllowed(x.precision())));
    }
    if x.width() != width {
        return Err(PrimitiveError::Sample(SampleError::WidthMismatch(x.width(), width)));
    }
    Ok(Batch::new(dft_recursive(x.lanes())?)?)
}

/// Butterfly with every subtraction replaced by an addition: each output lane
/// carries the full sum, in log2(W) stages.
pub fn allreduce_tree(x: &Batch) -> Result<Batch, PrimitiveError> {
    let w = x.width();
    let stages = exact_log2(w).ok_or(PrimitiveError::NotPowerOfTwo(w))?;
    let mut lanes = x.lanes().to_vec();
    for s in 0..stages {
        let stride = 1usize << s;
        let mut next = lanes.clone();
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = lanes[i].add(&lanes[i ^ stride])?;
        }
        lanes = next;
    }
    Ok(Batch::new(lanes)?)
}

/// Balanced binary reduction with a fixed summation order: adjacent lanes
/// pair first, then the partial sums pair, until one value remains.
pub fn reduction_tree(x: &Batch) -> Result<Sample, PrimitiveError> {
    let w = x.width();
    if !w.is_power_of_two() {
        return Err(PrimitiveError::NotPowerOfTwo(w));
    }
    let mut level = x.lanes().to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            next.push(pair[0].add(&pair[1])?);
        }
        level = next;
    }
    Ok(level[0])
}

/// Streaming transpose: view the frame as an n0 x n1 row-major matrix and
/// emit its transpose row-major: out[j*n0 + i] = in[i*n1 + j].
pub fn stride_permute(frame: &Frame, n0: usize, n1: usize) -> Result<Frame, PrimitiveError> {
    if n0 * n1 != frame.len() {
        return Err(PrimitiveError::BadFactorization {
            len: frame.len(),
            n0,
            n1,
        });
    }
    let map = PermMap::Stride { n0, n1 };
    let samples = (0..frame.len()).map(|q| frame.sample(map.gather_index(q))).collect();
    Ok(Frame::new(samples)?)
}

/// sqrt, reciprocal, or sign of a real sample. Domain violations are
/// reported, never silently turned into NaN. sign(0) = +1.
pub fn scalar_special(op: SpecialOp, x: Sample) -> Result<Sample, PrimitiveError> {
    if x.precision().is_complex() {
        return Err(PrimitiveError::Sample(SampleError::ComplexNotAllowed(x.precision())));
    }
    let v = x.re();
    let result = match op {
        SpecialOp::Sqrt => {
            if v < 0.0 {
                return Err(PrimitiveError::Domain { op: "sqrt", value: v });
            }
            if x.precision().is_32bit() {
                (v as f32).sqrt() as f64
            } else {
                v.sqrt()
            }
        }
        SpecialOp::Reciprocal => {
            if v == 0.0 {
                return Err(PrimitiveError::Domain {
                    op: "reciprocal",
                    value: v,
                });
            }
            if x.precision().is_32bit() {
                (1.0f32 / v as f32) as f64
            } else {
                1.0 / v
            }
        }
        SpecialOp::Sign => {
            if v.is_nan() {
                return Err(PrimitiveError::Domain { op: "sign", value: v });
            }
            if v < 0.0 {
                -1.0
            } else {
                1.0
            }
        }
    };
    Ok(Sample::real(result, x.precision()))
}
