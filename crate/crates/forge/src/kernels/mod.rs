//! Kernel plans: primitive node graphs for GEMM, streaming FFT, and
//! Householder QR, plus single-node plans for the primitive benchmarks.

mod fft;
mod gemm;
mod qr;

pub use fft::{build_fft, twiddle_matrix};
pub use gemm::build_gemm;
pub use qr::build_qr;

use crate::cost::CostModel;
use crate::primitives::{NodeSpec, PermMap, PermStrategy, PrimitiveError};
use crate::sample::Precision;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error("fft size {n} is not a power of the streaming width {w}")]
    SizeNotWidthPower { n: usize, w: usize },
    #[error("gemm requires m = W (got m = {m}, W = {w})")]
    GemmWidthMismatch { m: usize, w: usize },
    #[error("dimension must be nonzero")]
    ZeroDimension,
    #[error("qr requires at least as many rows as columns (got {rows}x{cols})")]
    QrShape { rows: usize, cols: usize },
    #[error("qr requires real precision, got {0}")]
    QrComplex(Precision),
    #[error("{benchmark} requires complex precision, got {precision}")]
    NeedsComplex { benchmark: &'static str, precision: Precision },
    #[error("permutation size {n} is not a multiple of width {w}")]
    PermSize { n: usize, w: usize },
    #[error("{benchmark} size must equal the streaming width (got size {size}, width {width})")]
    SizeWidthCoupled { benchmark: &'static str, size: usize, width: usize },
    #[error("size {size} does not fit benchmark {benchmark}")]
    BadSize { benchmark: &'static str, size: KernelSize },
}

/// Benchmark families from the sweep matrix: three primitives and three
/// full algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    MacArray,
    Butterfly,
    Permutation,
    Gemm,
    Fft,
    Qr,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::MacArray => "mac_array",
            BenchmarkKind::Butterfly => "butterfly",
            BenchmarkKind::Permutation => "permutation",
            BenchmarkKind::Gemm => "gemm",
            BenchmarkKind::Fft => "fft",
            BenchmarkKind::Qr => "qr",
        }
    }

    pub const ALL: [BenchmarkKind; 6] = [
        BenchmarkKind::MacArray,
        BenchmarkKind::Butterfly,
        BenchmarkKind::Permutation,
        BenchmarkKind::Gemm,
        BenchmarkKind::Fft,
        BenchmarkKind::Qr,
    ];
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BenchmarkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchmarkKind::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown benchmark {s:?}"))
    }
}

/// Benchmark-specific size: a single n for the primitives and the FFT,
/// matrix shapes for GEMM and QR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSize {
    N(usize),
    Pair([usize; 2]),
    Triple([usize; 3]),
}

impl KernelSize {
    pub fn gemm(m: usize, k: usize, ncols: usize) -> KernelSize {
        KernelSize::Triple([m, k, ncols])
    }

    pub fn qr(rows: usize, cols: usize) -> KernelSize {
        KernelSize::Pair([rows, cols])
    }
}

impl fmt::Display for KernelSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSize::N(n) => write!(f, "{n}"),
            KernelSize::Pair([a, b]) => write!(f, "{a}x{b}"),
            KernelSize::Triple([a, b, c]) => write!(f, "{a}x{b}x{c}"),
        }
    }
}

impl std::str::FromStr for KernelSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split('x')
            .map(|p| p.parse().map_err(|_| format!("bad size component {p:?}")))
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [n] => Ok(KernelSize::N(*n)),
            [a, b] => Ok(KernelSize::Pair([*a, *b])),
            [a, b, c] => Ok(KernelSize::Triple([*a, *b, *c])),
            _ => Err(format!("size {s:?} must have 1-3 components")),
        }
    }
}

/// One fully configured design submitted to the tuner.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignPoint {
    pub benchmark: BenchmarkKind,
    pub size: KernelSize,
    pub width: usize,
    pub precision: Precision,
    pub perm_strategy: PermStrategy,
    /// Free text, e.g. an implementation family.
    pub label: String,
}

impl DesignPoint {
    pub fn new(
        benchmark: BenchmarkKind,
        size: KernelSize,
        width: usize,
        precision: Precision,
        perm_strategy: PermStrategy,
    ) -> DesignPoint {
        DesignPoint {
            benchmark,
            size,
            width,
            precision,
            perm_strategy,
            label: String::new(),
        }
    }

    /// Stable identity used for CSV resume keys and seed derivation.
    pub fn key(&self) -> String {
        let mut key = format!(
            "{}-{}-w{}-{}-{}",
            self.benchmark, self.size, self.width, self.precision, self.perm_strategy
        );
        if !self.label.is_empty() {
            key.push('-');
            key.push_str(&self.label);
        }
        key
    }
}

impl fmt::Display for DesignPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// A directed stream connection between plan endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndpointRef {
    Input,
    Node(usize),
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: EndpointRef,
    pub from_port: u16,
    pub to: EndpointRef,
    pub to_port: u16,
    /// Lane width carried by this connection.
    pub width: usize,
}

impl Edge {
    pub fn chain(from: EndpointRef, to: EndpointRef, width: usize) -> Edge {
        Edge {
            from,
            from_port: 0,
            to,
            to_port: 0,
            width,
        }
    }
}

/// Scheduled pass of an iterative kernel (QR). Feed-forward plans have an
/// empty schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pass {
    /// Build the Householder reflector for `column`.
    Reflector { column: usize },
    /// Apply the reflector to columns `column..ncols`.
    Update { column: usize },
}

/// Stream geometry of a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanIo {
    /// Constants loaded once before streaming starts (GEMM's A matrix),
    /// as (frame_len, lane_width).
    pub preload: Option<(usize, usize)>,
    /// Samples per streamed input frame.
    pub frame_len: usize,
    /// Input lanes per cycle.
    pub in_width: usize,
    /// Samples per output frame.
    pub out_frame_len: usize,
    /// Output lanes per cycle.
    pub out_width: usize,
}

impl PlanIo {
    pub fn symmetric(frame_len: usize, width: usize) -> PlanIo {
        PlanIo {
            preload: None,
            frame_len,
            in_width: width,
            out_frame_len: frame_len,
            out_width: width,
        }
    }
}

/// A schedule of primitive node instances with dataflow edges.
#[derive(Clone, Debug)]
pub struct KernelPlan {
    pub meta: DesignPoint,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<Edge>,
    pub schedule: Vec<Pass>,
    pub io: PlanIo,
}

impl KernelPlan {
    pub fn empty(meta: DesignPoint, io: PlanIo) -> KernelPlan {
        KernelPlan {
            meta,
            nodes: Vec::new(),
            edges: Vec::new(),
            schedule: Vec::new(),
            io,
        }
    }

    pub fn is_feed_forward(&self) -> bool {
        self.schedule.is_empty()
    }

    /// Node counts keyed by census label.
    pub fn node_census(&self) -> BTreeMap<&'static str, usize> {
        let mut census = BTreeMap::new();
        for node in &self.nodes {
            *census.entry(node.kind.label()).or_insert(0) += 1;
        }
        census
    }

    /// Structural checks: matching edge widths and, for feed-forward plans,
    /// acyclic node connectivity.
    pub fn validate(&self) -> Result<(), String> {
        for edge in &self.edges {
            if let EndpointRef::Node(i) = edge.from {
                if i >= self.nodes.len() {
                    return Err(format!("edge references missing node {i}"));
                }
            }
            if let EndpointRef::Node(i) = edge.to {
                if i >= self.nodes.len() {
                    return Err(format!("edge references missing node {i}"));
                }
            }
            if edge.width == 0 {
                return Err("zero-width edge".to_string());
            }
        }
        if self.is_feed_forward() {
            // Kahn's algorithm over node-to-node edges.
            let n = self.nodes.len();
            let mut indegree = vec![0usize; n];
            for e in &self.edges {
                if let (EndpointRef::Node(_), EndpointRef::Node(t)) = (e.from, e.to) {
                    indegree[t] += 1;
                }
            }
            let mut queue: Vec<usize> =
                (0..n).filter(|&i| indegree[i] == 0).collect();
            let mut seen = 0;
            while let Some(u) = queue.pop() {
                seen += 1;
                for e in &self.edges {
                    if let (EndpointRef::Node(s), EndpointRef::Node(t)) = (e.from, e.to) {
                        if s == u {
                            indegree[t] -= 1;
                            if indegree[t] == 0 {
                                queue.push(t);
                            }
                        }
                    }
                }
            }
            if seen != n {
                return Err("feed-forward plan contains a cycle".to_string());
            }
        }
        Ok(())
    }
}

/// Build the plan for any benchmark in the sweep matrix.
pub fn build_plan(design: &DesignPoint) -> Result<KernelPlan, PlanError> {
    build_plan_with(design, &CostModel::default())
}

pub fn build_plan_with(design: &DesignPoint, cost: &CostModel) -> Result<KernelPlan, PlanError> {
    let w = design.width;
    match (design.benchmark, design.size) {
        (BenchmarkKind::Fft, KernelSize::N(n)) => {
            let mut plan = fft::build_fft_with(n, w, design.precision, design.perm_strategy, cost)?;
            plan.meta.label = design.label.clone();
            Ok(plan)
        }
        (BenchmarkKind::Gemm, KernelSize::Triple([m, k, ncols])) => {
            let mut plan = gemm::build_gemm_with(m, k, ncols, w, design.precision, cost)?;
            plan.meta.label = design.label.clone();
            Ok(plan)
        }
        (BenchmarkKind::Qr, KernelSize::Pair([rows, cols])) => {
            let mut plan = qr::build_qr_with(rows, cols, design.precision, cost)?;
            plan.meta.width = w;
            plan.meta.label = design.label.clone();
            Ok(plan)
        }
        (BenchmarkKind::MacArray, KernelSize::N(n)) => {
            if n != w {
                return Err(PlanError::SizeWidthCoupled {
                    benchmark: "mac_array",
                    size: n,
                    width: w,
                });
            }
            if n == 0 {
                return Err(PlanError::ZeroDimension);
            }
            let node = NodeSpec::mac_array(w, design.precision, cost);
            Ok(single_node_plan(
                design.clone(),
                node,
                PlanIo {
                    preload: None,
                    frame_len: 3 * w,
                    in_width: 3 * w,
                    out_frame_len: w,
                    out_width: w,
                },
            ))
        }
        (BenchmarkKind::Butterfly, KernelSize::N(n)) => {
            if n != w {
                return Err(PlanError::SizeWidthCoupled {
                    benchmark: "butterfly",
                    size: n,
                    width: w,
                });
            }
            let node = NodeSpec::butterfly(w, design.precision, cost)?;
            Ok(single_node_plan(
                design.clone(),
                node,
                PlanIo::symmetric(w, w),
            ))
        }
        (BenchmarkKind::Permutation, KernelSize::N(n)) => {
            if n == 0 || w == 0 {
                return Err(PlanError::ZeroDimension);
            }
            if n % w != 0 {
                return Err(PlanError::PermSize { n, w });
            }
            let node = NodeSpec::permute(
                PermMap::Stride { n0: n / w, n1: w },
                w,
                design.perm_strategy,
                design.precision,
                cost,
            )?;
            Ok(single_node_plan(
                design.clone(),
                node,
                PlanIo::symmetric(n, w),
            ))
        }
        (benchmark, size) => {
            // Shape mismatch between benchmark kind and size payload.
            Err(PlanError::BadSize {
                benchmark: benchmark.name(),
                size,
            })
        }
    }
}

fn single_node_plan(meta: DesignPoint, node: NodeSpec, io: PlanIo) -> KernelPlan {
    let edges = vec![
        Edge::chain(EndpointRef::Input, EndpointRef::Node(0), io.in_width),
        Edge::chain(EndpointRef::Node(0), EndpointRef::Output, io.out_width),
    ];
    KernelPlan {
        meta,
        nodes: vec![node],
        edges,
        schedule: Vec::new(),
        io,
    }
}
