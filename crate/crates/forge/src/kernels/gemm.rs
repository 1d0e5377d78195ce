//! GEMM plan: C = A*B with the columns of A scaled by elements of B.
//!
//! The restructured loop streams B one column element-set per cycle. Each of
//! the k AXPY units holds one column of A in a constant bank (loaded once
//! from the preload frame, reused for every column of B) and scales it by
//! the broadcast element B[i, j]; a lane-wise reduction layer sums the k
//! partial vectors into C[:, j]. Matrices cross the stream boundary in
//! column-major order: the preload frame carries A as k batches of m lanes,
//! each streamed frame carries one B matrix as ncols batches of k lanes, and
//! each output frame carries C as ncols batches of m lanes.

use super::{BenchmarkKind, DesignPoint, Edge, EndpointRef, KernelPlan, KernelSize, PlanError, PlanIo};
use crate::cost::CostModel;
use crate::primitives::{NodeSpec, PermStrategy};
use crate::sample::Precision;

pub fn build_gemm(
    m: usize,
    k: usize,
    ncols: usize,
    w: usize,
    precision: Precision,
) -> Result<KernelPlan, PlanError> {
    build_gemm_with(m, k, ncols, w, precision, &CostModel::default())
}

pub fn build_gemm_with(
    m: usize,
    k: usize,
    ncols: usize,
    w: usize,
    precision: Precision,
    cost: &CostModel,
) -> Result<KernelPlan, PlanError> {
    if m == 0 || k == 0 || ncols == 0 {
        return Err(PlanError::ZeroDimension);
    }
    if m != w {
        return Err(PlanError::GemmWidthMismatch { m, w });
    }

    let mut nodes = Vec::with_capacity(k + 1);
    let mut edges = Vec::with_capacity(2 * k + 2);
    for i in 0..k {
        nodes.push(NodeSpec::axpy(m, precision, true, cost));
        edges.push(Edge {
            from: EndpointRef::Input,
            from_port: i as u16,
            to: EndpointRef::Node(i),
            to_port: 0,
            width: 1, // the broadcast scalar B[i, j]
        });
    }
    let reduce = nodes.len();
    nodes.push(NodeSpec::vector_reduce(m, k, precision, cost));
    for i in 0..k {
        edges.push(Edge {
            from: EndpointRef::Node(i),
            from_port: 0,
            to: EndpointRef::Node(reduce),
            to_port: i as u16,
            width: m,
        });
    }
    edges.push(Edge::chain(EndpointRef::Node(reduce), EndpointRef::Output, m));

    let meta = DesignPoint::new(
        BenchmarkKind::Gemm,
        KernelSize::gemm(m, k, ncols),
        w,
        precision,
        PermStrategy::Sms,
    );
    Ok(KernelPlan {
        meta,
        nodes,
        edges,
        schedule: Vec::new(),
        io: PlanIo {
            preload: Some((m * k, m)),
            frame_len: k * ncols,
            in_width: k,
            out_frame_len: m * ncols,
            out_width: m,
        },
    })
}
