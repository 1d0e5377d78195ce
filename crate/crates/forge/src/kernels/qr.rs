//! Householder QR plan: in-place factorization that keeps R and discards Q.
//!
//! One shared dot-product datapath (pointwise multiply + reduction tree) is
//! reused by both the reflector construction and the column updates; the
//! schedule serializes 2*ncols dependent passes (a reflector pass and an
//! update pass per column). Each pass consumes entire columns of length m.
//! Frames carry the matrix column-major, one column per batch.

use super::{
    BenchmarkKind, DesignPoint, Edge, EndpointRef, KernelPlan, KernelSize, Pass, PlanError, PlanIo,
};
use crate::cost::CostModel;
use crate::primitives::{NodeSpec, PermStrategy, SpecialOp};
use crate::sample::Precision;

pub fn build_qr(m: usize, ncols: usize, precision: Precision) -> Result<KernelPlan, PlanError> {
    build_qr_with(m, ncols, precision, &CostModel::default())
}

pub fn build_qr_with(
    m: usize,
    ncols: usize,
    precision: Precision,
    cost: &CostModel,
) -> Result<KernelPlan, PlanError> {
    if precision.is_complex() {
        return Err(PlanError::QrComplex(precision));
    }
    if m == 0 || ncols == 0 {
        return Err(PlanError::ZeroDimension);
    }
    if m < ncols {
        return Err(PlanError::QrShape { rows: m, cols: ncols });
    }

    // Fig-6c datapath: two pointwise blocks, two reduction trees, one AXPY,
    // plus the sqrt and reciprocal scalar units. Hardware lanes cover the
    // longest column; later passes use a shrinking prefix.
    let lane_width = m.next_power_of_two();
    let pw_reflector = 0;
    let rt_reflector = 1;
    let pw_update = 2;
    let rt_update = 3;
    let axpy = 4;
    let sqrt = 5;
    let recip = 6;
    let nodes = vec![
        NodeSpec::pointwise_mul(lane_width, precision, cost),
        NodeSpec::reduction_tree(lane_width, precision, cost)?,
        NodeSpec::pointwise_mul(lane_width, precision, cost),
        NodeSpec::reduction_tree(lane_width, precision, cost)?,
        NodeSpec::axpy(lane_width, precision, false, cost),
        NodeSpec::scalar_special(SpecialOp::Sqrt, precision, cost),
        NodeSpec::scalar_special(SpecialOp::Reciprocal, precision, cost),
    ];

    // Reflector chain: x'x -> sqrt -> v0/d3 -> reciprocal; update chain:
    // v'y -> scale -> AXPY back into the column.
    let edges = vec![
        Edge::chain(EndpointRef::Input, EndpointRef::Node(pw_reflector), m),
        Edge::chain(EndpointRef::Node(pw_reflector), EndpointRef::Node(rt_reflector), m),
        Edge::chain(EndpointRef::Node(rt_reflector), EndpointRef::Node(sqrt), 1),
        Edge::chain(EndpointRef::Node(sqrt), EndpointRef::Node(recip), 1),
        Edge::chain(EndpointRef::Input, EndpointRef::Node(pw_update), m),
        Edge::chain(EndpointRef::Node(pw_update), EndpointRef::Node(rt_update), m),
        Edge::chain(EndpointRef::Node(rt_update), EndpointRef::Node(axpy), 1),
        Edge::chain(EndpointRef::Node(recip), EndpointRef::Node(axpy), 1),
        Edge::chain(EndpointRef::Node(axpy), EndpointRef::Output, m),
    ];

    let mut schedule = Vec::with_capacity(2 * ncols);
    for column in 0..ncols {
        schedule.push(Pass::Reflector { column });
        schedule.push(Pass::Update { column });
    }

    let meta = DesignPoint::new(
        BenchmarkKind::Qr,
        KernelSize::qr(m, ncols),
        m,
        precision,
        PermStrategy::Sms,
    );
    Ok(KernelPlan {
        meta,
        nodes,
        edges,
        schedule,
        io: PlanIo {
            preload: None,
            frame_len: m * ncols,
            in_width: m,
            out_frame_len: m * ncols,
            out_width: m,
        },
    })
}
