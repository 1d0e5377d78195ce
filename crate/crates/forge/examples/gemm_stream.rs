//! Stream a matrix product through the AXPY-and-reduce GEMM plan.
//!
//! The A matrix loads once into the plan's constant banks (the leading
//! preload frame); each following frame is one B matrix streamed a column
//! per cycle. Matrices cross the stream boundary column-major.
//!
//! ```bash
//! cargo run --release -p forge --example gemm_stream
//! ```

use anyhow::Result;
use forge::kernels::build_gemm;
use forge::oracle::{oracle_gemm, CMatrix};
use forge::sample::{Frame, Precision};
use forge::simulator::simulate;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
    )
}

/// Row-major matrix -> column-major stream frame.
fn col_major_frame(data: &[Complex64], rows: usize, cols: usize) -> Result<Frame> {
    let vals: Vec<Complex64> = (0..rows * cols)
        .map(|p| data[(p % rows) * cols + p / rows])
        .collect();
    Ok(Frame::from_values(&vals, Precision::C32)?)
}

fn main() -> Result<()> {
    let (m, k, ncols) = (4, 4, 16);
    let plan = build_gemm(m, k, ncols, m, Precision::C32)?;
    println!("gemm plan: C({m}x{ncols}) = A({m}x{k}) * B({k}x{ncols})");
    for (label, count) in plan.node_census() {
        println!("  {label}: {count}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a: Vec<Complex64> = (0..m * k).map(|_| rand_c(&mut rng)).collect();

    // three B matrices streamed back to back behind one A load
    let mut inputs = vec![col_major_frame(&a, m, k)?];
    let mut b_mats = Vec::new();
    for _ in 0..3 {
        let b: Vec<Complex64> = (0..k * ncols).map(|_| rand_c(&mut rng)).collect();
        inputs.push(col_major_frame(&b, k, ncols)?);
        b_mats.push(b);
    }

    let (outputs, stats) = simulate(&plan, &inputs)?;
    println!(
        "streamed {} B frames: fill {} cycles, total {} cycles, II = {}",
        b_mats.len(),
        stats.fill_latency,
        stats.total_cycles,
        stats.steady_state_ii
    );

    let a_mat = CMatrix::new(m, k, a);
    let mut worst: f64 = 0.0;
    for (out, b) in outputs.iter().zip(&b_mats) {
        let c = oracle_gemm(&a_mat, &CMatrix::new(k, ncols, b.clone()));
        let got = out.values();
        for j in 0..ncols {
            for i in 0..m {
                worst = worst.max((got[j * m + i] - c[(i, j)]).norm());
            }
        }
    }
    println!("max |C - oracle| over all frames: {worst:.3e}");
    Ok(())
}
