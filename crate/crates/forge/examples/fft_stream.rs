//! Build a streaming FFT plan, inspect its structure, and verify it against
//! the brute-force DFT oracle.
//!
//! ```bash
//! cargo run --release -p forge --example fft_stream
//! ```

use anyhow::Result;
use forge::kernels::build_fft;
use forge::oracle::oracle_dft;
use forge::sample::{Frame, Precision};
use forge::simulator::{census, simulate};
use forge::PermStrategy;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn main() -> Result<()> {
    let n = 64;
    let w = 4;
    let plan = build_fft(n, w, Precision::C32, PermStrategy::Sms)?;

    println!("streaming FFT, n = {n}, width = {w} lanes/cycle");
    println!("pipeline:");
    for node in &plan.nodes {
        println!(
            "  {:<14} latency {:>3} cycles  {}",
            node.name, node.latency_cycles, node.resources
        );
    }
    println!("census: {}", census(&plan));

    // impulse in -> constant magnitude out
    let mut vals = vec![Complex64::new(0.0, 0.0); n];
    vals[0] = Complex64::new(1.0, 0.0);
    let impulse = Frame::from_values(&vals, Precision::C32)?;
    let (out, stats) = simulate(&plan, &[impulse])?;
    println!(
        "impulse response magnitudes: all {:.3} (fill {} cycles, {} batches)",
        out[0].values()[0].norm(),
        stats.fill_latency,
        stats.batches_in
    );

    // random frames against the O(n^2) oracle
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let vals: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
                    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
                )
            })
            .collect();
        let frame = Frame::from_values(&vals, Precision::C32)?;
        let (out, _) = simulate(&plan, &[frame])?;
        let reference = oracle_dft(&vals);
        let mut num = 0.0;
        let mut den = 0.0;
        for (g, r) in out[0].values().iter().zip(&reference) {
            num += (g - r).norm_sqr();
            den += r.norm_sqr();
        }
        worst = worst.max((num / den).sqrt());
    }
    println!("worst relative L2 error vs oracle over 25 random frames: {worst:.3e}");
    Ok(())
}
