//! Resource scaling across streaming widths: the census counterpart of a
//! frequency/LUT sweep, printed as a table per benchmark.
//!
//! GEMM grows quadratically with width (wider lanes and more columns of A
//! in flight); the FFT trades butterfly count against butterfly size; QR
//! widths select the matrix shape (rows = 4W, columns = 2W).
//!
//! ```bash
//! cargo run --release -p forge --example census_trends
//! ```

use anyhow::Result;
use forge::kernels::{build_plan, BenchmarkKind, DesignPoint, KernelSize};
use forge::sample::Precision;
use forge::simulator::{census, critical_depth};
use forge::PermStrategy;

fn design_for(benchmark: BenchmarkKind, w: usize) -> DesignPoint {
    let (size, precision) = match benchmark {
        BenchmarkKind::MacArray | BenchmarkKind::Butterfly => (KernelSize::N(w), Precision::C32),
        BenchmarkKind::Permutation => (KernelSize::N(4096), Precision::C32),
        BenchmarkKind::Fft => (KernelSize::N(4096), Precision::C32),
        BenchmarkKind::Gemm => (KernelSize::gemm(w, w, 16), Precision::C32),
        BenchmarkKind::Qr => (KernelSize::qr(4 * w, 2 * w), Precision::R32),
    };
    DesignPoint::new(benchmark, size, w, precision, PermStrategy::Sms)
}

fn main() -> Result<()> {
    for benchmark in BenchmarkKind::ALL {
        println!("{benchmark}");
        println!("  width   lut_equiv     fp_add  fp_mul  mem_kbit  depth");
        let mut prev: Option<u64> = None;
        for w in [2usize, 4, 8, 16] {
            let design = design_for(benchmark, w);
            let plan = build_plan(&design)?;
            let c = census(&plan);
            let growth = match prev {
                Some(p) if p > 0 => format!("  ({:.2}x)", c.lut_equiv() as f64 / p as f64),
                _ => String::new(),
            };
            println!(
                "  {:>5} {:>11} {:>10} {:>7} {:>9} {:>6}{growth}",
                w,
                c.lut_equiv(),
                c.fp_add,
                c.fp_mul,
                c.memory_bits / 1024,
                critical_depth(&plan),
            );
            prev = Some(c.lut_equiv());
        }
        println!();
    }
    Ok(())
}
