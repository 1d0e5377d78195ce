//! Run a small mock sweep, append results to CSV, resume it (no new rows),
//! and render the frequency/LUT scatterplot.
//!
//! ```bash
//! cargo run --release -p forge --example sweep_and_plot
//! ```

use anyhow::Result;
use forge::harness::{enumerate_sweep, read_rows, run_sweep, SweepConfig};
use forge::kernels::{BenchmarkKind, KernelSize};
use forge::plot::plot_scatter;
use forge::PermStrategy;
use std::collections::BTreeMap;

fn main() -> Result<()> {
    let dir = tempfile::tempdir()?;
    let csv = dir.path().join("results.csv");
    let svg = dir.path().join("freq_vs_lut.svg");

    let config = SweepConfig {
        benchmarks: vec![
            BenchmarkKind::MacArray,
            BenchmarkKind::Butterfly,
            BenchmarkKind::Fft,
            BenchmarkKind::Gemm,
            BenchmarkKind::Qr,
        ],
        sizes: BTreeMap::from([(BenchmarkKind::Fft, vec![KernelSize::N(16), KernelSize::N(64)])]),
        perm_strategies: vec![PermStrategy::Sms, PermStrategy::Registers],
        parallelism: 4,
        out_csv: csv.clone(),
        ..SweepConfig::default()
    };

    let points = enumerate_sweep(&config);
    println!("sweep of {} design points:", points.len());
    for p in &points {
        println!("  {}", p.key());
    }

    let summary = run_sweep(&config, false)?;
    println!("\n{summary}");
    let rows = read_rows(&csv)?;
    println!("csv rows: {} ({} terminal)", rows.len(), rows.iter().filter(|r| r.is_terminal()).count());

    let resumed = run_sweep(&config, true)?;
    println!("resumed: {resumed}");

    let plot = plot_scatter(&csv, "f_achievable_mhz", "lut", "benchmark", &svg)?;
    println!(
        "\nplot: {} markers in {} groups -> {}",
        plot.markers,
        plot.groups,
        svg.display()
    );
    let text = std::fs::read_to_string(&svg)?;
    println!("svg bytes: {}", text.len());
    Ok(())
}
