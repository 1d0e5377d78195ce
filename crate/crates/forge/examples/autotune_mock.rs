//! Watch the frequency search close in on a design's true maximum clock.
//!
//! The mock backend knows the design's ground-truth frequency through its
//! census-based timing model and answers each target with the implied worst
//! negative slack (plus optional Gaussian noise). The tuner converts slack
//! to achievable frequency, draws the next stochastic target, and stops on
//! ceiling, budget, or a stable window.
//!
//! ```bash
//! cargo run --release -p forge --example autotune_mock
//! ```

use anyhow::Result;
use forge::autotuner::{tune, MockBackend, MockModel, TuningParams};
use forge::kernels::{BenchmarkKind, DesignPoint, KernelSize};
use forge::sample::Precision;
use forge::PermStrategy;

fn main() -> Result<()> {
    let design = DesignPoint::new(
        BenchmarkKind::Fft,
        KernelSize::N(64),
        4,
        Precision::C32,
        PermStrategy::Sms,
    );

    for sigma in [0.0, 0.05] {
        let model = MockModel {
            sigma_ns: sigma,
            ..MockModel::default()
        };
        let backend = MockBackend::new(model);
        println!(
            "tuning {} (model f_true = {:.1} MHz, noise sigma = {sigma} ns)",
            design.key(),
            model.f_true(&design)?
        );
        let state = tune(&design, &backend, &TuningParams::default())?;
        println!("  iter  f_target(MHz)    wns(ns)   f_a(MHz)");
        for r in &state.history {
            println!(
                "  {:>4}  {:>12.3}  {:>9.4}  {:>9.3}",
                r.iteration, r.f_target_mhz, r.wns_ns, r.f_achievable_mhz
            );
        }
        println!(
            "  stopped after {} iterations: {}\n",
            state.history.len(),
            state.stop_reason.map(|r| r.name()).unwrap_or("-")
        );
    }
    Ok(())
}
