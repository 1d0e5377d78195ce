//! Streaming hardware kernel models and a slack-driven frequency autotuner.
//!
//! The crate decomposes three algorithms (matrix multiplication, the
//! discrete Fourier transform, and Householder QR) into streaming hardware
//! primitives (MAC arrays, butterflies, permutation units), simulates the
//! assembled designs with cycle/resource bookkeeping, verifies them against
//! independent brute-force oracles, and drives a frequency-tuning loop
//! (worst negative slack -> achievable frequency -> stochastic next target)
//! over a pluggable synthesis backend. A sweep harness fans design points
//! out over worker threads, appends every tuning iteration to a CSV file,
//! and renders scatterplots as static SVG.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --release -p forge --example fft_stream
//! cargo run --release -p forge --example gemm_stream
//! cargo run --release -p forge --example qr_factorization
//! cargo run --release -p forge --example autotune_mock
//! cargo run --release -p forge --example sweep_and_plot
//! cargo run --release -p forge --example census_trends
//! cargo run --release -p forge --example parse_reports
//! ```
//!
//! or with the thin `forge` CLI (`forge run`, `forge plot`, `forge check`,
//! `forge census`, `forge tune`).
//!
//! The library surface in one breath: build a plan, stream frames through
//! it, and hand the design to the tuner.
//!
//! ```
//! use forge::autotuner::{tune, MockBackend, MockModel, TuningParams};
//! use forge::kernels::{build_fft, build_plan};
//! use forge::sample::{Frame, Precision};
//! use forge::simulator::{census, simulate};
//! use forge::PermStrategy;
//!
//! let plan = build_fft(16, 4, Precision::C32, PermStrategy::Sms)?;
//! let impulse = {
//!     let mut v = vec![0.0; 16];
//!     v[0] = 1.0;
//!     Frame::from_reals(&v, Precision::C32)?
//! };
//! let (frames, stats) = simulate(&plan, &[impulse])?;
//! assert_eq!(frames[0].len(), 16);
//! assert_eq!(stats.steady_state_ii, 1);
//!
//! let backend = MockBackend::new(MockModel::default());
//! let state = tune(&plan.meta, &backend, &TuningParams::default())?;
//! assert!(state.stop_reason.is_some());
//! assert!(census(&plan).lut_equiv() > 0);
//! # let _ = build_plan(&plan.meta)?;
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod autotuner;
pub mod cost;
pub mod harness;
pub mod kernels;
pub mod oracle;
pub mod plot;
pub mod primitives;
pub mod resource;
pub mod sample;
pub mod simulator;

pub(crate) mod hash;

pub use kernels::{BenchmarkKind, DesignPoint, KernelPlan, KernelSize};
pub use primitives::PermStrategy;
pub use resource::ResourceVector;
pub use sample::{Batch, Frame, Precision, Sample};
