//! Thin command-line front end over the forge library.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 backend failure.

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use forge::autotuner::{self, StopReason};
use forge::harness;
use forge::kernels::{self, BenchmarkKind, DesignPoint, KernelSize};
use forge::plot::plot_scatter;
use forge::sample::{Frame, Precision};
use forge::simulator::{census, critical_depth, simulate};
use forge::PermStrategy;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "forge", version, about = "Streaming kernel models with a frequency autotuner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tuning sweep from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Skip design points whose terminal row already exists in the CSV.
        #[arg(long)]
        resume: bool,
    },
    /// Render a scatterplot from a results CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        group: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify one design against its brute-force oracle.
    Check {
        #[arg(long)]
        benchmark: BenchmarkKind,
        #[arg(long)]
        size: KernelSize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value = "c32")]
        precision: Precision,
        #[arg(long, default_value = "sms")]
        strategy: PermStrategy,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Print the resource census and cycle stats of one design.
    Census {
        #[arg(long)]
        benchmark: BenchmarkKind,
        #[arg(long)]
        size: KernelSize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value = "c32")]
        precision: Precision,
        #[arg(long, default_value = "sms")]
        strategy: PermStrategy,
    },
    /// Tune a single design point from a sweep config.
    Tune {
        #[arg(long)]
        config: PathBuf,
        /// Design key as printed by enumeration, e.g. fft-64-w4-c32-sms.
        #[arg(long)]
        only: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, resume } => {
            let config = harness::load_config(&config)?;
            let summary = harness::run_sweep(&config, resume)?;
            println!("{summary}");
            println!("results: {}", config.out_csv.display());
            Ok(if summary.failed > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Plot { csv, x, y, group, out } => {
            let summary = plot_scatter(&csv, &x, &y, &group, &out)?;
            println!(
                "wrote {} ({} markers, {} groups)",
                out.display(),
                summary.markers,
                summary.groups
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            benchmark,
            size,
            width,
            precision,
            strategy,
            trials,
        } => {
            let design = build_design(benchmark, size, width, precision, strategy)?;
            let outcome = check_design(&design, trials)?;
            println!(
                "check {}: max relative error {:.3e} over {} trials",
                design.key(),
                outcome.err,
                outcome.trials
            );
            if outcome.pass {
                println!("PASS (tolerance {:.1e})", outcome.tolerance);
                Ok(ExitCode::SUCCESS)
            } else {
                println!("FAIL (tolerance {:.1e})", outcome.tolerance);
                Ok(ExitCode::from(1))
            }
        }
        Command::Census {
            benchmark,
            size,
            width,
            precision,
            strategy,
        } => {
            let design = build_design(benchmark, size, width, precision, strategy)?;
            let plan = kernels::build_plan(&design)?;
            println!("design {}", design.key());
            println!("nodes:");
            for (label, count) in plan.node_census() {
                println!("  {label}: {count}");
            }
            let c = census(&plan);
            println!("census: {c}");
            println!("critical depth: {}", critical_depth(&plan));
            let frame = Frame::zeros(plan.io.frame_len, design.precision);
            let preload = plan
                .io
                .preload
                .map(|(len, _)| Frame::zeros(len, design.precision));
            let inputs: Vec<Frame> = preload.into_iter().chain([frame]).collect();
            let (_, stats) = simulate(&plan, &inputs)?;
            println!(
                "cycles: total={} fill={} batches_in={} batches_out={} ii={}",
                stats.total_cycles,
                stats.fill_latency,
                stats.batches_in,
                stats.batches_out,
                stats.steady_state_ii
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Tune { config, only } => {
            let config = harness::load_config(&config)?;
            let points = harness::enumerate_sweep(&config);
            let design = points
                .iter()
                .find(|d| d.key() == only)
                .ok_or_else(|| {
                    anyhow!(
                        "design {only:?} not in this sweep; available:\n  {}",
                        points.iter().map(|d| d.key()).collect::<Vec<_>>().join("\n  ")
                    )
                })?;
            let backend = autotuner::MockBackend::new(config.backend.model);
            let state = autotuner::tune(design, &backend, &config.tuning)
                .with_context(|| format!("tuning {}", design.key()))?;
            println!("iter  f_target(MHz)  wns(ns)     f_a(MHz)    lut");
            for r in &state.history {
                println!(
                    "{:>4}  {:>12.3}  {:>9.4}  {:>10.3}  {:>7}",
                    r.iteration, r.f_target_mhz, r.wns_ns, r.f_achievable_mhz, r.report.lut
                );
            }
            match state.stop_reason {
                Some(StopReason::ToolError) => {
                    println!("stopped: tool_error");
                    Ok(ExitCode::from(2))
                }
                Some(reason) => {
                    println!("stopped: {reason}");
                    Ok(ExitCode::SUCCESS)
                }
                None => Ok(ExitCode::SUCCESS),
            }
        }
    }
}

fn build_design(
    benchmark: BenchmarkKind,
    size: KernelSize,
    width: usize,
    precision: Precision,
    strategy: PermStrategy,
) -> Result<DesignPoint> {
    let precision = if benchmark == BenchmarkKind::Qr {
        precision.real_counterpart()
    } else {
        precision
    };
    let design = DesignPoint::new(benchmark, size, width, precision, strategy);
    kernels::build_plan(&design).with_context(|| format!("invalid design {}", design.key()))?;
    Ok(design)
}

struct CheckOutcome {
    err: f64,
    tolerance: f64,
    trials: usize,
    pass: bool,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}

fn random_frame(rng: &mut ChaCha8Rng, len: usize, precision: Precision) -> Frame {
    let vals: Vec<Complex64> = (0..len)
        .map(|_| {
            if precision.is_complex() {
                Complex64::new(uniform(rng), uniform(rng))
            } else {
                Complex64::new(uniform(rng), 0.0)
            }
        })
        .collect();
    Frame::from_values(&vals, precision).expect("nonempty")
}

/// Relative error of the simulated plan against the module oracles.
fn check_design(design: &DesignPoint, trials: usize) -> Result<CheckOutcome> {
    let plan = kernels::build_plan(design)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0);
    let mut worst: f64 = 0.0;
    let tolerance = match design.benchmark {
        BenchmarkKind::Gemm | BenchmarkKind::Qr => 1e-3,
        _ => 1e-4,
    };

    for _ in 0..trials {
        let err = match design.benchmark {
            BenchmarkKind::Fft | BenchmarkKind::Butterfly => {
                let x = random_frame(&mut rng, plan.io.frame_len, design.precision);
                let (out, _) = simulate(&plan, std::slice::from_ref(&x))?;
                let reference = forge::oracle::oracle_dft(&x.values());
                rel_l2(&out[0].values(), &reference)
            }
            BenchmarkKind::Permutation => {
                let KernelSize::N(n) = design.size else {
                    return Err(anyhow!("permutation size must be a single n"));
                };
                let x = random_frame(&mut rng, n, design.precision);
                let (out, _) = simulate(&plan, std::slice::from_ref(&x))?;
                let reference =
                    forge::oracle::oracle_permute(&x.values(), n / design.width, design.width);
                rel_l2(&out[0].values(), &reference)
            }
            BenchmarkKind::MacArray => {
                let x = random_frame(&mut rng, plan.io.frame_len, design.precision);
                let (out, _) = simulate(&plan, std::slice::from_ref(&x))?;
                let w = design.width;
                let v = x.values();
                let reference: Vec<Complex64> =
                    (0..w).map(|i| v[i] * v[w + i] + v[2 * w + i]).collect();
                rel_l2(&out[0].values(), &reference)
            }
            BenchmarkKind::Gemm => {
                let KernelSize::Triple([m, k, ncols]) = design.size else {
                    return Err(anyhow!("gemm size must be m x k x ncols"));
                };
                let a = random_frame(&mut rng, m * k, design.precision);
                let b = random_frame(&mut rng, k * ncols, design.precision);
                let (out, _) = simulate(&plan, &[a.clone(), b.clone()])?;
                let a_mat = forge::oracle::CMatrix::new(
                    m,
                    k,
                    (0..m * k).map(|i| a.values()[(i % k) * m + i / k]).collect(),
                );
                let b_mat = forge::oracle::CMatrix::new(
                    k,
                    ncols,
                    (0..k * ncols)
                        .map(|i| b.values()[(i % ncols) * k + i / ncols])
                        .collect(),
                );
                let c = forge::oracle::oracle_gemm(&a_mat, &b_mat);
                let mut reference = vec![Complex64::new(0.0, 0.0); m * ncols];
                for j in 0..ncols {
                    for i in 0..m {
                        reference[j * m + i] = c[(i, j)];
                    }
                }
                rel_l2(&out[0].values(), &reference)
            }
            BenchmarkKind::Qr => {
                let KernelSize::Pair([m, ncols]) = design.size else {
                    return Err(anyhow!("qr size must be rows x cols"));
                };
                let a = random_frame(&mut rng, m * ncols, design.precision);
                let (out, _) = simulate(&plan, std::slice::from_ref(&a))?;
                // Gram residual ||R'R - A'A||_F / ||A'A||_F is invariant to
                // the reflector sign and is what correctness means here.
                let got = out[0].values();
                let a_vals = a.values();
                let col = |vals: &[Complex64], j: usize, i: usize| vals[j * m + i].re;
                let mut num = 0.0;
                let mut den = 0.0;
                for p in 0..ncols {
                    for q in 0..ncols {
                        let mut g_a = 0.0;
                        let mut g_r = 0.0;
                        for i in 0..m {
                            g_a += col(&a_vals, p, i) * col(&a_vals, q, i);
                            g_r += col(&got, p, i) * col(&got, q, i);
                        }
                        num += (g_r - g_a) * (g_r - g_a);
                        den += g_a * g_a;
                    }
                }
                (num / den.max(1e-30)).sqrt()
            }
        };
        worst = worst.max(err);
    }
    Ok(CheckOutcome {
        err: worst,
        tolerance,
        trials,
        pass: worst < tolerance,
    })
}

fn rel_l2(got: &[Complex64], reference: &[Complex64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (g, r) in got.iter().zip(reference) {
        num += (g - r).norm_sqr();
        den += r.norm_sqr();
    }
    (num / den.max(1e-30)).sqrt()
}
