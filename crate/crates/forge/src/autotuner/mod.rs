//! The frequency search: compute achievable frequency from worst negative
//! slack, draw the next stochastic target, decide stopping, and iterate
//! against a synthesis backend.
//!
//! Units: frequencies are MHz at every interface; slack is nanoseconds.
//! Inside the achievable-frequency relation the target converts to GHz so
//! that wns*f is dimensionless (1/f in ns matches the slack scale).

mod external;
mod mock;
mod report;

pub use external::ExternalBackend;
pub use mock::{MockBackend, MockModel};
pub use report::{parse_report, ReportError};

use crate::hash;
use crate::kernels::DesignPoint;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Smallest frequency the stochastic step may propose, MHz.
const MIN_TARGET_MHZ: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum TuneError {
    #[error("achievable frequency diverges: slack {wns_ns} ns exceeds the whole period of {f_mhz} MHz")]
    DivergentSlack { f_mhz: f64, wns_ns: f64 },
    #[error("next_frequency needs at least one completed iteration")]
    EmptyHistory,
    #[error("invalid tuning parameter: {0}")]
    BadParams(String),
}

/// Knobs of the frequency search. The exploration constants are arbitrary
/// by design and everything is config-overridable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningParams {
    /// Initial target frequency.
    pub f0_mhz: f64,
    /// Platform ceiling F_MAX.
    pub f_max_mhz: f64,
    pub max_iters: u32,
    /// Contraction factor of the negative-slack branch.
    pub alpha: f64,
    /// Exploration bound F of the positive-slack branch, MHz.
    pub big_f_mhz: f64,
    /// Stability ratio threshold R.
    pub r_stable: f64,
    /// Trailing window length for the stability criterion.
    pub window: usize,
    pub seed: u64,
}

impl Default for TuningParams {
    fn default() -> Self {
        TuningParams {
            f0_mhz: 100.0,
            f_max_mhz: 800.0,
            max_iters: 20,
            alpha: 0.5,
            big_f_mhz: 50.0,
            r_stable: 1.02,
            window: 3,
            seed: 42,
        }
    }
}

impl TuningParams {
    pub fn validate(&self) -> Result<(), TuneError> {
        let mut problems = Vec::new();
        if self.f0_mhz.is_nan() || self.f0_mhz <= 0.0 {
            problems.push("f0_mhz must be positive");
        }
        if self.f_max_mhz < self.f0_mhz {
            problems.push("f_max_mhz must be at least f0_mhz");
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            problems.push("alpha must be non-negative");
        }
        if self.big_f_mhz.is_nan() || self.big_f_mhz <= 0.0 {
            problems.push("big_f_mhz must be positive");
        }
        if self.r_stable.is_nan() || self.r_stable <= 1.0 {
            problems.push("r_stable must exceed 1");
        }
        if self.window < 2 {
            problems.push("window must be at least 2");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(TuneError::BadParams(problems.join("; ")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Ok,
    ToolError,
}

/// Timing slack and resource counts returned by a backend for one
/// (design, target frequency) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisReport {
    /// Signed worst negative slack, nanoseconds. Finite when status is Ok.
    pub wns_ns: f64,
    pub lut: u64,
    pub ff: u64,
    pub dsp: u64,
    pub bram: u64,
    pub status: ReportStatus,
    /// Resources were absent from the parsed report and defaulted to 0.
    pub missing_resources: bool,
    /// Failure explanation for tool errors.
    pub detail: Option<String>,
}

impl SynthesisReport {
    pub fn failed(detail: impl Into<String>) -> SynthesisReport {
        SynthesisReport {
            wns_ns: f64::NAN,
            lut: 0,
            ff: 0,
            dsp: 0,
            bram: 0,
            status: ReportStatus::ToolError,
            missing_resources: true,
            detail: Some(detail.into()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == ReportStatus::Ok
    }
}

/// Why a tuning run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    Ceiling,
    Stable,
    /// The backend failed; the design point is aborted with the status
    /// recorded and the sweep moves on.
    ToolError,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::MaxIters => "max_iters",
            StopReason::Ceiling => "ceiling",
            StopReason::Stable => "stable",
            StopReason::ToolError => "tool_error",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One completed tuning iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: u32,
    pub f_target_mhz: f64,
    pub wns_ns: f64,
    pub f_achievable_mhz: f64,
    pub report: SynthesisReport,
}

/// The iteration history of the frequency search for one design.
#[derive(Clone, Debug)]
pub struct TuningState {
    pub history: Vec<IterationRecord>,
    pub stop_reason: Option<StopReason>,
    /// Deterministic generator feeding the stochastic target draws.
    pub rng: ChaCha8Rng,
}

impl TuningState {
    pub fn new(seed: u64) -> TuningState {
        TuningState {
            history: Vec::new(),
            stop_reason: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn latest(&self) -> Option<&IterationRecord> {
        self.history.last()
    }

    /// Final achievable frequency, if any iteration completed.
    pub fn final_f_achievable(&self) -> Option<f64> {
        self.history
            .iter()
            .rev()
            .find(|r| r.report.is_ok())
            .map(|r| r.f_achievable_mhz)
    }
}

/// Uniform in [0, 1) from the top 53 bits of the generator.
pub(crate) fn u01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maximum frequency implied by a synthesis run: f_a = f / (1 - wns*f), the
/// frequency whose period is the target period minus the measured slack.
pub fn achievable_frequency(f_mhz: f64, wns_ns: f64) -> Result<f64, TuneError> {
    let f_ghz = f_mhz / 1000.0;
    let denom = 1.0 - wns_ns * f_ghz;
    if denom.is_nan() || !denom.is_finite() || denom <= 0.0 {
        return Err(TuneError::DivergentSlack { f_mhz, wns_ns });
    }
    Ok(f_mhz / denom)
}

/// Stochastic next target: overshoot exploration above f_a on positive
/// slack, a contracted jitter around f_a otherwise. Clamped to
/// [MIN_TARGET_MHZ, f_max].
pub fn next_frequency(state: &mut TuningState, params: &TuningParams) -> Result<f64, TuneError> {
    let last = state.history.last().ok_or(TuneError::EmptyHistory)?;
    let f = last.f_target_mhz;
    let f_a = last.f_achievable_mhz;
    let delta = (f_a - f).abs();
    let draw = u01(&mut state.rng);
    let raw = if last.wns_ns > 0.0 {
        f_a + draw * params.big_f_mhz
    } else {
        f_a + delta * (2.0 * draw - 1.0) * params.alpha
    };
    Ok(raw.clamp(MIN_TARGET_MHZ, params.f_max_mhz))
}

/// Stopping criteria, checked in fixed precedence order: platform ceiling,
/// then iteration budget, then a stable trailing window (max/min < R).
pub fn should_stop(state: &TuningState, params: &TuningParams) -> Option<StopReason> {
    let last = state.history.last()?;
    if last.f_achievable_mhz >= params.f_max_mhz {
        return Some(StopReason::Ceiling);
    }
    if state.history.len() >= params.max_iters as usize {
        return Some(StopReason::MaxIters);
    }
    if state.history.len() >= params.window {
        let tail = &state.history[state.history.len() - params.window..];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in tail {
            lo = lo.min(r.f_achievable_mhz);
            hi = hi.max(r.f_achievable_mhz);
        }
        if lo > 0.0 && hi / lo < params.r_stable {
            return Some(StopReason::Stable);
        }
    }
    None
}

/// A synthesis backend evaluates one (design, target frequency) pair.
/// Implementations must be safe for concurrent calls; the harness bounds
/// parallelism.
pub trait SynthesisBackend: Send + Sync {
    fn synthesize(&self, design: &DesignPoint, f_target_mhz: f64, iteration: u32)
        -> SynthesisReport;
}

/// Run the full frequency search for one design.
pub fn tune(
    design: &DesignPoint,
    backend: &dyn SynthesisBackend,
    params: &TuningParams,
) -> Result<TuningState, TuneError> {
    tune_observed(design, backend, params, |_, _| {})
}

/// As [`tune`], invoking `observer` after every recorded iteration with the
/// stop reason when that iteration is terminal.
pub fn tune_observed(
    design: &DesignPoint,
    backend: &dyn SynthesisBackend,
    params: &TuningParams,
    mut observer: impl FnMut(&IterationRecord, Option<StopReason>),
) -> Result<TuningState, TuneError> {
    params.validate()?;
    let mut state = TuningState::new(hash::design_seed(&design.key(), params.seed));
    let mut f_target = params.f0_mhz;

    for iteration in 0..params.max_iters {
        let mut report = backend.synthesize(design, f_target, iteration);
        if !report.is_ok() {
            let record = IterationRecord {
                iteration,
                f_target_mhz: f_target,
                wns_ns: f64::NAN,
                f_achievable_mhz: f64::NAN,
                report,
            };
            state.stop_reason = Some(StopReason::ToolError);
            observer(&record, state.stop_reason);
            state.history.push(record);
            return Ok(state);
        }

        // Slack exceeding the whole period reads as tool noise: retry once
        // at half the target before giving up on the design point.
        let mut f_used = f_target;
        let mut f_a = achievable_frequency(f_used, report.wns_ns);
        if f_a.is_err() {
            f_used = f_target / 2.0;
            report = backend.synthesize(design, f_used, iteration);
            if report.is_ok() {
                f_a = achievable_frequency(f_used, report.wns_ns);
            }
        }
        let Ok(f_a) = f_a else {
            let record = IterationRecord {
                iteration,
                f_target_mhz: f_used,
                wns_ns: report.wns_ns,
                f_achievable_mhz: f64::NAN,
                report: SynthesisReport {
                    status: ReportStatus::ToolError,
                    detail: Some("divergent slack twice in one iteration".to_string()),
                    ..report
                },
            };
            state.stop_reason = Some(StopReason::ToolError);
            observer(&record, state.stop_reason);
            state.history.push(record);
            return Ok(state);
        };

        let record = IterationRecord {
            iteration,
            f_target_mhz: f_used,
            wns_ns: report.wns_ns,
            f_achievable_mhz: f_a,
            report,
        };
        state.history.push(record);
        state.stop_reason = should_stop(&state, params);
        observer(state.history.last().unwrap(), state.stop_reason);
        if state.stop_reason.is_some() {
            return Ok(state);
        }
        f_target = next_frequency(&mut state, params)?;
    }

    // max_iters is checked inside the loop; reaching here means the budget
    // was exhausted exactly at the boundary.
    state.stop_reason = Some(StopReason::MaxIters);
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BenchmarkKind, KernelSize};
    use crate::primitives::PermStrategy;
    use crate::sample::Precision::C32;

    fn design() -> DesignPoint {
        DesignPoint::new(
            BenchmarkKind::Fft,
            KernelSize::N(16),
            4,
            C32,
            PermStrategy::Sms,
        )
    }

    #[test]
    fn achievable_frequency_fixed_point_at_zero_slack() {
        for f in [1.0, 100.0, 437.5, 800.0] {
            assert_eq!(achievable_frequency(f, 0.0).unwrap(), f);
        }
    }

    #[test]
    fn achievable_frequency_worked_values() {
        // 200 MHz with -1 ns slack: period 5 ns -> 6 ns
        let f_a = achievable_frequency(200.0, -1.0).unwrap();
        assert!((f_a - 1000.0 / 6.0).abs() < 1e-9);
        // 250 MHz with +1 ns slack: period 4 ns -> 3 ns
        let f_a = achievable_frequency(250.0, 1.0).unwrap();
        assert!((f_a - 1000.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn achievable_frequency_rejects_divergent_slack() {
        // slack larger than the whole 10 ns period
        assert!(matches!(
            achievable_frequency(100.0, 10.5),
            Err(TuneError::DivergentSlack { .. })
        ));
    }

    #[test]
    fn achievable_frequency_monotone_in_slack() {
        let mut prev = 0.0;
        for i in 0..100 {
            let wns = -5.0 + i as f64 * 0.08; // stays inside the valid domain
            let f_a = achievable_frequency(200.0, wns).unwrap();
            assert!(f_a > prev);
            prev = f_a;
        }
    }

    #[test]
    fn round_trip_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..1000 {
            let f = 50.0 + u01(&mut rng) * 750.0;
            let f_a = 50.0 + u01(&mut rng) * 750.0;
            let wns = 1000.0 / f - 1000.0 / f_a;
            let back = achievable_frequency(f, wns).unwrap();
            assert!((back - f_a).abs() / f_a < 1e-9);
        }
    }

    fn record(f: f64, wns: f64, f_a: f64) -> IterationRecord {
        IterationRecord {
            iteration: 0,
            f_target_mhz: f,
            wns_ns: wns,
            f_achievable_mhz: f_a,
            report: SynthesisReport {
                wns_ns: wns,
                lut: 0,
                ff: 0,
                dsp: 0,
                bram: 0,
                status: ReportStatus::Ok,
                missing_resources: false,
                detail: None,
            },
        }
    }

    #[test]
    fn next_frequency_branch_ranges() {
        let params = TuningParams::default();
        for seed in 0..200 {
            let mut state = TuningState::new(seed);
            state.history.push(record(250.0, 1.0, 300.0));
            let f = next_frequency(&mut state, &params).unwrap();
            assert!(f > 300.0 && f <= 350.0, "positive branch out of range: {f}");

            let mut state = TuningState::new(seed);
            state.history.push(record(300.0, -0.5, 280.0));
            let f = next_frequency(&mut state, &params).unwrap();
            assert!((270.0..=290.0).contains(&f), "negative branch out of range: {f}");
        }
    }

    #[test]
    fn next_frequency_clamps_and_needs_history() {
        let params = TuningParams {
            f_max_mhz: 320.0,
            ..TuningParams::default()
        };
        let mut state = TuningState::new(1);
        assert!(matches!(
            next_frequency(&mut state, &params),
            Err(TuneError::EmptyHistory)
        ));
        state.history.push(record(250.0, 1.0, 318.0));
        for _ in 0..50 {
            let f = next_frequency(&mut state, &params).unwrap();
            assert!(f > 0.0 && f <= 320.0);
        }
    }

    #[test]
    fn next_frequency_replays_bit_identically() {
        let params = TuningParams::default();
        let run = || {
            let mut state = TuningState::new(42);
            state.history.push(record(250.0, 1.0, 300.0));
            let mut draws = Vec::new();
            for _ in 0..10 {
                draws.push(next_frequency(&mut state, &params).unwrap().to_bits());
            }
            draws
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn stop_criteria_precedence_and_values() {
        let params = TuningParams {
            max_iters: 3,
            ..TuningParams::default()
        };
        // stable window
        let mut state = TuningState::new(1);
        state.history.push(record(400.0, 0.0, 400.1));
        state.history.push(record(400.0, 0.0, 400.3));
        assert_eq!(should_stop(&state, &TuningParams::default()), None);
        state.history.push(record(400.0, 0.0, 400.2));
        assert_eq!(
            should_stop(&state, &TuningParams::default()),
            Some(StopReason::Stable)
        );
        // max/min = 400.3/400.1 = 1.0005 < 1.02
        assert_eq!(should_stop(&state, &params), Some(StopReason::MaxIters));

        // ceiling wins over everything
        let mut state = TuningState::new(1);
        state.history.push(record(790.0, 1.0, 805.0));
        assert_eq!(should_stop(&state, &params), Some(StopReason::Ceiling));

        // max_iters at the boundary
        let mut state = TuningState::new(1);
        state.history.push(record(100.0, -1.0, 90.0));
        let one_shot = TuningParams {
            max_iters: 1,
            ..TuningParams::default()
        };
        assert_eq!(should_stop(&state, &one_shot), Some(StopReason::MaxIters));
    }

    #[test]
    fn tune_with_single_iteration_budget() {
        let params = TuningParams {
            max_iters: 1,
            ..TuningParams::default()
        };
        let model = MockModel {
            f_base_mhz: 400.0,
            c_lut_mhz: 0.0,
            c_depth_mhz: 0.0,
            ..MockModel::default()
        };
        let backend = MockBackend::new(model);
        let state = tune(&design(), &backend, &params).unwrap();
        assert_eq!(state.history.len(), 1);
        assert_eq!(state.stop_reason, Some(StopReason::MaxIters));
    }

    #[test]
    fn noiseless_mock_converges_to_f_true() {
        let params = TuningParams::default();
        let model = MockModel {
            f_base_mhz: 400.0,
            c_lut_mhz: 0.0,
            c_depth_mhz: 0.0,
            f_lo_mhz: 50.0,
            f_max_mhz: 750.0,
            sigma_ns: 0.0,
            seed: 0,
        };
        let backend = MockBackend::new(model);
        let state = tune(&design(), &backend, &params).unwrap();
        assert!(state.history.len() <= 15);
        let f_final = state.final_f_achievable().unwrap();
        assert!((f_final - 400.0).abs() / 400.0 < 0.01);
        assert!(state.stop_reason.is_some());
    }

    #[test]
    fn running_max_of_nonneg_slack_fa_never_exceeds_f_true() {
        let f_true = 512.0;
        let model = MockModel {
            f_base_mhz: f_true,
            c_lut_mhz: 0.0,
            c_depth_mhz: 0.0,
            f_lo_mhz: 50.0,
            f_max_mhz: 750.0,
            sigma_ns: 0.0,
            seed: 0,
        };
        let backend = MockBackend::new(model);
        let state = tune(&design(), &backend, &TuningParams::default()).unwrap();
        let mut running_max = f64::NEG_INFINITY;
        for r in &state.history {
            if r.wns_ns >= 0.0 {
                running_max = running_max.max(r.f_achievable_mhz);
                assert!(running_max <= f_true + 1e-6);
            }
        }
    }

    #[test]
    fn noisy_tuning_replays_bit_identically() {
        let params = TuningParams::default();
        let model = MockModel {
            f_base_mhz: 400.0,
            c_lut_mhz: 0.0,
            c_depth_mhz: 0.0,
            sigma_ns: 0.05,
            ..MockModel::default()
        };
        let backend = MockBackend::new(model);
        let a = tune(&design(), &backend, &params).unwrap();
        let b = tune(&design(), &backend, &params).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.stop_reason, b.stop_reason);
    }

    #[test]
    fn stored_fa_matches_recomputation() {
        let model = MockModel {
            f_base_mhz: 300.0,
            c_lut_mhz: 0.0,
            c_depth_mhz: 0.0,
            sigma_ns: 0.02,
            ..MockModel::default()
        };
        let backend = MockBackend::new(model);
        let state = tune(&design(), &backend, &TuningParams::default()).unwrap();
        for (i, r) in state.history.iter().enumerate() {
            assert_eq!(r.iteration as usize, i);
            let again = achievable_frequency(r.f_target_mhz, r.wns_ns).unwrap();
            assert_eq!(again.to_bits(), r.f_achievable_mhz.to_bits());
        }
    }

    /// Backend whose slack exceeds the whole period above a frequency cutoff.
    struct DivergentAbove {
        cutoff_mhz: f64,
        wns_at_low: f64,
    }

    impl SynthesisBackend for DivergentAbove {
        fn synthesize(&self, _: &DesignPoint, f_mhz: f64, _: u32) -> SynthesisReport {
            let wns = if f_mhz > self.cutoff_mhz {
                1000.0 / f_mhz + 1.0 // slack larger than the period
            } else {
                self.wns_at_low
            };
            SynthesisReport {
                wns_ns: wns,
                lut: 1,
                ff: 1,
                dsp: 0,
                bram: 0,
                status: ReportStatus::Ok,
                missing_resources: false,
                detail: None,
            }
        }
    }

    #[test]
    fn divergent_slack_retries_once_at_half_frequency() {
        let params = TuningParams {
            f0_mhz: 200.0,
            max_iters: 1,
            ..TuningParams::default()
        };
        let backend = DivergentAbove {
            cutoff_mhz: 150.0,
            wns_at_low: 0.0,
        };
        let state = tune(&design(), &backend, &params).unwrap();
        assert_eq!(state.history.len(), 1);
        let first = &state.history[0];
        // retried at f0/2 and recorded that target
        assert_eq!(first.f_target_mhz, 100.0);
        assert_eq!(first.f_achievable_mhz, 100.0);
        assert!(first.report.is_ok());
    }

    #[test]
    fn double_divergence_aborts_the_design() {
        let params = TuningParams {
            f0_mhz: 200.0,
            ..TuningParams::default()
        };
        let backend = DivergentAbove {
            cutoff_mhz: 0.0, // diverges everywhere
            wns_at_low: 0.0,
        };
        let state = tune(&design(), &backend, &params).unwrap();
        assert_eq!(state.stop_reason, Some(StopReason::ToolError));
        assert_eq!(state.history.len(), 1);
        assert_eq!(state.history[0].report.status, ReportStatus::ToolError);
    }

    #[test]
    fn backend_failure_is_recorded_not_raised() {
        struct AlwaysFails;
        impl SynthesisBackend for AlwaysFails {
            fn synthesize(&self, _: &DesignPoint, _: f64, _: u32) -> SynthesisReport {
                SynthesisReport::failed("licence server on fire")
            }
        }
        let state = tune(&design(), &AlwaysFails, &TuningParams::default()).unwrap();
        assert_eq!(state.stop_reason, Some(StopReason::ToolError));
        assert_eq!(state.history.len(), 1);
        assert!(state.history[0]
            .report
            .detail
            .as_deref()
            .unwrap()
            .contains("licence"));
    }

    #[test]
    fn params_validation_reports_all_problems() {
        let params = TuningParams {
            f0_mhz: -1.0,
            r_stable: 0.5,
            window: 1,
            ..TuningParams::default()
        };
        let err = params.validate().unwrap_err();
        let TuneError::BadParams(msg) = err else {
            panic!("wrong error kind")
        };
        assert!(msg.contains("f0_mhz"));
        assert!(msg.contains("r_stable"));
        assert!(msg.contains("window"));
    }
}
