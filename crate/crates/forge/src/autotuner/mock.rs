//! Desk-scale synthesis stand-in: a deterministic timing model over the
//! design's resource census plus optional seeded Gaussian measurement noise.

use super::{ReportStatus, SynthesisBackend, SynthesisReport};
use crate::hash;
use crate::kernels::{self, DesignPoint};
use crate::simulator::{census, critical_depth};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Calibration of the mock timing model. The true maximum frequency of a
/// design is
///
///   f_true = clamp(f_base - c_lut*log2(1 + lut_equiv) - c_depth*depth,
///                  f_lo, f_max)
///
/// and a synthesis run at target f reports wns = 1000/f - 1000/f_true + eps
/// with eps ~ Normal(0, sigma) seeded by hash(design, iteration, seed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockModel {
    pub f_base_mhz: f64,
    pub c_lut_mhz: f64,
    pub c_depth_mhz: f64,
    pub f_lo_mhz: f64,
    pub f_max_mhz: f64,
    pub sigma_ns: f64,
    pub seed: u64,
}

impl Default for MockModel {
    fn default() -> Self {
        MockModel {
            f_base_mhz: 900.0,
            c_lut_mhz: 30.0,
            c_depth_mhz: 3.0,
            f_lo_mhz: 120.0,
            f_max_mhz: 780.0,
            sigma_ns: 0.0,
            seed: 0,
        }
    }
}

impl MockModel {
    /// The model's ground-truth maximum frequency for a design.
    pub fn f_true(&self, design: &DesignPoint) -> Result<f64, kernels::PlanError> {
        let plan = kernels::build_plan(design)?;
        let lut = census(&plan).lut_equiv() as f64;
        let depth = critical_depth(&plan) as f64;
        let raw = self.f_base_mhz - self.c_lut_mhz * (1.0 + lut).log2() - self.c_depth_mhz * depth;
        Ok(raw.clamp(self.f_lo_mhz, self.f_max_mhz))
    }
}

/// One Normal(0, sigma) draw via Box-Muller over the seeded generator.
fn gaussian(seed: u64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u1 = super::u01(&mut rng).max(f64::MIN_POSITIVE);
    let u2 = super::u01(&mut rng);
    sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Resource counts derived from the abstract census:
/// lut = lut_equiv, ff = register bits plus 32 per FP unit,
/// dsp = 2 per multiplier, bram = 36 kbit blocks of memory + ROM.
fn report_resources(design: &DesignPoint) -> Option<(u64, u64, u64, u64)> {
    let plan = kernels::build_plan(design).ok()?;
    let c = census(&plan);
    let lut = c.lut_equiv();
    let ff = c.register_bits + 32 * (c.fp_add + c.fp_mul + c.fp_special);
    let dsp = 2 * c.fp_mul;
    let bram = (c.memory_bits + c.rom_bits).div_ceil(36 * 1024);
    Some((lut, ff, dsp, bram))
}

/// Evaluate the mock at one (design, target, iteration) triple. The same
/// triple with the same model always returns the identical report.
pub fn mock_synthesize(
    model: &MockModel,
    design: &DesignPoint,
    f_target_mhz: f64,
    iteration: u32,
) -> SynthesisReport {
    let f_true = match model.f_true(design) {
        Ok(f) => f,
        Err(e) => return SynthesisReport::failed(format!("plan construction failed: {e}")),
    };
    let Some((lut, ff, dsp, bram)) = report_resources(design) else {
        return SynthesisReport::failed("plan construction failed");
    };
    let eps = gaussian(
        hash::noise_seed(&design.key(), iteration, model.seed),
        model.sigma_ns,
    );
    let wns = 1000.0 / f_target_mhz - 1000.0 / f_true + eps;
    SynthesisReport {
        wns_ns: wns,
        lut,
        ff,
        dsp,
        bram,
        status: ReportStatus::Ok,
        missing_resources: false,
        detail: None,
    }
}

/// [`SynthesisBackend`] wrapper around [`mock_synthesize`]; concurrent-safe.
#[derive(Clone, Debug)]
pub struct MockBackend {
    pub model: MockModel,
}

impl MockBackend {
    pub fn new(model: MockModel) -> MockBackend {
        MockBackend { model }
    }
}

impl SynthesisBackend for MockBackend {
    fn synthesize(
        &self,
        design: &DesignPoint,
        f_target_mhz: f64,
        iteration: u32,
    ) -> SynthesisReport {
        mock_synthesize(&self.model, design, f_target_mhz, iteration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BenchmarkKind, KernelSize};
    use crate::primitives::PermStrategy;
    use crate::sample::Precision::C32;

    fn design() -> DesignPoint {
        DesignPoint::new(
            BenchmarkKind::Butterfly,
            KernelSize::N(8),
            8,
            C32,
            PermStrategy::Sms,
        )
    }

    fn flat_model(f_true: f64, sigma: f64) -> MockModel {
        MockModel {
            f_base_mhz: f_true,
            c_lut_mhz: 0.0,
            c_depth_mhz: 0.0,
            f_lo_mhz: 50.0,
            f_max_mhz: 780.0,
            sigma_ns: sigma,
            seed: 7,
        }
    }

    #[test]
    fn zero_noise_at_f_true_gives_zero_wns() {
        let model = flat_model(400.0, 0.0);
        let report = mock_synthesize(&model, &design(), 400.0, 0);
        assert_eq!(report.wns_ns, 0.0);
        assert!(report.is_ok());
    }

    #[test]
    fn overshoot_gives_expected_negative_slack() {
        let model = flat_model(400.0, 0.0);
        let report = mock_synthesize(&model, &design(), 500.0, 0);
        // 1000/500 - 1000/400 = 2.0 - 2.5
        assert!((report.wns_ns + 0.5).abs() < 1e-12);
    }

    #[test]
    fn same_triple_is_bit_identical() {
        let model = flat_model(400.0, 0.1);
        let a = mock_synthesize(&model, &design(), 321.5, 3);
        let b = mock_synthesize(&model, &design(), 321.5, 3);
        assert_eq!(a, b);
        let c = mock_synthesize(&model, &design(), 321.5, 4);
        assert_ne!(a.wns_ns.to_bits(), c.wns_ns.to_bits());
    }

    #[test]
    fn f_true_decreases_with_design_size() {
        let model = MockModel::default();
        let small = model.f_true(&design()).unwrap();
        let big_design = DesignPoint::new(
            BenchmarkKind::Fft,
            KernelSize::N(256),
            16,
            C32,
            PermStrategy::Sms,
        );
        let big = model.f_true(&big_design).unwrap();
        assert!(big < small, "bigger design should be slower: {big} vs {small}");
        assert!(big >= model.f_lo_mhz && small <= model.f_max_mhz);
    }
}
