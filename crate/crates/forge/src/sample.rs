//! Stream data types: precision-tagged scalars, per-cycle batches, and frames.
//!
//! Arithmetic honors the declared precision: 32-bit samples round every
//! intermediate real operation to `f32`, exactly like a hardware unit built
//! from single-precision adders and multipliers. Complex multiplication is
//! the 4-multiply / 2-add form throughout, so a simulated c32 datapath
//! produces the same rounding pattern as the modeled circuit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Number format of a stream element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    R32,
    R64,
    C32,
    C64,
}

impl Precision {
    /// Storage width in bits (a c32 sample is two 32-bit reals).
    pub fn bits(self) -> u64 {
        match self {
            Precision::R32 => 32,
            Precision::R64 => 64,
            Precision::C32 => 64,
            Precision::C64 => 128,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Precision::C32 | Precision::C64)
    }

    pub fn is_real(self) -> bool {
        !self.is_complex()
    }

    /// True when intermediate results round to f32.
    pub fn is_32bit(self) -> bool {
        matches!(self, Precision::R32 | Precision::C32)
    }

    /// The real format with the same element width (c32 -> r32, c64 -> r64).
    pub fn real_counterpart(self) -> Precision {
        match self {
            Precision::R32 | Precision::C32 => Precision::R32,
            Precision::R64 | Precision::C64 => Precision::R64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Precision::R32 => "r32",
            Precision::R64 => "r64",
            Precision::C32 => "c32",
            Precision::C64 => "c64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Precision {
    type Err = SampleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r32" => Ok(Precision::R32),
            "r64" => Ok(Precision::R64),
            "c32" => Ok(Precision::C32),
            "c64" => Ok(Precision::C64),
            other => Err(SampleError::UnknownPrecision(other.to_string())),
        }
    }
}

/// Errors raised by stream data constructors and sample arithmetic.
#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(Precision, Precision),
    #[error("operation requires complex precision, got {0}")]
    RealNotAllowed(Precision),
    #[error("operation requires real precision, got {0}")]
    ComplexNotAllowed(Precision),
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("a batch needs at least one lane")]
    EmptyBatch,
    #[error("frame length {len} is not a multiple of stream width {width}")]
    RaggedFrame { len: usize, width: usize },
    #[error("unknown precision {0:?} (expected r32, r64, c32 or c64)")]
    UnknownPrecision(String),
}

/// One precision-tagged scalar. Values at 32-bit precisions are always
/// exactly representable in f32; constructors round on the way in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    value: Complex64,
    precision: Precision,
}

fn quantize(value: Complex64, precision: Precision) -> Complex64 {
    if precision.is_32bit() {
        Complex64::new(value.re as f32 as f64, value.im as f32 as f64)
    } else {
        value
    }
}

impl Sample {
    /// Wrap a value at the given precision, rounding to storage width.
    ///
    /// Panics when a real precision is given a nonzero imaginary part; that
    /// is a programming error, not a data condition.
    pub fn new(value: Complex64, precision: Precision) -> Self {
        if precision.is_real() {
            assert!(
                value.im == 0.0,
                "real sample constructed with imaginary part {}",
                value.im
            );
        }
        Sample {
            value: quantize(value, precision),
            precision,
        }
    }

    pub fn real(x: f64, precision: Precision) -> Self {
        Sample::new(Complex64::new(x, 0.0), precision)
    }

    pub fn zero(precision: Precision) -> Self {
        Sample::new(Complex64::new(0.0, 0.0), precision)
    }

    pub fn one(precision: Precision) -> Self {
        Sample::new(Complex64::new(1.0, 0.0), precision)
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_nan(&self) -> bool {
        self.value.re.is_nan() || self.value.im.is_nan()
    }

    fn check_match(&self, rhs: &Sample) -> Result<(), SampleError> {
        if self.precision != rhs.precision {
            return Err(SampleError::PrecisionMismatch(self.precision, rhs.precision));
        }
        Ok(())
    }

    /// Addition at the sample precision (two real adds for complex formats).
    pub fn add(&self, rhs: &Sample) -> Result<Sample, SampleError> {
        self.check_match(rhs)?;
        let v = match self.precision {
            Precision::C32 | Precision::R32 => {
                let re = self.value.re as f32 + rhs.value.re as f32;
                let im = self.value.im as f32 + rhs.value.im as f32;
                Complex64::new(re as f64, im as f64)
            }
            _ => self.value + rhs.value,
        };
        Ok(Sample {
            value: v,
            precision: self.precision,
        })
    }

    pub fn sub(&self, rhs: &Sample) -> Result<Sample, SampleError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Sample {
        Sample {
            value: -self.value,
            precision: self.precision,
        }
    }

    /// Multiplication at the sample precision. Complex formats use the
    /// 4-multiply / 2-add circuit, rounding each real operation.
    pub fn mul(&self, rhs: &Sample) -> Result<Sample, SampleError> {
        self.check_match(rhs)?;
        let v = match self.precision {
            Precision::C32 => {
                let (ar, ai) = (self.value.re as f32, self.value.im as f32);
                let (br, bi) = (rhs.value.re as f32, rhs.value.im as f32);
                let re = ar * br - ai * bi;
                let im = ar * bi + ai * br;
                Complex64::new(re as f64, im as f64)
            }
            Precision::R32 => {
                let p = self.value.re as f32 * rhs.value.re as f32;
                Complex64::new(p as f64, 0.0)
            }
            Precision::C64 => {
                let re = self.value.re * rhs.value.re - self.value.im * rhs.value.im;
                let im = self.value.re * rhs.value.im + self.value.im * rhs.value.re;
                Complex64::new(re, im)
            }
            Precision::R64 => Complex64::new(self.value.re * rhs.value.re, 0.0),
        };
        Ok(Sample {
            value: v,
            precision: self.precision,
        })
    }

    /// Multiply by -i: a lane swap with one negation, exact at any precision.
    pub fn rotate_neg_i(&self) -> Sample {
        Sample {
            value: Complex64::new(self.value.im, -self.value.re),
            precision: self.precision,
        }
    }
}

/// The lanes a streaming unit consumes or produces in one cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    lanes: Vec<Sample>,
}

impl Batch {
    pub fn new(lanes: Vec<Sample>) -> Result<Self, SampleError> {
        if lanes.is_empty() {
            return Err(SampleError::EmptyBatch);
        }
        let precision = lanes[0].precision();
        for lane in &lanes[1..] {
            if lane.precision() != precision {
                return Err(SampleError::PrecisionMismatch(precision, lane.precision()));
            }
        }
        Ok(Batch { lanes })
    }

    pub fn from_reals(values: &[f64], precision: Precision) -> Result<Self, SampleError> {
        Batch::new(values.iter().map(|&x| Sample::real(x, precision)).collect())
    }

    pub fn from_values(values: &[Complex64], precision: Precision) -> Result<Self, SampleError> {
        Batch::new(values.iter().map(|&v| Sample::new(v, precision)).collect())
    }

    pub fn constant(value: Sample, width: usize) -> Result<Self, SampleError> {
        if width == 0 {
            return Err(SampleError::EmptyBatch);
        }
        Ok(Batch {
            lanes: vec![value; width],
        })
    }

    pub fn width(&self) -> usize {
        self.lanes.len()
    }

    pub fn precision(&self) -> Precision {
        self.lanes[0].precision()
    }

    pub fn lanes(&self) -> &[Sample] {
        &self.lanes
    }

    pub fn lane(&self, i: usize) -> Sample {
        self.lanes[i]
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.lanes.iter().map(|s| s.value()).collect()
    }

    pub fn check_same_shape(&self, rhs: &Batch) -> Result<(), SampleError> {
        if self.width() != rhs.width() {
            return Err(SampleError::WidthMismatch(self.width(), rhs.width()));
        }
        if self.precision() != rhs.precision() {
            return Err(SampleError::PrecisionMismatch(self.precision(), rhs.precision()));
        }
        Ok(())
    }
}

/// A full logical input/output vector in flat index order.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    samples: Vec<Sample>,
}

impl Frame {
    pub fn new(samples: Vec<Sample>) -> Result<Self, SampleError> {
        if samples.is_empty() {
            return Err(SampleError::EmptyBatch);
        }
        let precision = samples[0].precision();
        for s in &samples[1..] {
            if s.precision() != precision {
                return Err(SampleError::PrecisionMismatch(precision, s.precision()));
            }
        }
        Ok(Frame { samples })
    }

    pub fn from_reals(values: &[f64], precision: Precision) -> Result<Self, SampleError> {
        Frame::new(values.iter().map(|&x| Sample::real(x, precision)).collect())
    }

    pub fn from_values(values: &[Complex64], precision: Precision) -> Result<Self, SampleError> {
        Frame::new(values.iter().map(|&v| Sample::new(v, precision)).collect())
    }

    pub fn zeros(len: usize, precision: Precision) -> Frame {
        Frame {
            samples: vec![Sample::zero(precision); len],
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn precision(&self) -> Precision {
        self.samples[0].precision()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> Sample {
        self.samples[i]
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.value()).collect()
    }

    /// Split into per-cycle batches of `width` lanes; the frame length must
    /// be a multiple of the stream width.
    pub fn to_batches(&self, width: usize) -> Result<Vec<Batch>, SampleError> {
        if width == 0 || !self.len().is_multiple_of(width) {
            return Err(SampleError::RaggedFrame {
                len: self.len(),
                width,
            });
        }
        self.samples
            .chunks(width)
            .map(|c| Batch::new(c.to_vec()))
            .collect()
    }

    pub fn from_batches(batches: &[Batch]) -> Result<Frame, SampleError> {
        let mut samples = Vec::new();
        for b in batches {
            samples.extend_from_slice(b.lanes());
        }
        Frame::new(samples)
    }

    pub fn has_nan(&self) -> bool {
        self.samples.iter().any(|s| s.is_nan())
    }
}
