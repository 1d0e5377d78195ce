//! Sweep orchestration: JSON configs, design-point enumeration, bounded
//! parallel tuning, append-only CSV results, and resume.
//!
//! Every tuning iteration becomes one [`ResultRow`]. Rows funnel through a
//! single writer thread; each design's rows are buffered and appended with
//! one write so a killed sweep never leaves a design half-recorded. Resume
//! keys off terminal rows only: a design whose terminal row exists in the
//! CSV is skipped, anything else re-runs from scratch.

use crate::autotuner::{
    ExternalBackend, MockBackend, MockModel, StopReason, SynthesisBackend, TuneError, TuningParams,
};
use crate::hash;
use crate::kernels::{BenchmarkKind, DesignPoint, KernelSize};
use crate::primitives::PermStrategy;
use crate::sample::Precision;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

pub const CSV_HEADER: &str = "run_id,benchmark,label,size,width,precision,strategy,iteration,f_target_mhz,wns_ns,f_achievable_mhz,lut,ff,dsp,bram,stop_reason,wall_seconds,seed";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path} is not valid JSON: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration:\n  - {}", problems.join("\n  - "))]
    Invalid { problems: Vec<String> },
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error("csv io at {path}: {source}")]
    CsvIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv serialization: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Mock timing model; ignored by the external backend.
    pub model: MockModel,
    /// Command template with {design}, {freq_mhz}, {outdir} placeholders.
    pub cmd_template: Option<String>,
    /// Report file the command writes; same placeholders.
    pub report_path: Option<String>,
    pub timeout_secs: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            model: MockModel::default(),
            cmd_template: None,
            report_path: None,
            timeout_secs: 600,
        }
    }
}

fn default_widths() -> Vec<usize> {
    vec![2, 4, 8, 16]
}

fn default_precision() -> Precision {
    Precision::C32
}

fn default_strategies() -> Vec<PermStrategy> {
    vec![PermStrategy::Sms]
}

fn default_parallelism() -> usize {
    1
}

fn default_gemm_ncols() -> usize {
    16
}

fn default_out_csv() -> PathBuf {
    PathBuf::from("results.csv")
}

/// A sweep: benchmarks x sizes x widths x strategies, tuned against one
/// backend, appended to one CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub benchmarks: Vec<BenchmarkKind>,
    /// Per-benchmark size lists. A plain integer is the size n (for GEMM,
    /// the square A dimension); pairs are QR rows x cols; triples are GEMM
    /// m x k x ncols.
    pub sizes: BTreeMap<BenchmarkKind, Vec<KernelSize>>,
    pub widths: Vec<usize>,
    pub precision: Precision,
    pub perm_strategies: Vec<PermStrategy>,
    /// Columns of B for GEMM sizes given as plain integers.
    pub gemm_ncols: usize,
    /// Free-text implementation label stamped on every design point.
    pub label: String,
    pub tuning: TuningParams,
    pub backend: BackendConfig,
    /// Maximum design points in flight.
    pub parallelism: usize,
    pub out_csv: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            benchmarks: vec![BenchmarkKind::Fft],
            sizes: BTreeMap::new(),
            widths: default_widths(),
            precision: default_precision(),
            perm_strategies: default_strategies(),
            gemm_ncols: default_gemm_ncols(),
            label: String::new(),
            tuning: TuningParams::default(),
            backend: BackendConfig::default(),
            parallelism: default_parallelism(),
            out_csv: default_out_csv(),
        }
    }
}

impl SweepConfig {
    /// Collect every violation rather than stopping at the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.benchmarks.is_empty() {
            problems.push("benchmarks: at least one benchmark is required".to_string());
        }
        for &w in &self.widths {
            if !matches!(w, 2 | 4 | 8 | 16) {
                problems.push(format!(
                    "widths: {w} is outside the supported set {{2, 4, 8, 16}}"
                ));
            }
        }
        if self.parallelism < 1 {
            problems.push("parallelism: must be at least 1".to_string());
        }
        if self.gemm_ncols == 0 {
            problems.push("gemm_ncols: must be positive".to_string());
        }
        for (benchmark, sizes) in &self.sizes {
            for size in sizes {
                match (benchmark, size) {
                    (BenchmarkKind::Qr, KernelSize::Pair([rows, cols])) => {
                        if rows < cols || *cols == 0 {
                            problems.push(format!("sizes.qr: {rows}x{cols} needs rows >= cols >= 1"));
                        }
                    }
                    (BenchmarkKind::Qr, other) => {
                        problems.push(format!("sizes.qr: {other} must be a rows x cols pair"));
                    }
                    (BenchmarkKind::Gemm, KernelSize::N(0)) => {
                        problems.push("sizes.gemm: zero dimension".to_string());
                    }
                    (BenchmarkKind::Gemm, KernelSize::Triple([m, k, nc])) => {
                        if *m == 0 || *k == 0 || *nc == 0 {
                            problems.push(format!("sizes.gemm: {m}x{k}x{nc} has a zero dimension"));
                        }
                    }
                    (_, KernelSize::N(0)) => {
                        problems.push(format!("sizes.{benchmark}: zero size"));
                    }
                    (BenchmarkKind::Fft, KernelSize::N(n))
                        if !self.widths.iter().any(|&w| is_power_of(*n, w)) => {
                            problems.push(format!(
                                "sizes.fft: {n} is not a power of any configured width (n = W^t unreachable)"
                            ));
                        }
                    _ => {}
                }
            }
        }
        if self.backend.kind == BackendKind::External {
            if self.backend.cmd_template.is_none() {
                problems.push("backend.cmd_template: required for the external backend".to_string());
            }
            if self.backend.report_path.is_none() {
                problems.push("backend.report_path: required for the external backend".to_string());
            }
        }
        if let Err(TuneError::BadParams(msg)) = self.tuning.validate() {
            problems.push(format!("tuning: {msg}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid { problems })
        }
    }

    /// Deterministic run identity: the canonical config plus the seed.
    pub fn run_id(&self) -> String {
        let canonical = serde_json::to_string(self).unwrap_or_default();
        let h = hash::fnv1a(hash::FNV_OFFSET, canonical.as_bytes());
        format!("{:016x}", hash::fnv1a_u64(h, self.tuning.seed))
    }

    fn sizes_for(&self, benchmark: BenchmarkKind) -> Vec<KernelSize> {
        if let Some(sizes) = self.sizes.get(&benchmark) {
            return sizes.clone();
        }
        match benchmark {
            BenchmarkKind::MacArray | BenchmarkKind::Butterfly => {
                self.widths.iter().map(|&w| KernelSize::N(w)).collect()
            }
            BenchmarkKind::Permutation => vec![KernelSize::N(4), KernelSize::N(8), KernelSize::N(16)],
            BenchmarkKind::Fft => [4, 16, 64, 256].map(KernelSize::N).to_vec(),
            BenchmarkKind::Gemm => self.widths.iter().map(|&w| KernelSize::N(w)).collect(),
            BenchmarkKind::Qr => self
                .widths
                .iter()
                .map(|&w| KernelSize::qr(4 * w, 2 * w))
                .collect(),
        }
    }
}

fn is_power_of(n: usize, w: usize) -> bool {
    if w < 2 {
        return false;
    }
    let mut acc = w;
    while acc < n {
        acc *= w;
    }
    acc == n
}

/// Load, apply environment overrides (FORGE_SEED, FORGE_PARALLELISM), and
/// validate a sweep config.
pub fn load_config(path: impl AsRef<Path>) -> Result<SweepConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config: SweepConfig =
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    if let Ok(seed) = std::env::var("FORGE_SEED") {
        match seed.parse::<u64>() {
            Ok(seed) => {
                config.tuning.seed = seed;
                config.backend.model.seed = seed;
            }
            Err(_) => {
                return Err(ConfigError::Invalid {
                    problems: vec![format!("FORGE_SEED: {seed:?} is not a u64")],
                })
            }
        }
    }
    if let Ok(par) = std::env::var("FORGE_PARALLELISM") {
        match par.parse::<usize>() {
            Ok(par) if par >= 1 => config.parallelism = par,
            _ => {
                return Err(ConfigError::Invalid {
                    problems: vec![format!("FORGE_PARALLELISM: {par:?} is not a positive integer")],
                })
            }
        }
    }
    config.validate()?;
    Ok(config)
}

/// Expand the configured cartesian product into valid design points, in
/// deterministic lexicographic key order with duplicates removed.
///
/// Per-kernel preconditions filter the product: FFT keeps n = W^t; GEMM
/// keeps m = W (plain sizes expand to square A with `gemm_ncols` B columns);
/// QR couples width to shape (rows = 4W, twice the columns) and runs at the real
/// counterpart of a complex sweep precision; the MAC and butterfly arrays
/// are as wide as the stream. Benchmarks without permutation units collapse
/// onto one strategy.
pub fn enumerate_sweep(config: &SweepConfig) -> Vec<DesignPoint> {
    let mut seen = BTreeSet::new();
    let mut points = Vec::new();
    for &benchmark in &config.benchmarks {
        for size in config.sizes_for(benchmark) {
            for &width in &config.widths {
                for &strategy in &config.perm_strategies {
                    let Some(mut design) =
                        candidate(config, benchmark, size, width, strategy)
                    else {
                        continue;
                    };
                    design.label = config.label.clone();
                    if seen.insert(design.key()) {
                        points.push(design);
                    }
                }
            }
        }
    }
    points.sort_by_key(|d| d.key());
    points
}

fn candidate(
    config: &SweepConfig,
    benchmark: BenchmarkKind,
    size: KernelSize,
    width: usize,
    strategy: PermStrategy,
) -> Option<DesignPoint> {
    let precision = config.precision;
    match benchmark {
        BenchmarkKind::MacArray => {
            let KernelSize::N(n) = size else { return None };
            (n == width).then(|| {
                DesignPoint::new(benchmark, size, width, precision, PermStrategy::Sms)
            })
        }
        BenchmarkKind::Butterfly => {
            let KernelSize::N(n) = size else { return None };
            (n == width && precision.is_complex()).then(|| {
                DesignPoint::new(benchmark, size, width, precision, PermStrategy::Sms)
            })
        }
        BenchmarkKind::Permutation => {
            let KernelSize::N(n) = size else { return None };
            (n % width == 0).then(|| DesignPoint::new(benchmark, size, width, precision, strategy))
        }
        BenchmarkKind::Fft => {
            let KernelSize::N(n) = size else { return None };
            (precision.is_complex() && is_power_of(n, width))
                .then(|| DesignPoint::new(benchmark, size, width, precision, strategy))
        }
        BenchmarkKind::Gemm => {
            let (m, k, ncols) = match size {
                KernelSize::N(s) => (s, s, config.gemm_ncols),
                KernelSize::Triple([m, k, nc]) => (m, k, nc),
                KernelSize::Pair(_) => return None,
            };
            (m == width).then(|| {
                DesignPoint::new(
                    benchmark,
                    KernelSize::gemm(m, k, ncols),
                    width,
                    precision,
                    PermStrategy::Sms,
                )
            })
        }
        BenchmarkKind::Qr => {
            let KernelSize::Pair([rows, cols]) = size else {
                return None;
            };
            (rows >= cols && rows == 4 * width).then(|| {
                DesignPoint::new(
                    benchmark,
                    size,
                    width,
                    precision.real_counterpart(),
                    PermStrategy::Sms,
                )
            })
        }
    }
}

/// One CSV record per tuning iteration; the unit of persistence and plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: String,
    pub benchmark: String,
    pub label: String,
    pub size: String,
    pub width: usize,
    pub precision: String,
    pub strategy: String,
    pub iteration: u32,
    pub f_target_mhz: f64,
    pub wns_ns: f64,
    pub f_achievable_mhz: f64,
    pub lut: u64,
    pub ff: u64,
    pub dsp: u64,
    pub bram: u64,
    /// Empty until the terminal iteration of the design point.
    pub stop_reason: String,
    pub wall_seconds: f64,
    pub seed: u64,
}

impl ResultRow {
    /// Design identity as used for resume keys.
    pub fn design_key(&self) -> String {
        let mut key = format!(
            "{}-{}-w{}-{}-{}",
            self.benchmark, self.size, self.width, self.precision, self.strategy
        );
        if !self.label.is_empty() {
            key.push('-');
            key.push_str(&self.label);
        }
        key
    }

    pub fn is_terminal(&self) -> bool {
        !self.stop_reason.is_empty()
    }
}

/// Outcome counters for one sweep invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub total_points: usize,
    pub completed: usize,
    pub skipped: usize,
    pub failed: usize,
    pub by_reason: BTreeMap<String, u64>,
}

impl std::fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} design points: {} tuned, {} skipped (resume), {} backend failures",
            self.total_points, self.completed, self.skipped, self.failed
        )?;
        for (reason, count) in &self.by_reason {
            write!(f, "\n  stop={reason}: {count}")?;
        }
        Ok(())
    }
}

enum OwnedBackend {
    Mock(MockBackend),
    External(ExternalBackend),
}

impl SynthesisBackend for OwnedBackend {
    fn synthesize(
        &self,
        design: &DesignPoint,
        f_target_mhz: f64,
        iteration: u32,
    ) -> crate::autotuner::SynthesisReport {
        match self {
            OwnedBackend::Mock(b) => b.synthesize(design, f_target_mhz, iteration),
            OwnedBackend::External(b) => b.synthesize(design, f_target_mhz, iteration),
        }
    }
}

fn make_backend(config: &SweepConfig) -> OwnedBackend {
    match config.backend.kind {
        BackendKind::Mock => OwnedBackend::Mock(MockBackend::new(config.backend.model)),
        BackendKind::External => OwnedBackend::External(
            ExternalBackend::new(
                config.backend.cmd_template.clone().unwrap_or_default(),
                config.backend.report_path.clone().unwrap_or_default(),
            )
            .with_timeout(Duration::from_secs(config.backend.timeout_secs)),
        ),
    }
}

/// Read the design keys whose terminal row already exists. Tolerates a torn
/// trailing line from a killed writer.
pub fn read_terminal_keys(csv_path: &Path) -> HashSet<String> {
    let mut keys = HashSet::new();
    let Ok(mut reader) = csv::ReaderBuilder::new().flexible(true).from_path(csv_path) else {
        return keys;
    };
    for record in reader.deserialize::<ResultRow>() {
        let Ok(row) = record else { continue };
        if row.is_terminal() {
            keys.insert(row.design_key());
        }
    }
    keys
}

/// Read every complete row of a results CSV.
pub fn read_rows(csv_path: &Path) -> Result<Vec<ResultRow>, SweepError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(csv_path)
        .map_err(|e| SweepError::CsvIo {
            path: csv_path.to_path_buf(),
            source: std::io::Error::other(e.to_string()),
        })?;
    let mut rows = Vec::new();
    for record in reader.deserialize::<ResultRow>() {
        match record {
            Ok(row) => rows.push(row),
            Err(_) => continue, // torn record from a killed writer
        }
    }
    Ok(rows)
}

fn serialize_rows(rows: &[ResultRow]) -> Result<Vec<u8>, csv::Error> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(writer.into_inner().expect("vec writer never fails"))
}

fn row_for(
    run_id: &str,
    design: &DesignPoint,
    record: &crate::autotuner::IterationRecord,
    stop: Option<StopReason>,
    wall: Duration,
    seed: u64,
) -> ResultRow {
    ResultRow {
        run_id: run_id.to_string(),
        benchmark: design.benchmark.to_string(),
        label: design.label.clone(),
        size: design.size.to_string(),
        width: design.width,
        precision: design.precision.to_string(),
        strategy: design.perm_strategy.to_string(),
        iteration: record.iteration,
        f_target_mhz: record.f_target_mhz,
        wns_ns: record.wns_ns,
        f_achievable_mhz: record.f_achievable_mhz,
        lut: record.report.lut,
        ff: record.report.ff,
        dsp: record.report.dsp,
        bram: record.report.bram,
        stop_reason: stop.map(|s| s.name().to_string()).unwrap_or_default(),
        wall_seconds: wall.as_secs_f64(),
        seed,
    }
}

/// Run the sweep: at most `parallelism` design points in flight, every
/// iteration appended as a ResultRow through one serialized writer.
pub fn run_sweep(config: &SweepConfig, resume: bool) -> Result<SweepSummary, SweepError> {
    config.validate()?;
    let all_points = enumerate_sweep(config);
    let run_id = config.run_id();

    let done = if resume && config.out_csv.exists() {
        read_terminal_keys(&config.out_csv)
    } else {
        HashSet::new()
    };
    let (pending, skipped): (Vec<_>, Vec<_>) = all_points
        .iter()
        .cloned()
        .partition(|d| !done.contains(&d.key()));

    let mut summary = SweepSummary {
        total_points: all_points.len(),
        skipped: skipped.len(),
        ..SweepSummary::default()
    };

    // Open for append; a fresh (or empty) file gets the header first, and a
    // file whose last record was torn by a kill gets its newline back so the
    // torn record stays isolated.
    let unterminated = std::fs::read(&config.out_csv)
        .ok()
        .map(|bytes| !bytes.is_empty() && bytes.last() != Some(&b'\n'))
        .unwrap_or(false);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&config.out_csv)
        .map_err(|source| SweepError::CsvIo {
            path: config.out_csv.clone(),
            source,
        })?;
    let empty = file
        .metadata()
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    if empty {
        file.write_all(format!("{CSV_HEADER}\n").as_bytes())
            .map_err(|source| SweepError::CsvIo {
                path: config.out_csv.clone(),
                source,
            })?;
        file.flush().ok();
    } else if unterminated {
        file.write_all(b"\n").map_err(|source| SweepError::CsvIo {
            path: config.out_csv.clone(),
            source,
        })?;
    }

    if pending.is_empty() {
        return Ok(summary);
    }

    let backend = make_backend(config);
    let pending_count = pending.len();
    let queue = Mutex::new(VecDeque::from(pending));
    let (tx, rx) = mpsc::channel::<Vec<ResultRow>>();
    let (done_tx, done_rx) = mpsc::channel::<(Option<StopReason>, bool)>();
    let workers = config.parallelism.min(pending_count).max(1);
    let csv_path = config.out_csv.clone();

    std::thread::scope(|scope| -> Result<(), SweepError> {
        // Single serialized writer: one write per design's row batch.
        let writer = scope.spawn(move || -> Result<(), SweepError> {
            for rows in rx {
                let bytes = serialize_rows(&rows)?;
                file.write_all(&bytes).map_err(|source| SweepError::CsvIo {
                    path: csv_path.clone(),
                    source,
                })?;
                file.flush().map_err(|source| SweepError::CsvIo {
                    path: csv_path.clone(),
                    source,
                })?;
            }
            Ok(())
        });

        for _ in 0..workers {
            let tx = tx.clone();
            let done_tx = done_tx.clone();
            let queue = &queue;
            let backend = &backend;
            let params = config.tuning;
            let run_id = run_id.clone();
            scope.spawn(move || {
                loop {
                    let design = {
                        let mut q = queue.lock().expect("queue poisoned");
                        match q.pop_front() {
                            Some(d) => d,
                            None => break,
                        }
                    };
                    let seed = hash::design_seed(&design.key(), params.seed);
                    let mut rows = Vec::new();
                    let mut last = Instant::now();
                    let result = crate::autotuner::tune_observed(
                        &design,
                        backend,
                        &params,
                        |record, stop| {
                            let now = Instant::now();
                            rows.push(row_for(&run_id, &design, record, stop, now - last, seed));
                            last = now;
                        },
                    );
                    let outcome = match result {
                        Ok(state) => (
                            state.stop_reason,
                            state.stop_reason == Some(StopReason::ToolError),
                        ),
                        Err(_) => (None, true),
                    };
                    let _ = tx.send(rows);
                    let _ = done_tx.send(outcome);
                }
            });
        }
        drop(tx);
        drop(done_tx);

        for (stop, failed) in done_rx {
            summary.completed += 1;
            if failed {
                summary.failed += 1;
            }
            if let Some(reason) = stop {
                *summary.by_reason.entry(reason.name().to_string()).or_insert(0) += 1;
            }
        }
        writer.join().expect("writer panicked")?;
        Ok(())
    })?;

    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SweepConfig {
        SweepConfig {
            benchmarks: vec![BenchmarkKind::Fft],
            sizes: BTreeMap::from([(
                BenchmarkKind::Fft,
                vec![KernelSize::N(16), KernelSize::N(64)],
            )]),
            widths: vec![2, 4],
            ..SweepConfig::default()
        }
    }

    #[test]
    fn fft_enumeration_applies_power_filter() {
        let points = enumerate_sweep(&base_config());
        let keys: Vec<String> = points.iter().map(|d| d.key()).collect();
        assert_eq!(
            keys,
            vec![
                "fft-16-w2-c32-sms",
                "fft-16-w4-c32-sms",
                "fft-64-w2-c32-sms",
                "fft-64-w4-c32-sms",
            ]
        );
    }

    #[test]
    fn empty_widths_give_empty_sweep() {
        let config = SweepConfig {
            widths: Vec::new(),
            ..base_config()
        };
        assert!(enumerate_sweep(&config).is_empty());
    }

    #[test]
    fn duplicates_are_removed() {
        let mut config = base_config();
        config
            .sizes
            .get_mut(&BenchmarkKind::Fft)
            .unwrap()
            .push(KernelSize::N(16));
        let points = enumerate_sweep(&config);
        assert_eq!(points.len(), 4);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let config = SweepConfig {
            benchmarks: BenchmarkKind::ALL.to_vec(),
            perm_strategies: vec![PermStrategy::Sms, PermStrategy::Registers],
            ..SweepConfig::default()
        };
        let a: Vec<String> = enumerate_sweep(&config).iter().map(|d| d.key()).collect();
        let b: Vec<String> = enumerate_sweep(&config).iter().map(|d| d.key()).collect();
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(a, sorted);
    }

    #[test]
    fn qr_couples_width_to_shape_and_realifies_precision() {
        let config = SweepConfig {
            benchmarks: vec![BenchmarkKind::Qr],
            ..SweepConfig::default()
        };
        let points = enumerate_sweep(&config);
        assert_eq!(points.len(), 4);
        for d in &points {
            let KernelSize::Pair([rows, cols]) = d.size else {
                panic!()
            };
            assert_eq!(rows, 4 * d.width);
            assert_eq!(cols, 2 * d.width);
            assert_eq!(d.precision, Precision::R32);
        }
    }

    #[test]
    fn strategies_collapse_for_benchmarks_without_perms() {
        let config = SweepConfig {
            benchmarks: vec![BenchmarkKind::Gemm, BenchmarkKind::Permutation],
            perm_strategies: vec![PermStrategy::Sms, PermStrategy::Registers],
            sizes: BTreeMap::from([
                (BenchmarkKind::Gemm, vec![KernelSize::N(4)]),
                (BenchmarkKind::Permutation, vec![KernelSize::N(16)]),
            ]),
            widths: vec![4],
            ..SweepConfig::default()
        };
        let points = enumerate_sweep(&config);
        let gemm: Vec<_> = points
            .iter()
            .filter(|d| d.benchmark == BenchmarkKind::Gemm)
            .collect();
        let perm: Vec<_> = points
            .iter()
            .filter(|d| d.benchmark == BenchmarkKind::Permutation)
            .collect();
        assert_eq!(gemm.len(), 1);
        assert_eq!(perm.len(), 2);
    }

    #[test]
    fn validation_collects_all_problems() {
        let config = SweepConfig {
            widths: vec![3, 5],
            parallelism: 0,
            ..base_config()
        };
        let Err(ConfigError::Invalid { problems }) = config.validate() else {
            panic!("expected invalid config")
        };
        assert!(problems.iter().any(|p| p.contains("3")));
        assert!(problems.iter().any(|p| p.contains("5")));
        assert!(problems.iter().any(|p| p.contains("parallelism")));
    }

    #[test]
    fn row_serialization_matches_header() {
        let row = ResultRow {
            run_id: "r".into(),
            benchmark: "fft".into(),
            label: String::new(),
            size: "16".into(),
            width: 4,
            precision: "c32".into(),
            strategy: "sms".into(),
            iteration: 0,
            f_target_mhz: 100.0,
            wns_ns: -0.5,
            f_achievable_mhz: 95.2,
            lut: 10,
            ff: 20,
            dsp: 2,
            bram: 1,
            stop_reason: "stable".into(),
            wall_seconds: 0.001,
            seed: 42,
        };
        let bytes = serialize_rows(&[row]).unwrap();
        let line = String::from_utf8(bytes).unwrap();
        assert_eq!(line.matches(',').count(), CSV_HEADER.matches(',').count());
        assert!(line.ends_with('\n'));
    }
}
