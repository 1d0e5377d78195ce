//! External-command backend against stub synthesis scripts.

use forge::autotuner::{ExternalBackend, ReportStatus, SynthesisBackend};
use forge::kernels::{BenchmarkKind, DesignPoint, KernelSize};
use forge::sample::Precision;
use forge::PermStrategy;
use std::path::Path;
use std::time::Duration;

fn design() -> DesignPoint {
    DesignPoint::new(
        BenchmarkKind::Fft,
        KernelSize::N(16),
        4,
        Precision::C32,
        PermStrategy::Sms,
    )
}

fn write_script(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn stub_script_round_trips_its_values() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(
        dir.path(),
        "synth.sh",
        "#!/bin/sh\n\
         out=\"$1\"\n\
         {\n\
           echo \"# design $2 at $3 MHz\"\n\
           echo \"WNS_NS=-0.375\"\n\
           echo \"LUT=2048\"\n\
           echo \"FF=4096\"\n\
           echo \"DSP=16\"\n\
           echo \"BRAM=2\"\n\
         } > \"$out/report.txt\"\n",
    );
    let backend = ExternalBackend::new(
        format!("sh {script} {{outdir}} {{design}} {{freq_mhz}}"),
        "{outdir}/report.txt",
    )
    .with_timeout(Duration::from_secs(30));
    let report = backend.synthesize(&design(), 250.0, 0);
    assert_eq!(report.status, ReportStatus::Ok);
    assert_eq!(report.wns_ns, -0.375);
    assert_eq!(report.lut, 2048);
    assert_eq!(report.ff, 4096);
    assert_eq!(report.dsp, 16);
    assert_eq!(report.bram, 2);
    assert!(!report.missing_resources);
}

#[test]
fn missing_report_is_a_tool_error() {
    let backend = ExternalBackend::new("true", "{outdir}/never_written.txt");
    let report = backend.synthesize(&design(), 250.0, 0);
    assert_eq!(report.status, ReportStatus::ToolError);
    assert!(report.detail.unwrap().contains("missing report"));
}

#[test]
fn nonzero_exit_is_a_tool_error() {
    let backend = ExternalBackend::new("exit 3", "{outdir}/report.txt");
    let report = backend.synthesize(&design(), 250.0, 0);
    assert_eq!(report.status, ReportStatus::ToolError);
    assert!(report.detail.unwrap().contains("exited"));
}

#[test]
fn sleeping_stub_hits_the_timeout() {
    let backend = ExternalBackend::new("sleep 30", "{outdir}/report.txt")
        .with_timeout(Duration::from_secs(1));
    let start = std::time::Instant::now();
    let report = backend.synthesize(&design(), 250.0, 0);
    assert_eq!(report.status, ReportStatus::ToolError);
    assert!(report.detail.unwrap().contains("timeout"));
    assert!(start.elapsed() < Duration::from_secs(10));
}

#[test]
fn unparseable_report_is_a_tool_error() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(
        dir.path(),
        "bad.sh",
        "#!/bin/sh\necho 'nothing useful' > \"$1/report.txt\"\n",
    );
    let backend =
        ExternalBackend::new(format!("sh {script} {{outdir}}"), "{outdir}/report.txt");
    let report = backend.synthesize(&design(), 250.0, 0);
    assert_eq!(report.status, ReportStatus::ToolError);
    assert!(report.detail.unwrap().contains("parse"));
}
