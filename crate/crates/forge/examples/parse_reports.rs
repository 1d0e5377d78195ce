//! Parse synthesis reports in both supported shapes, and drive the
//! external-command backend with a stub synthesis script.
//!
//! ```bash
//! cargo run --release -p forge --example parse_reports
//! ```

use anyhow::Result;
use forge::autotuner::{parse_report, ExternalBackend, SynthesisBackend};
use forge::kernels::{BenchmarkKind, DesignPoint, KernelSize};
use forge::sample::Precision;
use forge::PermStrategy;
use std::time::Duration;

const PRIMARY: &str = "\
# produced by a synthesis wrapper
WNS_NS=-0.123
LUT=4521
FF=9042
DSP=12
BRAM=3
";

const VENDOR: &str = "\
------------------------------------------------------------
| Design Timing Summary
------------------------------------------------------------

    WNS(ns)      TNS(ns)  TNS Failing Endpoints
    -------      -------  ---------------------
     -0.237       -12.40                     18
";

fn main() -> Result<()> {
    let primary = parse_report(PRIMARY)?;
    println!(
        "primary grammar : wns = {} ns, lut = {}, ff = {}, dsp = {}, bram = {}",
        primary.wns_ns, primary.lut, primary.ff, primary.dsp, primary.bram
    );

    let vendor = parse_report(VENDOR)?;
    println!(
        "vendor summary  : wns = {} ns (resources defaulted: {})",
        vendor.wns_ns, vendor.missing_resources
    );

    match parse_report("no slack in sight") {
        Ok(_) => println!("unexpected parse"),
        Err(e) => println!("garbage input   : rejected ({e})"),
    }

    // External backend against a stub "synthesis tool" that writes the
    // primary grammar. The template placeholders carry the design key,
    // target frequency, and a scratch directory.
    let dir = tempfile::tempdir()?;
    let script = dir.path().join("stub_synth.sh");
    std::fs::write(
        &script,
        "#!/bin/sh\nprintf 'WNS_NS=-0.25\\nLUT=1234\\nFF=2000\\nDSP=8\\nBRAM=1\\n' > \"$1/report.txt\"\n",
    )?;
    let backend = ExternalBackend::new(
        format!("sh {} {{outdir}} {{design}} {{freq_mhz}}", script.display()),
        "{outdir}/report.txt",
    )
    .with_timeout(Duration::from_secs(10));
    let design = DesignPoint::new(
        BenchmarkKind::Fft,
        KernelSize::N(16),
        4,
        Precision::C32,
        PermStrategy::Sms,
    );
    let report = backend.synthesize(&design, 300.0, 0);
    println!(
        "external backend: wns = {} ns, lut = {} (status {:?})",
        report.wns_ns, report.lut, report.status
    );
    Ok(())
}
