//! External-command synthesis backend: runs a user-supplied tool invocation
//! per (design, frequency) pair and parses the report file it writes.
//!
//! The command template and report path may use the placeholders `{design}`
//! (the design key), `{freq_mhz}`, and `{outdir}` (a per-call scratch
//! directory the backend creates and removes). Nonzero exit status, timeout,
//! or a missing/unparseable report all surface as tool errors; the sweep
//! records them and moves on.

use super::{parse_report, SynthesisBackend, SynthesisReport};
use crate::kernels::DesignPoint;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct ExternalBackend {
    pub cmd_template: String,
    /// Location of the report the command writes; supports placeholders.
    pub report_path: String,
    pub timeout: Duration,
}

impl ExternalBackend {
    pub fn new(cmd_template: impl Into<String>, report_path: impl Into<String>) -> ExternalBackend {
        ExternalBackend {
            cmd_template: cmd_template.into(),
            report_path: report_path.into(),
            timeout: Duration::from_secs(600),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> ExternalBackend {
        self.timeout = timeout;
        self
    }
}

fn substitute(template: &str, design: &DesignPoint, f_mhz: f64, outdir: &Path) -> String {
    template
        .replace("{design}", &design.key())
        .replace("{freq_mhz}", &format!("{f_mhz}"))
        .replace("{outdir}", &outdir.to_string_lossy())
}

/// Run the child with a wall-clock deadline, polling for completion.
fn run_with_timeout(mut cmd: Command, timeout: Duration) -> Result<std::process::ExitStatus, String> {
    let mut child = cmd
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("spawn failed: {e}"))?;
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(status)) => return Ok(status),
            Ok(None) => {
                if start.elapsed() > timeout {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(format!("timeout after {}s", timeout.as_secs()));
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return Err(format!("wait failed: {e}")),
        }
    }
}

pub fn external_synthesize(
    backend: &ExternalBackend,
    design: &DesignPoint,
    f_target_mhz: f64,
) -> SynthesisReport {
    let scratch = match tempfile::Builder::new().prefix("forge-synth-").tempdir() {
        Ok(dir) => dir,
        Err(e) => return SynthesisReport::failed(format!("scratch dir: {e}")),
    };
    let cmdline = substitute(&backend.cmd_template, design, f_target_mhz, scratch.path());
    let mut cmd = Command::new("sh");
    cmd.arg("-c").arg(&cmdline);
    match run_with_timeout(cmd, backend.timeout) {
        Ok(status) if status.success() => {}
        Ok(status) => {
            return SynthesisReport::failed(format!("command exited with {status}: {cmdline}"))
        }
        Err(e) => return SynthesisReport::failed(format!("{e}: {cmdline}")),
    }

    let report_path = substitute(&backend.report_path, design, f_target_mhz, scratch.path());
    let text = match std::fs::read_to_string(&report_path) {
        Ok(text) => text,
        Err(e) => return SynthesisReport::failed(format!("missing report {report_path}: {e}")),
    };
    match parse_report(&text) {
        Ok(report) => report,
        Err(e) => SynthesisReport::failed(format!("report parse: {e}")),
    }
}

impl SynthesisBackend for ExternalBackend {
    fn synthesize(&self, design: &DesignPoint, f_target_mhz: f64, _iteration: u32) -> SynthesisReport {
        external_synthesize(self, design, f_target_mhz)
    }
}
