//! Synthesis report parsing.
//!
//! Primary grammar, one entry per line, order-free, `#` starts a comment:
//!
//! ```text
//! WNS_NS=-0.123
//! LUT=4521
//! FF=9000
//! DSP=12
//! BRAM=3
//! ```
//!
//! When the primary grammar does not apply, a vendor-style timing summary is
//! scanned for the `WNS(ns)` column header and the first float two lines
//! below it. A report without a readable WNS is a tool error; missing
//! resource counts merely default to zero with the warning flag set.

use super::{ReportStatus, SynthesisReport};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("no WNS value found in report")]
    MissingWns,
    #[error("malformed value for {key}: {value:?}")]
    BadValue { key: String, value: String },
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Parse under the primary KEY=VALUE grammar. Returns None when any
/// non-blank line does not fit the grammar.
fn parse_primary(text: &str) -> Option<Result<SynthesisReport, ReportError>> {
    let mut wns: Option<f64> = None;
    let mut lut: Option<u64> = None;
    let mut ff: Option<u64> = None;
    let mut dsp: Option<u64> = None;
    let mut bram: Option<u64> = None;

    for raw in text.lines() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=')?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "WNS_NS" => match value.parse::<f64>() {
                Ok(v) if v.is_finite() => wns = Some(v),
                _ => {
                    return Some(Err(ReportError::BadValue {
                        key: key.to_string(),
                        value: value.to_string(),
                    }))
                }
            },
            "LUT" | "FF" | "DSP" | "BRAM" => {
                let parsed = match value.parse::<u64>() {
                    Ok(v) => v,
                    Err(_) => {
                        return Some(Err(ReportError::BadValue {
                            key: key.to_string(),
                            value: value.to_string(),
                        }))
                    }
                };
                match key {
                    "LUT" => lut = Some(parsed),
                    "FF" => ff = Some(parsed),
                    "DSP" => dsp = Some(parsed),
                    _ => bram = Some(parsed),
                }
            }
            _ => return None, // unknown key: not the primary grammar
        }
    }

    let Some(wns) = wns else {
        return Some(Err(ReportError::MissingWns));
    };
    let missing = lut.is_none() || ff.is_none() || dsp.is_none() || bram.is_none();
    Some(Ok(SynthesisReport {
        wns_ns: wns,
        lut: lut.unwrap_or(0),
        ff: ff.unwrap_or(0),
        dsp: dsp.unwrap_or(0),
        bram: bram.unwrap_or(0),
        status: ReportStatus::Ok,
        missing_resources: missing,
        detail: None,
    }))
}

fn first_float(line: &str) -> Option<f64> {
    line.split_whitespace()
        .find_map(|tok| tok.parse::<f64>().ok().filter(|v| v.is_finite()))
}

/// Vendor-style fallback: locate the `WNS(ns)` token and take the first
/// float two lines below it.
fn parse_vendor(text: &str) -> Result<SynthesisReport, ReportError> {
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        if line.contains("WNS(ns)") {
            let Some(value_line) = lines.get(i + 2) else {
                return Err(ReportError::MissingWns);
            };
            let Some(wns) = first_float(value_line) else {
                return Err(ReportError::MissingWns);
            };
            return Ok(SynthesisReport {
                wns_ns: wns,
                lut: 0,
                ff: 0,
                dsp: 0,
                bram: 0,
                status: ReportStatus::Ok,
                missing_resources: true,
                detail: None,
            });
        }
    }
    Err(ReportError::MissingWns)
}

/// Parse a synthesis report in either supported shape.
pub fn parse_report(text: &str) -> Result<SynthesisReport, ReportError> {
    match parse_primary(text) {
        Some(result) => result,
        None => parse_vendor(text),
    }
}
