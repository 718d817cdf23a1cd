//! Evaluation of reconstructions against ground truth, and the CSV reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bwx_core::metrics::{snr_samples, LSD_POWER_FLOOR, SNR_FLOOR};
use bwx_core::{lsd, BandLayout, EvalReport, GlaTrace, Stft, StftConfig, Waveform};
use log::warn;

use crate::error::{Error, Result, Stage, StageExt};
use crate::wav::read_wav;

pub const CSV_HEADER: &str = "file,method,lsd_hf_db,lsd_full_db,snr_db,frames";

/// `file` value of the aggregate rows.
pub const MEAN_LABEL: &str = "mean";

/// Decimal rendering with at least `sig` significant digits, never exponent
/// notation.
pub fn format_significant(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", sig.saturating_sub(1), v);
    }
    let exp = v.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn trace_csv(trace: &GlaTrace) -> String {
    let mut out = String::from("iteration,residual\n");
    for (i, r) in trace.residuals.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, format_significant(*r, 12));
    }
    out
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &GlaTrace) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, trace_csv(trace)).map_err(|e| Error::io(path, e))
}

/// Scores `estimate` against `truth`.
///
/// Reconstructions are at most one frame shorter than their input, so both
/// signals are cut to the common length; larger differences are an error.
/// LSD is taken over all frames of that span, SNR over interior samples
/// (`frame_len` trimmed at each end) when the signal is long enough.
pub fn evaluate(
    truth: &Waveform,
    estimate: &Waveform,
    config: &StftConfig,
    layout: &BandLayout,
) -> Result<EvalReport> {
    (|| -> Result<EvalReport> {
        if truth.sample_rate() != estimate.sample_rate() {
            return Err(Error::Usage(format!(
                "sample rates differ: truth {} Hz, estimate {} Hz",
                truth.sample_rate(),
                estimate.sample_rate()
            )));
        }
        let n = truth.len().min(estimate.len());
        if truth.len().abs_diff(estimate.len()) >= config.frame_len() {
            return Err(bwx_core::Error::Length {
                needed: truth.len(),
                got: estimate.len(),
            }
            .into());
        }
        let (t, e) = (&truth.samples()[..n], &estimate.samples()[..n]);

        let plan = Stft::new(*config);
        let mt = plan.analyze(t)?.magnitude();
        let me = plan.analyze(e)?.magnitude();
        if layout.n_bins() != mt.bins() {
            return Err(
                bwx_core::Error::Layout("band layout does not match the STFT bin count").into(),
            );
        }
        let lsd_hf = lsd(&mt, &me, layout.hfc())?;
        let lsd_full = lsd(&mt, &me, 0..layout.k_hi())?;

        let edge = config.frame_len();
        let (ti, ei) = if n > 2 * edge {
            (&t[edge..n - edge], &e[edge..n - edge])
        } else {
            (t, e)
        };
        let snr = snr_samples(ti, ei)?;
        Ok(EvalReport {
            lsd_hf,
            lsd_full,
            snr,
            frames_compared: mt.frames(),
            band: *layout,
        })
    })()
    .stage(Stage::Evaluation)
}

/// Per-channel evaluation, averaged over channels.
pub fn evaluate_channels(
    truth: &[Waveform],
    estimate: &[Waveform],
    config: &StftConfig,
    layout: &BandLayout,
) -> Result<EvalReport> {
    if truth.len() != estimate.len() || truth.is_empty() {
        return Err(Error::Usage(format!(
            "channel counts differ: truth {}, estimate {}",
            truth.len(),
            estimate.len()
        )));
    }
    let reports = truth
        .iter()
        .zip(estimate)
        .map(|(t, e)| evaluate(t, e, config, layout))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_report(&reports).expect("at least one channel"))
}

pub fn evaluate_files(
    truth: &Path,
    estimate: &Path,
    config: &StftConfig,
    lo_hz: f64,
    hi_hz: f64,
) -> Result<EvalReport> {
    let t = read_wav(truth)?;
    let e = read_wav(estimate)?;
    let layout = BandLayout::from_hz(lo_hz, hi_hz, t.sample_rate(), config)?;
    evaluate_channels(&t.channels, &e.channels, config, &layout)
}

fn mean_report(reports: &[EvalReport]) -> Option<EvalReport> {
    let first = reports.first()?;
    let n = reports.len() as f64;
    let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Some(EvalReport {
        lsd_hf: mean(|r| r.lsd_hf),
        lsd_full: mean(|r| r.lsd_full),
        snr: mean(|r| r.snr),
        frames_compared: reports.iter().map(|r| r.frames_compared).sum::<usize>() / reports.len(),
        band: first.band,
    })
}

/// One CSV line. A failed evaluation keeps its row with NaN metrics.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub file: String,
    pub method: String,
    pub outcome: std::result::Result<EvalReport, String>,
}

impl ReportRow {
    pub fn report(&self) -> Option<&EvalReport> {
        self.outcome.as_ref().ok()
    }

    fn csv_line(&self) -> String {
        let field = |s: &str| {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        match &self.outcome {
            Ok(r) => format!(
                "{},{},{:.4},{:.4},{:.4},{}",
                field(&self.file),
                field(&self.method),
                r.lsd_hf,
                r.lsd_full,
                r.snr,
                r.frames_compared
            ),
            Err(_) => format!(
                "{},{},NaN,NaN,NaN,0",
                field(&self.file),
                field(&self.method)
            ),
        }
    }
}

/// Mean row per method, in first-appearance order, over successful rows.
pub fn mean_rows(rows: &[ReportRow]) -> Vec<ReportRow> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let ok: Vec<EvalReport> = rows
                .iter()
                .filter(|r| r.method == m)
                .filter_map(|r| r.report().copied())
                .collect();
            ReportRow {
                file: MEAN_LABEL.into(),
                method: m.into(),
                outcome: mean_report(&ok).ok_or_else(|| "no successful rows".to_string()),
            }
        })
        .collect()
}

/// CSV text: header, rows, then `#` comment lines carrying the metric floors
/// and any notes.
pub fn report_csv(rows: &[ReportRow], notes: &[String]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "# lsd_power_floor={LSD_POWER_FLOOR:e} snr_floor={SNR_FLOOR:e}"
    );
    for n in notes {
        let _ = writeln!(out, "# {n}");
    }
    out
}

pub fn write_report(path: impl AsRef<Path>, rows: &[ReportRow], notes: &[String]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report_csv(rows, notes)).map_err(|e| Error::io(path, e))
}

/// Scores each `(truth, estimate)` pair in order, then appends the mean row.
/// Failures are logged and kept as NaN rows.
pub fn evaluate_batch(
    pairs: &[(PathBuf, PathBuf)],
    config: &StftConfig,
    lo_hz: f64,
    hi_hz: f64,
) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = pairs
        .iter()
        .map(|(t, e)| {
            let outcome = evaluate_files(t, e, config, lo_hz, hi_hz).map_err(|err| {
                warn!("{} vs {}: {err}", t.display(), e.display());
                err.to_string()
            });
            ReportRow {
                file: e.display().to_string(),
                method: "eval".into(),
                outcome,
            }
        })
        .collect();
    let means = mean_rows(&rows);
    rows.extend(means);
    rows
}
