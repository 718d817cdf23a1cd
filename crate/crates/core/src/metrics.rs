//! Objective quality measures.

use core::ops::Range;

use crate::band::BandLayout;
use crate::error::{Error, Result};
use crate::phase::RESIDUAL_FLOOR;
use crate::spectrogram::{ComplexSpectrogram, MagnitudeSpectrogram};
use crate::stft::Stft;
use crate::waveform::Waveform;

/// Power floor inside the log of [`lsd`].
pub const LSD_POWER_FLOOR: f64 = 1e-10;

/// Relative floor on residual energy in [`snr`]; caps the result at 120 dB.
pub const SNR_FLOOR: f64 = 1e-12;

/// `10 log10(m^2 + 1e-10)`.
pub fn log_power(m: f64) -> f64 {
    10.0 * libm::log10(m * m + LSD_POWER_FLOOR)
}

fn check_bins(
    truth: &MagnitudeSpectrogram,
    estimate: &MagnitudeSpectrogram,
    bins: &Range<usize>,
) -> Result<()> {
    if truth.shape() != estimate.shape() || truth.first_bin() != estimate.first_bin() {
        return Err(Error::shape(truth.shape(), estimate.shape()));
    }
    if bins.is_empty() {
        return Err(Error::Domain("empty bin range"));
    }
    if bins.start < truth.first_bin() || bins.end > truth.first_bin() + truth.bins() {
        return Err(Error::Domain("bin range outside the spectrogram"));
    }
    if truth.frames() == 0 {
        return Err(Error::Domain("no frames to compare"));
    }
    Ok(())
}

/// Per-frame RMS log-power difference over `bins`, in dB.
///
/// `bins` is given in absolute bin indices.
pub fn lsd_per_frame<'a>(
    truth: &'a MagnitudeSpectrogram,
    estimate: &'a MagnitudeSpectrogram,
    bins: Range<usize>,
) -> Result<impl Iterator<Item = f64> + 'a> {
    check_bins(truth, estimate, &bins)?;
    let lo = bins.start - truth.first_bin();
    let hi = bins.end - truth.first_bin();
    let count = (hi - lo) as f64;
    Ok(truth.rows().zip(estimate.rows()).map(move |(t, e)| {
        let sum: f64 = t[lo..hi]
            .iter()
            .zip(&e[lo..hi])
            .map(|(a, b)| {
                let d = log_power(a.0) - log_power(b.0);
                d * d
            })
            .sum();
        libm::sqrt(sum / count)
    }))
}

/// Log-spectral distance in dB, averaged over frames.
pub fn lsd(
    truth: &MagnitudeSpectrogram,
    estimate: &MagnitudeSpectrogram,
    bins: Range<usize>,
) -> Result<f64> {
    let frames = truth.frames() as f64;
    Ok(lsd_per_frame(truth, estimate, bins)?.sum::<f64>() / frames)
}

/// `10 log10(E_truth / max(E_residual, 1e-12 E_truth))`.
pub fn snr(truth: &Waveform, estimate: &Waveform) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::Shape {
            expected_frames: truth.len(),
            expected_bins: 1,
            got_frames: estimate.len(),
            got_bins: 1,
        });
    }
    if truth.sample_rate() != estimate.sample_rate() {
        return Err(Error::Domain("sample rates differ"));
    }
    snr_samples(truth.samples(), estimate.samples())
}

pub fn snr_samples(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    let signal: f64 = truth.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::Domain("reference signal has zero energy"));
    }
    let noise: f64 = truth
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(10.0 * libm::log10(signal / noise.max(SNR_FLOOR * signal)))
}

/// `||X - P_C(X)||_F / max(||X||_F, 1e-12)`.
pub fn consistency_residual(spec: &ComplexSpectrogram) -> Result<f64> {
    let projected = Stft::new(*spec.config()).project(spec)?;
    let mut diff = 0.0;
    for (a, b) in spec.data().iter().zip(projected.data()) {
        diff += (a - b).norm_sqr();
    }
    Ok(libm::sqrt(diff) / spec.norm().max(RESIDUAL_FLOOR))
}

/// One evaluation row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub lsd_hf: f64,
    pub lsd_full: f64,
    pub snr: f64,
    pub frames_compared: usize,
    pub band: BandLayout,
}
