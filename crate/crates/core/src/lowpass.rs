//! Band-limiting filters for producing LR training/evaluation inputs.
//!
//! Neither filter resamples: the output keeps the input rate and length.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stft::{bin_index, Stft, StftConfig};
use crate::waveform::Waveform;

pub const DEFAULT_CUTOFF_HZ: f64 = 4000.0;
pub const DEFAULT_TAPS: usize = 511;
pub const MIN_TAPS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirWindow {
    #[default]
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMode {
    /// Zero every STFT bin at or above the cutoff bin, then resynthesize.
    #[default]
    Brickwall,
    /// Forward-backward windowed-sinc FIR.
    FirSinc { taps: usize, window: FirWindow },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowpassSpec {
    pub mode: FilterMode,
    pub cutoff_hz: f64,
}

impl Default for LowpassSpec {
    fn default() -> Self {
        LowpassSpec {
            mode: FilterMode::Brickwall,
            cutoff_hz: DEFAULT_CUTOFF_HZ,
        }
    }
}

impl LowpassSpec {
    pub fn fir(taps: usize, cutoff_hz: f64) -> Self {
        LowpassSpec {
            mode: FilterMode::FirSinc {
                taps,
                window: FirWindow::Hamming,
            },
            cutoff_hz,
        }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.cutoff_hz > 0.0 && self.cutoff_hz < nyquist) {
            return Err(Error::Domain(
                "cutoff must lie strictly between 0 and nyquist",
            ));
        }
        if let FilterMode::FirSinc { taps, .. } = self.mode {
            if taps % 2 == 0 || taps < MIN_TAPS {
                return Err(Error::Domain("FIR tap count must be odd and at least 11"));
            }
        }
        Ok(())
    }
}

/// Hamming-windowed sinc low-pass with unit DC gain.
pub fn design_fir(
    taps: usize,
    cutoff_hz: f64,
    sample_rate: u32,
    window: FirWindow,
) -> Result<Vec<f64>> {
    LowpassSpec {
        mode: FilterMode::FirSinc { taps, window },
        cutoff_hz,
    }
    .validate(sample_rate)?;
    let fc = cutoff_hz / sample_rate as f64;
    let mid = (taps / 2) as f64;
    let mut h: Vec<f64> = (0..taps)
        .map(|n| {
            let t = n as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                libm::sin(2.0 * PI * fc * t) / (PI * t)
            };
            let w = match window {
                FirWindow::Hamming => {
                    0.54 - 0.46 * libm::cos(2.0 * PI * n as f64 / (taps - 1) as f64)
                }
            };
            sinc * w
        })
        .collect();
    let dc: f64 = h.iter().sum();
    for v in h.iter_mut() {
        *v /= dc;
    }
    Ok(h)
}

/// `|H(e^{i 2 pi f / fs})|` of an FIR filter.
pub fn fir_response(h: &[f64], freq_hz: f64, sample_rate: u32) -> f64 {
    let w = 2.0 * PI * freq_hz / sample_rate as f64;
    h.iter()
        .enumerate()
        .map(|(n, &c)| Complex64::from_polar(c, -w * n as f64))
        .sum::<Complex64>()
        .norm()
}

fn convolve_causal(h: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for (n, out) in y.iter_mut().enumerate() {
        let start = (n + 1).saturating_sub(h.len());
        let mut acc = 0.0;
        for (j, &xv) in x[start..=n].iter().enumerate() {
            acc += h[n - start - j] * xv;
        }
        *out = acc;
    }
    y
}

/// Zero-phase filtering with odd-reflection edge padding.
pub fn filtfilt(h: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let pad = (3 * h.len()).min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    let mut y = convolve_causal(h, &ext);
    y.reverse();
    let mut y = convolve_causal(h, &y);
    y.reverse();
    y[pad..pad + n].to_vec()
}

/// Band-limit `x` below `spec.cutoff_hz`; output has the same length and rate.
pub fn lowpass(x: &Waveform, spec: &LowpassSpec, config: &StftConfig) -> Result<Waveform> {
    spec.validate(x.sample_rate())?;
    match spec.mode {
        FilterMode::Brickwall => brickwall(x, spec.cutoff_hz, config),
        FilterMode::FirSinc { taps, window } => {
            let h = design_fir(taps, spec.cutoff_hz, x.sample_rate(), window)?;
            Waveform::new(filtfilt(&h, x.samples()), x.sample_rate())
        }
    }
}

fn brickwall(x: &Waveform, cutoff_hz: f64, config: &StftConfig) -> Result<Waveform> {
    let n = x.len();
    if n == 0 {
        return Ok(x.clone());
    }
    let cutoff = bin_index(cutoff_hz, x.sample_rate(), config.frame_len())?;
    let frame_len = config.frame_len();
    let hop = config.hop();
    // Whole hops of leading silence keep frame boundaries aligned with an
    // unpadded analysis while giving sample 0 full window coverage.
    let lead = frame_len.div_ceil(hop) * hop;
    let body = lead + n + frame_len;
    let total = frame_len + (body - frame_len).div_ceil(hop) * hop;
    let mut padded = vec![0.0; total];
    padded[lead..lead + n].copy_from_slice(x.samples());

    let plan = Stft::new(*config);
    let mut spec = plan.analyze(&padded)?;
    let bins = config.bins();
    for row in spec.rows_mut() {
        for z in &mut row[cutoff.min(bins)..] {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    let y = plan.synthesize(&spec)?;
    Waveform::new(y[lead..lead + n].to_vec(), x.sample_rate())
}
