//! Short-time Fourier analysis and weighted overlap-add synthesis.
//!
//! Frames start at sample 0 with no center padding, so a signal of `n`
//! samples yields `1 + (n - frame_len) / hop` frames. Synthesis divides the
//! overlap-added frames by the overlapped squared window, floored at
//! [`NORM_FLOOR`].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::RealFft;
use crate::spectrogram::{ComplexSpectrogram, Spectrogram};
use crate::waveform::Waveform;

/// Lower bound on the squared-window sum used as the synthesis divisor.
pub const NORM_FLOOR: f64 = 1e-12;

pub const DEFAULT_FRAME_LEN: usize = 2048;
pub const DEFAULT_HOP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Periodic Hann, `0.5 - 0.5 cos(2 pi n / N)`.
    #[default]
    Hann,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * libm::cos(2.0 * PI * n as f64 / len as f64))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    frame_len: usize,
    hop: usize,
    window: Window,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            frame_len: DEFAULT_FRAME_LEN,
            hop: DEFAULT_HOP,
            window: Window::Hann,
        }
    }
}

impl StftConfig {
    /// Hann-windowed config; `frame_len` must be even and `0 < hop <= frame_len`.
    pub fn new(frame_len: usize, hop: usize) -> Result<Self> {
        Self::with_window(frame_len, hop, Window::Hann)
    }

    pub fn with_window(frame_len: usize, hop: usize, window: Window) -> Result<Self> {
        if frame_len < 2 || !frame_len.is_multiple_of(2) {
            return Err(Error::Domain("frame length must be even and at least 2"));
        }
        if hop == 0 || hop > frame_len {
            return Err(Error::Domain("hop must satisfy 0 < hop <= frame length"));
        }
        Ok(StftConfig {
            frame_len,
            hop,
            window,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// One-sided bin count, `frame_len / 2 + 1`.
    pub fn bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    /// Frames produced by a signal of `len` samples, or 0 if shorter than a frame.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            1 + (len - self.frame_len) / self.hop
        }
    }

    /// Samples produced by synthesizing `frames` frames.
    pub fn synthesis_len(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            (frames - 1) * self.hop + self.frame_len
        }
    }
}

/// Nearest bin to `freq_hz`, clamped to `[0, frame_len/2 + 1]`.
pub fn bin_index(freq_hz: f64, sample_rate: u32, frame_len: usize) -> Result<usize> {
    if sample_rate == 0 {
        return Err(Error::Domain("sample rate must be positive"));
    }
    let nyquist = sample_rate as f64 / 2.0;
    if !(0.0..=nyquist).contains(&freq_hz) {
        return Err(Error::Domain("frequency outside [0, nyquist]"));
    }
    let bin = libm::round(freq_hz * frame_len as f64 / sample_rate as f64) as usize;
    Ok(bin.min(frame_len / 2 + 1))
}

/// Reusable analysis/synthesis plan for one [`StftConfig`].
#[derive(Debug, Clone)]
pub struct Stft {
    config: StftConfig,
    window: Vec<f64>,
    fft: RealFft,
}

impl Stft {
    pub fn new(config: StftConfig) -> Self {
        Stft {
            window: config.window.coefficients(config.frame_len),
            fft: RealFft::new(config.frame_len),
            config,
        }
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Forward transform of raw samples.
    pub fn analyze(&self, x: &[f64]) -> Result<ComplexSpectrogram> {
        let n = self.config.frame_len;
        if x.len() < n {
            return Err(Error::Length {
                needed: n,
                got: x.len(),
            });
        }
        let frames = self.config.frame_count(x.len());
        let bins = self.config.bins();
        let mut data = vec![Complex64::new(0.0, 0.0); frames * bins];
        let mut frame = vec![0.0; n];
        for (l, out) in data.chunks_exact_mut(bins).enumerate() {
            let start = l * self.config.hop;
            for ((f, &s), &w) in frame.iter_mut().zip(&x[start..start + n]).zip(&self.window) {
                *f = s * w;
            }
            self.fft.forward(&frame, out);
        }
        Ok(Spectrogram::from_parts_unchecked(
            data,
            frames,
            bins,
            0,
            self.config,
        ))
    }

    /// Weighted overlap-add synthesis of a full spectrogram.
    pub fn synthesize(&self, spec: &ComplexSpectrogram) -> Result<Vec<f64>> {
        self.check_full(spec)?;
        let n = self.config.frame_len;
        let hop = self.config.hop;
        let frames = spec.frames();
        let len = self.config.synthesis_len(frames);
        let mut out = vec![0.0; len];
        let mut norm = vec![0.0; len];
        let mut frame = vec![0.0; n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); n / 2];
        for (l, bins) in spec.rows().enumerate() {
            self.fft.inverse(bins, &mut frame, &mut scratch);
            let start = l * hop;
            for (i, (&f, &w)) in frame.iter().zip(&self.window).enumerate() {
                out[start + i] += f * w;
                norm[start + i] += w * w;
            }
        }
        for (o, &d) in out.iter_mut().zip(&norm) {
            *o /= d.max(NORM_FLOOR);
        }
        Ok(out)
    }

    /// `stft(istft(X))`, keeping the frame count of `X`.
    pub fn project(&self, spec: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        if spec.frames() == 0 {
            self.check_full(spec)?;
            return Ok(spec.clone());
        }
        let x = self.synthesize(spec)?;
        let projected = self.analyze(&x)?;
        debug_assert_eq!(projected.frames(), spec.frames());
        Ok(projected)
    }

    fn check_full(&self, spec: &ComplexSpectrogram) -> Result<()> {
        if spec.config() != &self.config {
            return Err(Error::InvalidValue("spectrogram config differs from plan"));
        }
        if !spec.is_full() {
            return Err(Error::shape(
                (spec.frames(), self.config.bins()),
                (spec.frames(), spec.bins()),
            ));
        }
        Ok(())
    }
}

pub fn stft(x: &Waveform, config: &StftConfig) -> Result<ComplexSpectrogram> {
    Stft::new(*config).analyze(x.samples())
}

/// Output length is `(L - 1) * hop + frame_len`.
pub fn istft(spec: &ComplexSpectrogram, sample_rate: u32) -> Result<Waveform> {
    let samples = Stft::new(*spec.config()).synthesize(spec)?;
    Waveform::new(samples, sample_rate)
}

/// Projection onto the set of consistent spectrograms.
pub fn consistency_project(spec: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
    Stft::new(*spec.config()).project(spec)
}
