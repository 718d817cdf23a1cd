//! Frame-major time-frequency grids.
//!
//! A [`Spectrogram`] stores `frames x bins` cells row-major and remembers
//! which absolute bin its first column is (`first_bin`), so band slices
//! such as the HFC part carry their position in the full spectrum.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stft::StftConfig;

/// Per-cell validity rule for a spectrogram payload.
pub trait Cell: Copy + Default {
    fn check(&self) -> Result<()>;
}

impl Cell for Complex64 {
    fn check(&self) -> Result<()> {
        if self.re.is_finite() && self.im.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidValue("non-finite spectrogram entry"))
        }
    }
}

/// Magnitude or phase cell; the wrapper type picks the rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Mag(pub f64);

#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Phase(pub f64);

impl Cell for Mag {
    fn check(&self) -> Result<()> {
        if !self.0.is_finite() {
            Err(Error::InvalidValue("non-finite magnitude"))
        } else if self.0 < 0.0 {
            Err(Error::InvalidValue("negative magnitude"))
        } else {
            Ok(())
        }
    }
}

impl Cell for Phase {
    fn check(&self) -> Result<()> {
        if self.0 > -PI && self.0 <= PI {
            Ok(())
        } else {
            Err(Error::InvalidValue("phase outside (-pi, pi]"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    data: Vec<T>,
    frames: usize,
    bins: usize,
    first_bin: usize,
    config: StftConfig,
}

pub type ComplexSpectrogram = Spectrogram<Complex64>;
pub type MagnitudeSpectrogram = Spectrogram<Mag>;
pub type PhaseSpectrogram = Spectrogram<Phase>;

impl<T: Cell> Spectrogram<T> {
    /// Validated constructor for a band covering bins
    /// `first_bin..first_bin + bins`.
    pub fn from_vec(
        data: Vec<T>,
        frames: usize,
        bins: usize,
        first_bin: usize,
        config: StftConfig,
    ) -> Result<Self> {
        if data.len() != frames * bins {
            return Err(Error::shape(
                (frames, bins),
                (data.len() / bins.max(1), bins),
            ));
        }
        if first_bin + bins > config.bins() {
            return Err(Error::Layout("band extends past the last bin"));
        }
        for v in &data {
            v.check()?;
        }
        Ok(Spectrogram {
            data,
            frames,
            bins,
            first_bin,
            config,
        })
    }

    pub fn zeros(frames: usize, bins: usize, first_bin: usize, config: StftConfig) -> Self {
        assert!(first_bin + bins <= config.bins());
        Spectrogram {
            data: vec![T::default(); frames * bins],
            frames,
            bins,
            first_bin,
            config,
        }
    }

    /// Slice covering `range` given in absolute bin indices.
    pub fn bin_range(&self, range: Range<usize>) -> Result<Self> {
        if range.start < self.first_bin
            || range.end > self.first_bin + self.bins
            || range.start > range.end
        {
            return Err(Error::Layout("bin range outside spectrogram"));
        }
        let lo = range.start - self.first_bin;
        let hi = range.end - self.first_bin;
        let mut data = Vec::with_capacity(self.frames * (hi - lo));
        for frame in self.rows() {
            data.extend_from_slice(&frame[lo..hi]);
        }
        Ok(Spectrogram {
            data,
            frames: self.frames,
            bins: hi - lo,
            first_bin: range.start,
            config: self.config,
        })
    }

    /// First `frames` frames (or all of them if fewer exist).
    pub fn truncate_frames(mut self, frames: usize) -> Self {
        if frames < self.frames {
            self.data.truncate(frames * self.bins);
            self.frames = frames;
        }
        self
    }
}

impl<T> Spectrogram<T> {
    pub(crate) fn from_parts_unchecked(
        data: Vec<T>,
        frames: usize,
        bins: usize,
        first_bin: usize,
        config: StftConfig,
    ) -> Self {
        debug_assert_eq!(data.len(), frames * bins);
        Spectrogram {
            data,
            frames,
            bins,
            first_bin,
            config,
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.bins)
    }

    pub fn first_bin(&self) -> usize {
        self.first_bin
    }

    /// Absolute bin range covered.
    pub fn bin_span(&self) -> Range<usize> {
        self.first_bin..self.first_bin + self.bins
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn frame(&self, l: usize) -> &[T] {
        &self.data[l * self.bins..(l + 1) * self.bins]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.bins.max(1)).take(self.frames)
    }

    pub(crate) fn rows_mut(&mut self) -> impl Iterator<Item = &mut [T]> {
        let frames = self.frames;
        self.data.chunks_exact_mut(self.bins.max(1)).take(frames)
    }

    /// Cell at frame `l`, relative bin `k`.
    pub fn at(&self, l: usize, k: usize) -> &T {
        &self.data[l * self.bins + k]
    }

    pub fn is_full(&self) -> bool {
        self.first_bin == 0 && self.bins == self.config.bins()
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_phase(p: f64) -> f64 {
    let mut w = libm::remainder(p, 2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Complex argument with `arg(0) = 0`, in `(-pi, pi]`.
pub fn arg(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        wrap_phase(libm::atan2(z.im, z.re))
    }
}

impl ComplexSpectrogram {
    pub fn magnitude(&self) -> MagnitudeSpectrogram {
        let data = self.data.iter().map(|z| Mag(z.norm())).collect();
        Spectrogram::from_parts_unchecked(data, self.frames, self.bins, self.first_bin, self.config)
    }

    pub fn phase(&self) -> PhaseSpectrogram {
        let data = self.data.iter().map(|&z| Phase(arg(z))).collect();
        Spectrogram::from_parts_unchecked(data, self.frames, self.bins, self.first_bin, self.config)
    }

    /// `m * e^{i p}` cell-wise; both inputs must cover the same bins.
    pub fn from_polar(mag: &MagnitudeSpectrogram, phase: &PhaseSpectrogram) -> Result<Self> {
        if mag.shape() != phase.shape() || mag.first_bin != phase.first_bin {
            return Err(Error::shape(mag.shape(), phase.shape()));
        }
        let data = mag
            .data
            .iter()
            .zip(&phase.data)
            .map(|(m, p)| {
                if m.0 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(m.0, p.0)
                }
            })
            .collect();
        Ok(Spectrogram::from_parts_unchecked(
            data,
            mag.frames,
            mag.bins,
            mag.first_bin,
            mag.config,
        ))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }
}

impl MagnitudeSpectrogram {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().map(|m| m.0)
    }

    /// Build from raw magnitudes, validating each entry.
    pub fn from_values(
        values: Vec<f64>,
        frames: usize,
        bins: usize,
        first_bin: usize,
        config: StftConfig,
    ) -> Result<Self> {
        Self::from_vec(
            values.into_iter().map(Mag).collect(),
            frames,
            bins,
            first_bin,
            config,
        )
    }
}

impl PhaseSpectrogram {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().map(|p| p.0)
    }

    pub fn from_values(
        values: Vec<f64>,
        frames: usize,
        bins: usize,
        first_bin: usize,
        config: StftConfig,
    ) -> Result<Self> {
        Self::from_vec(
            values.into_iter().map(Phase).collect(),
            frames,
            bins,
            first_bin,
            config,
        )
    }
}
