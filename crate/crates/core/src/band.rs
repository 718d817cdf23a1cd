//! LFC / HFC / residual partition of the one-sided spectrum.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectrogram::{Cell, Spectrogram};
use crate::stft::{bin_index, StftConfig};

/// Bins `[0, k_lo)` are the LFC band, `[k_lo, k_hi)` the HFC band and
/// `[k_hi, n_bins)` the residual band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandLayout {
    k_lo: usize,
    k_hi: usize,
    n_bins: usize,
}

impl BandLayout {
    pub fn new(k_lo: usize, k_hi: usize, n_bins: usize) -> Result<Self> {
        if k_lo == 0 {
            return Err(Error::Layout("k_lo must be positive"));
        }
        if k_lo >= k_hi {
            return Err(Error::Layout("k_lo must be below k_hi"));
        }
        if k_hi > n_bins {
            return Err(Error::Layout("k_hi exceeds the bin count"));
        }
        Ok(BandLayout { k_lo, k_hi, n_bins })
    }

    /// Layout from cutoff frequencies, using [`bin_index`] for both edges.
    pub fn from_hz(lo_hz: f64, hi_hz: f64, sample_rate: u32, config: &StftConfig) -> Result<Self> {
        let k_lo = bin_index(lo_hz, sample_rate, config.frame_len())?;
        let k_hi = bin_index(hi_hz, sample_rate, config.frame_len())?;
        Self::new(k_lo, k_hi.min(config.bins()), config.bins())
    }

    pub fn k_lo(&self) -> usize {
        self.k_lo
    }

    pub fn k_hi(&self) -> usize {
        self.k_hi
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn lfc_width(&self) -> usize {
        self.k_lo
    }

    pub fn hfc_width(&self) -> usize {
        self.k_hi - self.k_lo
    }

    pub fn residual_width(&self) -> usize {
        self.n_bins - self.k_hi
    }

    pub fn lfc(&self) -> core::ops::Range<usize> {
        0..self.k_lo
    }

    pub fn hfc(&self) -> core::ops::Range<usize> {
        self.k_lo..self.k_hi
    }

    pub fn residual(&self) -> core::ops::Range<usize> {
        self.k_hi..self.n_bins
    }
}

/// The three bands of a split spectrogram, in bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct BandParts<T> {
    pub lfc: Spectrogram<T>,
    pub hfc: Spectrogram<T>,
    pub residual: Spectrogram<T>,
}

pub fn band_split<T: Cell>(spec: &Spectrogram<T>, layout: &BandLayout) -> Result<BandParts<T>> {
    if !spec.is_full() || spec.bins() != layout.n_bins {
        return Err(Error::shape(
            (spec.frames(), layout.n_bins),
            (spec.frames(), spec.bins()),
        ));
    }
    Ok(BandParts {
        lfc: spec.bin_range(layout.lfc())?,
        hfc: spec.bin_range(layout.hfc())?,
        residual: spec.bin_range(layout.residual())?,
    })
}

/// Exact inverse of [`band_split`].
pub fn band_concat<T: Cell>(
    lfc: &Spectrogram<T>,
    hfc: &Spectrogram<T>,
    residual: &Spectrogram<T>,
    layout: &BandLayout,
) -> Result<Spectrogram<T>> {
    let frames = lfc.frames();
    let expect = |part: &Spectrogram<T>, range: core::ops::Range<usize>| -> Result<()> {
        if part.frames() != frames || part.bins() != range.len() {
            return Err(Error::shape((frames, range.len()), part.shape()));
        }
        if part.first_bin() != range.start {
            return Err(Error::Layout("band part starts at the wrong bin"));
        }
        if part.config() != lfc.config() {
            return Err(Error::InvalidValue("band parts have different configs"));
        }
        Ok(())
    };
    expect(lfc, layout.lfc())?;
    expect(hfc, layout.hfc())?;
    expect(residual, layout.residual())?;
    if lfc.config().bins() != layout.n_bins {
        return Err(Error::Layout("layout bin count differs from config"));
    }

    let mut data = Vec::with_capacity(frames * layout.n_bins);
    for l in 0..frames {
        data.extend_from_slice(lfc.frame(l));
        data.extend_from_slice(hfc.frame(l));
        data.extend_from_slice(residual.frame(l));
    }
    Ok(Spectrogram::from_parts_unchecked(
        data,
        frames,
        layout.n_bins,
        0,
        *lfc.config(),
    ))
}
