//! HFC magnitude predictors that need no trained model.

use alloc::vec::Vec;

use crate::band::BandLayout;
use crate::error::{Error, Result};
use crate::spectrogram::{Mag, MagnitudeSpectrogram, Spectrogram};
use crate::stft::{Stft, StftConfig};
use crate::waveform::Waveform;

/// Floor on the copied-band anchor mean in [`predict_band_replication`].
pub const GAIN_FLOOR: f64 = 1e-12;

/// HFC magnitudes of a ground-truth recording, first `target_frames` frames.
pub fn predict_oracle(
    hr_reference: &Waveform,
    config: &StftConfig,
    layout: &BandLayout,
    target_frames: usize,
) -> Result<MagnitudeSpectrogram> {
    if layout.n_bins() != config.bins() {
        return Err(Error::Layout("layout bin count differs from config"));
    }
    let available = config.frame_count(hr_reference.len());
    if available < target_frames.max(1) {
        return Err(Error::Length {
            needed: target_frames.max(1),
            got: available,
        });
    }
    let spec = Stft::new(*config).analyze(hr_reference.samples())?;
    Ok(spec
        .truncate_frames(target_frames)
        .bin_range(layout.hfc())?
        .magnitude())
}

/// Spectral band replication parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandReplication {
    pub gain_anchor_bins: usize,
    pub tilt_per_bin: f64,
}

impl Default for BandReplication {
    fn default() -> Self {
        BandReplication {
            gain_anchor_bins: 4,
            tilt_per_bin: 1.0,
        }
    }
}

impl BandReplication {
    pub fn new(gain_anchor_bins: usize, tilt_per_bin: f64) -> Result<Self> {
        if gain_anchor_bins == 0 {
            return Err(Error::Domain("gain_anchor_bins must be at least 1"));
        }
        if !(tilt_per_bin > 0.0 && tilt_per_bin.is_finite()) {
            return Err(Error::Domain("tilt_per_bin must be positive and finite"));
        }
        Ok(BandReplication {
            gain_anchor_bins,
            tilt_per_bin,
        })
    }
}

/// Translates `M[0 .. hfc_width)` up to `[k_lo, k_hi)`, matches its level to
/// the top of the LFC band and applies a geometric tilt.
///
/// Per frame, with `a = gain_anchor_bins`:
/// `g = mean(M[k_lo-a .. k_lo]) / max(mean(M[0 .. a]), 1e-12)` and
/// `out[k] = g * M[k - k_lo] * tilt^(k - k_lo)`.
pub fn predict_band_replication(
    lfc_mag: &MagnitudeSpectrogram,
    layout: &BandLayout,
    params: &BandReplication,
) -> Result<MagnitudeSpectrogram> {
    let params = BandReplication::new(params.gain_anchor_bins, params.tilt_per_bin)?;
    if lfc_mag.first_bin() != 0 || lfc_mag.bins() != layout.k_lo() {
        return Err(Error::shape(
            (lfc_mag.frames(), layout.k_lo()),
            lfc_mag.shape(),
        ));
    }
    let width = layout.hfc_width();
    if width > layout.k_lo() {
        return Err(Error::UnsupportedLayout {
            lfc: layout.k_lo(),
            hfc: width,
        });
    }
    let anchors = params.gain_anchor_bins;
    if anchors > width {
        return Err(Error::Domain("gain_anchor_bins exceeds the HFC width"));
    }

    let tilt: Vec<f64> = (0..width)
        .map(|i| libm::pow(params.tilt_per_bin, i as f64))
        .collect();
    let k_lo = layout.k_lo();
    let mut data = Vec::with_capacity(lfc_mag.frames() * width);
    for row in lfc_mag.rows() {
        let top = row[k_lo - anchors..].iter().map(|m| m.0).sum::<f64>() / anchors as f64;
        let copied = row[..anchors].iter().map(|m| m.0).sum::<f64>() / anchors as f64;
        let gain = top / copied.max(GAIN_FLOOR);
        data.extend(
            row[..width]
                .iter()
                .zip(&tilt)
                .map(|(m, t)| Mag(m.0 * gain * t)),
        );
    }
    Ok(Spectrogram::from_parts_unchecked(
        data,
        lfc_mag.frames(),
        width,
        k_lo,
        *lfc_mag.config(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stft::stft;
    use core::f64::consts::PI;

    fn layout() -> BandLayout {
        BandLayout::new(186, 372, 1025).unwrap()
    }

    fn lfc(values: impl Fn(usize) -> f64) -> MagnitudeSpectrogram {
        let data = (0..186).map(values).collect();
        MagnitudeSpectrogram::from_values(data, 1, 186, 0, StftConfig::default()).unwrap()
    }

    #[test]
    fn flat_input_stays_flat() {
        let out = predict_band_replication(&lfc(|_| 0.7), &layout(), &Default::default()).unwrap();
        assert_eq!(out.first_bin(), 186);
        assert_eq!(out.bins(), 186);
        assert!(out.values().all(|v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn zero_input_gives_zero() {
        let out = predict_band_replication(&lfc(|_| 0.0), &layout(), &Default::default()).unwrap();
        assert!(out.values().all(|v| v == 0.0));
    }

    #[test]
    fn ramp_gain_matches_formula() {
        let out =
            predict_band_replication(&lfc(|k| k as f64), &layout(), &Default::default()).unwrap();
        let g = 183.5 / 1.5;
        for (i, v) in out.values().enumerate() {
            assert!((v - i as f64 * g).abs() < 1e-9 * g * 186.0);
        }
    }

    #[test]
    fn tilt_is_geometric() {
        let params = BandReplication::new(4, 0.5).unwrap();
        let out = predict_band_replication(&lfc(|_| 1.0), &layout(), &params).unwrap();
        assert_eq!(out.at(0, 0).0, 1.0);
        assert_eq!(out.at(0, 3).0, 0.125);
    }

    #[test]
    fn rejects_wide_hfc_and_bad_params() {
        let wide = BandLayout::new(186, 400, 1025).unwrap();
        assert_eq!(
            predict_band_replication(&lfc(|_| 1.0), &wide, &Default::default()).unwrap_err(),
            Error::UnsupportedLayout { lfc: 186, hfc: 214 }
        );
        assert!(BandReplication::new(0, 1.0).is_err());
        assert!(BandReplication::new(4, 0.0).is_err());
        assert!(BandReplication::new(4, f64::NAN).is_err());
    }

    #[test]
    fn oracle_peaks_at_sine_bin() {
        let cfg = StftConfig::default();
        let samples = (0..16384)
            .map(|n| libm::sin(2.0 * PI * 6000.0 * n as f64 / 44100.0))
            .collect();
        let x = Waveform::new(samples, 44100).unwrap();
        let frames = cfg.frame_count(x.len());
        let m = predict_oracle(&x, &cfg, &layout(), frames).unwrap();
        for row in m.rows() {
            let peak = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(peak + 186, 279);
        }

        let silent = Waveform::silence(16384, 44100).unwrap();
        let z = predict_oracle(&silent, &cfg, &layout(), frames).unwrap();
        assert!(z.values().all(|v| v == 0.0));

        assert!(matches!(
            predict_oracle(&x, &cfg, &layout(), frames + 1),
            Err(Error::Length { .. })
        ));
        let full = stft(&x, &cfg)
            .unwrap()
            .magnitude()
            .bin_range(186..372)
            .unwrap();
        assert_eq!(m, full);
    }
}
