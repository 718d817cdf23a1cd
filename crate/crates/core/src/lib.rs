//! Signal core for music bandwidth extension.
//!
//! Everything here is a pure function of its inputs and needs only `alloc`:
//! short-time Fourier analysis and weighted overlap-add synthesis, the
//! consistency projection, LFC/HFC band bookkeeping, HFC phase estimators
//! (FLIP mirroring, band-constrained Griffin-Lim, reference extraction),
//! HFC magnitude predictors, LSD/SNR metrics and low-pass filter design.
//!
//! File formats, audio I/O and the command-line pipeline live in the `bwx`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod band;
pub mod error;
pub mod fft;
pub mod lowpass;
pub mod magnitude;
pub mod metrics;
pub mod phase;
pub mod spectrogram;
pub mod stft;
pub mod waveform;

pub use band::{band_concat, band_split, BandLayout, BandParts};
pub use error::{Error, Result};
pub use lowpass::{FilterMode, LowpassSpec};
pub use magnitude::{predict_band_replication, predict_oracle, BandReplication};
pub use metrics::{consistency_residual, lsd, snr, EvalReport};
pub use phase::{
    extract_reference_phase, flip_phase, gla_reconstruct, GlaConfig, GlaInit, GlaTrace,
    ReferencePhase,
};
pub use spectrogram::{ComplexSpectrogram, MagnitudeSpectrogram, PhaseSpectrogram, Spectrogram};
pub use stft::{bin_index, consistency_project, istft, stft, Stft, StftConfig, Window};
pub use waveform::Waveform;

pub use num_complex::Complex64;
