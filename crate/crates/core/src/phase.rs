//! HFC phase estimation.
//!
//! Three strategies produce phase for bins `[k_lo, k_hi)`:
//!
//! * [`flip_phase`] mirrors the LFC phase about the cutoff and negates it.
//! * [`gla_reconstruct`] runs Griffin-Lim with the LFC bins pinned to the
//!   known complex values: `X <- pin_lfc(P_A(P_C(X)))`, where `P_C` is the
//!   consistency projection and `P_A` rescales every unpinned cell to the
//!   target magnitude (zero where the current cell is zero).
//! * [`extract_reference_phase`] reads the phase of another waveform, e.g.
//!   the output of a vocoder.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::band::BandLayout;
use crate::error::{Error, Result};
use crate::spectrogram::{
    arg, wrap_phase, ComplexSpectrogram, MagnitudeSpectrogram, Phase, PhaseSpectrogram, Spectrogram,
};
use crate::stft::{Stft, StftConfig};
use crate::waveform::Waveform;

/// Floor on `||X||_F` when normalizing consistency residuals.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

pub const DEFAULT_GLA_ITERATIONS: usize = 100;

/// LFC bin whose phase is mirrored into HFC bin `k`.
///
/// Walks down from `k_lo - 1` and wraps every `k_lo` bins, so it is defined
/// for any `k >= k_lo`.
pub fn flip_source_bin(k: usize, k_lo: usize) -> usize {
    debug_assert!(k >= k_lo && k_lo > 0);
    k_lo - 1 - ((k - k_lo) % k_lo)
}

fn check_lfc_slice<T>(lfc: &Spectrogram<T>, layout: &BandLayout) -> Result<()> {
    if lfc.first_bin() != 0 || lfc.bins() != layout.k_lo() {
        return Err(Error::shape(
            (lfc.frames(), layout.k_lo()),
            (lfc.frames(), lfc.bins()),
        ));
    }
    if lfc.config().bins() != layout.n_bins() {
        return Err(Error::Layout("layout bin count differs from config"));
    }
    Ok(())
}

/// FLIP phase for the HFC band: `phase[k] = -lfc_phase[flip_source_bin(k)]`.
pub fn flip_phase(lfc_phase: &PhaseSpectrogram, layout: &BandLayout) -> Result<PhaseSpectrogram> {
    check_lfc_slice(lfc_phase, layout)?;
    let width = layout.hfc_width();
    let mut data = Vec::with_capacity(lfc_phase.frames() * width);
    for row in lfc_phase.rows() {
        data.extend(
            layout
                .hfc()
                .map(|k| Phase(wrap_phase(-row[flip_source_bin(k, layout.k_lo())].0))),
        );
    }
    Ok(Spectrogram::from_parts_unchecked(
        data,
        lfc_phase.frames(),
        width,
        layout.k_lo(),
        *lfc_phase.config(),
    ))
}

/// HFC phase initialization for [`gla_reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GlaInit {
    #[default]
    ZeroPhase,
    FlipPhase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlaConfig {
    pub iterations: usize,
    pub init: GlaInit,
    pub layout: BandLayout,
    pub record_trace: bool,
}

impl GlaConfig {
    /// 100 iterations from zero phase, with tracing on.
    pub fn new(layout: BandLayout) -> Self {
        GlaConfig {
            iterations: DEFAULT_GLA_ITERATIONS,
            init: GlaInit::ZeroPhase,
            layout,
            record_trace: true,
        }
    }
}

/// Consistency residual of the iterate produced by each iteration:
/// `residuals[m]` belongs to `X^{m+1}`. Empty when tracing is off.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlaTrace {
    pub residuals: Vec<f64>,
}

impl GlaTrace {
    pub fn first(&self) -> Option<f64> {
        self.residuals.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.residuals.last().copied()
    }
}

fn relative_distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (a, b) in x.iter().zip(y) {
        diff += (a - b).norm_sqr();
        norm += a.norm_sqr();
    }
    libm::sqrt(diff) / libm::sqrt(norm).max(RESIDUAL_FLOOR)
}

fn check_gla_inputs(
    full_magnitude: &MagnitudeSpectrogram,
    lfc_complex: &ComplexSpectrogram,
    layout: &BandLayout,
) -> Result<()> {
    if !full_magnitude.is_full() || full_magnitude.bins() != layout.n_bins() {
        return Err(Error::shape(
            (full_magnitude.frames(), layout.n_bins()),
            full_magnitude.shape(),
        ));
    }
    check_lfc_slice(lfc_complex, layout)?;
    if lfc_complex.frames() != full_magnitude.frames() {
        return Err(Error::shape(
            (full_magnitude.frames(), layout.k_lo()),
            lfc_complex.shape(),
        ));
    }
    if lfc_complex.config() != full_magnitude.config() {
        return Err(Error::InvalidValue("magnitude and LFC configs differ"));
    }
    Ok(())
}

/// Initial iterate: LFC copied from `lfc_complex`, every other bin set to
/// `full_magnitude` with phase chosen by `init`.
pub fn gla_initial(
    full_magnitude: &MagnitudeSpectrogram,
    lfc_complex: &ComplexSpectrogram,
    cfg: &GlaConfig,
) -> Result<ComplexSpectrogram> {
    let layout = &cfg.layout;
    check_gla_inputs(full_magnitude, lfc_complex, layout)?;

    let k_lo = layout.k_lo();
    let bins = layout.n_bins();
    let frames = full_magnitude.frames();
    let mut data = vec![Complex64::new(0.0, 0.0); frames * bins];
    for (l, row) in data.chunks_exact_mut(bins).enumerate() {
        let lfc = lfc_complex.frame(l);
        let mag = full_magnitude.frame(l);
        row[..k_lo].copy_from_slice(lfc);
        for k in k_lo..bins {
            let a = mag[k].0;
            row[k] = match cfg.init {
                GlaInit::ZeroPhase => Complex64::new(a, 0.0),
                GlaInit::FlipPhase => {
                    let p = wrap_phase(-arg(lfc[flip_source_bin(k, k_lo)]));
                    if a == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::from_polar(a, p)
                    }
                }
            };
        }
    }
    Ok(Spectrogram::from_parts_unchecked(
        data,
        frames,
        bins,
        0,
        *full_magnitude.config(),
    ))
}

/// Band-constrained Griffin-Lim.
///
/// Each iteration computes `pin_lfc(P_A(P_C(X)))`. The LFC bins of the
/// result equal `lfc_complex` exactly, and every other bin has magnitude
/// `full_magnitude` (or zero where the projection vanished).
pub fn gla_reconstruct(
    full_magnitude: &MagnitudeSpectrogram,
    lfc_complex: &ComplexSpectrogram,
    cfg: &GlaConfig,
) -> Result<(ComplexSpectrogram, GlaTrace)> {
    let initial = gla_initial(full_magnitude, lfc_complex, cfg)?;
    gla_iterate(initial, full_magnitude, lfc_complex, cfg)
}

/// Runs the iteration of [`gla_reconstruct`] from an explicit initial iterate.
pub fn gla_iterate(
    initial: ComplexSpectrogram,
    full_magnitude: &MagnitudeSpectrogram,
    lfc_complex: &ComplexSpectrogram,
    cfg: &GlaConfig,
) -> Result<(ComplexSpectrogram, GlaTrace)> {
    check_gla_inputs(full_magnitude, lfc_complex, &cfg.layout)?;
    if !initial.is_full()
        || initial.frames() != full_magnitude.frames()
        || initial.config() != full_magnitude.config()
    {
        return Err(Error::shape(full_magnitude.shape(), initial.shape()));
    }
    let mut x = initial;
    let mut trace = GlaTrace::default();
    if cfg.iterations == 0 || x.frames() == 0 {
        return Ok((x, trace));
    }

    let plan = Stft::new(*x.config());
    let k_lo = cfg.layout.k_lo();
    let bins = cfg.layout.n_bins();
    let mut projected = plan.project(&x)?;

    for m in 0..cfg.iterations {
        // projected == P_C(x) here
        {
            let target = full_magnitude.data();
            let lfc = lfc_complex.data();
            let out = x.data_mut();
            let src = projected.data();
            for l in 0..out.len() / bins {
                let row = l * bins;
                out[row..row + k_lo].copy_from_slice(&lfc[l * k_lo..(l + 1) * k_lo]);
                for k in row + k_lo..row + bins {
                    let z = src[k];
                    let norm = z.norm();
                    out[k] = if norm == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        z * (target[k].0 / norm)
                    };
                }
            }
        }
        if x.data()
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Numerical { iteration: m + 1 });
        }
        let last = m + 1 == cfg.iterations;
        if !last || cfg.record_trace {
            projected = plan.project(&x)?;
            if cfg.record_trace {
                let r = relative_distance(x.data(), projected.data());
                if !r.is_finite() {
                    return Err(Error::Numerical { iteration: m + 1 });
                }
                trace.residuals.push(r);
            }
        }
    }
    Ok((x, trace))
}

/// HFC phase read from a reference waveform, aligned to `target_frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePhase {
    pub phase: PhaseSpectrogram,
    /// Trailing frames filled with zero phase because the reference was short.
    pub padded_frames: usize,
    /// Reference frames dropped beyond `target_frames`.
    pub truncated_frames: usize,
}

impl ReferencePhase {
    /// True when the reference frame count differed from the target.
    pub fn frame_mismatch(&self) -> bool {
        self.padded_frames > 0 || self.truncated_frames > 0
    }
}

pub fn extract_reference_phase(
    reference: &Waveform,
    config: &StftConfig,
    layout: &BandLayout,
    target_frames: usize,
) -> Result<ReferencePhase> {
    if reference.len() < config.frame_len() {
        return Err(Error::Length {
            needed: config.frame_len(),
            got: reference.len(),
        });
    }
    if layout.n_bins() != config.bins() {
        return Err(Error::Layout("layout bin count differs from config"));
    }
    let spec = Stft::new(*config).analyze(reference.samples())?;
    let available = spec.frames();
    let band = spec
        .truncate_frames(target_frames)
        .bin_range(layout.hfc())?;
    let mut data: Vec<Phase> = band.data().iter().map(|&z| Phase(arg(z))).collect();
    let padded_frames = target_frames.saturating_sub(available);
    data.resize(target_frames * layout.hfc_width(), Phase(0.0));
    Ok(ReferencePhase {
        phase: Spectrogram::from_parts_unchecked(
            data,
            target_frames,
            layout.hfc_width(),
            layout.k_lo(),
            *config,
        ),
        padded_frames,
        truncated_frames: available.saturating_sub(target_frames),
    })
}
