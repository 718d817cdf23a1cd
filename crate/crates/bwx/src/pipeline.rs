//! The super-resolution pipeline.
//!
//! Given an LR waveform:
//!
//! 1. analyze it and keep the LFC band `X_LFC`;
//! 2. predict HFC magnitudes `M_HFC`;
//! 3. estimate HFC phase `P_HFC` (FLIP, band-constrained GLA or a reference);
//! 4. form `X_HFC = M_HFC * exp(i P_HFC)`;
//! 5. concatenate `X_LFC | X_HFC | residual`;
//! 6. synthesize the HR waveform.

use std::path::{Path, PathBuf};

use bwx_core::{
    band_concat, band_split, extract_reference_phase, flip_phase, gla_reconstruct,
    predict_band_replication, predict_oracle, BandLayout, BandReplication, ComplexSpectrogram,
    GlaConfig, GlaInit, GlaTrace, MagnitudeSpectrogram, Stft, StftConfig, Waveform,
};
use log::{info, warn};

use crate::error::{Error, Result, Stage, StageExt};
use crate::report::write_trace_csv;
use crate::specfile::load_magnitude;
use crate::wav::{read_wav, write_wav, SampleFormat};

/// What to do with bins at and above `k_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualBand {
    /// Keep the LR input's content.
    #[default]
    Passthrough,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MagnitudeSource<'a> {
    /// HFC magnitudes of the ground-truth recording.
    Oracle(&'a Waveform),
    BandReplication(BandReplication),
    /// Precomputed HFC magnitudes, e.g. from an external model.
    Given(MagnitudeSpectrogram),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseSource<'a> {
    Flip,
    Gla { iterations: usize, init: GlaInit },
    Reference(&'a Waveform),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrOptions {
    pub stft: StftConfig,
    pub layout: BandLayout,
    pub residual: ResidualBand,
    pub record_trace: bool,
}

impl SrOptions {
    /// Band layout from cutoff frequencies at `sample_rate`.
    pub fn from_hz(stft: StftConfig, lo_hz: f64, hi_hz: f64, sample_rate: u32) -> Result<Self> {
        Ok(SrOptions {
            stft,
            layout: BandLayout::from_hz(lo_hz, hi_hz, sample_rate, &stft)?,
            residual: ResidualBand::Passthrough,
            record_trace: false,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub waveform: Waveform,
    pub spectrogram: ComplexSpectrogram,
    pub trace: Option<GlaTrace>,
    /// Set when a reference waveform's frame count differed from the input's.
    pub reference_frame_mismatch: bool,
}

fn check_rate(lr: &Waveform, other: &Waveform, what: &str) -> Result<()> {
    if lr.sample_rate() != other.sample_rate() {
        return Err(Error::Usage(format!(
            "{what} sample rate {} differs from input rate {}",
            other.sample_rate(),
            lr.sample_rate()
        )));
    }
    Ok(())
}

pub fn super_resolve(
    lr: &Waveform,
    magnitude: &MagnitudeSource<'_>,
    phase: &PhaseSource<'_>,
    opts: &SrOptions,
) -> Result<Reconstruction> {
    let layout = &opts.layout;
    let plan = Stft::new(opts.stft);

    let x = plan.analyze(lr.samples()).stage(Stage::Analysis)?;
    let parts = band_split(&x, layout).stage(Stage::Analysis)?;
    let frames = x.frames();

    let m_hfc = match magnitude {
        MagnitudeSource::Oracle(hr) => check_rate(lr, hr, "oracle reference")
            .and_then(|_| Ok(predict_oracle(hr, &opts.stft, layout, frames)?)),
        MagnitudeSource::BandReplication(params) => Ok(predict_band_replication(
            &parts.lfc.magnitude(),
            layout,
            params,
        )?),
        MagnitudeSource::Given(m) => {
            if m.shape() != (frames, layout.hfc_width()) || m.first_bin() != layout.k_lo() {
                Err(bwx_core::Error::Shape {
                    expected_frames: frames,
                    expected_bins: layout.hfc_width(),
                    got_frames: m.frames(),
                    got_bins: m.bins(),
                }
                .into())
            } else {
                Ok(m.clone())
            }
        }
    }
    .stage(Stage::Magnitude)?;

    let residual = match opts.residual {
        ResidualBand::Passthrough => parts.residual.clone(),
        ResidualBand::Zero => {
            ComplexSpectrogram::zeros(frames, layout.residual_width(), layout.k_hi(), opts.stft)
        }
    };

    let mut trace = None;
    let mut reference_frame_mismatch = false;
    let p_hfc = match phase {
        PhaseSource::Flip => flip_phase(&parts.lfc.phase(), layout).map_err(Error::from),
        PhaseSource::Gla { iterations, init } => (|| -> Result<_> {
            let full = band_concat(
                &parts.lfc.magnitude(),
                &m_hfc,
                &residual.magnitude(),
                layout,
            )?;
            let cfg = GlaConfig {
                iterations: *iterations,
                init: *init,
                layout: *layout,
                record_trace: opts.record_trace,
            };
            let (out, t) = gla_reconstruct(&full, &parts.lfc, &cfg)?;
            if opts.record_trace {
                trace = Some(t);
            }
            Ok(out.bin_range(layout.hfc())?.phase())
        })(),
        PhaseSource::Reference(reference) => check_rate(lr, reference, "phase reference")
            .and_then(|_| {
                Ok(extract_reference_phase(
                    reference, &opts.stft, layout, frames,
                )?)
            })
            .map(|r| {
                if r.frame_mismatch() {
                    warn!(
                        "phase reference frame count differs from input: {} padded, {} truncated",
                        r.padded_frames, r.truncated_frames
                    );
                    reference_frame_mismatch = true;
                }
                r.phase
            }),
    }
    .stage(Stage::Phase)?;

    let x_hfc = ComplexSpectrogram::from_polar(&m_hfc, &p_hfc).stage(Stage::Synthesis)?;
    let x_hr = band_concat(&parts.lfc, &x_hfc, &residual, layout).stage(Stage::Synthesis)?;
    let y = plan.synthesize(&x_hr).stage(Stage::Synthesis)?;
    let waveform = Waveform::new(y, lr.sample_rate()).stage(Stage::Synthesis)?;
    Ok(Reconstruction {
        waveform,
        spectrogram: x_hr,
        trace,
        reference_frame_mismatch,
    })
}

/// File-backed magnitude choice.
#[derive(Debug, Clone, PartialEq)]
pub enum MagnitudeSpec {
    Oracle(PathBuf),
    BandReplication(BandReplication),
    Import(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseSpec {
    Flip,
    Gla { iterations: usize, init: GlaInit },
    Reference(PathBuf),
}

/// One `sr` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct SrJobSpec {
    pub input: PathBuf,
    pub output: PathBuf,
    pub magnitude: MagnitudeSpec,
    pub phase: PhaseSpec,
    pub stft: StftConfig,
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub residual: ResidualBand,
    pub trace: Option<PathBuf>,
    pub output_format: SampleFormat,
}

impl SrJobSpec {
    /// 2048/256 STFT, 4 kHz -> 8 kHz, residual passthrough, float output.
    pub fn new(
        input: impl Into<PathBuf>,
        output: impl Into<PathBuf>,
        magnitude: MagnitudeSpec,
        phase: PhaseSpec,
    ) -> Self {
        SrJobSpec {
            input: input.into(),
            output: output.into(),
            magnitude,
            phase,
            stft: StftConfig::default(),
            lo_hz: 4000.0,
            hi_hz: 8000.0,
            residual: ResidualBand::Passthrough,
            trace: None,
            output_format: SampleFormat::Float32,
        }
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn channel_for<'a>(
    channels: &'a [Waveform],
    c: usize,
    what: &str,
    path: &Path,
) -> Result<&'a Waveform> {
    match channels.len() {
        1 => Ok(&channels[0]),
        n if c < n => Ok(&channels[c]),
        n => Err(Error::Usage(format!(
            "{what} {} has {n} channels, input needs channel {c}",
            path.display()
        ))),
    }
}

/// Runs a job end to end and writes the output file. Channels are processed
/// independently.
pub fn run_job(job: &SrJobSpec) -> Result<Vec<Reconstruction>> {
    if same_file(&job.input, &job.output) {
        return Err(Error::Usage("input and output paths must differ".into()));
    }
    let input = read_wav(&job.input)?;
    let rate = input.sample_rate();
    let mut opts = SrOptions::from_hz(job.stft, job.lo_hz, job.hi_hz, rate)?;
    opts.residual = job.residual;
    opts.record_trace = job.trace.is_some();

    let magnitude_audio = match &job.magnitude {
        MagnitudeSpec::Oracle(p) => Some(read_wav(p)?),
        _ => None,
    };
    let phase_audio = match &job.phase {
        PhaseSpec::Reference(p) => Some(read_wav(p)?),
        _ => None,
    };
    let imported = match &job.magnitude {
        MagnitudeSpec::Import(p) => {
            if input.channels.len() != 1 {
                return Err(Error::Usage(
                    "magnitude import requires a mono input".into(),
                ));
            }
            let frames = job.stft.frame_count(input.len());
            Some(
                load_magnitude(
                    p,
                    (frames, opts.layout.hfc_width()),
                    &job.stft,
                    rate,
                    opts.layout.k_lo(),
                )
                .stage(Stage::Magnitude)?,
            )
        }
        _ => None,
    };

    let mut results = Vec::with_capacity(input.channels.len());
    for (c, lr) in input.channels.iter().enumerate() {
        let magnitude = match (&job.magnitude, &magnitude_audio, &imported) {
            (MagnitudeSpec::Oracle(p), Some(a), _) => {
                MagnitudeSource::Oracle(channel_for(&a.channels, c, "oracle file", p)?)
            }
            (MagnitudeSpec::BandReplication(params), _, _) => {
                MagnitudeSource::BandReplication(*params)
            }
            (MagnitudeSpec::Import(_), _, Some(m)) => MagnitudeSource::Given(m.clone()),
            _ => unreachable!("magnitude inputs loaded above"),
        };
        let phase = match (&job.phase, &phase_audio) {
            (PhaseSpec::Flip, _) => PhaseSource::Flip,
            (PhaseSpec::Gla { iterations, init }, _) => PhaseSource::Gla {
                iterations: *iterations,
                init: *init,
            },
            (PhaseSpec::Reference(p), Some(a)) => {
                PhaseSource::Reference(channel_for(&a.channels, c, "phase reference", p)?)
            }
            _ => unreachable!("phase reference loaded above"),
        };
        results.push(super_resolve(lr, &magnitude, &phase, &opts)?);
    }

    let outputs: Vec<Waveform> = results.iter().map(|r| r.waveform.clone()).collect();
    write_wav(&job.output, &outputs, job.output_format)?;
    info!(
        "wrote {} ({} channel(s), {} samples)",
        job.output.display(),
        outputs.len(),
        outputs[0].len()
    );

    if let (Some(path), Some(trace)) = (&job.trace, results.first().and_then(|r| r.trace.as_ref()))
    {
        if results.len() > 1 {
            warn!("trace file records channel 0 only");
        }
        write_trace_csv(path, trace)?;
    }
    Ok(results)
}
