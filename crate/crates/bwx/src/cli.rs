//! Command-line interface.

use std::path::PathBuf;

use bwx_core::lowpass::{FirWindow, DEFAULT_TAPS};
use bwx_core::{
    istft, stft, BandLayout, BandReplication, FilterMode, GlaInit, LowpassSpec, StftConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::error::{Error, Result};
use crate::pipeline::{run_job, MagnitudeSpec, PhaseSpec, ResidualBand, SrJobSpec};
use crate::prep::make_pair;
use crate::report::{evaluate_batch, write_report};
use crate::specfile::{read_spec, write_spec, SpecFile, SpecKind};
use crate::study::{run_phase_study, StudyOptions};
use crate::synth::write_clip_set;
use crate::wav::{read_wav, write_wav, SampleFormat};

#[derive(Debug, Parser)]
#[command(name = "bwx", version, about = "Music bandwidth extension toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the band-limited LR companion of an HR recording.
    Prepare(PrepareArgs),
    /// Reconstruct the high band of an LR recording.
    Sr(SrArgs),
    /// Score estimates against ground truth (LSD-HF, LSD-Full, SNR).
    Eval(EvalArgs),
    /// Compare phase strategies under oracle magnitudes over a set of clips.
    PhaseStudy(StudyArgs),
    /// Convert between WAV audio and BWXSPEC spectrogram files.
    #[command(subcommand)]
    Spec(SpecCommand),
    /// Generate deterministic synthetic music clips.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct StftArgs {
    #[arg(long, default_value_t = 2048)]
    pub frame: usize,
    #[arg(long, default_value_t = 256)]
    pub hop: usize,
}

impl StftArgs {
    fn config(&self) -> Result<StftConfig> {
        Ok(StftConfig::new(self.frame, self.hop)?)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct BandArgs {
    #[arg(long, default_value_t = 4000.0)]
    pub lo_hz: f64,
    #[arg(long, default_value_t = 8000.0)]
    pub hi_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    Brickwall,
    Fir,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4000.0)]
    pub cutoff_hz: f64,
    #[arg(long, value_enum, default_value_t = FilterArg::Brickwall)]
    pub filter: FilterArg,
    #[arg(long, default_value_t = DEFAULT_TAPS)]
    pub taps: usize,
    #[command(flatten)]
    pub stft: StftArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Zero,
    Flip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResidualArg {
    Pass,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    F32,
    Pcm16,
    Pcm24,
}

impl From<FormatArg> for SampleFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::F32 => SampleFormat::Float32,
            FormatArg::Pcm16 => SampleFormat::Pcm16,
            FormatArg::Pcm24 => SampleFormat::Pcm24,
        }
    }
}

/// `--mag` value before the band-replication parameters are attached.
#[derive(Debug, Clone, PartialEq)]
pub enum MagArg {
    Oracle(PathBuf),
    Sbr,
    Import(PathBuf),
}

fn parse_mag(s: &str) -> std::result::Result<MagArg, String> {
    match s.split_once(':') {
        Some(("oracle", p)) if !p.is_empty() => Ok(MagArg::Oracle(p.into())),
        Some(("import", p)) if !p.is_empty() => Ok(MagArg::Import(p.into())),
        None if s == "sbr" => Ok(MagArg::Sbr),
        _ => Err("expected oracle:<path>, sbr or import:<path>".into()),
    }
}

/// `--phase` value before the GLA settings are attached.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseArg {
    Flip,
    Gla,
    Ref(PathBuf),
}

fn parse_phase(s: &str) -> std::result::Result<PhaseArg, String> {
    match s.split_once(':') {
        Some(("ref", p)) if !p.is_empty() => Ok(PhaseArg::Ref(p.into())),
        None if s == "flip" => Ok(PhaseArg::Flip),
        None if s == "gla" => Ok(PhaseArg::Gla),
        _ => Err("expected flip, gla or ref:<path>".into()),
    }
}

#[derive(Debug, Args)]
pub struct SrArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// oracle:<hr.wav>, sbr, or import:<magnitudes.bwxspec>
    #[arg(long, value_parser = parse_mag)]
    pub mag: MagArg,
    /// flip, gla, or ref:<reference.wav>
    #[arg(long, value_parser = parse_phase)]
    pub phase: PhaseArg,
    #[arg(long, default_value_t = bwx_core::phase::DEFAULT_GLA_ITERATIONS)]
    pub gla_iters: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Zero)]
    pub gla_init: InitArg,
    #[command(flatten)]
    pub stft: StftArgs,
    #[command(flatten)]
    pub band: BandArgs,
    #[arg(long, value_enum, default_value_t = ResidualArg::Pass)]
    pub residual: ResidualArg,
    /// Write the per-iteration GLA residuals here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Gain anchor width for `--mag sbr`.
    #[arg(long, default_value_t = 4)]
    pub sbr_anchors: usize,
    /// Per-bin tilt for `--mag sbr`.
    #[arg(long, default_value_t = 1.0)]
    pub sbr_tilt: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::F32)]
    pub format: FormatArg,
}

impl SrArgs {
    pub fn job(&self) -> Result<SrJobSpec> {
        let magnitude = match &self.mag {
            MagArg::Oracle(p) => MagnitudeSpec::Oracle(p.clone()),
            MagArg::Sbr => MagnitudeSpec::BandReplication(BandReplication::new(
                self.sbr_anchors,
                self.sbr_tilt,
            )?),
            MagArg::Import(p) => MagnitudeSpec::Import(p.clone()),
        };
        let phase = match &self.phase {
            PhaseArg::Flip => PhaseSpec::Flip,
            PhaseArg::Gla => PhaseSpec::Gla {
                iterations: self.gla_iters,
                init: match self.gla_init {
                    InitArg::Zero => GlaInit::ZeroPhase,
                    InitArg::Flip => GlaInit::FlipPhase,
                },
            },
            PhaseArg::Ref(p) => PhaseSpec::Reference(p.clone()),
        };
        if self.trace.is_some() && !matches!(phase, PhaseSpec::Gla { .. }) {
            return Err(Error::Usage("--trace requires --phase gla".into()));
        }
        Ok(SrJobSpec {
            stft: self.stft.config()?,
            lo_hz: self.band.lo_hz,
            hi_hz: self.band.hi_hz,
            residual: match self.residual {
                ResidualArg::Pass => ResidualBand::Passthrough,
                ResidualArg::Zero => ResidualBand::Zero,
            },
            trace: self.trace.clone(),
            output_format: self.format.into(),
            ..SrJobSpec::new(&self.input, &self.out, magnitude, phase)
        })
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth file; repeat together with `--est` for a batch.
    #[arg(long, required = true)]
    pub truth: Vec<PathBuf>,
    #[arg(long, required = true)]
    pub est: Vec<PathBuf>,
    #[command(flatten)]
    pub band: BandArgs,
    #[command(flatten)]
    pub stft: StftArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Directory of WAV files, or a text file listing one path per line.
    #[arg(long)]
    pub clips: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value_t = bwx_core::phase::DEFAULT_GLA_ITERATIONS)]
    pub gla_iters: usize,
    #[command(flatten)]
    pub band: BandArgs,
    #[command(flatten)]
    pub stft: StftArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Magnitude,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandArg {
    Full,
    Hfc,
}

#[derive(Debug, Subcommand)]
pub enum SpecCommand {
    /// Analyze one channel of a WAV file into a BWXSPEC file.
    Export(SpecExportArgs),
    /// Synthesize a full-band complex BWXSPEC file back into a WAV file.
    Import(SpecImportArgs),
}

#[derive(Debug, Args)]
pub struct SpecExportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Magnitude)]
    pub kind: KindArg,
    /// `hfc` writes only bins [k_lo, k_hi), the layout `sr --mag import:` expects.
    #[arg(long, value_enum, default_value_t = BandArg::Full)]
    pub band: BandArg,
    #[arg(long, default_value_t = 0)]
    pub channel: usize,
    #[command(flatten)]
    pub cutoffs: BandArgs,
    #[command(flatten)]
    pub stft: StftArgs,
}

#[derive(Debug, Args)]
pub struct SpecImportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::F32)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10.0)]
    pub seconds: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Pcm16)]
    pub format: FormatArg,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(a) => {
            let mode = match a.filter {
                FilterArg::Brickwall => FilterMode::Brickwall,
                FilterArg::Fir => FilterMode::FirSinc {
                    taps: a.taps,
                    window: FirWindow::Hamming,
                },
            };
            let spec = LowpassSpec {
                mode,
                cutoff_hz: a.cutoff_hz,
            };
            make_pair(&a.input, &a.out, &spec, &a.stft.config()?)
        }
        Command::Sr(a) => run_job(&a.job()?).map(|_| ()),
        Command::Eval(a) => {
            if a.truth.len() != a.est.len() {
                return Err(Error::Usage(format!(
                    "{} --truth but {} --est files",
                    a.truth.len(),
                    a.est.len()
                )));
            }
            let pairs: Vec<_> = a.truth.into_iter().zip(a.est).collect();
            let rows = evaluate_batch(&pairs, &a.stft.config()?, a.band.lo_hz, a.band.hi_hz);
            write_report(&a.out, &rows, &[])
        }
        Command::PhaseStudy(a) => {
            let opts = StudyOptions {
                stft: a.stft.config()?,
                lo_hz: a.band.lo_hz,
                hi_hz: a.band.hi_hz,
                gla_iterations: a.gla_iters,
                jobs: a.jobs,
            };
            let report = run_phase_study(&a.clips, &a.out, &opts)?;
            info!(
                "{} clip(s) processed, {} skipped",
                report.rows.len() / 4,
                report.skipped.len()
            );
            Ok(())
        }
        Command::Spec(SpecCommand::Export(a)) => {
            let audio = read_wav(&a.input)?;
            let wave = audio.channels.get(a.channel).ok_or_else(|| {
                Error::Usage(format!(
                    "channel {} requested, file has {}",
                    a.channel,
                    audio.channels.len()
                ))
            })?;
            let cfg = a.stft.config()?;
            let mut x = stft(wave, &cfg)?;
            if a.band == BandArg::Hfc {
                let layout = BandLayout::from_hz(
                    a.cutoffs.lo_hz,
                    a.cutoffs.hi_hz,
                    wave.sample_rate(),
                    &cfg,
                )?;
                x = x.bin_range(layout.hfc())?;
            }
            let rate = wave.sample_rate();
            let file = match a.kind {
                KindArg::Magnitude => SpecFile::from_magnitude(&x.magnitude(), rate),
                KindArg::Complex => SpecFile::from_complex(&x, rate),
            }
            .map_err(|source| Error::SpecFile {
                path: a.out.clone(),
                source,
            })?;
            write_spec(&a.out, &file)
        }
        Command::Spec(SpecCommand::Import(a)) => {
            let file = read_spec(&a.input)?;
            if file.header.kind != SpecKind::Complex {
                return Err(Error::Usage(
                    "only complex spectrograms can be synthesized back to audio".into(),
                ));
            }
            let x = file.to_complex(0).map_err(|e| match e {
                Error::SpecFile { source, .. } => Error::SpecFile {
                    path: a.input.clone(),
                    source,
                },
                e => e,
            })?;
            let y = istft(&x, file.header.sample_rate)?;
            write_wav(&a.out, &[y], a.format.into())
        }
        Command::Synth(a) => {
            write_clip_set(&a.out_dir, a.count, a.seed, a.seconds, a.format.into()).map(|_| ())
        }
    }
}
