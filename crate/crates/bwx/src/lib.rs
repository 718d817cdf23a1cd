//! Music bandwidth extension: file formats, dataset preparation, the
//! super-resolution pipeline, evaluation reports and the `bwx` command line.
//!
//! Signal processing lives in [`bwx_core`]; this crate adds everything that
//! touches the file system.

pub mod cli;
pub mod error;
pub mod pipeline;
pub mod prep;
pub mod report;
pub mod specfile;
pub mod study;
pub mod synth;
pub mod wav;

pub use error::{Error, Result, Stage};
pub use pipeline::{
    run_job, super_resolve, MagnitudeSource, MagnitudeSpec, PhaseSource, PhaseSpec, Reconstruction,
    ResidualBand, SrJobSpec, SrOptions,
};
pub use prep::make_pair;
pub use report::{evaluate, evaluate_batch, evaluate_files, ReportRow};
pub use study::{phase_study, run_phase_study, StudyOptions, StudyReport};
pub use wav::{read_wav, write_wav, SampleFormat, WavAudio};
