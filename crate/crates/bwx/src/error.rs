use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::specfile::SpecFileError;
use crate::wav::WavError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage an error originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Analysis,
    Magnitude,
    Phase,
    Synthesis,
    Evaluation,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Analysis => "analysis",
            Stage::Magnitude => "magnitude prediction",
            Stage::Phase => "phase estimation",
            Stage::Synthesis => "synthesis",
            Stage::Evaluation => "evaluation",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dsp(#[from] bwx_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: WavError,
    },

    #[error("{path}: {source}")]
    SpecFile {
        path: PathBuf,
        #[source]
        source: SpecFileError,
    },

    #[error("{stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Usage(String),

    #[error("no clip could be processed")]
    NoClips,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |e| match e {
            // keep the innermost label
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 usage/input, 2 I/O and file format, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dsp(bwx_core::Error::Numerical { .. }) => 3,
            Error::Dsp(_) | Error::Usage(_) => 1,
            Error::Io { .. } | Error::Wav { .. } | Error::SpecFile { .. } | Error::NoClips => 2,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| Error::at(stage)(e.into()))
    }
}
