use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("length error: need at least {needed} samples/frames, got {got}")]
    Length { needed: usize, got: usize },

    #[error(
        "shape mismatch: expected {expected_frames}x{expected_bins}, got {got_frames}x{got_bins}"
    )]
    Shape {
        expected_frames: usize,
        expected_bins: usize,
        got_frames: usize,
        got_bins: usize,
    },

    #[error("invalid band layout: {0}")]
    Layout(&'static str),

    #[error("unsupported layout: HFC width {hfc} exceeds LFC width {lfc}")]
    UnsupportedLayout { lfc: usize, hfc: usize },

    #[error("non-finite value produced at iteration {iteration}")]
    Numerical { iteration: usize },

    #[error("invalid value: {0}")]
    InvalidValue(&'static str),
}

impl Error {
    pub(crate) fn shape(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::Shape {
            expected_frames: expected.0,
            expected_bins: expected.1,
            got_frames: got.0,
            got_bins: got.1,
        }
    }
}
