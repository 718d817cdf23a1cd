//! BWXSPEC1 spectrogram interchange files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `BWXSPEC1`                        |
//! | 8      | 4    | frames (u32)                            |
//! | 12     | 4    | bins (u32)                              |
//! | 16     | 1    | kind: 0 magnitude, 1 complex            |
//! | 17     | 4    | sample rate (u32)                       |
//! | 21     | 4    | frame length (u32)                      |
//! | 25     | 4    | hop (u32)                               |
//! | 29     | ...  | row-major f32 payload, `re,im` for complex |

use std::fs;
use std::path::Path;

use bwx_core::{Complex64, ComplexSpectrogram, MagnitudeSpectrogram, StftConfig};
use thiserror::Error;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BWXSPEC1";
pub const HEADER_LEN: usize = 29;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    Magnitude = 0,
    Complex = 1,
}

impl SpecKind {
    pub fn values_per_cell(self) -> usize {
        match self {
            SpecKind::Magnitude => 1,
            SpecKind::Complex => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecHeader {
    pub frames: u32,
    pub bins: u32,
    pub kind: SpecKind,
    pub sample_rate: u32,
    pub frame_len: u32,
    pub hop: u32,
}

impl SpecHeader {
    pub fn payload_values(&self) -> usize {
        self.frames as usize * self.bins as usize * self.kind.values_per_cell()
    }

    pub fn file_len(&self) -> usize {
        HEADER_LEN + 4 * self.payload_values()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecFileError {
    #[error("bad magic: not a BWXSPEC1 file")]
    BadMagic,

    #[error("header truncated: {found} of {HEADER_LEN} bytes")]
    ShortHeader { found: usize },

    #[error("unknown spectrogram kind {0}")]
    UnknownKind(u8),

    #[error("empty shape {frames}x{bins}")]
    EmptyShape { frames: u32, bins: u32 },

    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },

    #[error("non-finite payload value at index {index}")]
    NonFinite { index: usize },

    #[error("negative magnitude at index {index}")]
    NegativeMagnitude { index: usize },

    #[error("expected a {expected:?} file, found {found:?}")]
    KindMismatch { expected: SpecKind, found: SpecKind },

    #[error("shape mismatch: expected {expected_frames}x{expected_bins}, file holds {found_frames}x{found_bins}")]
    ShapeMismatch {
        expected_frames: usize,
        expected_bins: usize,
        found_frames: usize,
        found_bins: usize,
    },

    #[error("STFT config mismatch: expected frame {expected_frame}/hop {expected_hop} at {expected_rate} Hz, file has frame {found_frame}/hop {found_hop} at {found_rate} Hz")]
    ConfigMismatch {
        expected_frame: u32,
        expected_hop: u32,
        expected_rate: u32,
        found_frame: u32,
        found_hop: u32,
        found_rate: u32,
    },
}

/// Header plus raw `f32` payload.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub header: SpecHeader,
    pub values: Vec<f32>,
}

impl SpecFile {
    pub fn new(header: SpecHeader, values: Vec<f32>) -> Result<Self, SpecFileError> {
        if header.frames == 0 || header.bins == 0 {
            return Err(SpecFileError::EmptyShape {
                frames: header.frames,
                bins: header.bins,
            });
        }
        if values.len() != header.payload_values() {
            return Err(SpecFileError::PayloadLength {
                expected: 4 * header.payload_values(),
                found: 4 * values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpecFileError::NonFinite { index });
        }
        Ok(SpecFile { header, values })
    }

    pub fn from_magnitude(
        m: &MagnitudeSpectrogram,
        sample_rate: u32,
    ) -> Result<Self, SpecFileError> {
        let header = header_for(
            m.frames(),
            m.bins(),
            SpecKind::Magnitude,
            m.config(),
            sample_rate,
        );
        Self::new(header, m.values().map(|v| v as f32).collect())
    }

    pub fn from_complex(x: &ComplexSpectrogram, sample_rate: u32) -> Result<Self, SpecFileError> {
        let header = header_for(
            x.frames(),
            x.bins(),
            SpecKind::Complex,
            x.config(),
            sample_rate,
        );
        let values = x
            .data()
            .iter()
            .flat_map(|z| [z.re as f32, z.im as f32])
            .collect();
        Self::new(header, values)
    }

    pub fn stft_config(&self) -> Result<StftConfig> {
        Ok(StftConfig::new(
            self.header.frame_len as usize,
            self.header.hop as usize,
        )?)
    }

    /// Magnitudes as a band starting at absolute bin `first_bin`.
    pub fn to_magnitude(&self, first_bin: usize) -> Result<MagnitudeSpectrogram> {
        self.expect_kind(SpecKind::Magnitude)?;
        if let Some(index) = self.values.iter().position(|&v| v < 0.0) {
            return Err(Error::SpecFile {
                path: Default::default(),
                source: SpecFileError::NegativeMagnitude { index },
            });
        }
        Ok(MagnitudeSpectrogram::from_values(
            self.values.iter().map(|&v| v as f64).collect(),
            self.header.frames as usize,
            self.header.bins as usize,
            first_bin,
            self.stft_config()?,
        )?)
    }

    pub fn to_complex(&self, first_bin: usize) -> Result<ComplexSpectrogram> {
        self.expect_kind(SpecKind::Complex)?;
        let data = self
            .values
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0] as f64, c[1] as f64))
            .collect();
        Ok(ComplexSpectrogram::from_vec(
            data,
            self.header.frames as usize,
            self.header.bins as usize,
            first_bin,
            self.stft_config()?,
        )?)
    }

    fn expect_kind(&self, expected: SpecKind) -> Result<()> {
        if self.header.kind != expected {
            return Err(Error::SpecFile {
                path: Default::default(),
                source: SpecFileError::KindMismatch {
                    expected,
                    found: self.header.kind,
                },
            });
        }
        Ok(())
    }
}

fn header_for(
    frames: usize,
    bins: usize,
    kind: SpecKind,
    cfg: &StftConfig,
    sample_rate: u32,
) -> SpecHeader {
    SpecHeader {
        frames: frames as u32,
        bins: bins as u32,
        kind,
        sample_rate,
        frame_len: cfg.frame_len() as u32,
        hop: cfg.hop() as u32,
    }
}

pub fn encode(file: &SpecFile) -> Vec<u8> {
    let h = &file.header;
    let mut b = Vec::with_capacity(h.file_len());
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&h.frames.to_le_bytes());
    b.extend_from_slice(&h.bins.to_le_bytes());
    b.push(h.kind as u8);
    b.extend_from_slice(&h.sample_rate.to_le_bytes());
    b.extend_from_slice(&h.frame_len.to_le_bytes());
    b.extend_from_slice(&h.hop.to_le_bytes());
    for v in &file.values {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

pub fn decode(bytes: &[u8]) -> Result<SpecFile, SpecFileError> {
    if bytes.len() >= 8 && &bytes[..8] != MAGIC {
        return Err(SpecFileError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(SpecFileError::ShortHeader { found: bytes.len() });
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let kind = match bytes[16] {
        0 => SpecKind::Magnitude,
        1 => SpecKind::Complex,
        other => return Err(SpecFileError::UnknownKind(other)),
    };
    let header = SpecHeader {
        frames: u32_at(8),
        bins: u32_at(12),
        kind,
        sample_rate: u32_at(17),
        frame_len: u32_at(21),
        hop: u32_at(25),
    };
    if header.frames == 0 || header.bins == 0 {
        return Err(SpecFileError::EmptyShape {
            frames: header.frames,
            bins: header.bins,
        });
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = 4 * header.payload_values();
    if payload.len() != expected {
        return Err(SpecFileError::PayloadLength {
            expected,
            found: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    SpecFile::new(header, values)
}

pub fn write_spec(path: impl AsRef<Path>, file: &SpecFile) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(file)).map_err(|e| Error::io(path, e))
}

pub fn read_spec(path: impl AsRef<Path>) -> Result<SpecFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|source| Error::SpecFile {
        path: path.to_path_buf(),
        source,
    })
}

/// Imported HFC magnitudes for the band starting at `first_bin`.
///
/// The file must hold magnitudes of exactly `expected` = (frames, bins),
/// computed with `config` at `sample_rate`.
pub fn load_magnitude(
    path: impl AsRef<Path>,
    expected: (usize, usize),
    config: &StftConfig,
    sample_rate: u32,
    first_bin: usize,
) -> Result<MagnitudeSpectrogram> {
    let path = path.as_ref();
    let fail = |source| Error::SpecFile {
        path: path.to_path_buf(),
        source,
    };
    let file = read_spec(path)?;
    let h = file.header;
    if h.kind != SpecKind::Magnitude {
        return Err(fail(SpecFileError::KindMismatch {
            expected: SpecKind::Magnitude,
            found: h.kind,
        }));
    }
    if (h.frames as usize, h.bins as usize) != expected {
        return Err(fail(SpecFileError::ShapeMismatch {
            expected_frames: expected.0,
            expected_bins: expected.1,
            found_frames: h.frames as usize,
            found_bins: h.bins as usize,
        }));
    }
    if h.frame_len as usize != config.frame_len()
        || h.hop as usize != config.hop()
        || h.sample_rate != sample_rate
    {
        return Err(fail(SpecFileError::ConfigMismatch {
            expected_frame: config.frame_len() as u32,
            expected_hop: config.hop() as u32,
            expected_rate: sample_rate,
            found_frame: h.frame_len,
            found_hop: h.hop,
            found_rate: h.sample_rate,
        }));
    }
    file.to_magnitude(first_bin).map_err(|e| match e {
        Error::SpecFile { source, .. } => fail(source),
        other => other,
    })
}
