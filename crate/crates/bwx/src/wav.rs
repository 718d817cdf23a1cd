//! RIFF/WAVE reading and writing for 16/24-bit PCM and 32-bit float.
//!
//! Integer samples are normalized by `2^(bits-1)`, so `-32768` reads as
//! exactly `-1.0`. Writing clamps to `[-1, 1]` and rounds half away from
//! zero. Written files use the canonical 44-byte header.

use std::fs;
use std::path::Path;

use bwx_core::Waveform;
use thiserror::Error;

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

pub const HEADER_LEN: usize = 44;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Pcm24,
    Float32,
}

impl SampleFormat {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            SampleFormat::Pcm16 => 2,
            SampleFormat::Pcm24 => 3,
            SampleFormat::Float32 => 4,
        }
    }

    fn tag(self) -> u16 {
        match self {
            SampleFormat::Float32 => FORMAT_FLOAT,
            _ => FORMAT_PCM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WavError {
    #[error("unsupported encoding: format tag {format_tag:#06x}, {bits} bits per sample")]
    Unsupported { format_tag: u16, bits: u16 },

    #[error("malformed header: {0}")]
    Malformed(&'static str),

    #[error("truncated data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
}

/// Decoded audio: one waveform per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub channels: Vec<Waveform>,
    pub format: SampleFormat,
}

impl WavAudio {
    pub fn sample_rate(&self) -> u32 {
        self.channels.first().map_or(0, |c| c.sample_rate())
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub fn decode(bytes: &[u8]) -> Result<WavAudio, WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::Malformed("missing RIFF/WAVE signature"));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<(usize, usize)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + size > bytes.len() {
                    return Err(WavError::Malformed("fmt chunk too short"));
                }
                let mut tag = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if tag == FORMAT_EXTENSIBLE {
                    if size < 40 {
                        return Err(WavError::Malformed("extensible fmt chunk too short"));
                    }
                    tag = u16_at(bytes, body + 24);
                }
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => {
                let available = bytes.len() - body;
                if size > available {
                    return Err(WavError::Truncated {
                        expected: size,
                        found: available,
                    });
                }
                data = Some((body, size));
                break;
            }
            _ => {}
        }
        pos = body + size + (size & 1);
    }

    let (tag, channels, rate, bits) = fmt.ok_or(WavError::Malformed("no fmt chunk"))?;
    let (start, size) = data.ok_or(WavError::Malformed("no data chunk"))?;
    if channels == 0 {
        return Err(WavError::Malformed("zero channels"));
    }
    if rate == 0 {
        return Err(WavError::Malformed("zero sample rate"));
    }
    let format = match (tag, bits) {
        (FORMAT_PCM, 16) => SampleFormat::Pcm16,
        (FORMAT_PCM, 24) => SampleFormat::Pcm24,
        (FORMAT_FLOAT, 32) => SampleFormat::Float32,
        (format_tag, bits) => return Err(WavError::Unsupported { format_tag, bits }),
    };
    let frame_bytes = format.bytes_per_sample() * channels as usize;
    if size % frame_bytes != 0 {
        let expected = size.div_ceil(frame_bytes) * frame_bytes;
        return Err(WavError::Truncated {
            expected,
            found: size,
        });
    }
    let payload = &bytes[start..start + size];
    let frames = size / frame_bytes;
    let mut out = vec![Vec::with_capacity(frames); channels as usize];
    for frame in payload.chunks_exact(frame_bytes) {
        for (c, s) in frame.chunks_exact(format.bytes_per_sample()).enumerate() {
            let v = match format {
                SampleFormat::Pcm16 => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
                SampleFormat::Pcm24 => {
                    // sign-extend through the top byte of an i32
                    (i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8) as f64 / 8_388_608.0
                }
                SampleFormat::Float32 => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
            };
            out[c].push(v);
        }
    }
    let channels = out
        .into_iter()
        .map(|s| Waveform::new(s, rate).map_err(|_| WavError::Malformed("non-finite float sample")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WavAudio { channels, format })
}

fn quantize(v: f64, bits: u32) -> i32 {
    let full = (1i64 << (bits - 1)) as f64;
    let q = (v.clamp(-1.0, 1.0) * full).round();
    q.clamp(-full, full - 1.0) as i32
}

/// Interleaves `channels` (all of equal length and rate) into WAV bytes.
pub fn encode(channels: &[Waveform], format: SampleFormat) -> Result<Vec<u8>, WavError> {
    let first = channels.first().ok_or(WavError::Malformed("no channels"))?;
    if channels
        .iter()
        .any(|c| c.len() != first.len() || c.sample_rate() != first.sample_rate())
    {
        return Err(WavError::Malformed("channels differ in length or rate"));
    }
    let n_ch = channels.len() as u16;
    let bps = format.bytes_per_sample();
    let data_len = first.len() * bps * channels.len();
    let block_align = n_ch as u32 * bps as u32;

    let mut b = Vec::with_capacity(HEADER_LEN + data_len);
    b.extend_from_slice(b"RIFF");
    b.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    b.extend_from_slice(b"WAVE");
    b.extend_from_slice(b"fmt ");
    b.extend_from_slice(&16u32.to_le_bytes());
    b.extend_from_slice(&format.tag().to_le_bytes());
    b.extend_from_slice(&n_ch.to_le_bytes());
    b.extend_from_slice(&first.sample_rate().to_le_bytes());
    b.extend_from_slice(&(first.sample_rate() * block_align).to_le_bytes());
    b.extend_from_slice(&(block_align as u16).to_le_bytes());
    b.extend_from_slice(&((bps * 8) as u16).to_le_bytes());
    b.extend_from_slice(b"data");
    b.extend_from_slice(&(data_len as u32).to_le_bytes());
    for i in 0..first.len() {
        for c in channels {
            let v = c.samples()[i];
            match format {
                SampleFormat::Pcm16 => b.extend_from_slice(&(quantize(v, 16) as i16).to_le_bytes()),
                SampleFormat::Pcm24 => b.extend_from_slice(&quantize(v, 24).to_le_bytes()[..3]),
                SampleFormat::Float32 => b.extend_from_slice(&(v as f32).to_le_bytes()),
            }
        }
    }
    Ok(b)
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<WavAudio> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|source| Error::Wav {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_wav(
    path: impl AsRef<Path>,
    channels: &[Waveform],
    format: SampleFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(channels, format).map_err(|source| Error::Wav {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(samples: Vec<f64>) -> Waveform {
        Waveform::new(samples, 44100).unwrap()
    }

    #[test]
    fn float32_round_trip_is_bit_exact() {
        let samples: Vec<f64> = (0..1000)
            .map(|i| ((i as f32) * 0.001 - 0.5) as f64)
            .collect();
        let bytes = encode(&[wave(samples.clone())], SampleFormat::Float32).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back.format, SampleFormat::Float32);
        assert_eq!(back.channels[0].samples(), &samples[..]);
    }

    #[test]
    fn pcm16_extremes_and_clamping() {
        let bytes = encode(
            &[wave(vec![-1.0, 1.0, 1.5, -1.5, 0.5])],
            SampleFormat::Pcm16,
        )
        .unwrap();
        let raw: Vec<i16> = bytes[44..]
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(raw, vec![-32768, 32767, 32767, -32768, 16384]);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.channels[0].samples()[0], -1.0);
    }

    #[test]
    fn rounds_half_away_from_zero() {
        assert_eq!(quantize(0.5 / 32768.0, 16), 1);
        assert_eq!(quantize(-0.5 / 32768.0, 16), -1);
        assert_eq!(quantize(1.49 / 32768.0, 16), 1);
    }

    #[test]
    fn pcm16_round_trip_error_bound() {
        let samples: Vec<f64> = (0..5000)
            .map(|i| ((i as f64) * 0.37).sin() * 0.99)
            .collect();
        let bytes = encode(&[wave(samples.clone())], SampleFormat::Pcm16).unwrap();
        let back = decode(&bytes).unwrap();
        for (a, b) in samples.iter().zip(back.channels[0].samples()) {
            assert!((a - b).abs() <= 2f64.powi(-15));
        }
    }

    #[test]
    fn pcm24_round_trip() {
        let samples = vec![-1.0, 0.25, -0.123456, 0.999];
        let bytes = encode(&[wave(samples.clone())], SampleFormat::Pcm24).unwrap();
        assert_eq!(bytes.len(), 44 + 3 * 4);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.format, SampleFormat::Pcm24);
        assert_eq!(back.channels[0].samples()[0], -1.0);
        for (a, b) in samples.iter().zip(back.channels[0].samples()) {
            assert!((a - b).abs() <= 2f64.powi(-23));
        }
    }

    #[test]
    fn silence_file_length() {
        let bytes = encode(
            &[Waveform::silence(1000, 44100).unwrap()],
            SampleFormat::Pcm16,
        )
        .unwrap();
        assert_eq!(bytes.len(), 44 + 2 * 1000);
    }

    #[test]
    fn stereo_interleaving() {
        let l = wave(vec![0.5, 0.25]);
        let r = wave(vec![-0.5, -0.25]);
        let back =
            decode(&encode(&[l.clone(), r.clone()], SampleFormat::Float32).unwrap()).unwrap();
        assert_eq!(back.channels, vec![l, r]);
    }

    #[test]
    fn distinct_errors() {
        let good = encode(&[wave(vec![0.1; 10])], SampleFormat::Pcm16).unwrap();

        let mut bad_sig = good.clone();
        bad_sig[0] = b'X';
        assert!(matches!(decode(&bad_sig), Err(WavError::Malformed(_))));

        let truncated = &good[..good.len() - 5];
        assert!(matches!(decode(truncated), Err(WavError::Truncated { .. })));

        let mut eight_bit = good.clone();
        eight_bit[34] = 8;
        assert_eq!(
            decode(&eight_bit),
            Err(WavError::Unsupported {
                format_tag: 1,
                bits: 8
            })
        );

        let mut alaw = good.clone();
        alaw[20] = 6;
        assert!(matches!(
            decode(&alaw),
            Err(WavError::Unsupported { format_tag: 6, .. })
        ));

        assert!(matches!(decode(&good[..20]), Err(WavError::Malformed(_))));
    }
}
