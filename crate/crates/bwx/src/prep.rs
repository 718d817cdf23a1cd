//! Dataset preparation: band-limited LR companions of HR recordings.

use std::path::Path;

use bwx_core::lowpass::lowpass;
use bwx_core::{LowpassSpec, StftConfig, Waveform};

use crate::error::Result;
use crate::wav::{read_wav, write_wav};

/// Low-passes every channel of `hr` and writes the result to `out_lr` with the
/// same sample format, rate and length.
pub fn make_pair(
    hr: impl AsRef<Path>,
    out_lr: impl AsRef<Path>,
    spec: &LowpassSpec,
    config: &StftConfig,
) -> Result<()> {
    let audio = read_wav(hr)?;
    let lr = audio
        .channels
        .iter()
        .map(|c| lowpass(c, spec, config))
        .collect::<Result<Vec<Waveform>, _>>()?;
    write_wav(out_lr, &lr, audio.format)
}
