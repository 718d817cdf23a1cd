//! Deterministic synthetic music clips.
//!
//! Each clip mixes a few harmonic voices (plucked and sustained notes with
//! vibrato, harmonics reaching past 8 kHz) with decaying noise hits standing
//! in for hi-hats, so both the LFC and the HFC band carry structured energy.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use bwx_core::Waveform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::wav::{write_wav, SampleFormat};

pub const DEFAULT_RATE: u32 = 44100;
pub const DEFAULT_SECONDS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipParams {
    pub seed: u64,
    pub seconds: f64,
    pub sample_rate: u32,
}

impl ClipParams {
    pub fn new(seed: u64) -> Self {
        ClipParams {
            seed,
            seconds: DEFAULT_SECONDS,
            sample_rate: DEFAULT_RATE,
        }
    }
}

// A-minor pentatonic over several octaves, as MIDI note numbers.
const SCALE: [i32; 5] = [0, 3, 5, 7, 10];

fn midi_hz(note: i32) -> f64 {
    440.0 * 2f64.powf((note - 69) as f64 / 12.0)
}

struct Note {
    start: usize,
    len: usize,
    f0: f64,
    amp: f64,
    /// Per-harmonic amplitude falloff exponent.
    tilt: f64,
    decay: f64,
    vibrato_hz: f64,
    vibrato_depth: f64,
    phases: Vec<f64>,
}

fn render_note(out: &mut [f64], note: &Note, rate: f64) {
    let nyquist_guard = 0.45 * rate;
    let harmonics = ((nyquist_guard.min(12000.0)) / note.f0).floor().max(1.0) as usize;
    let end = (note.start + note.len).min(out.len());
    let attack = (0.005 * rate) as usize;
    let release = (0.03 * rate) as usize;
    let mut phase = 0.0f64;
    for (i, n) in (note.start..end).enumerate() {
        let t = i as f64 / rate;
        let vib = 1.0 + note.vibrato_depth * (2.0 * PI * note.vibrato_hz * t).sin();
        phase += 2.0 * PI * note.f0 * vib / rate;
        let mut env = (-t * note.decay).exp();
        if i < attack {
            env *= i as f64 / attack as f64;
        }
        let left = end - n;
        if left < release {
            env *= left as f64 / release as f64;
        }
        let mut acc = 0.0;
        for h in 1..=harmonics {
            let hf = h as f64;
            // upper harmonics die away faster, like a real string
            let a = hf.powf(-note.tilt) * (-t * note.decay * 0.15 * hf).exp();
            acc += a * (hf * phase + note.phases[h - 1]).sin();
        }
        out[n] += note.amp * env * acc;
    }
}

fn render_hit(
    out: &mut [f64],
    start: usize,
    amp: f64,
    decay: f64,
    rng: &mut ChaCha8Rng,
    rate: f64,
) {
    let len = ((6.0 / decay) * rate) as usize;
    let mut prev = 0.0;
    for i in 0..len.min(out.len().saturating_sub(start)) {
        let w: f64 = rng.random_range(-1.0..1.0);
        // first difference tilts the noise towards high frequencies
        let hp = w - prev;
        prev = w;
        out[start + i] += amp * hp * (-(i as f64) / rate * decay).exp();
    }
}

/// Renders one clip; identical parameters give bit-identical output.
pub fn synth_clip(params: &ClipParams) -> Result<Waveform> {
    if params.seconds.is_nan() || params.seconds <= 0.0 || params.sample_rate < 16000 {
        return Err(Error::Usage(
            "clip needs a positive duration and a rate of at least 16 kHz".into(),
        ));
    }
    let rate = params.sample_rate as f64;
    let n = (params.seconds * rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut out = vec![0.0; n];

    let tempo = rng.random_range(90.0..140.0);
    let beat = (60.0 / tempo * rate) as usize;
    let root = 45 + rng.random_range(0..7);

    // bass line, chords and a melody, each on its own grid
    let voices: [(i32, usize, f64, (f64, f64)); 3] = [
        (0, 2, 0.30, (1.2, 1.6)),
        (12, 1, 0.18, (0.9, 1.3)),
        (24, 1, 0.12, (0.7, 1.1)),
    ];
    for (octave, beats_per_note, amp, (tilt_lo, tilt_hi)) in voices {
        let mut start = 0;
        while start < n {
            let steps = beats_per_note * rng.random_range(1..=2);
            let len = steps * beat / if octave == 24 { 2 } else { 1 };
            if rng.random_bool(0.85) {
                let degree = SCALE[rng.random_range(0..SCALE.len())] + 12 * rng.random_range(0..2);
                let f0 = midi_hz(root + octave + degree);
                let harmonics = (0.45 * rate / f0) as usize + 1;
                let note = Note {
                    start,
                    len,
                    f0,
                    amp: amp * rng.random_range(0.7..1.0),
                    tilt: rng.random_range(tilt_lo..tilt_hi),
                    decay: rng.random_range(0.5..3.0),
                    vibrato_hz: rng.random_range(4.0..6.5),
                    vibrato_depth: rng.random_range(0.0..0.004),
                    phases: (0..harmonics)
                        .map(|_| rng.random_range(0.0..2.0 * PI))
                        .collect(),
                };
                render_note(&mut out, &note, rate);
            }
            start += len.max(1);
        }
    }

    // hi-hats on eighth notes
    let mut t = 0;
    while t < n {
        if rng.random_bool(0.7) {
            let amp = rng.random_range(0.03..0.08);
            let decay = rng.random_range(25.0..60.0);
            render_hit(&mut out, t, amp, decay, &mut rng, rate);
        }
        t += beat / 2;
    }

    for v in &mut out {
        *v += 1e-4 * rng.random_range(-1.0..1.0);
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let g = 0.8 / peak;
        out.iter_mut().for_each(|v| *v *= g);
    }
    Ok(Waveform::new(out, params.sample_rate)?)
}

/// Writes `count` clips named `clip_00.wav`, `clip_01.wav`, ... into `dir`,
/// seeded from `base_seed`.
pub fn write_clip_set(
    dir: impl AsRef<Path>,
    count: usize,
    base_seed: u64,
    seconds: f64,
    format: SampleFormat,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    (0..count)
        .map(|i| {
            let params = ClipParams {
                seconds,
                ..ClipParams::new(base_seed + i as u64)
            };
            let path = dir.join(format!("clip_{i:02}.wav"));
            write_wav(&path, &[synth_clip(&params)?], format)?;
            Ok(path)
        })
        .collect()
}
