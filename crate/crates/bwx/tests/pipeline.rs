use std::fs;
use std::path::Path;

use bwx::pipeline::{
    run_job, super_resolve, MagnitudeSource, MagnitudeSpec, PhaseSource, PhaseSpec,
};
use bwx::report::evaluate_batch;
use bwx::specfile::{write_spec, SpecFile};
use bwx::study::{collect_clips, phase_study, StudyOptions};
use bwx::synth::{synth_clip, ClipParams};
use bwx::{
    make_pair, read_wav, write_wav, Error, ResidualBand, SampleFormat, SrJobSpec, SrOptions,
};
use bwx_core::{
    band_split, istft, lowpass::lowpass, lsd, stft, BandReplication, Complex64, GlaInit,
    LowpassSpec, MagnitudeSpectrogram, StftConfig, Waveform,
};

fn clip(seconds: f64, seed: u64) -> Waveform {
    synth_clip(&ClipParams {
        seconds,
        ..ClipParams::new(seed)
    })
    .unwrap()
}

fn opts() -> SrOptions {
    SrOptions::from_hz(StftConfig::default(), 4000.0, 8000.0, 44100).unwrap()
}

fn interior_rel_rms(truth: &[f64], est: &[f64], edge: usize) -> f64 {
    let end = truth.len().min(est.len()) - edge;
    let (mut num, mut den) = (0.0, 0.0);
    for i in edge..end {
        num += (truth[i] - est[i]).powi(2);
        den += truth[i].powi(2);
    }
    (num / den).sqrt()
}

fn rel_frob(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(1e-24)).sqrt()
}

#[test]
fn full_oracle_reproduces_the_recording() {
    let hr = clip(1.5, 2);
    let out = super_resolve(
        &hr,
        &MagnitudeSource::Oracle(&hr),
        &PhaseSource::Reference(&hr),
        &opts(),
    )
    .unwrap();
    assert!(!out.reference_frame_mismatch);
    let err = interior_rel_rms(hr.samples(), out.waveform.samples(), 2048);
    assert!(err < 1e-6, "{err}");
    let cfg = StftConfig::default();
    assert_eq!(
        out.waveform.len(),
        cfg.synthesis_len(cfg.frame_count(hr.len()))
    );
}

#[test]
fn zero_magnitudes_leave_an_lfc_only_reconstruction() {
    let lr = clip(1.0, 5);
    let o = opts();
    let frames = o.stft.frame_count(lr.len());
    let zeros = MagnitudeSpectrogram::from_values(
        vec![0.0; frames * o.layout.hfc_width()],
        frames,
        o.layout.hfc_width(),
        o.layout.k_lo(),
        o.stft,
    )
    .unwrap();
    let out = super_resolve(&lr, &MagnitudeSource::Given(zeros), &PhaseSource::Flip, &o).unwrap();

    let mut x = stft(&lr, &o.stft).unwrap();
    let hfc = o.layout.hfc();
    let bins = x.bins();
    let mut data = x.data().to_vec();
    for l in 0..x.frames() {
        for k in hfc.clone() {
            data[l * bins + k] = Complex64::new(0.0, 0.0);
        }
    }
    x = bwx_core::ComplexSpectrogram::from_vec(data, x.frames(), bins, 0, o.stft).unwrap();
    let expected = istft(&x, 44100).unwrap();
    assert_eq!(out.waveform, expected);
}

#[test]
fn lfc_is_carried_over_unchanged_before_synthesis() {
    let hr = clip(1.0, 9);
    let lr = lowpass(&hr, &LowpassSpec::default(), &StftConfig::default()).unwrap();
    let o = opts();
    let x_lr = stft(&lr, &o.stft).unwrap();
    let lfc_in = band_split(&x_lr, &o.layout).unwrap().lfc;
    for phase in [
        PhaseSource::Flip,
        PhaseSource::Gla {
            iterations: 10,
            init: GlaInit::ZeroPhase,
        },
        PhaseSource::Reference(&hr),
    ] {
        let out = super_resolve(&lr, &MagnitudeSource::Oracle(&hr), &phase, &o).unwrap();
        let lfc_out = band_split(&out.spectrogram, &o.layout).unwrap().lfc;
        assert_eq!(lfc_out, lfc_in, "{phase:?}");
    }
}

#[test]
fn lfc_after_resynthesis_stays_close() {
    // Re-analysis mixes HFC window leakage back into the top LFC bins, so this
    // is not exact; the exact check is the pre-synthesis test above.
    let hr = clip(1.0, 9);
    let lr = lowpass(&hr, &LowpassSpec::default(), &StftConfig::default()).unwrap();
    let o = opts();
    let round_trip = stft(
        &istft(&stft(&lr, &o.stft).unwrap(), 44100).unwrap(),
        &o.stft,
    )
    .unwrap();
    let want = band_split(&round_trip, &o.layout).unwrap().lfc;
    let out = super_resolve(&lr, &MagnitudeSource::Oracle(&hr), &PhaseSource::Flip, &o).unwrap();
    let got = band_split(&stft(&out.waveform, &o.stft).unwrap(), &o.layout)
        .unwrap()
        .lfc;
    let err = rel_frob(got.data(), want.data());
    assert!(err < 5e-3, "{err}");
}

#[test]
fn zero_residual_band_suppresses_content_above_k_hi() {
    let hr = clip(1.0, 4);
    let o = SrOptions {
        residual: ResidualBand::Zero,
        ..opts()
    };
    let out = super_resolve(&hr, &MagnitudeSource::Oracle(&hr), &PhaseSource::Flip, &o).unwrap();
    let before = band_split(&out.spectrogram, &o.layout).unwrap().residual;
    assert!(before.data().iter().all(|z| *z == Complex64::new(0.0, 0.0)));

    let input_energy = band_split(&stft(&hr, &o.stft).unwrap(), &o.layout)
        .unwrap()
        .residual
        .norm();
    let re = band_split(&stft(&out.waveform, &o.stft).unwrap(), &o.layout)
        .unwrap()
        .residual;
    // only window leakage from below k_hi remains
    assert!(
        re.norm() < 1e-2 * input_energy,
        "{} vs {}",
        re.norm(),
        input_energy
    );
}

#[test]
fn band_replication_and_gla_trace() {
    let lr = lowpass(
        &clip(1.0, 6),
        &LowpassSpec::default(),
        &StftConfig::default(),
    )
    .unwrap();
    let o = SrOptions {
        record_trace: true,
        ..opts()
    };
    let out = super_resolve(
        &lr,
        &MagnitudeSource::BandReplication(BandReplication::default()),
        &PhaseSource::Gla {
            iterations: 5,
            init: GlaInit::FlipPhase,
        },
        &o,
    )
    .unwrap();
    let trace = out.trace.unwrap();
    assert_eq!(trace.residuals.len(), 5);
    assert!(trace.residuals.iter().all(|r| r.is_finite() && *r >= 0.0));
    assert!(out.waveform.samples().iter().all(|v| v.is_finite()));
}

#[test]
fn stage_labels_on_errors() {
    let lr = clip(0.5, 1);
    let short = lr.slice(0, 3000);
    let err = super_resolve(
        &lr,
        &MagnitudeSource::Oracle(&short),
        &PhaseSource::Flip,
        &opts(),
    )
    .unwrap_err();
    assert!(
        err.to_string().starts_with("magnitude prediction failed"),
        "{err}"
    );
    assert_eq!(err.exit_code(), 1);

    let other_rate = Waveform::new(lr.samples().to_vec(), 48000).unwrap();
    let err = super_resolve(
        &lr,
        &MagnitudeSource::Oracle(&lr),
        &PhaseSource::Reference(&other_rate),
        &opts(),
    )
    .unwrap_err();
    assert!(
        err.to_string().starts_with("phase estimation failed"),
        "{err}"
    );
}

#[test]
fn short_reference_is_padded_and_flagged() {
    let hr = clip(0.5, 1);
    let short = hr.slice(0, hr.len() - 256);
    let out = super_resolve(
        &hr,
        &MagnitudeSource::Oracle(&hr),
        &PhaseSource::Reference(&short),
        &opts(),
    )
    .unwrap();
    assert!(out.reference_frame_mismatch);
}

fn write_clip(dir: &Path, name: &str, w: &Waveform, format: SampleFormat) -> std::path::PathBuf {
    let p = dir.join(name);
    write_wav(&p, std::slice::from_ref(w), format).unwrap();
    p
}

#[test]
fn make_pair_keeps_format_length_and_passband() {
    let dir = tempfile::tempdir().unwrap();
    let hr = clip(1.0, 8);
    let hr_path = write_clip(dir.path(), "hr.wav", &hr, SampleFormat::Pcm16);
    let lr_path = dir.path().join("lr.wav");
    make_pair(
        &hr_path,
        &lr_path,
        &LowpassSpec::default(),
        &StftConfig::default(),
    )
    .unwrap();
    let (a, b) = (read_wav(&hr_path).unwrap(), read_wav(&lr_path).unwrap());
    assert_eq!(b.format, SampleFormat::Pcm16);
    assert_eq!(a.len(), b.len());
    assert_eq!(a.sample_rate(), b.sample_rate());

    let cfg = StftConfig::default();
    let ma = stft(&a.channels[0], &cfg).unwrap().magnitude();
    let mb = stft(&b.channels[0], &cfg).unwrap().magnitude();
    assert!(lsd(&ma, &mb, 0..186).unwrap() < 0.5);
    assert!(lsd(&ma, &mb, 186..372).unwrap() > 20.0);
}

#[test]
fn sr_job_writes_trace_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let hr = clip(1.0, 3);
    let lr = lowpass(&hr, &LowpassSpec::default(), &StftConfig::default()).unwrap();
    let hr_path = write_clip(dir.path(), "hr.wav", &hr, SampleFormat::Float32);
    let lr_path = write_clip(dir.path(), "lr.wav", &lr, SampleFormat::Float32);
    let job = |out: &str| SrJobSpec {
        trace: Some(dir.path().join(format!("{out}.csv"))),
        ..SrJobSpec::new(
            &lr_path,
            dir.path().join(out),
            MagnitudeSpec::Oracle(hr_path.clone()),
            PhaseSpec::Gla {
                iterations: 8,
                init: GlaInit::ZeroPhase,
            },
        )
    };
    run_job(&job("a.wav")).unwrap();
    run_job(&job("b.wav")).unwrap();
    assert_eq!(
        fs::read(dir.path().join("a.wav")).unwrap(),
        fs::read(dir.path().join("b.wav")).unwrap()
    );
    let csv = fs::read_to_string(dir.path().join("a.wav.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iteration,residual");
    assert_eq!(lines.len(), 9);
    for (i, l) in lines[1..].iter().enumerate() {
        let (it, r) = l.split_once(',').unwrap();
        assert_eq!(it.parse::<usize>().unwrap(), i + 1);
        assert!(!r.contains('e'));
        let digits = r.trim_start_matches(['0', '.']).replace('.', "");
        assert!(digits.len() >= 9, "{r}");
    }

    let same = SrJobSpec::new(
        &lr_path,
        &lr_path,
        MagnitudeSpec::Oracle(hr_path),
        PhaseSpec::Flip,
    );
    assert!(matches!(run_job(&same), Err(Error::Usage(_))));
}

#[test]
fn imported_magnitudes_match_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let hr = clip(1.0, 12);
    let lr = lowpass(&hr, &LowpassSpec::default(), &StftConfig::default()).unwrap();
    let o = opts();
    let hfc = stft(&hr, &o.stft)
        .unwrap()
        .bin_range(o.layout.hfc())
        .unwrap()
        .magnitude();
    let spec_path = dir.path().join("m.bwxspec");
    write_spec(&spec_path, &SpecFile::from_magnitude(&hfc, 44100).unwrap()).unwrap();
    let lr_path = write_clip(dir.path(), "lr.wav", &lr, SampleFormat::Float32);

    let out = run_job(&SrJobSpec::new(
        &lr_path,
        dir.path().join("out.wav"),
        MagnitudeSpec::Import(spec_path.clone()),
        PhaseSpec::Flip,
    ))
    .unwrap();
    let oracle = super_resolve(&lr, &MagnitudeSource::Oracle(&hr), &PhaseSource::Flip, &o).unwrap();
    // stored as f32, so only close
    let err = interior_rel_rms(oracle.waveform.samples(), out[0].waveform.samples(), 2048);
    assert!(err < 1e-5, "{err}");

    // a file for a different band width is refused with both shapes named
    let narrow = hfc.bin_range(186..300).unwrap();
    write_spec(
        &spec_path,
        &SpecFile::from_magnitude(&narrow, 44100).unwrap(),
    )
    .unwrap();
    let err = run_job(&SrJobSpec::new(
        &lr_path,
        dir.path().join("out2.wav"),
        MagnitudeSpec::Import(spec_path),
        PhaseSpec::Flip,
    ))
    .unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("186") && msg.contains("114"), "{msg}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn stereo_channels_are_processed_independently() {
    let dir = tempfile::tempdir().unwrap();
    let (l, r) = (clip(0.5, 20), clip(0.5, 21));
    let hr_path = dir.path().join("hr.wav");
    write_wav(&hr_path, &[l.clone(), r.clone()], SampleFormat::Float32).unwrap();
    let out = run_job(&SrJobSpec::new(
        &hr_path,
        dir.path().join("out.wav"),
        MagnitudeSpec::Oracle(hr_path.clone()),
        PhaseSpec::Reference(hr_path.clone()),
    ))
    .unwrap();
    assert_eq!(out.len(), 2);
    let back = read_wav(dir.path().join("out.wav")).unwrap();
    assert_eq!(back.channels.len(), 2);
    let hr_f32 = read_wav(&hr_path).unwrap();
    for c in 0..2 {
        let err = interior_rel_rms(
            hr_f32.channels[c].samples(),
            back.channels[c].samples(),
            2048,
        );
        assert!(err < 1e-6, "channel {c}: {err}");
    }
}

#[test]
fn evaluate_batch_keeps_order_and_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_clip(dir.path(), "a.wav", &clip(0.5, 1), SampleFormat::Float32);
    let b = write_clip(dir.path(), "b.wav", &clip(0.5, 2), SampleFormat::Float32);
    let missing = dir.path().join("missing.wav");
    let rows = evaluate_batch(
        &[
            (a.clone(), a.clone()),
            (b.clone(), missing.clone()),
            (b.clone(), b.clone()),
        ],
        &StftConfig::default(),
        4000.0,
        8000.0,
    );
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].file, a.display().to_string());
    assert_eq!(rows[1].file, missing.display().to_string());
    assert!(rows[1].outcome.is_err());
    let r = rows[0].report().unwrap();
    assert_eq!((r.lsd_hf, r.lsd_full), (0.0, 0.0));
    assert!((r.snr - 120.0).abs() < 1e-9);
    assert_eq!(rows[3].file, "mean");
    assert_eq!(rows[3].report().unwrap().lsd_hf, 0.0);
}

#[test]
fn phase_study_skips_unreadable_clips() {
    let dir = tempfile::tempdir().unwrap();
    write_clip(dir.path(), "a.wav", &clip(1.0, 30), SampleFormat::Pcm16);
    fs::write(dir.path().join("b.wav"), b"not a wav").unwrap();
    let clips = collect_clips(dir.path()).unwrap();
    assert_eq!(clips.len(), 2);
    let opts = StudyOptions {
        gla_iterations: 10,
        jobs: Some(2),
        ..StudyOptions::default()
    };
    let report = phase_study(&clips, &opts).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.means.len(), 4);
    assert_eq!(report.skipped.len(), 1);
    assert_eq!(report.gla_traces[0].1[0].residuals.len(), 10);

    let list = dir.path().join("list.txt");
    fs::write(&list, "# only the broken one\nb.wav\n").unwrap();
    let err = phase_study(&collect_clips(&list).unwrap(), &opts).unwrap_err();
    assert!(matches!(err, Error::NoClips));
    assert_eq!(err.exit_code(), 2);
}
