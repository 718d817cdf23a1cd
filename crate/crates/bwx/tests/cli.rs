use std::path::Path;
use std::process::{Command, Output};

use bwx::synth::{synth_clip, ClipParams};
use bwx::{write_wav, SampleFormat};

fn bwx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bwx"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(bwx(&["--help"]).status.code(), Some(0));
    assert_eq!(bwx(&["--version"]).status.code(), Some(0));
    assert_eq!(bwx(&["sr", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bwx(&[]).status.code(), Some(1));
    assert_eq!(bwx(&["sr", "--in", "a.wav"]).status.code(), Some(1));
    let bad = bwx(&[
        "sr", "--in", "a", "--out", "b", "--mag", "neural", "--phase", "flip",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(
        bwx(&["prepare", "--in", "a", "--out", "b", "--filter", "iir"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bwx(&[
        "sr",
        "--in",
        s(&dir.path().join("missing.wav")),
        "--out",
        s(&dir.path().join("o.wav")),
        "--mag",
        "sbr",
        "--phase",
        "flip",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.wav"));
}

#[test]
fn invalid_cutoff_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let hr = dir.path().join("hr.wav");
    write_wav(
        &hr,
        &[synth_clip(&ClipParams {
            seconds: 0.5,
            ..ClipParams::new(1)
        })
        .unwrap()],
        SampleFormat::Pcm16,
    )
    .unwrap();
    let out = bwx(&[
        "prepare",
        "--in",
        s(&hr),
        "--out",
        s(&dir.path().join("lr.wav")),
        "--cutoff-hz",
        "30000",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn prepare_sr_eval_and_spec_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let clip = synth_clip(&ClipParams {
        seconds: 1.0,
        ..ClipParams::new(2)
    })
    .unwrap();
    write_wav(p("hr.wav"), &[clip], SampleFormat::Float32).unwrap();

    let ok = |args: &[&str]| {
        let o = bwx(args);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    };
    ok(&["prepare", "--in", s(&p("hr.wav")), "--out", s(&p("lr.wav"))]);
    ok(&[
        "prepare",
        "--in",
        s(&p("hr.wav")),
        "--out",
        s(&p("lr_fir.wav")),
        "--filter",
        "fir",
        "--taps",
        "101",
    ]);
    ok(&[
        "spec",
        "export",
        "--in",
        s(&p("hr.wav")),
        "--out",
        s(&p("hfc.bwxspec")),
        "--band",
        "hfc",
    ]);
    ok(&[
        "sr",
        "--in",
        s(&p("lr.wav")),
        "--out",
        s(&p("sr.wav")),
        "--mag",
        &format!("import:{}", s(&p("hfc.bwxspec"))),
        "--phase",
        "gla",
        "--gla-iters",
        "5",
        "--gla-init",
        "flip",
        "--trace",
        s(&p("trace.csv")),
    ]);
    ok(&[
        "eval",
        "--truth",
        s(&p("hr.wav")),
        "--est",
        s(&p("sr.wav")),
        "--truth",
        s(&p("hr.wav")),
        "--est",
        s(&p("lr.wav")),
        "--out",
        s(&p("eval.csv")),
    ]);
    let csv = std::fs::read_to_string(p("eval.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "file,method,lsd_hf_db,lsd_full_db,snr_db,frames");
    assert!(lines[1].contains("sr.wav") && lines[2].contains("lr.wav"));
    assert!(lines[3].starts_with("mean,"));
    let trace = std::fs::read_to_string(p("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6);

    ok(&[
        "spec",
        "export",
        "--in",
        s(&p("hr.wav")),
        "--out",
        s(&p("full.bwxspec")),
        "--kind",
        "complex",
    ]);
    ok(&[
        "spec",
        "import",
        "--in",
        s(&p("full.bwxspec")),
        "--out",
        s(&p("back.wav")),
    ]);
    let back = bwx::read_wav(p("back.wav")).unwrap();
    let hr = bwx::read_wav(p("hr.wav")).unwrap();
    let (a, b) = (hr.channels[0].samples(), back.channels[0].samples());
    let err = a[2048..b.len() - 2048]
        .iter()
        .zip(&b[2048..b.len() - 2048])
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(err < 1e-5, "{err}");

    // magnitude files cannot be synthesized
    let o = bwx(&[
        "spec",
        "import",
        "--in",
        s(&p("hfc.bwxspec")),
        "--out",
        s(&p("x.wav")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    // corrupt spectrogram file
    std::fs::write(p("bad.bwxspec"), b"BWXSPEC0garbage-garbage-garbage").unwrap();
    let o = bwx(&[
        "spec",
        "import",
        "--in",
        s(&p("bad.bwxspec")),
        "--out",
        s(&p("x.wav")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad magic"));
}
