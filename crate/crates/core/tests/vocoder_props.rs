use std::f64::consts::PI;

use proptest::prelude::*;
use specinv::testsignal::{speech_like, white_noise};
use specinv::{
    analyze, snr_db, synthesize, ClipMode, Error, FrameConfig, SpectrogramKind, Vocoder, Waveform,
    WindowKind,
};

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Zero-padded, hann-windowed frame `f`, built by hand.
fn oracle_frame(x: &[f64], win: usize, hop: usize, f: usize) -> Vec<f64> {
    let w = hann(win);
    (0..win)
        .map(|i| {
            let j = (f * hop + i) as isize - (win / 2) as isize;
            if j >= 0 && (j as usize) < x.len() {
                x[j as usize] * w[i]
            } else {
                0.0
            }
        })
        .collect()
}

fn brute_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, &v)| {
                let a = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                (re + v * a.cos(), im + v * a.sin())
            })
        })
        .collect()
}

#[test]
fn packed_rows_match_repacked_brute_force_dft() {
    let x = white_noise(22050, 22050, 1.0, 17);
    let (win, hop) = (1024, 256);
    let cfg = FrameConfig::new(win, hop, WindowKind::Hann, true).unwrap();
    let spec = analyze(&x, &cfg, SpectrogramKind::PackedRfft, ClipMode::None).unwrap();
    assert_eq!(spec.n_frames(), 1 + (22050 + win - win).div_ceil(hop));
    // every 8th frame keeps the O(N^2) oracle affordable; include the last
    let mut frames: Vec<usize> = (0..spec.n_frames()).step_by(8).collect();
    frames.push(spec.n_frames() - 1);
    for f in frames {
        let y = brute_dft(&oracle_frame(x.samples(), win, hop, f));
        let mut packed = vec![y[0].0];
        for c in &y[1..win / 2] {
            packed.extend([c.0, c.1]);
        }
        packed.push(y[win / 2].0);
        for (a, b) in spec.row(f).iter().zip(&packed) {
            assert!((a - b).abs() <= 1e-10, "frame {f}: {a} vs {b}");
        }
    }
}

#[test]
fn real_fft_inverse_frames_are_even_parts() {
    let x = white_noise(22050, 22050, 1.0, 3);
    let cfg = FrameConfig::default();
    let v = Vocoder::new(cfg, SpectrogramKind::RealFft, ClipMode::None).unwrap();
    let frames = v.inverse_frames(&v.analyze(&x).unwrap()).unwrap();
    for f in 0..frames.n_frames() {
        let w = oracle_frame(x.samples(), 1024, 256, f);
        let n = w.len();
        for (i, got) in frames.row(f).iter().enumerate() {
            let want = 0.5 * (w[i] + w[(n - i) % n]);
            assert!((got - want).abs() <= 1e-12, "frame {f} idx {i}");
        }
    }
    let y = synthesize(&v.analyze(&x).unwrap()).unwrap();
    assert!(snr_db(&x, &y).unwrap() < 40.0);
}

#[test]
fn magnitude_is_export_only() {
    let x = white_noise(4096, 16000, 0.5, 1);
    let spec = analyze(
        &x,
        &FrameConfig::default(),
        SpectrogramKind::Magnitude,
        ClipMode::None,
    )
    .unwrap();
    assert_eq!(spec.n_bins(), 513);
    assert!(matches!(synthesize(&spec), Err(Error::UnsupportedKind(_))));
    assert!(analyze(
        &x,
        &FrameConfig::default(),
        SpectrogramKind::Magnitude,
        ClipMode::Zero
    )
    .is_err());
}

#[test]
fn packed_rejects_odd_window() {
    let x = white_noise(4096, 16000, 0.5, 1);
    let cfg = FrameConfig::new(1023, 256, WindowKind::Hann, true).unwrap();
    let err = analyze(&x, &cfg, SpectrogramKind::PackedRfft, ClipMode::None).unwrap_err();
    assert_eq!(err.code(), "invalid-config");
}

#[test]
fn thread_count_does_not_change_output() {
    let x = speech_like(44100, 22050, 5).wave;
    for kind in [
        SpectrogramKind::RealFft,
        SpectrogramKind::Dct,
        SpectrogramKind::PackedRfft,
    ] {
        let one = Vocoder::new(FrameConfig::default(), kind, ClipMode::Zero).unwrap();
        let four = Vocoder::new(FrameConfig::default(), kind, ClipMode::Zero)
            .unwrap()
            .with_threads(4)
            .unwrap();
        let (s1, s4) = (one.analyze(&x).unwrap(), four.analyze(&x).unwrap());
        assert_eq!(s1, s4);
        let (y1, y4) = (one.synthesize(&s1).unwrap(), four.synthesize(&s4).unwrap());
        assert!(y1
            .samples()
            .iter()
            .zip(y4.samples())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

fn signal_strategy() -> impl Strategy<Value = Waveform> {
    (
        prop::collection::vec(-1.0f64..1.0, 2048..6000),
        prop::sample::select(vec![8000u32, 16000, 22050]),
    )
        .prop_map(|(s, sr)| Waveform::new(s, sr).unwrap())
}

fn exact_config() -> impl Strategy<Value = (SpectrogramKind, FrameConfig)> {
    prop_oneof![
        (prop::sample::select(vec![256usize, 512, 1024]), 2usize..=4).prop_map(|(win, div)| {
            (
                SpectrogramKind::Dct,
                FrameConfig::new(win, win / div, WindowKind::Hann, true).unwrap(),
            )
        }),
        (prop::sample::select(vec![256usize, 512, 1024]), 2usize..=8).prop_map(|(win, div)| {
            (
                SpectrogramKind::PackedRfft,
                FrameConfig::new(win, win / div, WindowKind::Hann, true).unwrap(),
            )
        }),
        prop::sample::select(vec![256usize, 512, 1024]).prop_map(|win| {
            (
                SpectrogramKind::PackedRfft,
                FrameConfig::new(win, win - 2, WindowKind::Boxcar, true).unwrap(),
            )
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_pipelines_reconstruct(x in signal_strategy(), (kind, cfg) in exact_config()) {
        let y = synthesize(&analyze(&x, &cfg, kind, ClipMode::None).unwrap()).unwrap();
        prop_assert_eq!(y.len(), x.len());
        prop_assert_eq!(y.sample_rate(), x.sample_rate());
        let snr = snr_db(&x, &y).unwrap();
        prop_assert!(snr >= 180.0, "{} {}/{}: {} dB", kind, cfg.win_length, cfg.hop_length, snr);
    }

    #[test]
    fn positive_gain_commutes_with_the_pipeline(
        x in signal_strategy(),
        gain in 0.01f64..10.0,
        kind in prop::sample::select(vec![SpectrogramKind::RealFft, SpectrogramKind::Dct, SpectrogramKind::PackedRfft]),
        clip in prop::sample::select(vec![ClipMode::None, ClipMode::Zero]),
    ) {
        let cfg = FrameConfig::new(512, 128, WindowKind::Hann, true).unwrap();
        let run = |w: &Waveform| synthesize(&analyze(w, &cfg, kind, clip).unwrap()).unwrap();
        let a = run(&x.scaled(gain).unwrap());
        let b = run(&x);
        let scale = b.samples().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0) * gain;
        for (p, q) in a.samples().iter().zip(b.samples()) {
            prop_assert!((p - gain * q).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn clipped_spectrograms_respect_their_mode(
        x in signal_strategy(),
        tau in 0.001f64..0.999,
        kind in prop::sample::select(vec![SpectrogramKind::RealFft, SpectrogramKind::Dct, SpectrogramKind::PackedRfft]),
    ) {
        let cfg = FrameConfig::new(256, 64, WindowKind::Hann, true).unwrap();
        let raw = analyze(&x, &cfg, kind, ClipMode::None).unwrap();
        let zero = analyze(&x, &cfg, kind, ClipMode::Zero).unwrap();
        let thr = analyze(&x, &cfg, kind, ClipMode::threshold(tau).unwrap()).unwrap();
        prop_assert_eq!(raw.n_bins(), cfg.win_length);
        prop_assert_eq!(raw.n_frames(), cfg.n_frames(x.len()).unwrap());
        for ((r, z), t) in raw.data().iter().zip(zero.data()).zip(thr.data()) {
            prop_assert_eq!(*z, r.max(0.0));
            prop_assert_eq!(*t, if *r > tau { *r } else { 0.0 });
        }
    }

    #[test]
    fn analysis_is_deterministic(x in signal_strategy()) {
        let cfg = FrameConfig::new(512, 128, WindowKind::Kaiser { beta: 8.0 }, true).unwrap();
        for kind in SpectrogramKind::ALL {
            prop_assert_eq!(
                analyze(&x, &cfg, kind, ClipMode::None).unwrap(),
                analyze(&x, &cfg, kind, ClipMode::None).unwrap()
            );
        }
    }
}
