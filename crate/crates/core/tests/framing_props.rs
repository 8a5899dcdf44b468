use proptest::prelude::*;
use specinv::{frame_signal, make_window, overlap_add, FrameConfig, Waveform, WindowKind};

fn wave(samples: Vec<f64>) -> Waveform {
    Waveform::new(samples, 22050).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn hann_64_16_roundtrip_within_1e_10() {
    let x: Vec<f64> = (0..1000)
        .map(|i| ((i * 7919) % 1009) as f64 / 504.5 - 1.0)
        .collect();
    let cfg = FrameConfig::new(64, 16, WindowKind::Hann, true).unwrap();
    let y = overlap_add(&frame_signal(&wave(x.clone()), &cfg).unwrap()).unwrap();
    for (a, b) in x.iter().zip(y.samples()) {
        assert!((a - b).abs() <= 1e-10);
    }
}

/// Minimum squared-window overlap over the retained samples, evaluated
/// directly from frame positions.
fn min_coverage(len: usize, cfg: &FrameConfig) -> f64 {
    let w = make_window(cfg.window, cfg.win_length).unwrap();
    let pad = cfg.win_length / 2;
    let n_frames = cfg.n_frames(len).unwrap();
    (0..len)
        .map(|i| {
            let p = i + pad;
            (0..n_frames)
                .filter_map(|f| {
                    let s = f * cfg.hop_length;
                    (p >= s && p < s + cfg.win_length).then(|| w[p - s] * w[p - s])
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

fn window_strategy() -> impl Strategy<Value = WindowKind> {
    prop_oneof![
        Just(WindowKind::Hann),
        Just(WindowKind::Boxcar),
        (0.0f64..12.0).prop_map(|beta| WindowKind::Kaiser { beta }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn centered_roundtrip_is_identity_where_covered(
        samples in prop::collection::vec(-1.0f64..1.0, 1..400),
        win in 2usize..80,
        hop_frac in 0.05f64..1.0,
        window in window_strategy(),
    ) {
        let hop = ((win as f64 * hop_frac) as usize).clamp(1, win);
        let cfg = FrameConfig::new(win, hop, window, true).unwrap();
        prop_assume!(min_coverage(samples.len(), &cfg) > 1e-3);
        let x = wave(samples);
        let y = overlap_add(&frame_signal(&x, &cfg).unwrap()).unwrap();
        let scale = max_abs(x.samples()).max(f64::MIN_POSITIVE);
        for (a, b) in x.samples().iter().zip(y.samples()) {
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{} vs {}", a, b);
        }
    }

    #[test]
    fn uncentered_frame_count_formula(len in 2usize..2000, win in 2usize..200, hop_frac in 0.01f64..1.0) {
        prop_assume!(len >= win);
        let hop = ((win as f64 * hop_frac) as usize).clamp(1, win);
        let cfg = FrameConfig::new(win, hop, WindowKind::Boxcar, false).unwrap();
        let m = frame_signal(&wave(vec![0.5; len]), &cfg).unwrap();
        prop_assert_eq!(m.n_frames(), 1 + (len - win) / hop);
    }

    #[test]
    fn framing_and_ola_are_deterministic(
        samples in prop::collection::vec(-1.0f64..1.0, 64..300),
        hop in 1usize..32,
    ) {
        let cfg = FrameConfig::new(32, hop, WindowKind::Hann, true).unwrap();
        let x = wave(samples);
        let a = overlap_add(&frame_signal(&x, &cfg).unwrap()).unwrap();
        let b = overlap_add(&frame_signal(&x, &cfg).unwrap()).unwrap();
        prop_assert!(a.samples().iter().zip(b.samples()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn windows_stay_in_unit_interval(n in 2usize..2048, window in window_strategy()) {
        let w = make_window(window, n).unwrap();
        prop_assert_eq!(w.len(), n);
        prop_assert!(w.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
