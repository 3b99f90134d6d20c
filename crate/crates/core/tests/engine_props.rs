use faultsense::engine::{predict_fault, Engine, EngineConfig, EventKind, EventRecord};
use faultsense::sim::{SimConfig, SimStream};
use faultsense::som::SomConfig;
use faultsense::RawSample;
use proptest::prelude::*;

fn small_sim(amax: f64, seed: u64) -> SimConfig {
    SimConfig {
        total_samples: 256 * 150,
        pulse_period: 256,
        carrier_cycles: 4,
        samples_per_cycle: 8,
        echo_delay: 64,
        echo_amp_max: amax,
        fault_onset: 256 * 40,
        fault_ramp: 256 * 80,
        seed,
        ..SimConfig::default()
    }
}

fn small_engine(seed: u64) -> EngineConfig {
    EngineConfig {
        frame_len: 256,
        frame_hop: 128,
        calib_frames: 40,
        trend_window: 8,
        som: SomConfig {
            grid: 3,
            ..SomConfig::default()
        },
        tune_interval: 50,
        seed,
        ..EngineConfig::default()
    }
}

fn run(cfg: &EngineConfig, samples: &[RawSample]) -> Vec<EventRecord> {
    let mut e = Engine::new(cfg.clone()).unwrap();
    samples.iter().flat_map(|s| e.ingest(*s).unwrap()).collect()
}

fn stream(amax: f64, seed: u64) -> Vec<RawSample> {
    SimStream::new(small_sim(amax, seed)).unwrap().collect()
}

#[test]
fn identical_inputs_identical_events() {
    let samples = stream(1.0, 3);
    let cfg = small_engine(3);
    let a = run(&cfg, &samples);
    let b = run(&cfg, &samples);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert!(a.iter().any(|e| e.kind == EventKind::Calibrated));
}

#[test]
fn events_depend_only_on_the_past() {
    let samples = stream(1.0, 8);
    let cfg = small_engine(8);
    let full = run(&cfg, &samples);
    for cut in [5_000usize, 17_777, 30_001] {
        let prefix = run(&cfg, &samples[..cut]);
        let expected: Vec<_> = full
            .iter()
            .filter(|e| e.t < samples[cut].t)
            .cloned()
            .collect();
        assert_eq!(prefix, expected);
    }
}

#[test]
fn event_invariants_hold() {
    for seed in 0..3 {
        let samples = stream(1.0, seed);
        let cfg = small_engine(seed);
        let mut e = Engine::new(cfg.clone()).unwrap();
        let mut calibrated = false;
        for s in &samples {
            for ev in e.ingest(*s).unwrap() {
                match ev.kind {
                    EventKind::Calibrated => calibrated = true,
                    EventKind::FaultDetected => {
                        assert!(calibrated);
                        assert!(ev.score >= cfg.detect_threshold);
                    }
                    EventKind::FaultPredicted => {
                        assert!(calibrated);
                        assert!(ev.eta.unwrap() > 0.0);
                        assert!(ev.amplitude.unwrap().is_finite());
                        assert!(ev.score < cfg.detect_threshold);
                    }
                    _ => {}
                }
            }
            let (size, bound) = (e.state_size(), e.state_bound());
            assert!(size.svm_points <= bound.svm_points);
            assert!(size.labeled <= bound.labeled);
            assert!(size.history <= bound.history);
            assert!(size.frame_buffer <= bound.frame_buffer);
            assert!(size.calibration <= bound.calibration);
        }
        assert!(e.svm().kkt_report(1e-6).is_empty());
    }
}

#[test]
fn full_phase_detection_matches_decision() {
    let samples = stream(1.0, 4);
    let cfg = small_engine(4);
    let mut e = Engine::new(cfg.clone()).unwrap();
    let mut checked = 0;
    for s in &samples {
        let events = e.ingest(*s).unwrap();
        for ev in events.iter().filter(|ev| ev.kind == EventKind::FaultDetected) {
            if ev.detail.contains("phase=full") {
                assert!(ev.score >= cfg.detect_threshold);
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn the_fault_is_found_after_onset() {
    let samples = stream(1.0, 1);
    let events = run(&small_engine(1), &samples);
    let onset = small_sim(1.0, 1).fault_onset;
    assert!(events
        .iter()
        .any(|e| e.kind == EventKind::FaultDetected && e.t > onset));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collinear_history_is_extrapolated_exactly(
        a in 0.01f64..2.0,
        c in -20.0f64..0.0,
        t0 in 0u32..1000,
        n in 3usize..20,
    ) {
        let hist: Vec<(f64, f64)> = (0..n).map(|k| {
            let t = (t0 as usize + k) as f64;
            (t, a * t + c)
        }).collect();
        let peaks: Vec<f64> = hist.iter().map(|h| 2.0 * h.0).collect();
        let t_now = hist[n - 1].0;
        let theta = a * (t_now + 5.0) + c;
        let (eta, amp) = predict_fault(&hist, &peaks, theta, 1e-3).unwrap();
        prop_assert!((eta - 5.0).abs() < 1e-6 * (1.0 + t_now));
        prop_assert!((amp - 2.0 * (t_now + 5.0)).abs() < 1e-6 * (1.0 + t_now));
    }

    #[test]
    fn forecasts_are_positive(scores in prop::collection::vec(-5.0f64..5.0, 3..16), theta in -1.0f64..3.0) {
        let hist: Vec<(f64, f64)> = scores.iter().enumerate().map(|(i, &s)| (i as f64, s)).collect();
        let peaks = vec![1.0; hist.len()];
        if let Some((eta, _)) = predict_fault(&hist, &peaks, theta, 1e-3) {
            let now = hist.last().unwrap().1;
            prop_assert!(eta > 0.0 || (eta == 0.0 && now >= theta));
        }
    }
}
