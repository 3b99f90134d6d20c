use faultsense::sim::{generate, SimConfig, SimStream};
use proptest::prelude::*;
use std::f64::consts::PI;

fn short(seed: u64) -> SimConfig {
    SimConfig {
        total_samples: 4096 * 8,
        fault_onset: 4096 * 2,
        fault_ramp: 4096 * 4,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn same_seed_same_stream() {
    let (a, ta) = generate(&short(5)).unwrap();
    let (b, tb) = generate(&short(5)).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let (c, _) = generate(&short(6)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn stream_iterator_matches_generate() {
    let cfg = short(3);
    let (all, _) = generate(&cfg).unwrap();
    let streamed: Vec<_> = SimStream::new(cfg).unwrap().collect();
    assert_eq!(all, streamed);
}

#[test]
fn noise_is_additive() {
    let cfg = short(11);
    let quiet = SimConfig {
        noise_sd: 0.0,
        ..cfg.clone()
    };
    let (noisy, _) = generate(&cfg).unwrap();
    let (clean, _) = generate(&quiet).unwrap();
    for (n, c) in noisy.iter().zip(&clean) {
        assert_eq!(c.value, cfg.clean_value(c.t));
        assert!((n.value - c.value).abs() < 0.05 * 8.0);
    }
}

#[test]
fn echo_energy_is_non_decreasing_per_burst() {
    let cfg = SimConfig {
        noise_sd: 0.0,
        burst_amp: 1.0,
        ..short(0)
    };
    let mut last = 0.0;
    for k in 0..8 {
        let start = k * cfg.pulse_period + cfg.echo_delay;
        let energy: f64 = (start..start + cfg.burst_len())
            .map(|t| cfg.clean_value(t).powi(2))
            .sum();
        if start + cfg.burst_len() <= cfg.fault_onset {
            assert_eq!(energy, 0.0);
        }
        assert!(energy >= last);
        last = energy;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn superposition(a0 in 0.1f64..2.0, amax in 0.0f64..1.5, onset in 0u64..20_000, ramp in 1u64..30_000) {
        let full = SimConfig {
            total_samples: 4096 * 6,
            burst_amp: a0,
            echo_amp_max: amax,
            fault_onset: onset,
            fault_ramp: ramp,
            noise_sd: 0.0,
            ..SimConfig::default()
        };
        let no_echo = SimConfig { echo_amp_max: 0.0, ..full.clone() };
        let nb = full.burst_len();
        let m = full.samples_per_cycle as f64;
        for t in (0..full.total_samples).step_by(7) {
            let i = t % full.pulse_period;
            let echo = if i >= full.echo_delay && i < full.echo_delay + nb {
                let j = (i - full.echo_delay) as f64;
                let hann = 0.5 * (1.0 - (2.0 * PI * j / (nb - 1) as f64).cos());
                let frac = if t <= onset { 0.0 } else { ((t - onset) as f64 / ramp as f64).min(1.0) };
                amax * frac * (2.0 * PI * j / m).sin() * hann
            } else {
                0.0
            };
            prop_assert!((no_echo.clean_value(t) + echo - full.clean_value(t)).abs() <= 1e-15);
        }
    }

    #[test]
    fn crossing_matches_envelope(onset in 0u64..10_000, ramp in 1u64..10_000, amax in 0.01f64..2.0, frac in 0.0f64..1.0) {
        let cfg = SimConfig { fault_onset: onset, fault_ramp: ramp, echo_amp_max: amax, ..SimConfig::default() };
        let theta = frac * amax;
        let t = cfg.truth().crossing(theta).unwrap();
        prop_assert!(cfg.echo_amplitude(t) >= theta * (1.0 - 1e-12));
        if t > onset {
            prop_assert!(cfg.echo_amplitude(t - 1) < theta);
        }
        prop_assert_eq!(cfg.truth().crossing(amax * 1.01), None);
    }
}
