//! Deterministic pulse-echo signal generator.
//!
//! Every `pulse_period` samples a Hann-windowed tone burst is emitted. A fault
//! is modelled as a secondary echo `echo_delay` samples after each burst whose
//! amplitude ramps linearly from zero at `fault_onset` to `echo_amp_max` over
//! `fault_ramp` samples. Seeded Gaussian noise is added on top.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::RawSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub total_samples: u64,
    pub pulse_period: u64,
    pub carrier_cycles: u64,
    pub samples_per_cycle: u64,
    pub burst_amp: f64,
    pub echo_delay: u64,
    pub echo_amp_max: f64,
    pub fault_onset: u64,
    pub fault_ramp: u64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let total_samples = 614_400;
        let pulse_period = 4096;
        Self {
            total_samples,
            pulse_period,
            carrier_cycles: 8,
            samples_per_cycle: 16,
            burst_amp: 1.0,
            echo_delay: 512,
            echo_amp_max: 0.8,
            fault_onset: total_samples / 4,
            fault_ramp: 100 * pulse_period,
            noise_sd: 0.05,
            seed: 42,
        }
    }
}

impl SimConfig {
    pub fn burst_len(&self) -> u64 {
        self.carrier_cycles * self.samples_per_cycle
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.total_samples == 0 {
            return fail("sim.total_samples must be > 0".into());
        }
        if self.pulse_period == 0 {
            return fail("sim.pulse_period must be > 0".into());
        }
        if self.carrier_cycles == 0 {
            return fail("sim.carrier_cycles must be >= 1".into());
        }
        if self.samples_per_cycle < 4 {
            return fail("sim.samples_per_cycle must be >= 4".into());
        }
        if !(self.burst_amp > 0.0 && self.burst_amp.is_finite()) {
            return fail(format!("sim.burst_amp must be > 0, got {}", self.burst_amp));
        }
        if !(self.echo_amp_max >= 0.0 && self.echo_amp_max.is_finite()) {
            return fail(format!(
                "sim.echo_amp_max must be >= 0, got {}",
                self.echo_amp_max
            ));
        }
        if self.fault_ramp == 0 {
            return fail("sim.fault_ramp must be >= 1".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return fail(format!("sim.noise_sd must be >= 0, got {}", self.noise_sd));
        }
        let nb = self.burst_len();
        if nb >= self.echo_delay {
            return fail(format!(
                "burst length {nb} must be shorter than sim.echo_delay {}",
                self.echo_delay
            ));
        }
        if self.echo_delay + nb >= self.pulse_period {
            return fail(format!(
                "echo ends at {} which does not fit before the next burst at {}",
                self.echo_delay + nb,
                self.pulse_period
            ));
        }
        Ok(())
    }

    /// Envelope of the fault echo at sample `t`.
    pub fn echo_amplitude(&self, t: u64) -> f64 {
        if t <= self.fault_onset {
            return 0.0;
        }
        let frac = ((t - self.fault_onset) as f64 / self.fault_ramp as f64).min(1.0);
        self.echo_amp_max * frac
    }

    /// Noise-free signal at sample `t`.
    pub fn clean_value(&self, t: u64) -> f64 {
        let nb = self.burst_len();
        let phase = t % self.pulse_period;
        let m = self.samples_per_cycle as f64;
        let mut v = 0.0;
        if phase < nb {
            let i = phase as f64;
            v += self.burst_amp * (2.0 * PI * i / m).sin() * hann(phase, nb);
        }
        if phase >= self.echo_delay && phase < self.echo_delay + nb {
            let j = phase - self.echo_delay;
            let a = self.echo_amplitude(t);
            if a > 0.0 {
                v += a * (2.0 * PI * j as f64 / m).sin() * hann(j, nb);
            }
        }
        v
    }

    pub fn truth(&self) -> GroundTruth {
        if self.echo_amp_max > 0.0 {
            GroundTruth {
                fault_onset: Some(self.fault_onset),
                ramp: Some(self.fault_ramp),
                echo_amp_max: Some(self.echo_amp_max),
                first_exceed: Some(self.fault_onset + 1),
            }
        } else {
            GroundTruth::default()
        }
    }
}

/// Hann window `0.5 (1 - cos(2 pi i / (n - 1)))`.
pub fn hann(i: u64, n: u64) -> f64 {
    if n < 2 {
        return 1.0;
    }
    0.5 * (1.0 - (2.0 * PI * i as f64 / (n - 1) as f64).cos())
}

/// Fault parameters hidden from the engine; every field is absent on a
/// fault-free run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault_onset: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub echo_amp_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_exceed: Option<u64>,
}

impl GroundTruth {
    pub fn has_fault(&self) -> bool {
        self.first_exceed.is_some()
    }

    /// First sample at which the echo envelope reaches `theta_amp`.
    pub fn crossing(&self, theta_amp: f64) -> Option<u64> {
        let (onset, ramp, amax) = (self.fault_onset?, self.ramp?, self.echo_amp_max?);
        if amax <= 0.0 || theta_amp > amax || theta_amp < 0.0 {
            return None;
        }
        let steps = (ramp as f64 * theta_amp / amax).ceil() as u64;
        Some(onset + steps)
    }
}

pub fn truth_crossing(truth: &GroundTruth, theta_amp: f64) -> Option<u64> {
    truth.crossing(theta_amp)
}

/// Lazily generated sample stream; yields exactly what [`generate`] returns.
#[derive(Debug, Clone)]
pub struct SimStream {
    cfg: SimConfig,
    t: u64,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
}

impl SimStream {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let noise = Normal::new(0.0, cfg.noise_sd)
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            t: 0,
            noise,
        })
    }
}

impl Iterator for SimStream {
    type Item = RawSample;

    fn next(&mut self) -> Option<RawSample> {
        if self.t >= self.cfg.total_samples {
            return None;
        }
        let t = self.t;
        self.t += 1;
        let n = self.noise.sample(&mut self.rng);
        Some(RawSample::new(t, self.cfg.clean_value(t) + n))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.cfg.total_samples - self.t) as usize;
        (left, Some(left))
    }
}

pub fn generate(cfg: &SimConfig) -> Result<(Vec<RawSample>, GroundTruth)> {
    let samples = SimStream::new(cfg.clone())?.collect();
    Ok((samples, cfg.truth()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> SimConfig {
        SimConfig {
            total_samples: 4096 * 6,
            noise_sd: 0.0,
            fault_onset: 4096 * 2,
            fault_ramp: 4096 * 2,
            ..SimConfig::default()
        }
    }

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
        assert_eq!(SimConfig::default().fault_onset, 153_600);
    }

    #[test]
    fn silent_gap_is_zero() {
        let (s, _) = generate(&quiet()).unwrap();
        assert_eq!(s[0].value, 0.0);
        assert_eq!(s[300].value, 0.0);
        assert_eq!(s[2000].value, 0.0);
    }

    #[test]
    fn fault_free_noise_free_is_periodic() {
        let cfg = SimConfig {
            echo_amp_max: 0.0,
            ..quiet()
        };
        let (s, truth) = generate(&cfg).unwrap();
        let p = cfg.pulse_period as usize;
        for t in p..s.len() {
            assert_eq!(s[t].value, s[t - p].value);
        }
        assert!(!truth.has_fault());
        assert_eq!(serde_json::to_string(&truth).unwrap(), "{}");
    }

    #[test]
    fn burst_peak_close_to_amplitude() {
        let cfg = quiet();
        let peak = (0..cfg.burst_len())
            .map(|t| cfg.clean_value(t).abs())
            .fold(0.0, f64::max);
        assert!(peak > 0.9 * cfg.burst_amp && peak <= cfg.burst_amp);
    }

    #[test]
    fn echo_starts_after_onset() {
        let cfg = quiet();
        let d = cfg.echo_delay;
        let nb = cfg.burst_len();
        for k in 0..6u64 {
            let start = k * cfg.pulse_period + d;
            let energy: f64 = (start..start + nb).map(|t| cfg.clean_value(t).powi(2)).sum();
            if start + nb <= cfg.fault_onset {
                assert_eq!(energy, 0.0);
            } else {
                assert!(energy > 0.0);
            }
        }
    }

    #[test]
    fn crossing_arithmetic() {
        let truth = GroundTruth {
            fault_onset: Some(1000),
            ramp: Some(500),
            echo_amp_max: Some(1.0),
            first_exceed: Some(1001),
        };
        assert_eq!(truth.crossing(0.0), Some(1000));
        assert_eq!(truth.crossing(0.5), Some(1250));
        assert_eq!(truth.crossing(2.0), None);
        assert_eq!(GroundTruth::default().crossing(0.1), None);
    }

    #[test]
    fn crossing_is_first_sample_reaching_threshold() {
        let cfg = SimConfig {
            fault_onset: 100,
            fault_ramp: 37,
            echo_amp_max: 0.8,
            ..quiet()
        };
        let truth = cfg.truth();
        for theta in [0.05, 0.3, 0.5, 0.8] {
            let t = truth.crossing(theta).unwrap();
            assert!(cfg.echo_amplitude(t) >= theta - 1e-12);
            assert!(cfg.echo_amplitude(t - 1) < theta);
        }
    }

    #[test]
    fn invalid_geometry_rejected() {
        let mut cfg = SimConfig::default();
        cfg.echo_delay = 100;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::default();
        cfg.pulse_period = 600;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::default();
        cfg.samples_per_cycle = 3;
        assert!(cfg.validate().is_err());
    }
}
