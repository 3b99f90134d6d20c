//! Line-oriented `key = value` configuration.
//!
//! Keys are namespaced by module (`filter.mode`, `svm.c`, `sim.pulse_period`,
//! ...). `#` starts a comment. Unknown keys and repeated keys are rejected.

use std::path::Path;
use std::str::FromStr;

use faultsense::engine::EngineConfig;
use faultsense::sim::SimConfig;
use faultsense::svm::{KernelKind, KernelSpec};

use crate::error::CliError;

/// Global seed used when neither the file nor the command line sets one.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub seed: u64,
    pub engine: EngineConfig,
    pub sim: SimConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        let mut cfg = Self {
            seed: DEFAULT_SEED,
            engine: EngineConfig::default(),
            sim: SimConfig::default(),
        };
        cfg.set_seed(DEFAULT_SEED);
        cfg
    }
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "seed",
    "filter.mode",
    "filter.ma_window",
    "filter.kalman_q",
    "filter.kalman_r",
    "frame.len",
    "frame.hop",
    "som.grid",
    "som.alpha0",
    "som.alpha_final",
    "som.sigma0",
    "som.sigma_final",
    "som.steps",
    "som.k_label",
    "svm.kernel",
    "svm.c",
    "svm.gamma",
    "svm.epsilon",
    "svm.budget",
    "tune.interval",
    "tune.c_values",
    "tune.gamma_values",
    "tune.k_folds",
    "engine.calib_frames",
    "engine.trend_window",
    "engine.slope_min",
    "engine.slope_t_min",
    "engine.detect_threshold",
    "sim.total_samples",
    "sim.pulse_period",
    "sim.carrier_cycles",
    "sim.samples_per_cycle",
    "sim.burst_amp",
    "sim.echo_delay",
    "sim.echo_amp_max",
    "sim.fault_onset",
    "sim.fault_ramp",
    "sim.noise_sd",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| num(key, v.trim())).collect()
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        // Sim timing defaults follow the stream length and pulse period
        // unless set explicitly.
        let (mut onset, mut ramp) = (None, None);
        let mut gamma = None;
        let mut kind = cfg.engine.svm.kernel.kind();
        let mut seed = DEFAULT_SEED;

        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value'", no + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!("line {}: unknown key '{key}'", no + 1)));
            }
            if seen.iter().any(|k| k == key) {
                return Err(CliError::Config(format!("line {}: duplicate key '{key}'", no + 1)));
            }
            seen.push(key.to_string());

            let e = &mut cfg.engine;
            let s = &mut cfg.sim;
            match key {
                "seed" => seed = num(key, value)?,
                "filter.mode" => {
                    e.filter.mode = value.parse().map_err(CliError::from)?
                }
                "filter.ma_window" => e.filter.ma_window = num(key, value)?,
                "filter.kalman_q" => e.filter.kalman_q = num(key, value)?,
                "filter.kalman_r" => e.filter.kalman_r = num(key, value)?,
                "frame.len" => e.frame_len = num(key, value)?,
                "frame.hop" => e.frame_hop = num(key, value)?,
                "som.grid" => e.som.grid = num(key, value)?,
                "som.alpha0" => e.som.alpha0 = num(key, value)?,
                "som.alpha_final" => e.som.alpha_final = num(key, value)?,
                "som.sigma0" => e.som.sigma0 = Some(num(key, value)?),
                "som.sigma_final" => e.som.sigma_final = num(key, value)?,
                "som.steps" => e.som.steps = Some(num(key, value)?),
                "som.k_label" => e.k_label = num(key, value)?,
                "svm.kernel" => {
                    kind = value
                        .parse::<KernelKind>()
                        .map_err(CliError::from)?
                }
                "svm.c" => e.svm.c = num(key, value)?,
                "svm.gamma" => gamma = Some(num(key, value)?),
                "svm.epsilon" => e.svm.epsilon = num(key, value)?,
                "svm.budget" => e.svm.budget = num(key, value)?,
                "tune.interval" => e.tune_interval = num(key, value)?,
                "tune.c_values" => e.grid.c_values = list(key, value)?,
                "tune.gamma_values" => e.grid.gamma_values = list(key, value)?,
                "tune.k_folds" => e.grid.k_folds = num(key, value)?,
                "engine.calib_frames" => e.calib_frames = num(key, value)?,
                "engine.trend_window" => e.trend_window = num(key, value)?,
                "engine.slope_min" => e.slope_min = num(key, value)?,
                "engine.slope_t_min" => e.slope_t_min = num(key, value)?,
                "engine.detect_threshold" => e.detect_threshold = num(key, value)?,
                "sim.total_samples" => s.total_samples = num(key, value)?,
                "sim.pulse_period" => s.pulse_period = num(key, value)?,
                "sim.carrier_cycles" => s.carrier_cycles = num(key, value)?,
                "sim.samples_per_cycle" => s.samples_per_cycle = num(key, value)?,
                "sim.burst_amp" => s.burst_amp = num(key, value)?,
                "sim.echo_delay" => s.echo_delay = num(key, value)?,
                "sim.echo_amp_max" => s.echo_amp_max = num(key, value)?,
                "sim.fault_onset" => onset = Some(num(key, value)?),
                "sim.fault_ramp" => ramp = Some(num(key, value)?),
                "sim.noise_sd" => s.noise_sd = num(key, value)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        let gamma = match (gamma, cfg.engine.svm.kernel) {
            (Some(g), _) => g,
            (None, KernelSpec::Rbf { gamma }) => gamma,
            (None, KernelSpec::Linear) => 1.0,
        };
        cfg.engine.svm.kernel = KernelSpec::new(kind, gamma).map_err(CliError::from)?;
        cfg.sim.fault_onset = onset.unwrap_or(cfg.sim.total_samples / 4);
        cfg.sim.fault_ramp = ramp.unwrap_or(100 * cfg.sim.pulse_period);
        cfg.set_seed(seed);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets the global seed and the module seeds derived from it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.engine.seed = seed;
        self.sim.seed = seed;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.engine.validate()?;
        self.sim.validate()?;
        Ok(())
    }
}
