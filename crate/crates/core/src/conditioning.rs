//! Per-sample noise suppression and frame feature extraction.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::FeatureVector;

/// Causal moving average with partial windows during warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverageState {
    window: usize,
    buffer: VecDeque<f64>,
}

impl MovingAverageState {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::Config("moving average window must be >= 1".into()));
        }
        Ok(Self {
            window,
            buffer: VecDeque::with_capacity(window),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn step(&mut self, z: f64) -> f64 {
        if self.buffer.len() == self.window {
            self.buffer.pop_front();
        }
        self.buffer.push_back(z);
        // Summed afresh each step: no running-sum drift over long streams.
        self.buffer.iter().sum::<f64>() / self.buffer.len() as f64
    }
}

/// Scalar random-walk Kalman filter with identity observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub xhat: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    initialized: bool,
}

impl KalmanState {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Config(format!("kalman r must be > 0, got {r}")));
        }
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Config(format!("kalman q must be >= 0, got {q}")));
        }
        Ok(Self {
            xhat: 0.0,
            p: r,
            q,
            r,
            initialized: false,
        })
    }

    /// Starts from an explicit estimate instead of the first measurement.
    pub fn with_estimate(xhat: f64, p: f64, q: f64, r: f64) -> Result<Self> {
        let mut s = Self::new(q, r)?;
        if !(p > 0.0) {
            return Err(Error::Config(format!("kalman p must be > 0, got {p}")));
        }
        s.xhat = xhat;
        s.p = p;
        s.initialized = true;
        Ok(s)
    }

    /// Variance of the prior for the next step, `p + q`.
    pub fn predicted_variance(&self) -> f64 {
        self.p + self.q
    }

    /// Gain the next update would use.
    pub fn gain(&self) -> f64 {
        let p_pred = self.predicted_variance();
        p_pred / (p_pred + self.r)
    }

    pub fn step(&mut self, z: f64) -> f64 {
        if !self.initialized {
            self.xhat = z;
            self.p = self.r;
            self.initialized = true;
            return z;
        }
        let p_pred = self.p + self.q;
        let k = p_pred / (p_pred + self.r);
        self.xhat += k * (z - self.xhat);
        self.p = (1.0 - k) * p_pred;
        self.xhat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    None,
    Ma,
    Kalman,
    Both,
}

impl FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(FilterMode::None),
            "ma" => Ok(FilterMode::Ma),
            "kalman" => Ok(FilterMode::Kalman),
            "both" => Ok(FilterMode::Both),
            other => Err(Error::Config(format!(
                "unknown filter mode '{other}' (expected none|ma|kalman|both)"
            ))),
        }
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FilterMode::None => "none",
            FilterMode::Ma => "ma",
            FilterMode::Kalman => "kalman",
            FilterMode::Both => "both",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub mode: FilterMode,
    pub ma_window: usize,
    pub kalman_q: f64,
    pub kalman_r: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            mode: FilterMode::Ma,
            ma_window: 3,
            kalman_q: 1.0,
            kalman_r: 0.25,
        }
    }
}

/// Configured filter chain. With both filters enabled the Kalman filter runs
/// first and the moving average smooths its output.
#[derive(Debug, Clone)]
pub struct FilterChain {
    kalman: Option<KalmanState>,
    ma: Option<MovingAverageState>,
}

impl FilterChain {
    pub fn new(cfg: &FilterConfig) -> Result<Self> {
        let kalman = match cfg.mode {
            FilterMode::Kalman | FilterMode::Both => {
                Some(KalmanState::new(cfg.kalman_q, cfg.kalman_r)?)
            }
            _ => None,
        };
        let ma = match cfg.mode {
            FilterMode::Ma | FilterMode::Both => Some(MovingAverageState::new(cfg.ma_window)?),
            _ => None,
        };
        Ok(Self { kalman, ma })
    }

    pub fn step(&mut self, z: f64) -> f64 {
        let mut y = z;
        if let Some(k) = self.kalman.as_mut() {
            y = k.step(y);
        }
        if let Some(ma) = self.ma.as_mut() {
            y = ma.step(y);
        }
        y
    }

    pub fn buffered(&self) -> usize {
        self.ma.as_ref().map_or(0, |m| m.buffered())
    }
}

/// RMS, peak, crest factor and zero-crossing rate of one frame.
///
/// Zero counts as positive when detecting sign changes.
pub fn extract_features(samples: &[f64]) -> FeatureVector {
    let n = samples.len();
    if n == 0 {
        return FeatureVector::default();
    }
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let crest = if rms > 0.0 { peak / rms } else { 0.0 };
    let zcr = if n > 1 {
        let changes = samples
            .windows(2)
            .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
            .count();
        changes as f64 / (n - 1) as f64
    } else {
        0.0
    };
    FeatureVector {
        rms,
        peak,
        crest,
        zcr,
    }
}
