//! Streaming orchestrator.
//!
//! Samples go through the filter chain and the frame assembler. The first
//! `calib_frames` frames are assumed healthy: they fit the normalizer, the SOM
//! and the quantization-error statistics. Every later frame is pseudo-labeled,
//! learned by the incremental SVM and scored, and the recent score trend is
//! extrapolated to forecast the next threshold crossing.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conditioning::{extract_features, FilterChain, FilterConfig};
use crate::error::{Error, Result};
use crate::signal::{FeatureVector, FrameAssembler, Label, Point, RawSample};
use crate::som::{CalibStats, Normalizer, SomConfig, SomModel};
use crate::svm::{KernelSpec, SvmModel, SvmParams};
use crate::tune::{grid_search, ParamGrid};

/// Offset added to the global seed for the SOM initialisation.
pub const SOM_SEED_OFFSET: u64 = 1;

/// Floor for the calibration spread in the bootstrap score.
const TINY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub filter: FilterConfig,
    pub frame_len: usize,
    pub frame_hop: usize,
    pub som: SomConfig,
    pub k_label: f64,
    pub svm: SvmParams,
    pub grid: ParamGrid,
    /// Labeled points between retunes; 0 disables retuning.
    pub tune_interval: usize,
    pub calib_frames: usize,
    pub trend_window: usize,
    pub slope_min: f64,
    /// Minimum t-statistic of the fitted slope before a forecast is issued;
    /// 0 disables the check.
    pub slope_t_min: f64,
    pub detect_threshold: f64,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            frame_len: 256,
            frame_hop: 128,
            som: SomConfig::default(),
            k_label: 3.0,
            svm: SvmParams::default(),
            grid: ParamGrid::default(),
            tune_interval: 200,
            calib_frames: 200,
            trend_window: 16,
            slope_min: 1e-3,
            slope_t_min: 4.0,
            detect_threshold: 0.0,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        FilterChain::new(&self.filter)?;
        FrameAssembler::new(self.frame_len, self.frame_hop)?;
        SomModel::new(&self.som, self.calib_frames.max(1))?;
        self.svm.validate()?;
        self.grid.validate()?;
        if !(self.k_label > 0.0 && self.k_label.is_finite()) {
            return Err(Error::Config(format!("k_label must be > 0, got {}", self.k_label)));
        }
        if self.calib_frames < 10 {
            return Err(Error::Config(format!(
                "engine.calib_frames must be >= 10, got {}",
                self.calib_frames
            )));
        }
        if self.trend_window < 3 {
            return Err(Error::Config(format!(
                "engine.trend_window must be >= 3, got {}",
                self.trend_window
            )));
        }
        if !(self.slope_min > 0.0 && self.slope_min.is_finite()) {
            return Err(Error::Config(format!(
                "engine.slope_min must be > 0, got {}",
                self.slope_min
            )));
        }
        if !(self.slope_t_min >= 0.0 && self.slope_t_min.is_finite()) {
            return Err(Error::Config(format!(
                "engine.slope_t_min must be >= 0, got {}",
                self.slope_t_min
            )));
        }
        if !self.detect_threshold.is_finite() {
            return Err(Error::Config("engine.detect_threshold must be finite".into()));
        }
        Ok(())
    }

    fn som_config(&self) -> SomConfig {
        SomConfig {
            seed: self.seed.wrapping_add(SOM_SEED_OFFSET),
            ..self.som.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Phase {
    Calibrating,
    Bootstrap,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Calibrated,
    FaultDetected,
    FaultPredicted,
    Retune,
    StreamError,
}

impl EventKind {
    pub fn is_fault(self) -> bool {
        matches!(self, EventKind::FaultDetected | EventKind::FaultPredicted)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::Calibrated => "calibrated",
            EventKind::FaultDetected => "fault_detected",
            EventKind::FaultPredicted => "fault_predicted",
            EventKind::Retune => "retune",
            EventKind::StreamError => "stream_error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: u64,
    pub kind: EventKind,
    pub score: f64,
    /// Samples until the forecast crossing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Forecast peak feature at the crossing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub detail: String,
}

impl EventRecord {
    fn new(t: u64, kind: EventKind, score: f64, detail: String) -> Self {
        Self {
            t,
            kind,
            score,
            eta: None,
            amplitude: None,
            detail,
        }
    }
}

/// Sizes of everything that grows with the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSize {
    pub svm_points: usize,
    pub labeled: usize,
    pub history: usize,
    pub frame_buffer: usize,
    pub filter_buffer: usize,
    pub calibration: usize,
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    frame: f64,
    score: f64,
    peak: f64,
}

#[derive(Debug, Clone)]
struct Calibration {
    som: SomModel,
    stats: CalibStats,
    norm: Normalizer,
}

/// Ordinary least-squares fit `y = a t + c`; `None` when all `t` are equal.
fn ols(t: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - tm) * (v - tm)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let a = sxy / sxx;
    Some((a, ym - a * tm))
}

/// t-statistic of the OLS slope, infinite for a perfect non-flat fit.
pub fn slope_t_stat(history: &[(f64, f64)]) -> Option<f64> {
    let n = history.len();
    if n < 3 {
        return None;
    }
    let t: Vec<f64> = history.iter().map(|h| h.0).collect();
    let y: Vec<f64> = history.iter().map(|h| h.1).collect();
    let (a, c) = ols(&t, &y)?;
    let tm = t.iter().sum::<f64>() / n as f64;
    let sxx: f64 = t.iter().map(|v| (v - tm) * (v - tm)).sum();
    let ssr: f64 = t.iter().zip(&y).map(|(ti, yi)| (yi - a * ti - c).powi(2)).sum();
    let se = (ssr / (n - 2) as f64 / sxx).sqrt();
    if se > 0.0 {
        Some(a / se)
    } else if a != 0.0 {
        Some(a.signum() * f64::INFINITY)
    } else {
        Some(0.0)
    }
}

/// Linear-trend forecast over `(time, score)` pairs.
///
/// Returns `(eta, amplitude)` in the units of the time axis: `eta = 0` with the
/// current peak when the latest score already reaches `theta`, otherwise the
/// distance from the latest time to where the fitted line reaches `theta`,
/// with the peak series extrapolated to that point.
pub fn predict_fault(
    history: &[(f64, f64)],
    peaks: &[f64],
    theta: f64,
    slope_min: f64,
) -> Option<(f64, f64)> {
    let &(t_now, s_now) = history.last()?;
    if history.len() != peaks.len() {
        return None;
    }
    let t: Vec<f64> = history.iter().map(|h| h.0).collect();
    let s: Vec<f64> = history.iter().map(|h| h.1).collect();
    let (a, c) = ols(&t, &s)?;
    if s_now >= theta {
        return Some((0.0, *peaks.last()?));
    }
    if !(a > slope_min) {
        return None;
    }
    let eta = (theta - c) / a - t_now;
    if !(eta > 0.0 && eta.is_finite()) {
        return None;
    }
    let (pa, pc) = ols(&t, peaks)?;
    Some((eta, pa * (t_now + eta) + pc))
}

#[derive(Debug, Clone)]
pub struct Engine {
    cfg: EngineConfig,
    phase: Phase,
    filters: FilterChain,
    assembler: FrameAssembler,
    last_t: Option<u64>,
    frames: u64,
    calib_buf: Vec<FeatureVector>,
    calib: Option<Calibration>,
    svm: SvmModel,
    labeled: VecDeque<(Point, Label)>,
    history: VecDeque<Scored>,
    since_tune: usize,
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            filters: FilterChain::new(&cfg.filter)?,
            assembler: FrameAssembler::new(cfg.frame_len, cfg.frame_hop)?,
            svm: SvmModel::new(cfg.svm)?,
            phase: Phase::Calibrating,
            last_t: None,
            frames: 0,
            calib_buf: Vec::with_capacity(cfg.calib_frames),
            calib: None,
            labeled: VecDeque::with_capacity(cfg.svm.budget),
            history: VecDeque::with_capacity(cfg.trend_window),
            since_tune: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn svm(&self) -> &SvmModel {
        &self.svm
    }

    pub fn calib_stats(&self) -> Option<&CalibStats> {
        self.calib.as_ref().map(|c| &c.stats)
    }

    /// Labeled points available to the tuner, oldest first.
    pub fn labeled(&self) -> Vec<(Point, Label)> {
        self.labeled.iter().copied().collect()
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames
    }

    pub fn state_size(&self) -> StateSize {
        StateSize {
            svm_points: self.svm.len(),
            labeled: self.labeled.len(),
            history: self.history.len(),
            frame_buffer: self.assembler.buffered(),
            filter_buffer: self.filters.buffered(),
            calibration: self.calib_buf.len(),
        }
    }

    /// Upper bound for every field of [`StateSize`] implied by the config.
    pub fn state_bound(&self) -> StateSize {
        StateSize {
            svm_points: self.cfg.svm.budget,
            labeled: self.cfg.svm.budget,
            history: self.cfg.trend_window,
            frame_buffer: self.cfg.frame_len,
            filter_buffer: self.cfg.filter.ma_window,
            calibration: self.cfg.calib_frames,
        }
    }

    /// Feeds one sample. A sample whose index does not increase is dropped
    /// and reported as a `stream_error` event.
    pub fn ingest(&mut self, s: RawSample) -> Result<Vec<EventRecord>> {
        if let Some(last) = self.last_t {
            if s.t <= last {
                return Ok(vec![EventRecord::new(
                    s.t,
                    EventKind::StreamError,
                    0.0,
                    format!("non-monotone sample index {} after {last}", s.t),
                )]);
            }
        }
        if !s.value.is_finite() {
            return Ok(vec![EventRecord::new(
                s.t,
                EventKind::StreamError,
                0.0,
                format!("non-finite value at sample {}", s.t),
            )]);
        }
        self.last_t = Some(s.t);
        let v = self.filters.step(s.value);
        let Some(frame) = self.assembler.push(RawSample::new(s.t, v))? else {
            return Ok(Vec::new());
        };
        self.frames += 1;
        let fv = extract_features(&frame.samples);
        self.on_frame(s.t, fv)
    }

    fn on_frame(&mut self, t: u64, fv: FeatureVector) -> Result<Vec<EventRecord>> {
        if self.phase == Phase::Calibrating {
            self.calib_buf.push(fv);
            if self.calib_buf.len() < self.cfg.calib_frames {
                return Ok(Vec::new());
            }
            return self.calibrate(t).map(|e| vec![e]);
        }
        let mut events = Vec::new();
        let calib = self.calib.as_ref().expect("calibrated");
        let p = calib.norm.apply(&fv);
        let label = calib.stats.pseudo_label(calib.som.quantization_error(&p));
        if self.labeled.len() == self.cfg.svm.budget {
            self.labeled.pop_front();
        }
        self.labeled.push_back((p, label));
        // A rejected update leaves the model as it was.
        let _ = self.svm.learn_one(p, label);
        if self.phase == Phase::Bootstrap && self.svm.has_both_classes() {
            self.phase = Phase::Full;
        }

        let score = self.score_frame(&fv)?;
        let theta = self.cfg.detect_threshold;
        if score >= theta {
            events.push(EventRecord::new(
                t,
                EventKind::FaultDetected,
                score,
                format!("phase={:?} label={label:?}", self.phase).to_lowercase(),
            ));
        } else if self.history.len() == self.cfg.trend_window {
            let hist: Vec<(f64, f64)> = self.history.iter().map(|h| (h.frame, h.score)).collect();
            let peaks: Vec<f64> = self.history.iter().map(|h| h.peak).collect();
            let significant = self.cfg.slope_t_min == 0.0
                || slope_t_stat(&hist).is_some_and(|ts| ts >= self.cfg.slope_t_min);
            let forecast = significant
                .then(|| predict_fault(&hist, &peaks, theta, self.cfg.slope_min))
                .flatten();
            if let Some((eta, amp)) = forecast {
                let mut e = EventRecord::new(
                    t,
                    EventKind::FaultPredicted,
                    score,
                    format!("eta_frames={eta}"),
                );
                e.eta = Some(eta * self.cfg.frame_hop as f64);
                e.amplitude = Some(amp);
                events.push(e);
            }
        }

        self.since_tune += 1;
        if self.cfg.tune_interval > 0 && self.since_tune >= self.cfg.tune_interval {
            self.since_tune = 0;
            if let Some(e) = self.retune(t) {
                events.push(e);
            }
        }
        Ok(events)
    }

    fn calibrate(&mut self, t: u64) -> Result<EventRecord> {
        let norm = Normalizer::fit(&self.calib_buf)?;
        let pts: Vec<Point> = self.calib_buf.iter().map(|fv| norm.apply(fv)).collect();
        let mut som = SomModel::new(&self.cfg.som_config(), pts.len())?;
        som.fit(&pts)?;
        let qes: Vec<f64> = pts.iter().map(|p| som.quantization_error(p)).collect();
        let stats = CalibStats::from_errors(&qes, self.cfg.k_label)?;
        let event = EventRecord::new(
            t,
            EventKind::Calibrated,
            stats.threshold(),
            format!(
                "frames={} mu_qe={} sd_qe={} threshold={}",
                pts.len(),
                stats.mu_qe,
                stats.sd_qe,
                stats.threshold()
            ),
        );
        self.calib = Some(Calibration { som, stats, norm });
        self.calib_buf = Vec::new();
        self.phase = Phase::Bootstrap;
        Ok(event)
    }

    /// Scores a feature vector and appends it to the trend history.
    ///
    /// Until the SVM holds both classes the score is the quantization-error
    /// excess over the label threshold in units of the calibration spread.
    pub fn score_frame(&mut self, fv: &FeatureVector) -> Result<f64> {
        let calib = self.calib.as_ref().ok_or_else(|| {
            Error::Phase("score_frame called before calibration finished".into())
        })?;
        let p = calib.norm.apply(fv);
        let score = if self.svm.has_both_classes() {
            self.svm.decision(&p)
        } else {
            let qe = calib.som.quantization_error(&p);
            (qe - calib.stats.threshold()) / calib.stats.sd_qe.max(TINY)
        };
        if self.history.len() == self.cfg.trend_window {
            self.history.pop_front();
        }
        self.history.push_back(Scored {
            frame: self.frames as f64,
            score,
            peak: fv.peak,
        });
        Ok(score)
    }

    fn retune(&mut self, t: u64) -> Option<EventRecord> {
        let buffer = self.labeled();
        let kind = self.cfg.svm.kernel.kind();
        // Too few points of a class is expected early on; try again later.
        let best = grid_search(&buffer, &self.cfg.grid, kind).ok()?;
        let mut params = self.cfg.svm;
        params.c = best.c;
        params.kernel = KernelSpec::new(kind, best.gamma).ok()?;
        let mut svm = SvmModel::new(params).ok()?;
        for &(x, y) in &buffer {
            let _ = svm.learn_one(x, y);
        }
        self.svm = svm;
        Some(EventRecord::new(
            t,
            EventKind::Retune,
            best.cv_accuracy,
            format!("c={} gamma={}", best.c, best.gamma),
        ))
    }
}
