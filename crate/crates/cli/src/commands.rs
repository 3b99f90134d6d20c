//! Subcommand implementations. Each returns a typed error whose
//! [`CliError::exit_code`] is the process exit status.

use std::io::{Read, Write};
use std::path::Path;

use faultsense::engine::{Engine, EventKind, EventRecord, Phase};
use faultsense::sim::SimStream;
use faultsense::tune::{grid_search, TuneResult};

use crate::config::AppConfig;
use crate::error::CliError;
use crate::eval::{evaluate, EvalReport};
use crate::io::{self, Row, SampleReader};

/// Share of malformed rows above which `run` reports a corrupt stream.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<AppConfig, CliError> {
    let mut cfg = match path {
        Some(p) => AppConfig::load(p)?,
        None => AppConfig::default(),
    };
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

pub fn simulate(cfg: &AppConfig, out: &Path, truth: &Path) -> Result<(), CliError> {
    let stream = SimStream::new(cfg.sim.clone())?;
    io::write_samples(io::create(out)?, stream).map_err(|e| io::io_err(out, e))?;
    io::write_truth(truth, &cfg.sim.truth())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub rows: u64,
    pub malformed: u64,
    pub events: u64,
}

impl RunSummary {
    pub fn corrupt(&self) -> bool {
        self.malformed as f64 > MAX_MALFORMED_FRACTION * self.rows as f64
    }
}

/// Feeds every row to the engine and hands each event to `sink`. Malformed
/// rows and out-of-order samples become `stream_error` events.
pub fn drive<R: Read>(
    engine: &mut Engine,
    input: R,
    mut sink: impl FnMut(&EventRecord) -> Result<(), CliError>,
) -> Result<RunSummary, CliError> {
    let mut summary = RunSummary::default();
    let mut last_t = 0;
    for row in SampleReader::new(input)? {
        summary.rows += 1;
        let events = match row {
            Row::Sample(s) => {
                let ev = engine.ingest(s)?;
                if ev.iter().any(|e| e.kind == EventKind::StreamError) {
                    summary.malformed += 1;
                } else {
                    last_t = s.t;
                }
                ev
            }
            Row::Malformed(n, why) => {
                summary.malformed += 1;
                vec![EventRecord {
                    t: last_t,
                    kind: EventKind::StreamError,
                    score: 0.0,
                    eta: None,
                    amplitude: None,
                    detail: format!("row {n}: {why}"),
                }]
            }
        };
        for e in &events {
            sink(e)?;
            summary.events += 1;
        }
    }
    Ok(summary)
}

/// Runs the engine over a sample file and writes JSON Lines events.
///
/// The events file is complete even when the stream turns out corrupt.
pub fn run(cfg: &AppConfig, input: &Path, events: &Path) -> Result<RunSummary, CliError> {
    let mut engine = Engine::new(cfg.engine.clone())?;
    let reader = io::open(input)?;
    let mut out = io::create(events)?;
    let summary = drive(&mut engine, reader, |e| {
        io::write_event(&mut out, e).map_err(|err| io::io_err(events, err))
    })?;
    out.flush().map_err(|e| io::io_err(events, e))?;
    if summary.corrupt() {
        return Err(CliError::Corrupt(format!(
            "{} of {} rows malformed",
            summary.malformed, summary.rows
        )));
    }
    Ok(summary)
}

/// Runs the engine over a sample file, then grid-searches the final labeled
/// buffer.
pub fn tune(cfg: &AppConfig, input: &Path) -> Result<TuneResult, CliError> {
    let mut engine = Engine::new(cfg.engine.clone())?;
    drive(&mut engine, io::open(input)?, |_| Ok(()))?;
    if engine.phase() == Phase::Calibrating {
        return Err(CliError::Insufficient(format!(
            "stream ended after {} frames, calibration needs {}",
            engine.frames_seen(),
            cfg.engine.calib_frames
        )));
    }
    let kind = cfg.engine.svm.kernel.kind();
    Ok(grid_search(&engine.labeled(), &cfg.engine.grid, kind)?)
}

/// `theta_amp` defaults to half the maximum echo amplitude.
pub fn eval(events: &Path, truth: &Path, theta_amp: Option<f64>) -> Result<EvalReport, CliError> {
    let events = io::read_events(events)?;
    let truth = io::read_truth(truth)?;
    let theta = theta_amp.unwrap_or(0.5 * truth.echo_amp_max.unwrap_or(0.0));
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(CliError::Config(format!("theta-amp must be >= 0, got {theta}")));
    }
    Ok(evaluate(&events, &truth, theta))
}
