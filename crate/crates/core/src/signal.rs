//! Value types shared by every stage and the frame assembler.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of features extracted per frame.
pub const FEATURE_DIM: usize = 4;

/// A point in feature space as consumed by the SOM and the SVM.
pub type Point = [f64; FEATURE_DIM];

/// One timestamped scalar sensor reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub t: u64,
    pub value: f64,
}

impl RawSample {
    pub fn new(t: u64, value: f64) -> Self {
        Self { t, value }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub start_t: u64,
    pub samples: Vec<f64>,
}

/// Fixed-size summary of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub rms: f64,
    pub peak: f64,
    pub crest: f64,
    pub zcr: f64,
}

impl FeatureVector {
    pub fn to_point(&self) -> Point {
        [self.rms, self.peak, self.crest, self.zcr]
    }
}

/// Binary class: normal (-1) or fault (+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Normal,
    Fault,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Normal => -1.0,
            Label::Fault => 1.0,
        }
    }

    /// Classification read-out of a decision value: `f >= 0` is a fault.
    pub fn from_decision(f: f64) -> Self {
        if f >= 0.0 {
            Label::Fault
        } else {
            Label::Normal
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Normal => -1,
            Label::Fault => 1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Label::Normal),
            1 => Ok(Label::Fault),
            other => Err(format!("invalid label {other}, expected -1 or 1")),
        }
    }
}

/// Streaming frame assembly: windows of `len` samples every `hop` samples.
///
/// A frame is emitted as soon as its last sample arrives; a trailing partial
/// window is never emitted.
#[derive(Debug, Clone)]
pub struct FrameAssembler {
    len: usize,
    hop: usize,
    buf: VecDeque<RawSample>,
    last_t: Option<u64>,
}

impl FrameAssembler {
    pub fn new(len: usize, hop: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::Config(format!("frame length must be >= 2, got {len}")));
        }
        if hop == 0 || hop > len {
            return Err(Error::Config(format!(
                "frame hop must be in 1..={len}, got {hop}"
            )));
        }
        Ok(Self {
            len,
            hop,
            buf: VecDeque::with_capacity(len),
            last_t: None,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Samples currently held while waiting for the next frame.
    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    pub fn last_t(&self) -> Option<u64> {
        self.last_t
    }

    /// Rejects a sample whose index does not strictly increase.
    pub fn check(&self, t: u64) -> Result<()> {
        match self.last_t {
            Some(last) if t <= last => Err(Error::Stream(format!(
                "sample index {t} does not increase past {last}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn push(&mut self, sample: RawSample) -> Result<Option<Frame>> {
        self.check(sample.t)?;
        self.last_t = Some(sample.t);
        self.buf.push_back(sample);
        if self.buf.len() < self.len {
            return Ok(None);
        }
        let frame = Frame {
            start_t: self.buf[0].t,
            samples: self.buf.iter().map(|s| s.value).collect(),
        };
        self.buf.drain(..self.hop);
        Ok(Some(frame))
    }
}

/// Cuts a whole conditioned stream into frames.
pub fn assemble_frames(stream: &[RawSample], len: usize, hop: usize) -> Result<Vec<Frame>> {
    let mut asm = FrameAssembler::new(len, hop)?;
    let mut out = Vec::new();
    for &s in stream {
        if let Some(f) = asm.push(s)? {
            out.push(f);
        }
    }
    Ok(out)
}
