//! Versioned JSON dump of a trained model.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::model::{SvmModel, SvmParams, TrainedPoint};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub params: SvmParams,
    pub b: f64,
    pub next_id: u64,
    pub points: Vec<TrainedPoint>,
}

impl Checkpoint {
    pub fn of(model: &SvmModel) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            params: *model.params(),
            b: model.bias(),
            next_id: model.next_id(),
            points: model.points().to_vec(),
        }
    }

    /// Rebuilds the model and refuses it unless it is KKT-optimal.
    pub fn restore(self) -> Result<SvmModel> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Input(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        let eps = self.params.epsilon;
        let mut model = SvmModel::from_parts(self.params, self.b, self.points)?;
        model.reserve_ids(self.next_id);
        if let Some(v) = model.kkt_report(eps).first() {
            return Err(Error::Input(format!(
                "checkpoint violates KKT at point {} (g = {:e})",
                v.id, v.g
            )));
        }
        Ok(model)
    }
}

impl SvmModel {
    pub fn save<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &Checkpoint::of(self))
            .map_err(|e| Error::Input(format!("cannot write checkpoint: {e}")))
    }

    pub fn load<R: Read>(r: R) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_reader(r)
            .map_err(|e| Error::Input(format!("cannot parse checkpoint: {e}")))?;
        ck.restore()
    }
}
