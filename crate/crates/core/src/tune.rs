//! Hyperparameter selection by k-fold cross-validation over a (C, gamma) grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Label, Point};
use crate::svm::{batch_train, KernelKind, KernelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub k_folds: usize,
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self {
            c_values: vec![0.1, 1.0, 10.0, 100.0],
            gamma_values: vec![0.01, 0.1, 1.0, 10.0],
            k_folds: 5,
        }
    }
}

impl ParamGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, vals) in [("c", &self.c_values), ("gamma", &self.gamma_values)] {
            if vals.is_empty() {
                return Err(Error::Config(format!("tune grid for {name} is empty")));
            }
            if vals.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!("tune grid for {name} must be positive")));
            }
            if vals.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "tune grid for {name} must be strictly ascending"
                )));
            }
        }
        if self.k_folds < 2 {
            return Err(Error::Config("tune folds must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub c: f64,
    pub gamma: f64,
    pub cv_accuracy: f64,
}

fn check_counts(buffer: &[(Point, Label)], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Config("cross-validation needs k >= 2".into()));
    }
    let pos = buffer.iter().filter(|(_, y)| *y == Label::Fault).count();
    let neg = buffer.len() - pos;
    if pos < k || neg < k {
        return Err(Error::InsufficientData(format!(
            "need {k} points of each class, have {neg} normal and {pos} fault"
        )));
    }
    Ok(())
}

/// Mean held-out sign accuracy. Fold `i` holds every `k`-th point starting
/// at `i`, so the split follows arrival order and needs no randomness.
///
/// A training split that happens to contain one class only predicts that
/// class everywhere.
pub fn cross_validate(
    buffer: &[(Point, Label)],
    kind: KernelKind,
    c: f64,
    gamma: f64,
    k: usize,
) -> Result<f64> {
    check_counts(buffer, k)?;
    let kernel = KernelSpec::new(kind, gamma)?;
    let mut total = 0.0;
    for fold in 0..k {
        let (held, train): (Vec<_>, Vec<_>) = buffer
            .iter()
            .enumerate()
            .partition(|(i, _)| i % k == fold);
        let train: Vec<(Point, Label)> = train.into_iter().map(|(_, d)| *d).collect();
        let classes = (
            train.iter().any(|(_, y)| *y == Label::Normal),
            train.iter().any(|(_, y)| *y == Label::Fault),
        );
        let predict: Box<dyn Fn(&Point) -> Label> = match classes {
            (true, true) => {
                let model = batch_train(&train, kernel, c)?;
                Box::new(move |x| Label::from_decision(model.decision(x)))
            }
            (true, false) => Box::new(|_| Label::Normal),
            _ => Box::new(|_| Label::Fault),
        };
        let correct = held.iter().filter(|(_, (x, y))| predict(x) == *y).count();
        total += correct as f64 / held.len() as f64;
    }
    Ok(total / k as f64)
}

/// Best (C, gamma) by cross-validated accuracy; ties go to the smallest C,
/// then the smallest gamma.
pub fn grid_search(buffer: &[(Point, Label)], grid: &ParamGrid, kind: KernelKind) -> Result<TuneResult> {
    grid.validate()?;
    check_counts(buffer, grid.k_folds)?;
    // The linear kernel has no width to tune.
    let gammas: &[f64] = match kind {
        KernelKind::Linear => &grid.gamma_values[..1],
        KernelKind::Rbf => &grid.gamma_values,
    };
    let candidates: Vec<(f64, f64)> = grid
        .c_values
        .iter()
        .flat_map(|&c| gammas.iter().map(move |&g| (c, g)))
        .collect();
    let scored: Vec<TuneResult> = candidates
        .par_iter()
        .map(|&(c, gamma)| {
            cross_validate(buffer, kind, c, gamma, grid.k_folds).map(|cv_accuracy| TuneResult {
                c,
                gamma,
                cv_accuracy,
            })
        })
        .collect::<Result<_>>()?;
    let best = scored
        .into_iter()
        .reduce(|best, r| {
            let better = r.cv_accuracy > best.cv_accuracy
                || (r.cv_accuracy == best.cv_accuracy
                    && (r.c < best.c || (r.c == best.c && r.gamma < best.gamma)));
            if better {
                r
            } else {
                best
            }
        })
        .expect("grid is non-empty");
    Ok(best)
}
