//! Reference batch solver: SMO with second-order working-set selection.

use super::kernel::KernelSpec;
use super::model::{PointSet, SvmModel, SvmParams, TrainedPoint};
use crate::error::{Error, Result};
use crate::signal::{Label, Point};

/// Stop when the maximal violating pair gap drops below this.
pub const BATCH_TOLERANCE: f64 = 1e-8;

const TAU: f64 = 1e-12;

/// Solves the soft-margin dual over `data` from scratch.
///
/// The returned model stores the points in input order with ids `0..n` and
/// a budget large enough to hold all of them.
pub fn batch_train(data: &[(Point, Label)], kernel: KernelSpec, c: f64) -> Result<SvmModel> {
    let mut params = SvmParams::new(kernel, c);
    params.budget = params.budget.max(data.len());
    params.validate()?;
    let (alpha, b) = solve_dual(data, kernel, c)?;
    let points = data
        .iter()
        .zip(&alpha)
        .enumerate()
        .map(|(i, (&(x, y), &a))| TrainedPoint {
            id: i as u64,
            x,
            y,
            alpha: a,
            set: if a <= 0.0 {
                PointSet::Reserve
            } else if a >= c {
                PointSet::Error
            } else {
                PointSet::Margin
            },
        })
        .collect();
    SvmModel::from_parts(params, b, points)
}

fn solve_dual(data: &[(Point, Label)], kernel: KernelSpec, c: f64) -> Result<(Vec<f64>, f64)> {
    let n = data.len();
    if data.iter().any(|(x, _)| x.iter().any(|v| !v.is_finite())) {
        return Err(Error::Input("non-finite features in training data".into()));
    }
    let pos = data.iter().filter(|(_, y)| *y == Label::Fault).count();
    if pos == 0 || pos == n {
        return Err(Error::Training("batch training needs both classes".into()));
    }
    let y: Vec<f64> = data.iter().map(|(_, l)| l.sign()).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = y[i] * y[j] * kernel.eval(&data[i].0, &data[j].0);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    let qd: Vec<f64> = (0..n).map(|i| q[i * n + i]).collect();
    let mut alpha = vec![0.0; n];
    // Gradient of 0.5 a'Qa - e'a.
    let mut grad = vec![-1.0; n];

    let max_iter = 10_000_000usize.max(100 * n);
    let mut converged = false;
    for _ in 0..max_iter {
        let Some((i, j)) = select_pair(&alpha, &grad, &y, &q, &qd, n, c) else {
            converged = true;
            break;
        };
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = q[i * n + j];
        if y[i] != y[j] {
            let quad = positive(qd[i] + qd[j] + 2.0 * qij);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            let quad = positive(qd[i] + qd[j] - 2.0 * qij);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q[t * n + i] * di + q[t * n + j] * dj;
        }
    }
    if !converged {
        return Err(Error::Training(format!(
            "SMO did not converge within {max_iter} iterations"
        )));
    }
    let b = bias(&alpha, &grad, &y, c);
    Ok((alpha, b))
}

fn positive(quad: f64) -> f64 {
    if quad > 0.0 {
        quad
    } else {
        TAU
    }
}

/// Maximal violating index plus second-order partner; `None` once optimal.
fn select_pair(
    alpha: &[f64],
    grad: &[f64],
    y: &[f64],
    q: &[f64],
    qd: &[f64],
    n: usize,
    c: f64,
) -> Option<(usize, usize)> {
    let mut gmax = f64::NEG_INFINITY;
    let mut i_sel = None;
    for t in 0..n {
        let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
        if up && -y[t] * grad[t] >= gmax {
            gmax = -y[t] * grad[t];
            i_sel = Some(t);
        }
    }
    let i = i_sel?;
    let mut gmax2 = f64::NEG_INFINITY;
    let mut obj_min = f64::INFINITY;
    let mut j_sel = None;
    for t in 0..n {
        let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
        if !low {
            continue;
        }
        let yg = -y[t] * grad[t];
        if -yg >= gmax2 {
            gmax2 = -yg;
        }
        let grad_diff = gmax - yg;
        if grad_diff > 0.0 {
            let quad = positive(qd[i] + qd[t] - 2.0 * y[i] * y[t] * q[i * n + t]);
            let obj = -(grad_diff * grad_diff) / quad;
            if obj <= obj_min {
                obj_min = obj;
                j_sel = Some(t);
            }
        }
    }
    if gmax + gmax2 < BATCH_TOLERANCE {
        return None;
    }
    j_sel.map(|j| (i, j))
}

/// Bias from free coefficients, or the midpoint of the feasible interval
/// when every coefficient sits at a bound.
fn bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut nfree) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            nfree += 1;
            sum += yg;
        }
    }
    let rho = if nfree > 0 {
        sum / nfree as f64
    } else {
        (ub + lb) / 2.0
    };
    -rho
}
