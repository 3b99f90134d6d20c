use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};
use crate::signal::{Label, Point};

/// KKT case a stored point currently occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PointSet {
    /// `0 < alpha < C`, `g = 0`.
    Margin,
    /// `alpha = C`, `g <= 0`.
    Error,
    /// `alpha = 0`, `g >= 0`.
    Reserve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPoint {
    pub id: u64,
    pub x: Point,
    pub y: Label,
    pub alpha: f64,
    pub set: PointSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelSpec,
    pub c: f64,
    /// KKT tolerance.
    pub epsilon: f64,
    /// Maximum number of stored points.
    pub budget: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::Rbf { gamma: 0.25 },
            c: 1.0,
            epsilon: 1e-6,
            budget: 400,
        }
    }
}

impl SvmParams {
    pub fn new(kernel: KernelSpec, c: f64) -> Self {
        Self {
            kernel,
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("svm C must be > 0, got {}", self.c)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "svm epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.budget == 0 {
            return Err(Error::Config("svm budget must be > 0".into()));
        }
        if let KernelSpec::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::Config(format!("rbf gamma must be > 0, got {gamma}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktViolation {
    pub id: u64,
    /// Margin residual `y * f(x) - 1`.
    pub g: f64,
    /// Set the residual says the point belongs to.
    pub expected_set: PointSet,
}

/// Kernel expansion `f(x) = sum_i alpha_i y_i K(x_i, x) + b` kept KKT-optimal.
#[derive(Debug, Clone)]
pub struct SvmModel {
    params: SvmParams,
    b: f64,
    points: Vec<TrainedPoint>,
    /// Cached residuals `g_i`, aligned with `points`.
    g: Vec<f64>,
    /// Kernel values between stored points, aligned with `points`.
    kcache: Vec<Vec<f64>>,
    /// Positions (into `points`) of the margin set, in the order used by `rinv`.
    margin: Vec<usize>,
    /// Inverse of the bordered margin matrix `[[0, y'], [y, Q]]`, row-major,
    /// `(m + 1)^2` entries. Empty while the margin set is empty.
    rinv: Vec<f64>,
    rinv_valid: bool,
    next_id: u64,
}

/// Bordered-system residual above which the inverse is rebuilt from scratch.
const RESIDUAL_LIMIT: f64 = 1e-8;
/// Schur complements below this are treated as a singular margin system.
const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    /// Margin point at position `k` of the margin list hits `alpha = C`.
    MarginToError(usize),
    /// Margin point at position `k` hits `alpha = 0`.
    MarginToReserve(usize),
    /// Non-margin point `i` reaches `g = 0`.
    Enter(usize),
    /// The driven point reaches `g = 0`.
    DrivenSatisfied,
    /// The driven point reaches `alpha = C`.
    DrivenAtBound,
    /// The driven point reaches `alpha = 0` while unlearning.
    DrivenReleased,
}

#[derive(Debug, Clone, Copy)]
struct Breakpoint {
    step: f64,
    id: u64,
    mv: Move,
}

impl Breakpoint {
    fn better_than(&self, other: &Option<Breakpoint>) -> bool {
        match other {
            None => true,
            Some(o) => self.step < o.step || (self.step == o.step && self.id < o.id),
        }
    }
}

impl SvmModel {
    pub fn new(params: SvmParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            b: 0.0,
            points: Vec::new(),
            g: Vec::new(),
            kcache: Vec::new(),
            margin: Vec::new(),
            rinv: Vec::new(),
            rinv_valid: true,
            next_id: 0,
        })
    }

    /// Assembles a model from explicit coefficients. Set membership is taken
    /// as given; use [`SvmModel::kkt_report`] to check it.
    pub fn from_parts(params: SvmParams, b: f64, points: Vec<TrainedPoint>) -> Result<Self> {
        params.validate()?;
        if !b.is_finite() {
            return Err(Error::Input("bias is not finite".into()));
        }
        let mut model = Self::new(params)?;
        let mut last_id = None;
        for p in &points {
            if last_id.is_some_and(|l| p.id <= l) {
                return Err(Error::Input("point ids must be strictly increasing".into()));
            }
            last_id = Some(p.id);
            check_finite(&p.x)?;
            if !(p.alpha >= 0.0 && p.alpha <= params.c) {
                return Err(Error::Input(format!(
                    "alpha {} of point {} outside [0, C]",
                    p.alpha, p.id
                )));
            }
        }
        model.b = b;
        model.next_id = last_id.map_or(0, |l| l + 1);
        for p in points {
            model.push_point(p);
        }
        model.margin = (0..model.points.len())
            .filter(|&i| model.points[i].set == PointSet::Margin)
            .collect();
        model.rinv_valid = false;
        model.refresh_residuals();
        Ok(model)
    }

    pub fn params(&self) -> &SvmParams {
        &self.params
    }

    pub fn kernel(&self) -> KernelSpec {
        self.params.kernel
    }

    pub fn c(&self) -> f64 {
        self.params.c
    }

    pub fn bias(&self) -> f64 {
        self.b
    }

    pub fn points(&self) -> &[TrainedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Ensures future ids start at or after `next`.
    pub(crate) fn reserve_ids(&mut self, next: u64) {
        self.next_id = self.next_id.max(next);
    }

    pub fn margin_len(&self) -> usize {
        self.margin.len()
    }

    pub fn has_both_classes(&self) -> bool {
        let mut seen = (false, false);
        for p in &self.points {
            match p.y {
                Label::Normal => seen.0 = true,
                Label::Fault => seen.1 = true,
            }
        }
        seen.0 && seen.1
    }

    pub fn get(&self, id: u64) -> Option<&TrainedPoint> {
        self.position(id).map(|i| &self.points[i])
    }

    /// `sum_i alpha_i y_i`, zero at every feasible point.
    pub fn dual_balance(&self) -> f64 {
        self.points.iter().map(|p| p.alpha * p.y.sign()).sum()
    }

    pub fn decision(&self, x: &Point) -> f64 {
        let kernel = self.params.kernel;
        self.points
            .iter()
            .filter(|p| p.alpha > 0.0)
            .map(|p| p.alpha * p.y.sign() * kernel.eval(&p.x, x))
            .sum::<f64>()
            + self.b
    }

    /// Recomputes every residual from scratch and lists the points whose
    /// recorded set is violated beyond `eps`.
    pub fn kkt_report(&self, eps: f64) -> Vec<KktViolation> {
        let c = self.params.c;
        (0..self.points.len())
            .filter_map(|i| {
                let p = &self.points[i];
                let g = self.residual_exact(i);
                let ok = match p.set {
                    PointSet::Margin => p.alpha > 0.0 && p.alpha < c && g.abs() <= eps,
                    PointSet::Error => p.alpha == c && g <= eps,
                    PointSet::Reserve => p.alpha == 0.0 && g >= -eps,
                };
                if ok {
                    return None;
                }
                let expected_set = if g < -eps {
                    PointSet::Error
                } else if g > eps {
                    PointSet::Reserve
                } else {
                    PointSet::Margin
                };
                Some(KktViolation {
                    id: p.id,
                    g,
                    expected_set,
                })
            })
            .collect()
    }

    /// Adds one labeled point and restores KKT optimality. Returns the new id.
    ///
    /// When the model is at its budget the eviction rule runs first: the
    /// oldest reserve point is dropped, otherwise the oldest point with the
    /// smallest coefficient is unlearned. On failure the model is left
    /// exactly as it was before the call.
    pub fn learn_one(&mut self, x: Point, y: Label) -> Result<u64> {
        check_finite(&x)?;
        let backup = self.clone();
        match self.learn_inner(x, y) {
            Ok(id) => Ok(id),
            Err(e) => {
                *self = backup;
                Err(e)
            }
        }
    }

    fn learn_inner(&mut self, x: Point, y: Label) -> Result<u64> {
        while self.points.len() >= self.params.budget {
            self.evict()?;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.push_point(TrainedPoint {
            id,
            x,
            y,
            alpha: 0.0,
            set: PointSet::Reserve,
        });
        let c = self.points.len() - 1;
        self.g[c] = self.residual_exact(c);
        self.drive(c, true)?;
        self.finish()?;
        Ok(id)
    }

    /// Removes a point, driving its coefficient to zero first so that the
    /// remaining points stay KKT-optimal.
    pub fn unlearn_one(&mut self, id: u64) -> Result<()> {
        if self.position(id).is_none() {
            return Err(Error::NotFound(id));
        }
        let backup = self.clone();
        match self.unlearn_inner(id) {
            Ok(()) => Ok(()),
            Err(e) => {
                *self = backup;
                Err(e)
            }
        }
    }

    fn unlearn_inner(&mut self, id: u64) -> Result<()> {
        let c = self.position(id).ok_or(Error::NotFound(id))?;
        if let Some(k) = self.margin.iter().position(|&i| i == c) {
            self.remove_margin(k)?;
        }
        if self.points[c].alpha > 0.0 {
            self.drive(c, false)?;
        }
        self.points[c].alpha = 0.0;
        self.remove_point(c);
        self.finish()
    }

    /// Id the eviction rule would remove next.
    pub fn eviction_candidate(&self) -> Option<u64> {
        if let Some(p) = self.points.iter().find(|p| p.set == PointSet::Reserve) {
            return Some(p.id);
        }
        let mut best: Option<&TrainedPoint> = None;
        for p in &self.points {
            if best.is_none_or(|b| p.alpha < b.alpha) {
                best = Some(p);
            }
        }
        best.map(|p| p.id)
    }

    fn evict(&mut self) -> Result<()> {
        let id = self
            .eviction_candidate()
            .ok_or_else(|| Error::Solver("nothing to evict".into()))?;
        let i = self.position(id).ok_or(Error::NotFound(id))?;
        if self.points[i].set == PointSet::Reserve {
            self.remove_point(i);
            Ok(())
        } else {
            self.unlearn_inner(id)
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.refresh_residuals();
        let eps = self.params.epsilon;
        if let Some(v) = self.kkt_report(eps).first() {
            return Err(Error::Solver(format!(
                "point {} left with residual {:e} after update",
                v.id, v.g
            )));
        }
        Ok(())
    }

    /// Moves the coefficient of point `c` up (`grow`) or down to zero along
    /// the piecewise-linear path on which every other point keeps its KKT case.
    fn drive(&mut self, c: usize, grow: bool) -> Result<()> {
        let cap = 100 * self.points.len().max(1);
        let cc = self.params.c;
        let dir = if grow { 1.0 } else { -1.0 };
        for iter in 0..cap {
            if iter % 64 == 63 {
                self.refresh_residuals();
            }
            if grow {
                if self.g[c] >= 0.0 {
                    self.g[c] = 0.0;
                    if self.points[c].alpha > 0.0 {
                        self.points[c].set = PointSet::Margin;
                        self.add_margin(c)?;
                    } else {
                        self.points[c].set = PointSet::Reserve;
                    }
                    return Ok(());
                }
                if self.points[c].alpha >= cc {
                    self.points[c].alpha = cc;
                    self.points[c].set = PointSet::Error;
                    return Ok(());
                }
            } else if self.points[c].alpha <= 0.0 {
                self.points[c].alpha = 0.0;
                return Ok(());
            }

            if self.margin.is_empty() {
                self.shift_bias(c, grow)?;
            } else {
                self.step_coefficients(c, grow, dir)?;
            }
        }
        Err(Error::Solver(format!(
            "no KKT-consistent state within {cap} iterations"
        )))
    }

    /// With an empty margin set the equality constraint pins every
    /// coefficient, so only the bias can move until some point reaches the
    /// margin.
    fn shift_bias(&mut self, c: usize, grow: bool) -> Result<()> {
        let yc = self.points[c].y.sign();
        let db = if grow { yc } else { -yc };
        let mut best: Option<Breakpoint> = None;
        for i in 0..self.points.len() {
            if i == c {
                continue;
            }
            let p = &self.points[i];
            let dg = p.y.sign() * db;
            let step = match p.set {
                PointSet::Reserve if dg < 0.0 => self.g[i].max(0.0) / -dg,
                PointSet::Error if dg > 0.0 => (-self.g[i]).max(0.0) / dg,
                _ => continue,
            };
            let bp = Breakpoint {
                step,
                id: p.id,
                mv: Move::Enter(i),
            };
            if bp.better_than(&best) {
                best = Some(bp);
            }
        }
        if grow {
            let bp = Breakpoint {
                step: (-self.g[c]).max(0.0),
                id: self.points[c].id,
                mv: Move::DrivenSatisfied,
            };
            if bp.better_than(&best) {
                best = Some(bp);
            }
        }
        let bp = best.ok_or_else(|| Error::Solver("bias path has no breakpoint".into()))?;
        self.b += db * bp.step;
        for i in 0..self.points.len() {
            self.g[i] += self.points[i].y.sign() * db * bp.step;
        }
        match bp.mv {
            Move::Enter(i) => {
                self.g[i] = 0.0;
                self.points[i].set = PointSet::Margin;
                self.add_margin(i)?;
            }
            Move::DrivenSatisfied => self.g[c] = 0.0,
            _ => unreachable!(),
        }
        Ok(())
    }

    fn step_coefficients(&mut self, c: usize, grow: bool, dir: f64) -> Result<()> {
        let cc = self.params.c;
        let beta = self.sensitivities(c)?;
        let yc = self.points[c].y.sign();

        // Residual sensitivities of every point outside the margin set.
        let n = self.points.len();
        let mut gamma = vec![0.0; n];
        let mut in_margin = vec![false; n];
        for &s in &self.margin {
            in_margin[s] = true;
        }
        for i in 0..n {
            if in_margin[i] {
                continue;
            }
            let yi = self.points[i].y.sign();
            let row = &self.kcache[i];
            let mut acc = yc * row[c];
            for (k, &s) in self.margin.iter().enumerate() {
                acc += self.points[s].y.sign() * row[s] * beta[k + 1];
            }
            gamma[i] = yi * acc + yi * beta[0];
        }

        let mut best: Option<Breakpoint> = None;
        let offer = |bp: Breakpoint, best: &mut Option<Breakpoint>| {
            if bp.better_than(best) {
                *best = Some(bp);
            }
        };
        for (k, &s) in self.margin.iter().enumerate() {
            let da = dir * beta[k + 1];
            let alpha = self.points[s].alpha;
            let id = self.points[s].id;
            if da > 0.0 {
                let step = ((cc - alpha) / da).max(0.0);
                offer(Breakpoint { step, id, mv: Move::MarginToError(k) }, &mut best);
            } else if da < 0.0 {
                let step = (alpha / -da).max(0.0);
                offer(Breakpoint { step, id, mv: Move::MarginToReserve(k) }, &mut best);
            }
        }
        for i in 0..n {
            if in_margin[i] || i == c {
                continue;
            }
            let dg = dir * gamma[i];
            let step = match self.points[i].set {
                PointSet::Reserve if dg < 0.0 => self.g[i].max(0.0) / -dg,
                PointSet::Error if dg > 0.0 => (-self.g[i]).max(0.0) / dg,
                _ => continue,
            };
            offer(Breakpoint { step, id: self.points[i].id, mv: Move::Enter(i) }, &mut best);
        }
        let idc = self.points[c].id;
        if grow {
            let step = (cc - self.points[c].alpha).max(0.0);
            offer(Breakpoint { step, id: idc, mv: Move::DrivenAtBound }, &mut best);
            if gamma[c] > 0.0 {
                let step = (-self.g[c]).max(0.0) / gamma[c];
                offer(Breakpoint { step, id: idc, mv: Move::DrivenSatisfied }, &mut best);
            }
        } else {
            let step = self.points[c].alpha.max(0.0);
            offer(Breakpoint { step, id: idc, mv: Move::DrivenReleased }, &mut best);
        }
        let bp = best.ok_or_else(|| Error::Solver("coefficient path is unbounded".into()))?;

        let delta = dir * bp.step;
        self.points[c].alpha += delta;
        for (k, &s) in self.margin.iter().enumerate() {
            let a = self.points[s].alpha + beta[k + 1] * delta;
            self.points[s].alpha = a.clamp(0.0, cc);
        }
        self.b += beta[0] * delta;
        for i in 0..n {
            if !in_margin[i] {
                self.g[i] += gamma[i] * delta;
            }
        }

        match bp.mv {
            Move::MarginToError(k) => {
                let s = self.margin[k];
                self.remove_margin(k)?;
                self.points[s].alpha = cc;
                self.points[s].set = PointSet::Error;
                self.g[s] = 0.0;
            }
            Move::MarginToReserve(k) => {
                let s = self.margin[k];
                self.remove_margin(k)?;
                self.points[s].alpha = 0.0;
                self.points[s].set = PointSet::Reserve;
                self.g[s] = 0.0;
            }
            Move::Enter(i) => {
                self.g[i] = 0.0;
                self.points[i].set = PointSet::Margin;
                self.add_margin(i)?;
            }
            Move::DrivenSatisfied => self.g[c] = 0.0,
            Move::DrivenAtBound => self.points[c].alpha = cc,
            Move::DrivenReleased => self.points[c].alpha = 0.0,
        }
        Ok(())
    }

    /// `[db, dalpha_margin...]` per unit change of the driven coefficient.
    fn sensitivities(&mut self, c: usize) -> Result<Vec<f64>> {
        if !self.rinv_valid {
            self.rebuild_inverse()?;
        }
        let v = self.border_column(c);
        let mut beta = self.apply_inverse(&v);
        if self.system_residual(&beta, &v) > RESIDUAL_LIMIT {
            self.rebuild_inverse()?;
            beta = self.apply_inverse(&v);
        }
        Ok(beta)
    }

    /// `[y_c, Q_{s c}...]` for the current margin set.
    fn border_column(&self, c: usize) -> Vec<f64> {
        let yc = self.points[c].y.sign();
        let mut v = Vec::with_capacity(self.margin.len() + 1);
        v.push(yc);
        for &s in &self.margin {
            v.push(self.points[s].y.sign() * yc * self.kcache[s][c]);
        }
        v
    }

    /// `-R v`.
    fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        let dim = v.len();
        (0..dim)
            .map(|r| {
                let row = &self.rinv[r * dim..(r + 1) * dim];
                -row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    fn bordered_entry(&self, r: usize, col: usize) -> f64 {
        match (r, col) {
            (0, 0) => 0.0,
            (0, k) | (k, 0) => self.points[self.margin[k - 1]].y.sign(),
            (a, b) => {
                let (s, t) = (self.margin[a - 1], self.margin[b - 1]);
                self.points[s].y.sign() * self.points[t].y.sign() * self.kcache[s][t]
            }
        }
    }

    /// Relative infinity-norm residual of `M beta = -v`.
    fn system_residual(&self, beta: &[f64], v: &[f64]) -> f64 {
        let dim = v.len();
        let scale = 1.0 + beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        let mut worst = 0.0f64;
        for r in 0..dim {
            let mut acc = v[r];
            for (col, b) in beta.iter().enumerate() {
                acc += self.bordered_entry(r, col) * b;
            }
            worst = worst.max(acc.abs());
        }
        worst / scale
    }

    fn rebuild_inverse(&mut self) -> Result<()> {
        let m = self.margin.len();
        if m == 0 {
            self.rinv.clear();
            self.rinv_valid = true;
            return Ok(());
        }
        let dim = m + 1;
        let mat = DMatrix::from_fn(dim, dim, |r, c| self.bordered_entry(r, c));
        let inv = mat
            .try_inverse()
            .ok_or_else(|| Error::Solver("margin system is singular".into()))?;
        self.rinv = (0..dim * dim).map(|k| inv[(k / dim, k % dim)]).collect();
        self.rinv_valid = true;
        Ok(())
    }

    /// Appends point `i` to the margin set, growing the inverse by one border.
    fn add_margin(&mut self, i: usize) -> Result<()> {
        let yi = self.points[i].y.sign();
        let qii = self.kcache[i][i];
        if self.margin.is_empty() {
            self.margin.push(i);
            self.rinv = vec![-qii, yi, yi, 0.0];
            self.rinv_valid = true;
            return Ok(());
        }
        if !self.rinv_valid {
            self.margin.push(i);
            return self.rebuild_inverse();
        }
        let v = self.border_column(i);
        let beta = self.apply_inverse(&v);
        let kappa = qii + v.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
        if kappa <= SINGULAR_PIVOT * qii.abs().max(1.0) {
            return Err(Error::Solver(format!(
                "point {} makes the margin system singular",
                self.points[i].id
            )));
        }
        let dim = v.len();
        let nd = dim + 1;
        let mut next = vec![0.0; nd * nd];
        for r in 0..dim {
            for col in 0..dim {
                next[r * nd + col] = self.rinv[r * dim + col] + beta[r] * beta[col] / kappa;
            }
            next[r * nd + dim] = beta[r] / kappa;
            next[dim * nd + r] = beta[r] / kappa;
        }
        next[dim * nd + dim] = 1.0 / kappa;
        self.rinv = next;
        self.margin.push(i);
        Ok(())
    }

    /// Drops the `k`-th margin entry, shrinking the inverse by one border.
    fn remove_margin(&mut self, k: usize) -> Result<()> {
        self.margin.remove(k);
        if self.margin.is_empty() {
            self.rinv.clear();
            self.rinv_valid = true;
            return Ok(());
        }
        if !self.rinv_valid {
            return self.rebuild_inverse();
        }
        let dim = self.margin.len() + 2;
        let idx = k + 1;
        let pivot = self.rinv[idx * dim + idx];
        if pivot.abs() < f64::MIN_POSITIVE {
            return self.rebuild_inverse();
        }
        let nd = dim - 1;
        let mut next = Vec::with_capacity(nd * nd);
        for r in (0..dim).filter(|&r| r != idx) {
            let rk = self.rinv[r * dim + idx];
            for col in (0..dim).filter(|&c| c != idx) {
                next.push(self.rinv[r * dim + col] - rk * self.rinv[idx * dim + col] / pivot);
            }
        }
        self.rinv = next;
        Ok(())
    }

    fn position(&self, id: u64) -> Option<usize> {
        self.points.binary_search_by_key(&id, |p| p.id).ok()
    }

    fn push_point(&mut self, p: TrainedPoint) {
        let kernel = self.params.kernel;
        let row: Vec<f64> = self
            .points
            .iter()
            .map(|q| kernel.eval(&q.x, &p.x))
            .chain(std::iter::once(kernel.eval(&p.x, &p.x)))
            .collect();
        for (existing, &k) in self.kcache.iter_mut().zip(&row) {
            existing.push(k);
        }
        self.kcache.push(row);
        self.points.push(p);
        self.g.push(0.0);
    }

    fn remove_point(&mut self, i: usize) {
        self.points.remove(i);
        self.g.remove(i);
        self.kcache.remove(i);
        for row in self.kcache.iter_mut() {
            row.remove(i);
        }
        self.margin.retain(|&s| s != i);
        for s in self.margin.iter_mut() {
            if *s > i {
                *s -= 1;
            }
        }
    }

    fn residual_exact(&self, i: usize) -> f64 {
        let row = &self.kcache[i];
        let f = self
            .points
            .iter()
            .zip(row)
            .filter(|(p, _)| p.alpha > 0.0)
            .map(|(p, k)| p.alpha * p.y.sign() * k)
            .sum::<f64>()
            + self.b;
        self.points[i].y.sign() * f - 1.0
    }

    fn refresh_residuals(&mut self) {
        for i in 0..self.points.len() {
            self.g[i] = self.residual_exact(i);
        }
    }
}

fn check_finite(x: &Point) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("non-finite feature vector {x:?}")))
    }
}
