//! Self-organizing map used as the unsupervised labeler.
//!
//! The map is fitted once on the calibration window. Afterwards the distance
//! of a point to its best-matching unit (quantization error) is compared with
//! the calibration distribution to assign pseudo-labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{FeatureVector, Label, Point, FEATURE_DIM};

#[derive(Debug, Clone, PartialEq)]
pub struct SomConfig {
    /// Side length G of the square grid.
    pub grid: usize,
    pub alpha0: f64,
    pub alpha_final: f64,
    /// Initial neighbourhood radius in grid units; `None` means `G / 2`.
    pub sigma0: Option<f64>,
    pub sigma_final: f64,
    /// Total training steps; `None` means ten passes over the data.
    pub steps: Option<usize>,
    pub seed: u64,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            grid: 8,
            alpha0: 0.5,
            alpha_final: 0.01,
            sigma0: None,
            sigma_final: 0.5,
            steps: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    grid: usize,
    codebook: Vec<Point>,
    alpha0: f64,
    alpha_final: f64,
    sigma0: f64,
    sigma_final: f64,
    steps: usize,
    seed: u64,
}

fn sq_dist(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl SomModel {
    /// Builds an untrained map. `data_len` resolves the default step count.
    pub fn new(cfg: &SomConfig, data_len: usize) -> Result<Self> {
        if cfg.grid == 0 {
            return Err(Error::Config("som grid must be >= 1".into()));
        }
        if !(cfg.alpha_final > 0.0 && cfg.alpha_final <= cfg.alpha0 && cfg.alpha0 < 1.0) {
            return Err(Error::Config(format!(
                "som learning rates need 0 < alpha_final <= alpha0 < 1, got {} and {}",
                cfg.alpha_final, cfg.alpha0
            )));
        }
        let sigma0 = cfg.sigma0.unwrap_or(cfg.grid as f64 / 2.0);
        if !(cfg.sigma_final > 0.0 && cfg.sigma_final <= sigma0) {
            return Err(Error::Config(format!(
                "som radii need 0 < sigma_final <= sigma0, got {} and {sigma0}",
                cfg.sigma_final
            )));
        }
        let steps = cfg.steps.unwrap_or(10 * data_len).max(1);
        Ok(Self {
            grid: cfg.grid,
            codebook: vec![[0.0; FEATURE_DIM]; cfg.grid * cfg.grid],
            alpha0: cfg.alpha0,
            alpha_final: cfg.alpha_final,
            sigma0,
            sigma_final: cfg.sigma_final,
            steps,
            seed: cfg.seed,
        })
    }

    /// Builds a map from an explicit row-major codebook.
    pub fn from_codebook(cfg: &SomConfig, codebook: Vec<Point>, steps: usize) -> Result<Self> {
        let mut m = Self::new(cfg, 0)?;
        if codebook.len() != cfg.grid * cfg.grid {
            return Err(Error::Config(format!(
                "codebook has {} units, grid needs {}",
                codebook.len(),
                cfg.grid * cfg.grid
            )));
        }
        m.codebook = codebook;
        m.steps = steps.max(1);
        Ok(m)
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn codebook(&self) -> &[Point] {
        &self.codebook
    }

    pub fn unit(&self, row: usize, col: usize) -> &Point {
        &self.codebook[row * self.grid + col]
    }

    /// Best-matching unit as (row, col); ties go to the smallest row-major index.
    pub fn bmu(&self, x: &Point) -> (usize, usize) {
        let idx = self.bmu_index(x).0;
        (idx / self.grid, idx % self.grid)
    }

    fn bmu_index(&self, x: &Point) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, w) in self.codebook.iter().enumerate() {
            let d = sq_dist(w, x);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    pub fn learning_rate(&self, s: usize) -> f64 {
        let frac = s as f64 / self.steps as f64;
        self.alpha0 * (self.alpha_final / self.alpha0).powf(frac)
    }

    pub fn radius(&self, s: usize) -> f64 {
        let frac = s as f64 / self.steps as f64;
        self.sigma0 * (self.sigma_final / self.sigma0).powf(frac)
    }

    /// One Gaussian-neighbourhood update toward `x` at step `s` (`0 <= s < S`).
    pub fn train_step(&mut self, x: &Point, s: usize) {
        debug_assert!(s < self.steps);
        let (bi, _) = self.bmu_index(x);
        let (br, bc) = ((bi / self.grid) as f64, (bi % self.grid) as f64);
        let alpha = self.learning_rate(s);
        let sigma = self.radius(s);
        let denom = 2.0 * sigma * sigma;
        for (i, w) in self.codebook.iter_mut().enumerate() {
            let (r, c) = ((i / self.grid) as f64, (i % self.grid) as f64);
            let d2 = (r - br).powi(2) + (c - bc).powi(2);
            let h = (-d2 / denom).exp();
            let rate = alpha * h;
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += rate * (xk - *wk);
            }
        }
    }

    /// Seeds every unit with a data point drawn with replacement.
    pub fn initialize(&mut self, data: &[Point]) -> Result<()> {
        if data.is_empty() {
            return Err(Error::Calibration("cannot fit a SOM on no data".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for w in self.codebook.iter_mut() {
            *w = data[rng.random_range(0..data.len())];
        }
        Ok(())
    }

    /// Initializes from the data, then runs `S` steps cycling through it in order.
    pub fn fit(&mut self, data: &[Point]) -> Result<()> {
        self.initialize(data)?;
        for s in 0..self.steps {
            self.train_step(&data[s % data.len()], s);
        }
        Ok(())
    }

    pub fn quantization_error(&self, x: &Point) -> f64 {
        self.bmu_index(x).1.sqrt()
    }

    pub fn mean_quantization_error(&self, data: &[Point]) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        data.iter().map(|x| self.quantization_error(x)).sum::<f64>() / data.len() as f64
    }
}

/// Quantization-error distribution of the calibration window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibStats {
    pub mu_qe: f64,
    pub sd_qe: f64,
    pub k_label: f64,
}

impl CalibStats {
    /// Mean and population standard deviation of `qes`.
    pub fn from_errors(qes: &[f64], k_label: f64) -> Result<Self> {
        if qes.is_empty() {
            return Err(Error::Calibration("no calibration errors".into()));
        }
        if !(k_label > 0.0) {
            return Err(Error::Config(format!("k_label must be > 0, got {k_label}")));
        }
        if qes.iter().all(|&q| q == qes[0]) {
            return Ok(Self {
                mu_qe: qes[0],
                sd_qe: 0.0,
                k_label,
            });
        }
        let n = qes.len() as f64;
        let mu = qes.iter().sum::<f64>() / n;
        let var = qes.iter().map(|q| (q - mu).powi(2)).sum::<f64>() / n;
        Ok(Self {
            mu_qe: mu,
            sd_qe: var.sqrt(),
            k_label,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.mu_qe + self.k_label * self.sd_qe
    }

    pub fn pseudo_label(&self, qe: f64) -> Label {
        if qe > self.threshold() {
            Label::Fault
        } else {
            Label::Normal
        }
    }
}

/// Per-dimension z-normalization frozen at calibration end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Point,
    pub scale: Point,
}

impl Normalizer {
    /// Dimensions with (near) zero spread keep unit scale.
    pub fn fit(data: &[FeatureVector]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Calibration("cannot normalize an empty set".into()));
        }
        let n = data.len() as f64;
        let mut mean = [0.0; FEATURE_DIM];
        for fv in data {
            for (m, v) in mean.iter_mut().zip(fv.to_point()) {
                *m += v / n;
            }
        }
        let mut scale = [0.0; FEATURE_DIM];
        for fv in data {
            for ((s, v), m) in scale.iter_mut().zip(fv.to_point()).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = s.sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Ok(Self { mean, scale })
    }

    pub fn apply(&self, fv: &FeatureVector) -> Point {
        let mut p = fv.to_point();
        for ((v, m), s) in p.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(grid: usize) -> SomConfig {
        SomConfig {
            grid,
            ..SomConfig::default()
        }
    }

    #[test]
    fn bmu_exact_match() {
        let mut book = vec![[10.0; 4]; 9];
        book[1 * 3 + 2] = [1.0, 2.0, 3.0, 4.0];
        let m = SomModel::from_codebook(&cfg(3), book, 10).unwrap();
        assert_eq!(m.bmu(&[1.0, 2.0, 3.0, 4.0]), (1, 2));
    }

    #[test]
    fn bmu_tie_goes_row_major() {
        let mut book = vec![[100.0; 4]; 4];
        book[1] = [1.0, 0.0, 0.0, 0.0];
        book[2] = [-1.0, 0.0, 0.0, 0.0];
        let m = SomModel::from_codebook(&cfg(2), book, 10).unwrap();
        assert_eq!(m.bmu(&[0.0; 4]), (0, 1));
    }

    #[test]
    fn single_unit_update_halfway() {
        let c = SomConfig {
            grid: 1,
            alpha0: 0.5,
            alpha_final: 0.5,
            sigma0: Some(1.0),
            sigma_final: 1.0,
            steps: Some(1),
            seed: 0,
        };
        let mut m = SomModel::from_codebook(&c, vec![[0.0; 4]], 1).unwrap();
        m.train_step(&[2.0; 4], 0);
        assert_eq!(m.codebook()[0], [1.0; 4]);
    }

    #[test]
    fn neighbourhood_weight_at_one_radius() {
        // BMU at (0,0) of a 1x2 strip is impossible on a square grid, so use a
        // 2x2 grid with a zero codebook: unit (0,1) sits at distance 1 = sigma.
        let c = SomConfig {
            grid: 2,
            alpha0: 0.5,
            alpha_final: 0.5,
            sigma0: Some(1.0),
            sigma_final: 1.0,
            steps: Some(1),
            seed: 0,
        };
        let mut book = vec![[0.0; 4]; 4];
        book[0] = [1.0, 0.0, 0.0, 0.0];
        let mut m = SomModel::from_codebook(&c, book, 1).unwrap();
        m.train_step(&[1.0, 0.0, 0.0, 0.0], 0);
        let h = (-0.5f64).exp();
        assert_relative_eq!(h, 0.60653, epsilon = 1e-5);
        assert_relative_eq!(m.unit(0, 1)[0], 0.5 * h, epsilon = 1e-15);
        assert_relative_eq!(m.unit(1, 1)[0], 0.5 * (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn update_with_zero_difference_is_noop() {
        let book = vec![[1.0, 2.0, 3.0, 4.0]; 4];
        let mut m = SomModel::from_codebook(&cfg(2), book.clone(), 5).unwrap();
        m.train_step(&[1.0, 2.0, 3.0, 4.0], 0);
        assert_eq!(m.codebook(), &book[..]);
    }

    #[test]
    fn qe_pythagorean() {
        let m = SomModel::from_codebook(&cfg(1), vec![[0.0; 4]], 1).unwrap();
        assert_eq!(m.quantization_error(&[3.0, 4.0, 0.0, 0.0]), 5.0);
    }

    #[test]
    fn fit_on_constant_data_contracts() {
        let data = vec![[0.5, -1.0, 2.0, 0.0]; 20];
        let mut m = SomModel::new(&cfg(3), data.len()).unwrap();
        let far = vec![[5.0; 4]; 9];
        m = SomModel::from_codebook(&cfg(3), far, m.steps()).unwrap();
        let before = m.quantization_error(&data[0]);
        for s in 0..m.steps() {
            m.train_step(&data[0], s);
        }
        assert!(m.quantization_error(&data[0]) < before);
        // fit from data: every unit is the point itself
        let mut f = SomModel::new(&cfg(3), data.len()).unwrap();
        f.fit(&data).unwrap();
        assert!(f.codebook().iter().all(|w| *w == data[0]));
    }

    #[test]
    fn fit_empty_is_calibration_error() {
        let mut m = SomModel::new(&cfg(2), 0).unwrap();
        assert!(matches!(m.fit(&[]), Err(Error::Calibration(_))));
    }

    #[test]
    fn invalid_schedules_rejected() {
        let mut c = cfg(4);
        c.alpha0 = 1.0;
        assert!(SomModel::new(&c, 5).is_err());
        let mut c = cfg(4);
        c.alpha_final = 0.9;
        assert!(SomModel::new(&c, 5).is_err());
        let mut c = cfg(4);
        c.sigma_final = 3.0;
        assert!(SomModel::new(&c, 5).is_err());
    }

    #[test]
    fn schedules_hit_endpoints() {
        let m = SomModel::new(&cfg(8), 10).unwrap();
        assert_eq!(m.steps(), 100);
        assert_relative_eq!(m.learning_rate(0), 0.5);
        assert_relative_eq!(m.radius(0), 4.0);
        assert!(m.learning_rate(99) > 0.01 && m.radius(99) > 0.5);
    }

    #[test]
    fn pseudo_label_threshold() {
        let s = CalibStats { mu_qe: 1.0, sd_qe: 0.5, k_label: 3.0 };
        assert_eq!(s.pseudo_label(1.0), Label::Normal);
        assert_eq!(s.pseudo_label(2.5), Label::Normal);
        assert_eq!(s.pseudo_label(2.6), Label::Fault);
        let flat = CalibStats::from_errors(&[0.7, 0.7, 0.7], 3.0).unwrap();
        assert_eq!(flat.sd_qe, 0.0);
        assert_eq!(flat.pseudo_label(0.7), Label::Normal);
        assert_eq!(flat.pseudo_label(0.7 + 1e-12), Label::Fault);
    }

    #[test]
    fn normalizer_keeps_flat_dimensions() {
        let data = vec![
            FeatureVector { rms: 1.0, peak: 2.0, crest: 2.0, zcr: 0.5 },
            FeatureVector { rms: 3.0, peak: 2.0, crest: 2.0, zcr: 0.5 },
        ];
        let n = Normalizer::fit(&data).unwrap();
        assert_eq!(n.apply(&data[0]), [-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(n.scale[1], 1.0);
    }
}
