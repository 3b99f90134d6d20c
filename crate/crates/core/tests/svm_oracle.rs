//! Incremental solver checked against the batch SMO solution.

use faultsense::svm::{batch_train, KernelSpec, PointSet, SvmModel, SvmParams};
use faultsense::{Label, Point};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn blobs(n: usize, sep: f64, seed: u64) -> Vec<(Point, Label)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    (0..n)
        .map(|i| {
            let (y, centre) = if i % 2 == 0 {
                (Label::Normal, -sep / 2.0)
            } else {
                (Label::Fault, sep / 2.0)
            };
            let x = std::array::from_fn(|_| centre + noise.sample(&mut rng));
            (x, y)
        })
        .collect()
}

fn probes(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = Normal::new(0.0, 1.5).unwrap();
    (0..n)
        .map(|_| std::array::from_fn(|_| spread.sample(&mut rng)))
        .collect()
}

fn learn_all(data: &[(Point, Label)], kernel: KernelSpec, c: f64) -> SvmModel {
    let mut params = SvmParams::new(kernel, c);
    params.budget = data.len().max(1);
    let mut m = SvmModel::new(params).unwrap();
    for &(x, y) in data {
        m.learn_one(x, y).unwrap();
    }
    m
}

fn max_gap(a: &SvmModel, b: &SvmModel, probes: &[Point]) -> f64 {
    probes
        .iter()
        .map(|p| (a.decision(p) - b.decision(p)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn incremental_matches_batch_rbf() {
    let data = blobs(200, 2.0, 11);
    let kernel = KernelSpec::Rbf { gamma: 0.5 };
    let inc = learn_all(&data, kernel, 10.0);
    let bat = batch_train(&data, kernel, 10.0).unwrap();
    assert!(inc.kkt_report(1e-6).is_empty());
    assert!(bat.kkt_report(1e-6).is_empty());
    let gap = max_gap(&inc, &bat, &probes(100, 5));
    assert!(gap <= 1e-5, "gap {gap}");
}

#[test]
fn insertion_order_does_not_matter() {
    let data = blobs(120, 1.5, 3);
    let kernel = KernelSpec::Rbf { gamma: 0.5 };
    let reference = learn_all(&data, kernel, 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut shuffled = data.clone();
    shuffled.shuffle(&mut rng);
    let other = learn_all(&shuffled, kernel, 10.0);
    assert!(max_gap(&reference, &other, &probes(100, 8)) <= 1e-5);
}

#[test]
fn kkt_and_balance_after_every_update() {
    let data = blobs(150, 1.0, 21);
    let mut params = SvmParams::new(KernelSpec::Rbf { gamma: 1.0 }, 5.0);
    params.budget = 1000;
    let mut m = SvmModel::new(params).unwrap();
    let mut ids = Vec::new();
    for &(x, y) in &data {
        ids.push(m.learn_one(x, y).unwrap());
        assert!(m.kkt_report(1e-6).is_empty());
        assert!(m.dual_balance().abs() <= 1e-9);
    }
    for id in ids.iter().step_by(3) {
        m.unlearn_one(*id).unwrap();
        assert!(m.kkt_report(1e-6).is_empty());
        assert!(m.dual_balance().abs() <= 1e-9);
    }
}

#[test]
fn unlearning_margin_point_matches_batch() {
    let data = blobs(50, 1.5, 7);
    let kernel = KernelSpec::Rbf { gamma: 0.5 };
    let mut m = learn_all(&data, kernel, 10.0);
    let victim = m
        .points()
        .iter()
        .find(|p| p.set == PointSet::Margin)
        .expect("some margin point")
        .id;
    m.unlearn_one(victim).unwrap();
    let rest: Vec<_> = data
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as u64 != victim)
        .map(|(_, d)| *d)
        .collect();
    let bat = batch_train(&rest, kernel, 10.0).unwrap();
    assert!(max_gap(&m, &bat, &probes(100, 1)) <= 1e-5);
}

#[test]
fn learn_then_unlearn_is_reversible() {
    let data = blobs(60, 1.0, 13);
    let kernel = KernelSpec::Rbf { gamma: 0.5 };
    let mut m = learn_all(&data[..40], kernel, 10.0);
    let grid = probes(64, 2);
    for &(x, y) in &data[40..] {
        let before: Vec<f64> = grid.iter().map(|p| m.decision(p)).collect();
        let id = m.learn_one(x, y).unwrap();
        m.unlearn_one(id).unwrap();
        for (p, b) in grid.iter().zip(&before) {
            assert!((m.decision(p) - b).abs() <= 1e-6);
        }
    }
}

#[test]
fn budget_bounds_storage() {
    let data = blobs(120, 1.0, 4);
    let mut params = SvmParams::new(KernelSpec::Rbf { gamma: 0.5 }, 1.0);
    params.budget = 25;
    let mut m = SvmModel::new(params).unwrap();
    for &(x, y) in &data {
        m.learn_one(x, y).unwrap();
        assert!(m.len() <= 25);
        assert!(m.kkt_report(1e-6).is_empty());
    }
}

#[test]
fn checkpoint_round_trip() {
    let data = blobs(40, 1.5, 17);
    let m = learn_all(&data, KernelSpec::Rbf { gamma: 0.5 }, 10.0);
    let mut buf = Vec::new();
    m.save(&mut buf).unwrap();
    let mut back = SvmModel::load(buf.as_slice()).unwrap();
    assert!(back.kkt_report(1e-6).is_empty());
    assert_eq!(back.points(), m.points());
    assert_eq!(back.bias(), m.bias());
    // The restored model keeps learning.
    let id = back.learn_one([0.1, 0.2, -0.1, 0.0], Label::Fault).unwrap();
    assert!(id >= m.next_id());
    assert!(back.kkt_report(1e-6).is_empty());
}

#[test]
fn corrupted_checkpoint_is_rejected() {
    let data = blobs(30, 1.5, 17);
    let m = learn_all(&data, KernelSpec::Rbf { gamma: 0.5 }, 10.0);
    let mut buf = Vec::new();
    m.save(&mut buf).unwrap();
    let mut json: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    json["b"] = serde_json::json!(m.bias() + 0.5);
    assert!(SvmModel::load(json.to_string().as_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_sets_match_batch(seed in 0u64..10_000, n in 6usize..40, gamma in 0.1f64..2.0, c in 0.5f64..50.0) {
        let data = blobs(n, 1.0, seed);
        let kernel = KernelSpec::Rbf { gamma };
        let inc = learn_all(&data, kernel, c);
        prop_assert!(inc.kkt_report(1e-6).is_empty());
        let bat = batch_train(&data, kernel, c).unwrap();
        prop_assert!(max_gap(&inc, &bat, &probes(30, seed + 1)) <= 1e-5);
    }
}
