mod common;

use common::*;
use fdcmss::{DecaySpec, ExactDecayedCounts, FdcmssSketch, SketchParams, ZipfTable};
use proptest::prelude::*;

fn ops_strategy() -> impl Strategy<Value = (usize, Vec<(u32, f64)>)> {
    (2usize..=8, proptest::collection::vec((0u32..12, 0.001f64..100.0), 1..60))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn space_saving_weighted_bounds((k, ops) in ops_strategy()) {
        if let Some(msg) = space_saving_violation_dyn(k, &ops) {
            return Err(TestCaseError::fail(msg));
        }
    }
}

#[test]
fn cells_match_plain_accumulator_grid() {
    let mut rng = rng(2024);
    for stream_no in 0..100 {
        assert_eq!(count_min_mismatch(stream_no, &mut rng), None);
    }
}

#[test]
fn estimates_never_undershoot_the_oracle() {
    let table = ZipfTable::new(1.1, 5000).unwrap();
    for seed in 0..10 {
        let decay = DecaySpec::exponential(0.995, 0.0).unwrap();
        let params = SketchParams::new(0.01, 0.1, 0.02, decay).unwrap();
        let mut sketch = FdcmssSketch::<f64>::with_dimensions(params, 2, 64, seed).unwrap();
        let mut oracle = ExactDecayedCounts::new(decay);
        let items = table.sample(20_000, seed);
        for (i, &item) in items.iter().enumerate() {
            let t = (i + 1) as f64;
            sketch.process(item, t).unwrap();
            oracle.process(item, t).unwrap();
        }
        let t = items.len() as f64 + 1.0;
        for item in oracle.items() {
            let exact = oracle.count_at(item, t).unwrap();
            let est = sketch.point_estimate(item, t).unwrap();
            assert!(est >= exact * (1.0 - 1e-9), "seed {seed} item {item}: {est} < {exact}");
        }
    }
}

#[test]
fn forced_rebase_changes_nothing_observable() {
    assert_eq!(rebase_mismatch(), None);
}

#[test]
fn single_precision_tracks_double_precision() {
    let items = ZipfTable::new(1.2, 500).unwrap().sample(5_000, 5);
    let p64 = SketchParams::new(0.01, 0.05, 0.05, DecaySpec::<f64>::exponential(0.98, 0.0).unwrap()).unwrap();
    let p32 = SketchParams::new(0.01, 0.05, 0.05, DecaySpec::<f32>::exponential(0.98, 0.0).unwrap()).unwrap();
    let mut s64 = fdcmss::Sketch::new(p64, 8).unwrap();
    let mut s32 = fdcmss::Sketch32::new(p32, 8).unwrap();
    for (i, &item) in items.iter().enumerate() {
        s64.process(item, (i + 1) as f64).unwrap();
        s32.process(item, (i + 1) as f64).unwrap();
    }
    assert!(s32.rebases() > 0);
    let t = items.len() as f64 + 1.0;
    for item in 1..=20 {
        let (a, b) = (s64.point_estimate(item, t).unwrap(), s32.point_estimate(item, t).unwrap() as f64);
        assert!((a - b).abs() <= 1e-3 * a.max(1.0), "item {item}: {a} vs {b}");
    }
}
