//! Fixtures and checks shared by the integration test targets.
#![allow(dead_code)]

use std::collections::HashMap;

use fdcmss::{
    CellSummary, ColumnHasher, DecaySpec, FdcmssSketch, FixedColumns, SketchParams, SpaceSaving, XxColumns, ZipfTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ROW0: &[(u32, usize)] =
    &[(2, 0), (4, 0), (5, 0), (3, 1), (14, 1), (12, 2), (17, 2), (10, 3), (18, 3), (6, 4), (11, 4)];
pub const ROW1: &[(u32, usize)] =
    &[(4, 0), (12, 0), (14, 1), (16, 1), (6, 2), (7, 2), (2, 3), (8, 3), (3, 4), (10, 4), (5, 4)];

/// Cell state after 1000 arrivals, row-major.
pub const INITIAL: [[(u32, f64); 2]; 10] = [
    [(2, 555.33), (4, 537.23)],
    [(3, 262.06), (14, 103.54)],
    [(12, 36.55), (17, 14.78)],
    [(10, 52.27), (18, 21.88)],
    [(6, 98.22), (11, 36.76)],
    [(4, 172.20), (12, 109.28)],
    [(14, 36.40), (16, 35.78)],
    [(6, 125.75), (7, 125.15)],
    [(2, 539.78), (8, 117.33)],
    [(3, 263.07), (10, 193.90)],
];

pub fn after_item_6() -> [[(u32, f64); 2]; 10] {
    let mut s = INITIAL;
    s[4][0].1 = 100.94;
    s[7][0].1 = 128.47;
    s
}

pub fn after_item_5() -> [[(u32, f64); 2]; 10] {
    let mut s = after_item_6();
    s[0][1] = (5, 539.95);
    s[9][1] = (5, 196.62);
    s
}

pub const NORMALIZER: f64 = 2.725;
pub const NORMALIZED_TOTAL: f64 = 632.671;

pub fn golden_weight(t: f64) -> f64 {
    (1.0 / 0.999f64).powf(t)
}

/// The total count is chosen so that it equals `NORMALIZED_TOTAL * NORMALIZER`
/// once items 6 and 5 have arrived.
pub fn golden_sketch() -> FdcmssSketch<f64, FixedColumns> {
    let hasher = FixedColumns::new(5, &[ROW0, ROW1]).unwrap();
    let cells = INITIAL.iter().map(|c| CellSummary::from_counters(c).unwrap()).collect();
    let count = NORMALIZED_TOTAL * NORMALIZER - golden_weight(1001.0) - golden_weight(1002.0);
    let decay = DecaySpec::exponential(0.999, 0.0).unwrap();
    FdcmssSketch::from_parts(0.025, decay, hasher, cells, count).unwrap()
}

/// Largest per-counter deviation from `expected`, infinite if an item is missing.
pub fn state_deviation(s: &FdcmssSketch<f64, FixedColumns>, expected: &[[(u32, f64); 2]; 10]) -> f64 {
    let mut worst = 0.0f64;
    for (idx, want) in expected.iter().enumerate() {
        let cell = s.cell(idx / 5, idx % 5);
        for &(item, count) in want {
            worst = worst.max(cell.get(item).map_or(f64::INFINITY, |got| (got - count).abs()));
        }
    }
    worst
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Weighted Space Saving bounds, checked after every update of `ops`.
pub fn space_saving_violation<const K: usize>(ops: &[(u32, f64)]) -> Option<String> {
    let mut ss = SpaceSaving::<f64, K>::new();
    let mut exact: HashMap<u32, f64> = HashMap::new();
    let mut offered = 0.0;
    for (step, &(item, w)) in ops.iter().enumerate() {
        ss.update(item, w).unwrap();
        *exact.entry(item).or_default() += w;
        offered += w;

        let total: f64 = ss.counters().iter().map(|c| c.count).sum();
        if !close(total, offered) {
            return Some(format!("k={K} step {step}: counts sum to {total}, offered {offered}"));
        }
        let min = ss.min_count();
        if min > offered / K as f64 * (1.0 + 1e-9) {
            return Some(format!("k={K} step {step}: min {min} above offered/k"));
        }
        for (&v, &f) in &exact {
            let est = ss.estimate(v);
            if est < f * (1.0 - 1e-9) {
                return Some(format!("k={K} step {step}: item {v} underestimated {est} < {f}"));
            }
            if est - f > min + 1e-9 * offered {
                return Some(format!("k={K} step {step}: item {v} error {} above min {min}", est - f));
            }
            if ss.get(v).is_none() && f > min * (1.0 + 1e-9) {
                return Some(format!("k={K} step {step}: unmonitored item {v} exceeds min"));
            }
        }
    }
    None
}

pub fn space_saving_violation_dyn(k: usize, ops: &[(u32, f64)]) -> Option<String> {
    match k {
        2 => space_saving_violation::<2>(ops),
        3 => space_saving_violation::<3>(ops),
        4 => space_saving_violation::<4>(ops),
        5 => space_saving_violation::<5>(ops),
        6 => space_saving_violation::<6>(ops),
        7 => space_saving_violation::<7>(ops),
        8 => space_saving_violation::<8>(ops),
        _ => panic!("k must lie in 2..=8"),
    }
}

/// A random weighted update sequence over a small universe.
pub fn random_ops(rng: &mut ChaCha8Rng) -> (usize, Vec<(u32, f64)>) {
    let k = rng.gen_range(2..=8);
    let universe = rng.gen_range(2..4 * k as u32);
    let len = rng.gen_range(1..60);
    let ops = (0..len).map(|_| (rng.gen_range(0..universe), rng.gen_range(0.001..100.0))).collect();
    (k, ops)
}

/// Compares every cell's offered total with an independently accumulated grid.
pub fn count_min_mismatch(stream_no: u64, rng: &mut ChaCha8Rng) -> Option<String> {
    let exponential = stream_no.is_multiple_of(2);
    let decay = if exponential {
        DecaySpec::exponential(0.99, 0.0).unwrap()
    } else {
        DecaySpec::polynomial(1.5, 0.0).unwrap()
    };
    let weight = |t: f64| if exponential { (1.0 / 0.99f64).powf(t) } else { t.powf(1.5) };
    let (d, w) = (rng.gen_range(1..5), rng.gen_range(1..40));
    let params = SketchParams::new(0.01, 0.1, 0.05, decay).unwrap();
    let mut sketch = FdcmssSketch::<f64>::with_dimensions(params, d, w, stream_no).unwrap();
    let hasher = XxColumns::new(stream_no, d, w);
    let mut grid = vec![0.0f64; d * w];
    let len = rng.gen_range(1..2000);
    for i in 0..len {
        let item = rng.gen_range(0..300u32);
        let t = (i + 1) as f64;
        sketch.process(item, t).unwrap();
        for row in 0..d {
            grid[row * w + hasher.column(row, item)] += weight(t);
        }
    }
    if sketch.rebases() != 0 {
        return Some(format!("stream {stream_no} rebased unexpectedly"));
    }
    sketch.cells().iter().zip(&grid).enumerate().find_map(|(idx, (cell, &acc))| {
        (!close(cell.offered_total(), acc))
            .then(|| format!("stream {stream_no} cell {idx}: {} vs {acc}", cell.offered_total()))
    })
}

/// Replays a 10^4 item stream with and without a landmark shift at item 5000.
pub fn rebase_mismatch() -> Option<String> {
    let items = ZipfTable::new(1.1, 1000).unwrap().sample(10_000, 99);
    let decay = DecaySpec::exponential(0.999, 0.0).unwrap();
    let params = SketchParams::new(0.005, 0.05, 0.01, decay).unwrap();
    let mut plain = FdcmssSketch::<f64>::new(params, 3).unwrap();
    let mut shifted = FdcmssSketch::<f64>::new(params, 3).unwrap();
    for (i, &item) in items.iter().enumerate() {
        let t = (i + 1) as f64;
        if i + 1 == 5000 {
            shifted.rebase(t).unwrap();
        }
        plain.process(item, t).unwrap();
        shifted.process(item, t).unwrap();
    }
    if (plain.rebases(), shifted.rebases()) != (0, 1) {
        return Some("unexpected rebase count".into());
    }
    let t = 10_001.0;
    let a = plain.query(t).unwrap();
    let b = shifted.query(t).unwrap();
    if a.is_empty() {
        return Some("query reported nothing".into());
    }
    let ids = |v: &[fdcmss::FrequentItem<f64>]| v.iter().map(|f| f.item).collect::<Vec<_>>();
    if ids(&a) != ids(&b) {
        return Some(format!("query sets differ: {:?} vs {:?}", ids(&a), ids(&b)));
    }
    if let Some((x, y)) = a.iter().zip(&b).find(|(x, y)| !close(x.estimate, y.estimate)) {
        return Some(format!("item {} estimate {} vs {}", x.item, x.estimate, y.estimate));
    }
    (0..=1000).find_map(|item| {
        let (x, y) = (plain.point_estimate(item, t).unwrap(), shifted.point_estimate(item, t).unwrap());
        (!close(x, y)).then(|| format!("point estimate of {item}: {x} vs {y}"))
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
