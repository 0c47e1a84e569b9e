//! Experiment harness: replays streams through FDCMSS and λ-HCount, scores
//! them against the exact oracle and emits one CSV row per run.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::decay::DecaySpec;
use crate::error::{Error, Result};
use crate::hashing::row_seeds;
use crate::lambda_hcount::{lh_rows, lh_theoretical_cells, LambdaHCount, LHC_BYTES_PER_CELL};
use crate::oracle::{compute_metrics, ExactDecayedCounts, MetricsReport};
use crate::sketch::{rows_for_delta, theoretical_cells_fdcmss, FdcmssSketch, SketchParams, FDCMSS_BYTES_PER_CELL};
use crate::stream::{arrivals, ZipfTable};
use crate::ItemId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Fdcmss,
    LambdaHCount,
    Both,
}

impl Algorithm {
    fn runs_fdcmss(self) -> bool {
        matches!(self, Algorithm::Fdcmss | Algorithm::Both)
    }

    fn runs_lhcount(self) -> bool {
        matches!(self, Algorithm::LambdaHCount | Algorithm::Both)
    }
}

#[derive(Debug, Clone)]
pub enum StreamSource {
    Zipf { universe: u32 },
    /// Items loaded from a file; sweeps over `n` replay prefixes.
    Items(Arc<Vec<ItemId>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    N,
    Phi,
    Rho,
    SketchKb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayChoice {
    Exponential,
    Polynomial { beta: f64 },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub source: StreamSource,
    pub sweep: Option<(SweepVar, Vec<f64>)>,
    pub runs: usize,
    pub n: usize,
    pub rho: f64,
    pub phi: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    pub decay: DecayChoice,
    pub landmark: f64,
    /// λ-HCount support threshold; follows `phi` when unset.
    pub support: Option<f64>,
    /// λ-HCount success probability; `1 - delta` when unset.
    pub prob: Option<f64>,
    /// Shared byte budget in KiB. Without it FDCMSS is sized from
    /// `epsilon`/`delta` and λ-HCount receives the same number of bytes.
    pub sketch_kb: Option<f64>,
    pub seed: u64,
    pub jobs: usize,
    /// When false, `upd_per_ms` is written as 0 so output is reproducible.
    pub timing: bool,
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Fdcmss,
            source: StreamSource::Zipf { universe: 1_048_575 },
            sweep: None,
            runs: 20,
            n: 1_000_000,
            rho: 1.1,
            phi: 0.01,
            epsilon: 0.001,
            delta: 0.04,
            lambda: 0.99,
            decay: DecayChoice::Exponential,
            landmark: 0.0,
            support: None,
            prob: None,
            sketch_kb: None,
            seed: 1,
            jobs: 1,
            timing: true,
            snapshot_dir: None,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub algo: &'static str,
    pub n: usize,
    pub phi: f64,
    pub rho: Option<f64>,
    pub sketch_kb: f64,
    pub seed: u64,
    pub recall: f64,
    pub precision: f64,
    pub mae: f64,
    pub maxae: f64,
    pub p96ae: f64,
    pub upd_per_ms: f64,
}

impl RunRow {
    fn new(algo: &'static str, point: &Point, seed: u64, bytes: usize, m: &MetricsReport) -> Self {
        Self {
            algo,
            n: point.n,
            phi: point.phi,
            rho: point.rho,
            sketch_kb: bytes as f64 / 1024.0,
            seed,
            recall: m.recall,
            precision: m.precision,
            mae: m.mean_abs_err,
            maxae: m.max_abs_err,
            p96ae: m.p96_abs_err,
            upd_per_ms: m.updates_per_ms,
        }
    }
}

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "algo", "n", "phi", "rho", "sketch_kb", "seed", "recall", "precision", "mae", "maxae", "p96ae", "upd_per_ms",
];

/// Parameters of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub n: usize,
    pub phi: f64,
    pub rho: Option<f64>,
    pub sketch_kb: Option<f64>,
}

/// Grid shape of both algorithms for one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    pub fdcmss: (usize, usize),
    pub lhcount: (usize, usize),
}

impl Dimensions {
    pub fn fdcmss_bytes(&self) -> usize {
        self.fdcmss.0 * self.fdcmss.1 * FDCMSS_BYTES_PER_CELL
    }

    pub fn lhcount_bytes(&self) -> usize {
        self.lhcount.0 * self.lhcount.1 * LHC_BYTES_PER_CELL
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Splits a byte budget between the two grids. Rows come from each
/// algorithm's own theory (`delta`, and `M` with `p`); the budget is first
/// rounded down to a multiple of both full-row sizes so the two grids use
/// exactly the same number of bytes.
pub fn dimensions_for_budget(budget_bytes: usize, fdcmss_rows: usize, lh_rows: usize) -> Result<Dimensions> {
    let row_f = FDCMSS_BYTES_PER_CELL * fdcmss_rows;
    let row_l = LHC_BYTES_PER_CELL * lh_rows;
    let lcm = row_f / gcd(row_f, row_l) * row_l;
    let usable = budget_bytes / lcm * lcm;
    if usable == 0 {
        return Err(Error::config(format!(
            "budget of {budget_bytes} bytes cannot hold one column of both grids (needs {lcm})"
        )));
    }
    Ok(Dimensions {
        fdcmss: (fdcmss_rows, usable / row_f),
        lhcount: (lh_rows, usable / row_l),
    })
}

impl ExperimentConfig {
    fn points(&self) -> Result<Vec<Point>> {
        let rho = match self.source {
            StreamSource::Zipf { .. } => Some(self.rho),
            StreamSource::Items(_) => None,
        };
        let base = Point { n: self.n, phi: self.phi, rho, sketch_kb: self.sketch_kb };
        let Some((var, values)) = &self.sweep else {
            return Ok(vec![base]);
        };
        if values.is_empty() {
            return Err(Error::config("sweep needs at least one value"));
        }
        values
            .iter()
            .map(|&v| {
                let mut p = base;
                match var {
                    SweepVar::N => {
                        if !(v >= 1.0 && v.fract() == 0.0) {
                            return Err(Error::config(format!("stream length {v} is not a positive integer")));
                        }
                        p.n = v as usize;
                    }
                    SweepVar::Phi => p.phi = v,
                    SweepVar::Rho if rho.is_none() => {
                        return Err(Error::config("cannot sweep skew over a file source"));
                    }
                    SweepVar::Rho => p.rho = Some(v),
                    SweepVar::SketchKb => p.sketch_kb = Some(v),
                }
                Ok(p)
            })
            .collect()
    }

    fn decay(&self) -> Result<DecaySpec<f64>> {
        match self.decay {
            DecayChoice::Exponential => DecaySpec::exponential(self.lambda, self.landmark),
            DecayChoice::Polynomial { beta } => DecaySpec::polynomial(beta, self.landmark),
        }
    }

    fn distinct_hint(&self) -> u64 {
        match &self.source {
            StreamSource::Zipf { universe } => *universe as u64,
            StreamSource::Items(items) => {
                let mut v = items.as_ref().clone();
                v.sort_unstable();
                v.dedup();
                v.len() as u64
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs per point must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs must be at least 1"));
        }
        if self.algorithm.runs_lhcount() && self.decay != DecayChoice::Exponential {
            return Err(Error::config(
                "λ-HCount comparisons need exponential decay so both algorithms share ground truth",
            ));
        }
        self.decay()?;
        if let StreamSource::Items(items) = &self.source {
            if items.is_empty() {
                return Err(Error::config("input stream is empty"));
            }
        }
        Ok(())
    }

    /// Grid shapes used at `point`.
    pub fn dimensions(&self, point: &Point, distinct: u64) -> Result<Dimensions> {
        let params = SketchParams::new(self.epsilon, self.delta, point.phi, self.decay()?)?;
        let lh_r = lh_rows(distinct, self.prob.unwrap_or(1.0 - self.delta))?;
        match point.sketch_kb {
            Some(kb) => {
                if !(kb > 0.0 && kb.is_finite()) {
                    return Err(Error::config(format!("sketch size {kb} KB must be positive")));
                }
                dimensions_for_budget((kb * 1024.0) as usize, params.rows(), lh_r)
            }
            None => {
                let fd = (params.rows(), params.columns());
                let bytes = fd.0 * fd.1 * FDCMSS_BYTES_PER_CELL;
                let m = bytes / (LHC_BYTES_PER_CELL * lh_r);
                if m == 0 {
                    return Err(Error::config("FDCMSS budget too small for one λ-HCount column"));
                }
                Ok(Dimensions { fdcmss: fd, lhcount: (lh_r, m) })
            }
        }
    }
}

/// Rows for every sweep point and run, in sweep order then seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRow>> {
    config.validate()?;
    let points = config.points()?;
    let distinct = config.distinct_hint();
    let mut tables: HashMap<u64, Arc<ZipfTable>> = HashMap::new();
    if let StreamSource::Zipf { universe } = config.source {
        for p in &points {
            let rho = p.rho.expect("zipf points carry a skew");
            if let std::collections::hash_map::Entry::Vacant(e) = tables.entry(rho.to_bits()) {
                e.insert(Arc::new(ZipfTable::new(rho, universe)?));
            }
        }
    }
    let mut jobs = Vec::with_capacity(points.len() * config.runs);
    for p in &points {
        let dims = config.dimensions(p, distinct)?;
        for run in 0..config.runs {
            jobs.push((*p, dims, config.seed.wrapping_add(run as u64)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::config(e.to_string()))?;
    let rows: Vec<Vec<RunRow>> = pool.install(|| {
        jobs.par_iter()
            .map(|(point, dims, seed)| {
                let items = match &config.source {
                    StreamSource::Zipf { .. } => {
                        let table = &tables[&point.rho.expect("zipf skew").to_bits()];
                        Arc::new(table.sample(point.n, *seed))
                    }
                    StreamSource::Items(items) if point.n >= items.len() => Arc::clone(items),
                    StreamSource::Items(items) => Arc::new(items[..point.n].to_vec()),
                };
                run_single(config, point, dims, *seed, &items)
            })
            .collect::<Result<_>>()
    })?;
    Ok(rows.into_iter().flatten().collect())
}

fn time_loop(mut f: impl FnMut() -> Result<()>) -> Result<Duration> {
    let start = Instant::now();
    f()?;
    Ok(start.elapsed())
}

/// Replays `items` through the configured algorithms and the oracle.
pub fn run_single(
    config: &ExperimentConfig,
    point: &Point,
    dims: &Dimensions,
    seed: u64,
    items: &[ItemId],
) -> Result<Vec<RunRow>> {
    let decay = config.decay()?;
    let hash_seeds = row_seeds(seed, 2);
    let query_t = items.len() as f64 + 1.0;

    let mut oracle = ExactDecayedCounts::new(decay);
    for (item, t) in arrivals(items) {
        oracle.process(item, t)?;
    }
    let truth: Vec<ItemId> = oracle.frequent(point.phi, query_t)?.into_iter().map(|p| p.0).collect();
    let distinct = oracle.items();
    let exact: Vec<f64> = distinct
        .iter()
        .map(|&i| oracle.count_at(i, query_t))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let updates = items.len() as u64;
    let mut finish = |algo, bytes, reported: Vec<ItemId>, errors: Vec<f64>, elapsed: Duration, query: Duration| {
        let mut m = compute_metrics(&reported, &truth, &errors, elapsed, updates);
        if !config.timing {
            m.updates_per_ms = 0.0;
        }
        info!(
            "{algo} n={} phi={} seed={seed}: recall={} precision={} query_ms={:.3}",
            point.n,
            point.phi,
            m.recall,
            m.precision,
            query.as_secs_f64() * 1e3
        );
        rows.push(RunRow::new(algo, point, seed, bytes, &m));
    };

    if config.algorithm.runs_fdcmss() {
        let params = SketchParams::new(config.epsilon, config.delta, point.phi, decay)?;
        let (d, w) = dims.fdcmss;
        let mut sketch = FdcmssSketch::<f64>::with_dimensions(params, d, w, hash_seeds[0])?;
        let elapsed = time_loop(|| {
            for (item, t) in arrivals(items) {
                sketch.process(item, t)?;
            }
            Ok(())
        })?;
        let q = Instant::now();
        let reported: Vec<ItemId> = sketch.query(query_t)?.into_iter().map(|f| f.item).collect();
        let query = q.elapsed();
        let errors = distinct
            .iter()
            .zip(&exact)
            .map(|(&i, &x)| Ok((sketch.point_estimate(i, query_t)? - x).abs()))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(dir) = &config.snapshot_dir {
            let path = dir.join(format!("fdcmss_n{}_phi{}_kb{}_seed{seed}.bin", point.n, point.phi, dims.fdcmss_bytes() / 1024));
            std::fs::File::create(path).map_err(Error::from).and_then(|f| sketch.write_to(f))?;
        }
        finish("fdcmss", dims.fdcmss_bytes(), reported, errors, elapsed, query);
    }

    if config.algorithm.runs_lhcount() {
        let (r, m) = dims.lhcount;
        let support = config.support.unwrap_or(point.phi);
        let mut lh = LambdaHCount::<f64>::new(config.lambda, support, config.epsilon, r, m, hash_seeds[1])?;
        let elapsed = time_loop(|| {
            for (item, t) in arrivals(items) {
                lh.update(item, t)?;
            }
            Ok(())
        })?;
        let q = Instant::now();
        let reported: Vec<ItemId> = lh.query(query_t).into_iter().map(|p| p.0).collect();
        let query = q.elapsed();
        let errors = distinct
            .iter()
            .zip(&exact)
            .map(|(&i, &x)| (lh.estimate(i, query_t) - x).abs())
            .collect();
        finish("lhcount", dims.lhcount_bytes(), reported, errors, elapsed, query);
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(out: W, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

/// Which parameter a sizing table varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizingAxis {
    Epsilon,
    Prob,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizingRow {
    pub epsilon: f64,
    pub prob: f64,
    pub fdcmss_cells: f64,
    pub fdcmss_kb: f64,
    pub lhcount_cells: f64,
    pub lhcount_kb: f64,
}

/// Theoretical sketch sizes of both algorithms at one `(epsilon, p)` point;
/// FDCMSS uses `delta = 1 - p`.
pub fn sizing_row(lambda: f64, distinct: u64, prob: f64, epsilon: f64) -> Result<SizingRow> {
    let lh = lh_theoretical_cells(lambda, distinct, prob, epsilon)?;
    let fd = theoretical_cells_fdcmss(epsilon, 1.0 - prob);
    Ok(SizingRow {
        epsilon,
        prob,
        fdcmss_cells: fd,
        fdcmss_kb: fd * FDCMSS_BYTES_PER_CELL as f64 / 1024.0,
        lhcount_cells: lh,
        lhcount_kb: lh * LHC_BYTES_PER_CELL as f64 / 1024.0,
    })
}

/// `steps` evenly spaced points from `from` to `to` along `axis`, with the
/// other parameter held at `epsilon` or `prob`.
pub fn sizing_table(
    lambda: f64,
    distinct: u64,
    prob: f64,
    epsilon: f64,
    axis: SizingAxis,
    (from, to): (f64, f64),
    steps: usize,
) -> Result<Vec<SizingRow>> {
    if steps == 0 {
        return Err(Error::config("sizing table needs at least one step"));
    }
    (0..steps)
        .map(|i| {
            let v = if steps == 1 { from } else { from + (to - from) * i as f64 / (steps - 1) as f64 };
            match axis {
                SizingAxis::Epsilon => sizing_row(lambda, distinct, prob, v),
                SizingAxis::Prob => sizing_row(lambda, distinct, v, epsilon),
            }
        })
        .collect()
}

pub fn write_sizing<W: Write>(out: W, rows: &[SizingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Row count FDCMSS uses for `delta`.
pub fn fdcmss_rows(delta: f64) -> usize {
    rows_for_delta(delta)
}
