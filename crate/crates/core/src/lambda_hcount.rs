//! λ-HCount baseline: an `r x m` grid of lazily aged exponential densities
//! plus a bounded queue of frequent-item candidates.
//!
//! Each grid entry stores a density and the time it was last touched; an
//! arrival at `t` ages the density by `lambda^(t - last)` and adds one. The
//! candidate queue keeps items whose estimate passed `(s - eps)/(1 - lambda)`,
//! most recently refreshed at the tail, evicting from the head when full.

use std::f64::consts::E;
use std::num::NonZeroUsize;

use lru::LruCache;

use crate::error::{Error, Result};
use crate::hashing::{ColumnHasher, FnvColumns};
use crate::scalar::Scalar;
use crate::ItemId;

/// A density (8 bytes) and a timestamp (8 bytes).
pub const LHC_BYTES_PER_CELL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LhSizing {
    pub rows: usize,
    pub columns: usize,
    pub cells: usize,
}

fn check_sizing_args(lambda: f64, distinct: u64, success_prob: f64, epsilon: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::config(format!("lambda must lie in (0,1), got {lambda}")));
    }
    if !(success_prob > 0.0 && success_prob < 1.0) {
        return Err(Error::config(format!("success probability must lie in (0,1), got {success_prob}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
    }
    if distinct == 0 {
        return Err(Error::config("distinct item count must be at least 1"));
    }
    Ok(())
}

/// `ln(-M / ln p)`.
fn log_term(distinct: u64, success_prob: f64) -> f64 {
    (-(distinct as f64) / success_prob.ln()).ln()
}

/// Unceiled cell count `e (1 - lambda) ln(-M / ln p) / eps^2`.
pub fn lh_theoretical_cells(lambda: f64, distinct: u64, success_prob: f64, epsilon: f64) -> Result<f64> {
    check_sizing_args(lambda, distinct, success_prob, epsilon)?;
    let cells = E * (1.0 - lambda) * log_term(distinct, success_prob) / (epsilon * epsilon);
    if cells > 0.0 {
        Ok(cells)
    } else {
        Err(Error::config("sizing formula yields no cells for these arguments"))
    }
}

/// Number of hash rows, `ceil(ln(-M / ln p))`.
pub fn lh_rows(distinct: u64, success_prob: f64) -> Result<usize> {
    check_sizing_args(0.5, distinct, success_prob, 1.0)?;
    let r = log_term(distinct, success_prob).ceil();
    if r >= 1.0 {
        Ok(r as usize)
    } else {
        Err(Error::config("success probability too low for at least one row"))
    }
}

/// Grid dimensions for `M` distinct items, success probability `p` and error
/// `epsilon`.
pub fn lh_sizing(lambda: f64, distinct: u64, success_prob: f64, epsilon: f64) -> Result<LhSizing> {
    let cells = lh_theoretical_cells(lambda, distinct, success_prob, epsilon)?.ceil() as usize;
    let rows = lh_rows(distinct, success_prob)?;
    Ok(LhSizing { rows, columns: cells.div_ceil(rows), cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LhEntry<F> {
    pub density: F,
    pub last_update: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<F> {
    pub estimate: F,
    pub time: f64,
}

#[derive(Debug)]
pub struct LambdaHCount<F: Scalar> {
    rows: usize,
    width: usize,
    grid: Vec<LhEntry<F>>,
    hasher: FnvColumns,
    candidates: LruCache<ItemId, Candidate<F>>,
    lambda: F,
    support: F,
    epsilon: F,
    /// Aged decayed count of the whole stream as of `last_time`.
    total: F,
    last_time: Option<f64>,
}

impl<F: Scalar> LambdaHCount<F> {
    pub fn new(lambda: f64, support: f64, epsilon: f64, rows: usize, width: usize, seed: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::config(format!("lambda must lie in (0,1), got {lambda}")));
        }
        if !(epsilon > 0.0 && support > epsilon && support < 1.0) {
            return Err(Error::config(format!(
                "need 0 < epsilon < support < 1, got epsilon {epsilon}, support {support}"
            )));
        }
        if rows == 0 || width == 0 {
            return Err(Error::config("grid needs at least one row and one column"));
        }
        let capacity = (rows as f64 / (support - epsilon)).ceil() as usize;
        let capacity = NonZeroUsize::new(capacity).expect("rows >= 1 and support < 1");
        Ok(Self {
            rows,
            width,
            grid: vec![LhEntry::default(); rows * width],
            hasher: FnvColumns::new(seed, rows, width),
            candidates: LruCache::new(capacity),
            lambda: F::of(lambda),
            support: F::of(support),
            epsilon: F::of(epsilon),
            total: F::zero(),
            last_time: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn memory_bytes(&self) -> usize {
        self.rows * self.width * LHC_BYTES_PER_CELL
    }

    /// Maximum size of the candidate queue, `ceil(r / (s - eps))`.
    pub fn candidate_capacity(&self) -> usize {
        self.candidates.cap().get()
    }

    /// Candidates from head (oldest refresh) to tail.
    pub fn candidates(&self) -> Vec<(ItemId, Candidate<F>)> {
        let mut v: Vec<_> = self.candidates.iter().map(|(&k, &c)| (k, c)).collect();
        v.reverse();
        v
    }

    pub fn entry(&self, row: usize, column: usize) -> LhEntry<F> {
        self.grid[row * self.width + column]
    }

    fn decay_factor(&self, elapsed: f64) -> F {
        self.lambda.powf(F::of(elapsed))
    }

    /// Estimate threshold for entering the candidate queue.
    pub fn admission_threshold(&self) -> F {
        (self.support - self.epsilon) / (F::one() - self.lambda)
    }

    pub fn update(&mut self, item: ItemId, t: f64) -> Result<()> {
        if let Some(last) = self.last_time {
            if t < last {
                return Err(Error::OutOfOrder { t, last });
            }
            self.total = self.total * self.decay_factor(t - last) + F::one();
        } else {
            self.total = F::one();
        }
        self.last_time = Some(t);

        let mut estimate = F::infinity();
        for row in 0..self.rows {
            let idx = row * self.width + self.hasher.column(row, item);
            let aged = self.grid[idx].density * self.decay_factor(t - self.grid[idx].last_update);
            let e = &mut self.grid[idx];
            e.density = aged + F::one();
            e.last_update = t;
            estimate = estimate.min(e.density);
        }
        if estimate > self.admission_threshold() {
            self.candidates.put(item, Candidate { estimate, time: t });
        }
        Ok(())
    }

    /// Minimum over rows of the densities aged to `t`, without incrementing.
    pub fn estimate(&self, item: ItemId, t: f64) -> F {
        (0..self.rows)
            .map(|row| {
                let e = self.entry(row, self.hasher.column(row, item));
                if e.density == F::zero() {
                    F::zero()
                } else {
                    e.density * self.decay_factor(t - e.last_update)
                }
            })
            .fold(F::infinity(), F::min)
    }

    /// Decayed count of the whole stream at time `t`.
    pub fn total_at(&self, t: f64) -> F {
        match self.last_time {
            Some(last) => self.total * self.decay_factor(t - last),
            None => F::zero(),
        }
    }

    /// Candidates whose aged estimate exceeds `s` times the stream's decayed
    /// count, ordered by decreasing estimate.
    pub fn query(&self, t: f64) -> Vec<(ItemId, F)> {
        let threshold = self.support * self.total_at(t);
        let mut out: Vec<(ItemId, F)> = self
            .candidates
            .iter()
            .map(|(&item, _)| (item, self.estimate(item, t)))
            .filter(|&(_, est)| est > threshold)
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }
}
