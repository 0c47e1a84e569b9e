//! Exact forward-decayed counts and the evaluation metrics.

use std::collections::{BTreeSet, HashMap};
use std::time::Duration;

use serde::Serialize;

use crate::decay::DecaySpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::ItemId;

/// Brute-force per-item decayed totals. Shares the landmark-shift scheme of
/// the sketch so long exponential streams stay finite.
#[derive(Debug, Clone)]
pub struct ExactDecayedCounts<F> {
    decay: DecaySpec<F>,
    per_item: HashMap<ItemId, F>,
    total: F,
    latest: Option<f64>,
}

impl<F: Scalar> ExactDecayedCounts<F> {
    pub fn new(decay: DecaySpec<F>) -> Self {
        Self { decay, per_item: HashMap::new(), total: F::zero(), latest: None }
    }

    pub fn decay(&self) -> &DecaySpec<F> {
        &self.decay
    }

    pub fn process(&mut self, item: ItemId, t: f64) -> Result<()> {
        let mut x = self.decay.raw_weight(t);
        let overflowing = match x {
            Ok(w) => (self.total + w).is_nan() || self.total + w > F::rebase_threshold(),
            Err(Error::Overflow { .. }) => true,
            Err(_) => false,
        };
        if overflowing && self.decay.is_exponential() {
            let factor = self.decay.rebase(t)?;
            self.total *= factor;
            for v in self.per_item.values_mut() {
                *v *= factor;
            }
            x = self.decay.raw_weight(t);
        }
        let x = x?;
        *self.per_item.entry(item).or_insert(F::zero()) += x;
        self.total += x;
        if !self.total.is_finite() {
            return Err(Error::Overflow { t });
        }
        self.latest = Some(self.latest.map_or(t, |l| l.max(t)));
        Ok(())
    }

    /// Raw total relative to the current landmark.
    pub fn raw_total(&self) -> F {
        self.total
    }

    pub fn raw_count(&self, item: ItemId) -> F {
        self.per_item.get(&item).copied().unwrap_or(F::zero())
    }

    /// Number of distinct items seen.
    pub fn distinct(&self) -> usize {
        self.per_item.len()
    }

    /// Distinct items in ascending id order.
    pub fn items(&self) -> Vec<ItemId> {
        let mut v: Vec<_> = self.per_item.keys().copied().collect();
        v.sort_unstable();
        v
    }

    fn inverse_normalizer(&self, t: f64) -> Result<F> {
        if let Some(latest) = self.latest {
            if t < latest {
                return Err(Error::FutureItem { item: latest, at: t });
            }
        }
        let g = match self.decay.raw_weight(t) {
            Ok(g) => g,
            // exponential only: 1/g underflows gracefully
            Err(Error::Overflow { .. }) => return self.decay.rebase_factor(t),
            Err(e) => return Err(e),
        };
        Ok(if g == F::zero() { F::zero() } else { g.recip() })
    }

    /// Exact normalized decayed count of `item` at time `t`.
    pub fn count_at(&self, item: ItemId, t: f64) -> Result<F> {
        Ok(self.raw_count(item) * self.inverse_normalizer(t)?)
    }

    /// Normalized decayed count `C` of the whole stream at time `t`.
    pub fn total_at(&self, t: f64) -> Result<F> {
        Ok(self.total * self.inverse_normalizer(t)?)
    }

    /// Every item with normalized count strictly above `phi * C`, by
    /// decreasing count.
    pub fn frequent(&self, phi: f64, t: f64) -> Result<Vec<(ItemId, F)>> {
        let inv = self.inverse_normalizer(t)?;
        let threshold = F::of(phi) * self.total;
        let mut out: Vec<_> = self
            .per_item
            .iter()
            .filter(|&(_, &raw)| raw > threshold)
            .map(|(&item, &raw)| (item, raw * inv))
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub recall: f64,
    pub precision: f64,
    pub mean_abs_err: f64,
    pub max_abs_err: f64,
    pub p96_abs_err: f64,
    pub updates_per_ms: f64,
    /// False when the truth set was empty and recall was set to 1 by
    /// convention.
    #[serde(skip)]
    pub recall_defined: bool,
}

/// Summary statistics over absolute errors: (mean, max, 96th percentile).
///
/// The percentile is the value at 1-based position `ceil(0.96 M)` of the
/// ascending errors.
pub fn error_stats(abs_errors: &[f64]) -> (f64, f64, f64) {
    if abs_errors.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut sorted = abs_errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("errors are not NaN"));
    let m = sorted.len();
    let mean = sorted.iter().sum::<f64>() / m as f64;
    let rank = ((0.96 * m as f64).ceil() as usize).clamp(1, m);
    (mean, sorted[m - 1], sorted[rank - 1])
}

/// Scores reported items against the exact frequent set and summarizes
/// per-item absolute errors over all distinct stream items.
pub fn compute_metrics(
    reported: &[ItemId],
    truth: &[ItemId],
    abs_errors: &[f64],
    elapsed: Duration,
    updates: u64,
) -> MetricsReport {
    let reported: BTreeSet<_> = reported.iter().copied().collect();
    let truth: BTreeSet<_> = truth.iter().copied().collect();
    let hits = reported.intersection(&truth).count() as f64;
    let recall_defined = !truth.is_empty();
    let recall = if recall_defined { hits / truth.len() as f64 } else { 1.0 };
    let precision = if reported.is_empty() { 1.0 } else { hits / reported.len() as f64 };
    let (mean_abs_err, max_abs_err, p96_abs_err) = error_stats(abs_errors);
    let ms = elapsed.as_secs_f64() * 1e3;
    let updates_per_ms = if ms > 0.0 { updates as f64 / ms } else { 0.0 };
    MetricsReport {
        recall,
        precision,
        mean_abs_err,
        max_abs_err,
        p96_abs_err,
        updates_per_ms,
        recall_defined,
    }
}
