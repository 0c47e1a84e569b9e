//! Fixed-capacity Space Saving summary with real-valued increments.
//!
//! FDCMSS stores a `SpaceSaving<F, 2>` in every sketch cell; other capacities
//! exist mainly to exercise the summary's guarantees. A counter is occupied
//! exactly when its count is positive, since every accepted weight is.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::ItemId;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Counter<F> {
    pub item: ItemId,
    pub count: F,
}

impl<F: Scalar> Counter<F> {
    pub fn is_occupied(&self) -> bool {
        self.count > F::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSaving<F, const K: usize> {
    counters: [Counter<F>; K],
}

impl<F: Scalar, const K: usize> Default for SpaceSaving<F, K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar, const K: usize> SpaceSaving<F, K> {
    const CAPACITY_OK: () = assert!(K >= 2, "Space Saving needs at least two counters");

    pub fn new() -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::CAPACITY_OK;
        Self { counters: [Counter::default(); K] }
    }

    /// Builds a summary holding exactly the given `(item, count)` pairs.
    pub fn from_counters(pairs: &[(ItemId, F)]) -> Result<Self> {
        if pairs.len() > K {
            return Err(Error::InvalidArgument(format!(
                "{} counters given for capacity {K}",
                pairs.len()
            )));
        }
        let mut summary = Self::new();
        for (slot, &(item, count)) in pairs.iter().enumerate() {
            if !(count > F::zero() && count.is_finite()) {
                return Err(Error::InvalidArgument(format!("count for item {item} must be positive")));
            }
            if pairs[..slot].iter().any(|&(other, _)| other == item) {
                return Err(Error::InvalidArgument(format!("item {item} monitored twice")));
            }
            summary.counters[slot] = Counter { item, count };
        }
        Ok(summary)
    }

    pub fn capacity(&self) -> usize {
        K
    }

    pub fn counters(&self) -> &[Counter<F>; K] {
        &self.counters
    }

    pub fn occupied(&self) -> impl Iterator<Item = &Counter<F>> {
        self.counters.iter().filter(|c| c.is_occupied())
    }

    pub fn is_empty(&self) -> bool {
        self.occupied().next().is_none()
    }

    /// Adds weight `w` for `item`, evicting the minimum counter if needed.
    pub fn update(&mut self, item: ItemId, w: F) -> Result<()> {
        if !(w > F::zero() && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight must be positive and finite, got {w}")));
        }
        let mut free = None;
        let mut min = 0;
        for (idx, c) in self.counters.iter().enumerate() {
            if !c.is_occupied() {
                free.get_or_insert(idx);
                continue;
            }
            if c.item == item {
                self.counters[idx].count += w;
                return Ok(());
            }
            let m = &self.counters[min];
            if !m.is_occupied() || c.count < m.count || (c.count == m.count && c.item < m.item) {
                min = idx;
            }
        }
        match free {
            Some(idx) => self.counters[idx] = Counter { item, count: w },
            None => {
                let c = &mut self.counters[min];
                c.item = item;
                c.count += w;
            }
        }
        Ok(())
    }

    /// Minimum count, zero while any counter is free.
    pub fn min_count(&self) -> F {
        self.counters
            .iter()
            .map(|c| c.count)
            .fold(F::infinity(), F::min)
    }

    /// Occupied counter with the largest count; ties go to the lower item id.
    pub fn max_counter(&self) -> Option<Counter<F>> {
        self.occupied().copied().reduce(|best, c| {
            if c.count > best.count || (c.count == best.count && c.item < best.item) {
                c
            } else {
                best
            }
        })
    }

    pub fn get(&self, item: ItemId) -> Option<F> {
        self.occupied().find(|c| c.item == item).map(|c| c.count)
    }

    /// Upper bound on the weight offered for `item`.
    pub fn estimate(&self, item: ItemId) -> F {
        self.get(item).unwrap_or_else(|| self.min_count())
    }

    /// Total weight offered to this summary; equal to the sum of its counts.
    pub fn offered_total(&self) -> F {
        self.counters.iter().fold(F::zero(), |acc, c| acc + c.count)
    }

    pub(crate) fn scale(&mut self, factor: F) {
        for c in &mut self.counters {
            c.count *= factor;
        }
    }
}
