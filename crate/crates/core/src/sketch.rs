//! The FDCMSS sketch: a `d x w` grid of two-counter Space Saving summaries fed
//! with forward-decayed weights.
//!
//! Raw weights `g(t_i - L)` are accumulated as they arrive and normalized only
//! at query time. Under exponential decay raw weights grow without bound, so
//! the sketch shifts its landmark forward whenever the running total would
//! pass [`Scalar::rebase_threshold`]; the shift scales every stored count by
//! the same factor and leaves all normalized answers unchanged.

use std::collections::BTreeMap;
use std::f64::consts::E;

use crate::decay::{DecayKind, DecaySpec};
use crate::error::{Error, Result};
use crate::hashing::{ColumnHasher, XxColumns};
use crate::scalar::Scalar;
use crate::space_saving::SpaceSaving;
use crate::ItemId;

/// Two counters of (4-byte item, 8-byte count).
pub const FDCMSS_BYTES_PER_CELL: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams<F> {
    pub epsilon: f64,
    pub delta: f64,
    pub phi: f64,
    /// The landmark of `decay` is the initial timestamp `t_init`.
    pub decay: DecaySpec<F>,
}

impl<F: Scalar> SketchParams<F> {
    pub fn new(epsilon: f64, delta: f64, phi: f64, decay: DecaySpec<F>) -> Result<Self> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(epsilon) || !unit(delta) || !unit(phi) {
            return Err(Error::config(format!(
                "epsilon, delta and phi must lie in (0,1); got {epsilon}, {delta}, {phi}"
            )));
        }
        if epsilon >= phi {
            return Err(Error::config(format!("epsilon {epsilon} must be below phi {phi}")));
        }
        Ok(Self { epsilon, delta, phi, decay })
    }

    /// `ceil(ln(1/delta))`, at least one.
    pub fn rows(&self) -> usize {
        rows_for_delta(self.delta)
    }

    /// `ceil(e / (2 epsilon))`.
    pub fn columns(&self) -> usize {
        (E / (2.0 * self.epsilon)).ceil() as usize
    }
}

pub(crate) fn rows_for_delta(delta: f64) -> usize {
    ((-delta.ln()).ceil() as usize).max(1)
}

/// An item reported by [`FdcmssSketch::query`] with its normalized estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequentItem<F> {
    pub item: ItemId,
    pub estimate: F,
}

#[derive(Debug, Clone)]
pub struct FdcmssSketch<F: Scalar, H = XxColumns> {
    rows: usize,
    width: usize,
    cells: Vec<SpaceSaving<F, 2>>,
    hasher: H,
    count: F,
    phi: F,
    decay: DecaySpec<F>,
    latest: Option<f64>,
    rebases: usize,
}

impl<F: Scalar> FdcmssSketch<F, XxColumns> {
    /// Sizes the grid from `epsilon` and `delta` and derives the row hash
    /// seeds from `seed`.
    pub fn new(params: SketchParams<F>, seed: u64) -> Result<Self> {
        Self::with_dimensions(params, params.rows(), params.columns(), seed)
    }

    /// Explicit grid dimensions, e.g. to fit a byte budget.
    pub fn with_dimensions(params: SketchParams<F>, rows: usize, width: usize, seed: u64) -> Result<Self> {
        Self::with_hasher(params.phi, params.decay, XxColumns::new(seed, rows, width))
    }

    pub fn seed(&self) -> u64 {
        self.hasher.master_seed()
    }
}

impl<F: Scalar, H: ColumnHasher> FdcmssSketch<F, H> {
    /// Empty sketch whose dimensions come from the hasher.
    pub fn with_hasher(phi: f64, decay: DecaySpec<F>, hasher: H) -> Result<Self> {
        let (rows, width) = (hasher.rows(), hasher.width());
        let cells = vec![SpaceSaving::new(); rows * width];
        Self::from_parts(phi, decay, hasher, cells, F::zero())
    }

    /// Reassembles a sketch from row-major cells and a raw total count.
    pub fn from_parts(
        phi: f64,
        decay: DecaySpec<F>,
        hasher: H,
        cells: Vec<SpaceSaving<F, 2>>,
        count: F,
    ) -> Result<Self> {
        let (rows, width) = (hasher.rows(), hasher.width());
        if rows == 0 || width == 0 {
            return Err(Error::config("sketch needs at least one row and one column"));
        }
        if cells.len() != rows * width {
            return Err(Error::config(format!("{} cells given for a {rows}x{width} grid", cells.len())));
        }
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::config(format!("phi must lie in (0,1), got {phi}")));
        }
        if !(count >= F::zero() && count.is_finite()) {
            return Err(Error::config("count must be finite and non-negative"));
        }
        Ok(Self {
            rows,
            width,
            cells,
            hasher,
            count,
            phi: F::of(phi),
            decay,
            latest: None,
            rebases: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn phi(&self) -> F {
        self.phi
    }

    /// Same sketch with a different support threshold.
    pub fn with_phi(mut self, phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::config(format!("phi must lie in (0,1), got {phi}")));
        }
        self.phi = F::of(phi);
        Ok(self)
    }

    pub fn decay(&self) -> &DecaySpec<F> {
        &self.decay
    }

    pub fn landmark(&self) -> f64 {
        self.decay.landmark()
    }

    /// Raw total decayed count relative to the current landmark.
    pub fn count(&self) -> F {
        self.count
    }

    pub fn hasher(&self) -> &H {
        &self.hasher
    }

    /// Number of landmark shifts performed so far.
    pub fn rebases(&self) -> usize {
        self.rebases
    }

    pub fn cell(&self, row: usize, column: usize) -> &SpaceSaving<F, 2> {
        &self.cells[row * self.width + column]
    }

    /// Row-major cells.
    pub fn cells(&self) -> &[SpaceSaving<F, 2>] {
        &self.cells
    }

    pub fn memory_bytes(&self) -> usize {
        self.rows * self.width * FDCMSS_BYTES_PER_CELL
    }

    /// Sum of offered weight per row; each equals `count` up to rounding.
    pub fn row_totals(&self) -> Vec<F> {
        self.cells
            .chunks(self.width)
            .map(|row| row.iter().fold(F::zero(), |acc, c| acc + c.offered_total()))
            .collect()
    }

    /// Adds one arrival of `item` at time `t`.
    pub fn process(&mut self, item: ItemId, t: f64) -> Result<()> {
        let x = self.arrival_weight(t)?;
        self.latest = Some(self.latest.map_or(t, |l| l.max(t)));
        if x == F::zero() {
            return Ok(());
        }
        self.count += x;
        for row in 0..self.rows {
            let col = self.hasher.column(row, item);
            self.cells[row * self.width + col].update(item, x)?;
        }
        Ok(())
    }

    fn arrival_weight(&mut self, t: f64) -> Result<F> {
        let fits = |x: F, count: F| (count + x).is_finite() && count + x <= F::rebase_threshold();
        match self.decay.raw_weight(t) {
            Ok(x) if fits(x, self.count) => return Ok(x),
            Ok(_) | Err(Error::Overflow { .. }) if self.decay.is_exponential() => {}
            Ok(_) => return Err(Error::Overflow { t }),
            Err(e) => return Err(e),
        }
        self.rebase(t)?;
        let x = self.decay.raw_weight(t)?;
        if fits(x, self.count) {
            Ok(x)
        } else {
            Err(Error::Overflow { t })
        }
    }

    /// Moves the landmark to `new_landmark`, rescaling every raw count.
    pub fn rebase(&mut self, new_landmark: f64) -> Result<()> {
        let factor = self.decay.rebase(new_landmark)?;
        self.count *= factor;
        for cell in &mut self.cells {
            cell.scale(factor);
        }
        self.rebases += 1;
        Ok(())
    }

    /// `1 / g(t - L)`, computed without overflowing for exponential decay.
    fn inverse_normalizer(&self, t: f64) -> Result<F> {
        if let Some(latest) = self.latest {
            if t < latest {
                return Err(Error::FutureItem { item: latest, at: t });
            }
        }
        let elapsed = F::of(t - self.landmark());
        match self.decay.kind() {
            DecayKind::Exponential { lambda } => Ok(lambda.powf(elapsed)),
            DecayKind::Polynomial { beta } => {
                if t < self.landmark() {
                    return Err(Error::BeforeLandmark { t, landmark: self.landmark() });
                }
                Ok(elapsed.powf(beta).recip())
            }
        }
    }

    fn raw_estimate(&self, item: ItemId) -> F {
        (0..self.rows)
            .map(|row| self.cell(row, self.hasher.column(row, item)).estimate(item))
            .fold(F::infinity(), F::min)
    }

    /// Normalized decayed count estimate of `item` at time `t`; never below
    /// the exact value.
    pub fn point_estimate(&self, item: ItemId, t: f64) -> Result<F> {
        let inv = self.inverse_normalizer(t)?;
        Ok(self.scaled(self.raw_estimate(item), inv))
    }

    /// Point estimate divided by an externally supplied `g(t - L)`.
    pub fn point_estimate_with_normalizer(&self, item: ItemId, normalizer: F) -> Result<F> {
        let inv = Self::checked_inverse(normalizer)?;
        Ok(self.scaled(self.raw_estimate(item), inv))
    }

    fn scaled(&self, raw: F, inv: F) -> F {
        // 0 * inf when g(t - L) = 0: nothing has weight yet
        if raw == F::zero() {
            F::zero()
        } else {
            raw * inv
        }
    }

    fn checked_inverse(normalizer: F) -> Result<F> {
        if normalizer > F::zero() && normalizer.is_finite() {
            Ok(normalizer.recip())
        } else {
            Err(Error::InvalidArgument(format!("normalizer must be positive and finite, got {normalizer}")))
        }
    }

    /// Items whose estimated decayed count at time `t` exceeds `phi` times
    /// the total, ordered by decreasing estimate.
    pub fn query(&self, t: f64) -> Result<Vec<FrequentItem<F>>> {
        let inv = self.inverse_normalizer(t)?;
        Ok(self.query_scaled(inv))
    }

    /// [`query`](Self::query) with an externally supplied `g(t - L)`.
    pub fn query_with_normalizer(&self, normalizer: F) -> Result<Vec<FrequentItem<F>>> {
        let inv = Self::checked_inverse(normalizer)?;
        Ok(self.query_scaled(inv))
    }

    fn query_scaled(&self, inv: F) -> Vec<FrequentItem<F>> {
        // Both sides of each comparison share the 1/g(t - L) factor, so the
        // tests run on raw values.
        let threshold = self.phi * self.count;
        let mut found: BTreeMap<ItemId, F> = BTreeMap::new();
        for cell in &self.cells {
            let Some(top) = cell.max_counter() else { continue };
            if top.count <= threshold || found.contains_key(&top.item) {
                continue;
            }
            let raw = self.raw_estimate(top.item);
            if raw > threshold {
                found.insert(top.item, self.scaled(raw, inv));
            }
        }
        let mut out: Vec<_> = found
            .into_iter()
            .map(|(item, estimate)| FrequentItem { item, estimate })
            .collect();
        out.sort_by(|a, b| b.estimate.partial_cmp(&a.estimate).unwrap().then(a.item.cmp(&b.item)));
        out
    }
}

/// Unceiled cell count `ln(1/delta) * e / (2 epsilon)`.
pub fn theoretical_cells_fdcmss(epsilon: f64, delta: f64) -> f64 {
    (1.0 / delta).ln() * E / (2.0 * epsilon)
}

/// Lower bound `1 - (1/(2 phi w))^d` on the probability that a frequent item
/// surfaces as a cell's majority candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessBound {
    pub probability: f64,
}

impl SuccessBound {
    /// The bound says nothing when `2 phi w <= 1`.
    pub fn is_vacuous(&self) -> bool {
        self.probability <= 0.0
    }
}

pub fn success_probability(phi: f64, width: usize, rows: usize) -> SuccessBound {
    let base = 1.0 / (2.0 * phi * width as f64);
    SuccessBound { probability: 1.0 - base.powi(rows as i32) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::FixedColumns;
    use approx::assert_relative_eq;

    fn exp_params(epsilon: f64, delta: f64, phi: f64) -> SketchParams<f64> {
        SketchParams::new(epsilon, delta, phi, DecaySpec::exponential(0.99, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn initialize_dimensions() {
        let p = exp_params(0.001, 0.04, 0.01);
        assert_eq!((p.rows(), p.columns()), (4, 1360));
        assert_eq!(exp_params(0.001, (-1.0f64).exp(), 0.01).rows(), 1);
        let p = exp_params(0.05, 0.05, 0.1);
        assert_eq!((p.rows(), p.columns()), (3, 28));

        let s = FdcmssSketch::new(p, 3).unwrap();
        assert_eq!(s.count(), 0.0);
        assert_eq!(s.landmark(), 0.0);
        assert!(s.cells().iter().all(|c| c.is_empty()));
        assert_eq!(s.memory_bytes(), 3 * 28 * 24);
    }

    #[test]
    fn initialize_rejects_bad_params() {
        let decay = DecaySpec::<f64>::exponential(0.9, 0.0).unwrap();
        assert!(SketchParams::new(0.1, 0.1, 0.05, decay).is_err());
        assert!(SketchParams::new(0.1, 0.1, 0.1, decay).is_err());
        assert!(SketchParams::new(0.0, 0.1, 0.5, decay).is_err());
        assert!(SketchParams::new(0.1, 1.0, 0.5, decay).is_err());
        assert!(SketchParams::new(0.1, 0.5, 1.0, decay).is_err());
    }

    #[test]
    fn first_item_at_landmark_has_unit_weight() {
        let mut s = FdcmssSketch::new(exp_params(0.01, 0.1, 0.2), 1).unwrap();
        s.process(17, 0.0).unwrap();
        assert_eq!(s.count(), 1.0);
        assert_eq!(s.point_estimate(17, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn single_item_estimate_is_one_at_its_own_time() {
        let mut s = FdcmssSketch::new(exp_params(0.01, 0.1, 0.2), 1).unwrap();
        s.process(4, 250.0).unwrap();
        assert_relative_eq!(s.point_estimate(4, 250.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(s.point_estimate(5, 250.0).unwrap(), 0.0);
    }

    #[test]
    fn single_item_stream_is_reported() {
        let mut s = FdcmssSketch::new(exp_params(0.01, 0.1, 0.5), 1).unwrap();
        for t in 1..=50 {
            s.process(8, t as f64).unwrap();
        }
        let r = s.query(51.0).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].item, 8);
        assert_relative_eq!(r[0].estimate, s.count() * 0.99f64.powi(51), max_relative = 1e-12);
    }

    #[test]
    fn empty_sketch_queries() {
        let s = FdcmssSketch::new(exp_params(0.01, 0.1, 0.5), 1).unwrap();
        assert!(s.query(10.0).unwrap().is_empty());
        assert_eq!(s.point_estimate(3, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_times() {
        let decay = DecaySpec::exponential(0.99, 5.0).unwrap();
        let mut s = FdcmssSketch::new(SketchParams::new(0.01, 0.1, 0.5, decay).unwrap(), 1).unwrap();
        assert!(matches!(s.process(1, 4.0), Err(Error::BeforeLandmark { .. })));
        s.process(1, 9.0).unwrap();
        assert!(matches!(s.query(8.0), Err(Error::FutureItem { .. })));
        assert!(s.query_with_normalizer(0.0).is_err());
    }

    #[test]
    fn automatic_rebase_keeps_counts_finite() {
        let decay = DecaySpec::<f64>::exponential(0.5, 0.0).unwrap();
        let mut s = FdcmssSketch::new(SketchParams::new(0.01, 0.1, 0.3, decay).unwrap(), 1).unwrap();
        for t in 1..=5000 {
            s.process(t % 3, t as f64).unwrap();
        }
        assert!(s.rebases() > 0);
        assert!(s.count().is_finite());
        // geometric weights: the last arrival alone holds half the mass
        let total: f64 = (0..3).map(|i| s.point_estimate(i, 5000.0).unwrap()).sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn f32_sketch_rebases_early() {
        let decay = DecaySpec::<f32>::exponential(0.9, 0.0).unwrap();
        let mut s = FdcmssSketch::new(SketchParams::new(0.05, 0.1, 0.3, decay).unwrap(), 2).unwrap();
        for t in 1..=3000 {
            s.process(1 + t % 2, t as f64).unwrap();
        }
        assert!(s.rebases() > 0);
        let e = s.point_estimate(1, 3000.0).unwrap();
        assert!(e.is_finite() && e > 4.0 && e < 6.0, "{e}");
    }

    #[test]
    fn polynomial_decay_skips_zero_weight_and_normalizes() {
        let decay = DecaySpec::<f64>::polynomial(2.0, 0.0).unwrap();
        let mut s = FdcmssSketch::new(SketchParams::new(0.01, 0.1, 0.15, decay).unwrap(), 1).unwrap();
        s.process(1, 0.0).unwrap();
        assert_eq!(s.count(), 0.0);
        s.process(1, 5.0).unwrap();
        s.process(2, 10.0).unwrap();
        assert_relative_eq!(s.point_estimate(1, 10.0).unwrap(), 0.25);
        assert!(matches!(s.rebase(3.0), Err(Error::Unsupported(_))));
        let r = s.query(10.0).unwrap();
        assert_eq!(r.iter().map(|f| f.item).collect::<Vec<_>>(), vec![2, 1]);
    }

    #[test]
    fn rebase_scales_raw_counts() {
        let decay = DecaySpec::<f64>::exponential(0.999, 0.0).unwrap();
        let hasher = FixedColumns::new(2, &[&[(1, 0)]]).unwrap();
        let cells = vec![SpaceSaving::from_counters(&[(1, 10.0)]).unwrap(), SpaceSaving::new()];
        let mut s = FdcmssSketch::from_parts(0.1, decay, hasher, cells, 10.0).unwrap();
        s.rebase(0.0).unwrap();
        assert_eq!(s.count(), 10.0);
        s.rebase(1000.0).unwrap();
        assert!((s.cell(0, 0).get(1).unwrap() / 10.0 - 0.3677).abs() < 1e-4);
        assert_eq!(s.landmark(), 1000.0);
    }

    #[test]
    fn sizing_examples() {
        assert!((theoretical_cells_fdcmss(0.001, 0.04) - 4375.0).abs() <= 1.0);
        assert_relative_eq!(theoretical_cells_fdcmss(E / 2.0, (-1.0f64).exp()), 1.0, max_relative = 1e-12);
        assert!((theoretical_cells_fdcmss(0.01, 0.04) - 437.5).abs() <= 0.1);
    }

    #[test]
    fn success_probability_examples() {
        assert_eq!(success_probability(0.5, 2, 1).probability, 0.5);
        let b = success_probability(0.01, 1360, 4);
        assert_relative_eq!(b.probability, 1.0 - 27.2f64.powi(-4), max_relative = 1e-14);
        assert!((b.probability - 0.9999982).abs() < 1e-7);
        assert!(success_probability(0.025, 5, 2).is_vacuous());
        assert!(!b.is_vacuous());
    }
}
