//! Frequent-item mining over time-faded data streams.
//!
//! The central structure is [`FdcmssSketch`]: a Count-Min shaped grid whose
//! cells each hold a two-counter Space Saving summary, fed with forward-decayed
//! weights. Alongside it live the backward-decay [`LambdaHCount`] baseline, an
//! exact brute-force oracle, the evaluation metrics, a seeded Zipf generator and
//! the experiment harness behind the `fdcmss` binary.
//!
//! Everything that accumulates weights is generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix the common `f64` instantiations.
//!
//! ```
//! use fdcmss::{DecaySpec, Sketch, SketchParams};
//!
//! let decay = DecaySpec::exponential(0.99, 0.0).unwrap();
//! let params = SketchParams::new(0.01, 0.05, 0.1, decay).unwrap();
//! let mut sketch = Sketch::new(params, 7).unwrap();
//! for (pos, item) in [1u32, 2, 1, 1, 3, 1].into_iter().enumerate() {
//!     sketch.process(item, (pos + 1) as f64).unwrap();
//! }
//! let frequent = sketch.query(7.0).unwrap();
//! assert_eq!(frequent[0].item, 1);
//! ```

pub mod bench;
pub mod decay;
pub mod error;
pub mod hashing;
pub mod lambda_hcount;
pub mod oracle;
pub mod scalar;
pub mod sketch;
pub mod snapshot;
pub mod space_saving;
pub mod stream;

pub use decay::{DecayKind, DecaySpec};
pub use error::{Error, Result};
pub use hashing::{ColumnHasher, FixedColumns, FnvColumns, XxColumns};
pub use lambda_hcount::{lh_sizing, LambdaHCount, LhSizing};
pub use oracle::{compute_metrics, ExactDecayedCounts, MetricsReport};
pub use scalar::Scalar;
pub use sketch::{
    success_probability, theoretical_cells_fdcmss, FdcmssSketch, FrequentItem, SketchParams,
    FDCMSS_BYTES_PER_CELL,
};
pub use space_saving::{Counter, SpaceSaving};
pub use stream::{dataset_stats, read_items, DatasetStats, ZipfSpec, ZipfTable};

/// Item identifiers are 32-bit unsigned integers.
pub type ItemId = u32;

/// `f64` FDCMSS sketch with xxhash row hashing.
pub type Sketch = FdcmssSketch<f64, XxColumns>;
/// `f32` FDCMSS sketch with xxhash row hashing.
pub type Sketch32 = FdcmssSketch<f32, XxColumns>;
/// The two-counter summary stored in every sketch cell.
pub type CellSummary = SpaceSaving<f64, 2>;
pub type LambdaHCount64 = LambdaHCount<f64>;
pub type Oracle = ExactDecayedCounts<f64>;
