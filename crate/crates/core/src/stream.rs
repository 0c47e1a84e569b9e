//! Stream sources: seeded Zipf generation, integer-token files, and summary
//! statistics of item sequences.
//!
//! Every source yields plain item sequences; the timestamp of an item is its
//! 1-based position (see [`arrivals`]).

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ItemId;

/// Pairs each item with its 1-based stream position as timestamp.
pub fn arrivals(items: &[ItemId]) -> impl Iterator<Item = (ItemId, f64)> + '_ {
    items.iter().enumerate().map(|(i, &item)| (item, (i + 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfSpec {
    pub n: usize,
    pub rho: f64,
    pub universe: u32,
    pub seed: u64,
}

/// Cumulative Zipf distribution over `1..=universe` with `P(i) ∝ i^-rho`.
#[derive(Debug, Clone)]
pub struct ZipfTable {
    rho: f64,
    cdf: Vec<f64>,
}

impl ZipfTable {
    pub fn new(rho: f64, universe: u32) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::config(format!("skew must be non-negative, got {rho}")));
        }
        if universe == 0 {
            return Err(Error::config("universe must hold at least one item"));
        }
        let mut cdf = Vec::with_capacity(universe as usize);
        let mut acc = 0.0;
        for i in 1..=universe {
            acc += (i as f64).powf(-rho);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        *cdf.last_mut().expect("universe >= 1") = 1.0;
        Ok(Self { rho, cdf })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn universe(&self) -> u32 {
        self.cdf.len() as u32
    }

    /// Exact probability of `item`.
    pub fn probability(&self, item: ItemId) -> f64 {
        match item as usize {
            0 => 0.0,
            i if i > self.cdf.len() => 0.0,
            1 => self.cdf[0],
            i => self.cdf[i - 1] - self.cdf[i - 2],
        }
    }

    /// Inverse-CDF draw for a uniform `u` in `[0, 1)`.
    pub fn item_for(&self, u: f64) -> ItemId {
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as ItemId + 1
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<ItemId> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.item_for(rng.gen::<f64>())).collect()
    }
}

pub fn zipf_stream(spec: &ZipfSpec) -> Result<Vec<ItemId>> {
    if spec.n == 0 {
        return Err(Error::config("stream length must be at least 1"));
    }
    Ok(ZipfTable::new(spec.rho, spec.universe)?.sample(spec.n, spec.seed))
}

/// Parses whitespace/newline separated non-negative integers.
pub fn parse_items<R: Read>(reader: R) -> Result<Vec<ItemId>> {
    let mut items = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        for token in line.split_whitespace() {
            let item = token.parse::<ItemId>().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("{token:?} is not a 32-bit unsigned integer ({e})"),
            })?;
            items.push(item);
        }
    }
    Ok(items)
}

pub fn read_items(path: impl AsRef<Path>) -> Result<Vec<ItemId>> {
    parse_items(File::open(path)?)
}

/// Writes one item per line, the format [`read_items`] accepts.
pub fn write_items<W: Write>(out: W, items: &[ItemId]) -> Result<()> {
    let mut out = BufWriter::new(out);
    for item in items {
        writeln!(out, "{item}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub count: usize,
    pub distinct: usize,
    pub min: ItemId,
    pub max: ItemId,
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
    pub skewness: f64,
}

/// Population moments; the median of even-length data averages the middle
/// pair. Skewness of constant data is reported as 0.
pub fn dataset_stats(items: &[ItemId]) -> Result<DatasetStats> {
    if items.is_empty() {
        return Err(Error::InvalidArgument("statistics need at least one item".into()));
    }
    let n = items.len() as f64;
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] as f64 + sorted[mid] as f64) / 2.0
    } else {
        sorted[mid] as f64
    };
    let mean = items.iter().map(|&x| x as f64).sum::<f64>() / n;
    let (m2, m3) = items.iter().fold((0.0, 0.0), |(m2, m3), &x| {
        let d = x as f64 - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let variance = m2 / n;
    let stddev = variance.sqrt();
    let skewness = if variance > 0.0 { (m3 / n) / variance.powf(1.5) } else { 0.0 };
    let distinct = items.iter().collect::<HashSet<_>>().len();
    Ok(DatasetStats {
        count: items.len(),
        distinct,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        mean,
        median,
        stddev,
        skewness,
    })
}
