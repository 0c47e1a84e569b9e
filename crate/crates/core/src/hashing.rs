//! Per-row hash families mapping items to sketch columns.

use std::collections::HashMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xxhash_rust::xxh64::xxh64;

use crate::error::{Error, Result};
use crate::ItemId;

/// Maps an item to a column in `[0, width)` independently per row.
pub trait ColumnHasher {
    fn rows(&self) -> usize;
    fn width(&self) -> usize;
    fn column(&self, row: usize, item: ItemId) -> usize;
}

/// Draws `rows` distinct 64-bit seeds from a master seed.
pub fn row_seeds(master: u64, rows: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let mut seeds: Vec<u64> = Vec::with_capacity(rows);
    while seeds.len() < rows {
        let s = rng.next_u64();
        if !seeds.contains(&s) {
            seeds.push(s);
        }
    }
    seeds
}

#[inline]
fn reduce(hash: u64, width: usize) -> usize {
    ((hash as u128 * width as u128) >> 64) as usize
}

/// Seeded xxh64 per row, reduced to the column range by multiply-shift.
#[derive(Debug, Clone, PartialEq)]
pub struct XxColumns {
    master_seed: u64,
    seeds: Vec<u64>,
    width: usize,
}

impl XxColumns {
    pub fn new(master_seed: u64, rows: usize, width: usize) -> Self {
        Self { master_seed, seeds: row_seeds(master_seed, rows), width }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
}

impl ColumnHasher for XxColumns {
    fn rows(&self) -> usize {
        self.seeds.len()
    }

    fn width(&self) -> usize {
        self.width
    }

    #[inline]
    fn column(&self, row: usize, item: ItemId) -> usize {
        reduce(xxh64(&item.to_le_bytes(), self.seeds[row]), self.width)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(state, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// FNV-1a per row: the row seed is hashed in before the item bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct FnvColumns {
    prefixes: Vec<u64>,
    width: usize,
}

impl FnvColumns {
    pub fn new(master_seed: u64, rows: usize, width: usize) -> Self {
        let prefixes = row_seeds(master_seed, rows)
            .into_iter()
            .map(|s| fnv1a(FNV_OFFSET, &s.to_le_bytes()))
            .collect();
        Self { prefixes, width }
    }
}

impl ColumnHasher for FnvColumns {
    fn rows(&self) -> usize {
        self.prefixes.len()
    }

    fn width(&self) -> usize {
        self.width
    }

    #[inline]
    fn column(&self, row: usize, item: ItemId) -> usize {
        (fnv1a(self.prefixes[row], &item.to_le_bytes()) % self.width as u64) as usize
    }
}

/// Explicit item-to-column table, for replaying hand-constructed sketch
/// states. Items missing from a row fall back to column 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FixedColumns {
    rows: Vec<HashMap<ItemId, usize>>,
    width: usize,
}

impl FixedColumns {
    /// `table[row]` lists `(item, column)` assignments.
    pub fn new(width: usize, table: &[&[(ItemId, usize)]]) -> Result<Self> {
        let mut rows = Vec::with_capacity(table.len());
        for assignments in table {
            let mut row = HashMap::new();
            for &(item, col) in assignments.iter() {
                if col >= width {
                    return Err(Error::InvalidArgument(format!("column {col} out of range")));
                }
                if row.insert(item, col).is_some_and(|prev| prev != col) {
                    return Err(Error::InvalidArgument(format!("item {item} assigned twice")));
                }
            }
            rows.push(row);
        }
        Ok(Self { rows, width })
    }
}

impl ColumnHasher for FixedColumns {
    fn rows(&self) -> usize {
        self.rows.len()
    }

    fn width(&self) -> usize {
        self.width
    }

    fn column(&self, row: usize, item: ItemId) -> usize {
        self.rows[row].get(&item).copied().unwrap_or(0)
    }
}
