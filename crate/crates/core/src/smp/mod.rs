//! Simultaneous-message-passing protocols.
//!
//! A protocol is a pair of deterministic message tables over explicit
//! randomness registers plus a referee table. Transforms extend a side with
//! [`Stage`]s (simulation, truncation, seeding, tupling) which are evaluated
//! lazily, so a compressed protocol with a 2^16-step sample stream never has
//! to be materialized as a table.

mod eval;
pub mod fixtures;
mod law;
mod protocol;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::infotheory::Dist;
use crate::{Error, Result};

pub use eval::{costs, costs_with_error, error, output_dist, output_joint, worst_error, CostReport, Evaluator};
pub use law::{Outcome, View};
pub use protocol::{
    LengthFunction, Model, Referee, SeedStage, SharedValue, Side, SimulateStage, SmpProtocol, Stage, TruncateStage,
    TupleItem, TupleStage, SCHEMA_VERSION,
};

pub(crate) use law::SharedKind;

/// Default bound on enumerated cells.
pub const DEFAULT_CELL_CAP: u64 = 100_000_000;

static CELL_CAP: AtomicU64 = AtomicU64::new(DEFAULT_CELL_CAP);

pub fn cell_cap() -> u64 {
    CELL_CAP.load(Ordering::Relaxed)
}

/// Sets the process-wide enumeration guard.
pub fn set_cell_cap(cap: u64) {
    CELL_CAP.store(cap, Ordering::Relaxed);
}

pub(crate) fn check_cells(cells: u128) -> Result<()> {
    let cap = cell_cap();
    if cells > cap as u128 {
        return Err(Error::CellCap { cells, cap });
    }
    Ok(())
}

/// A total function `X × Y → Z` over index sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct FunctionTable {
    pub x_size: usize,
    pub y_size: usize,
    pub z_size: usize,
    values: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    x: usize,
    y: usize,
    z: usize,
    values: Vec<u32>,
}

impl TryFrom<RawTable> for FunctionTable {
    type Error = Error;

    fn try_from(r: RawTable) -> Result<Self> {
        FunctionTable::new(r.x, r.y, r.z, r.values)
    }
}

impl From<FunctionTable> for RawTable {
    fn from(f: FunctionTable) -> Self {
        RawTable {
            x: f.x_size,
            y: f.y_size,
            z: f.z_size,
            values: f.values,
        }
    }
}

/// Deserializes `text`, reporting the failing field path and position.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path,
            message: inner.to_string(),
            line: inner.line(),
            column: inner.column(),
        }
    })
}

impl FunctionTable {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn new(x_size: usize, y_size: usize, z_size: usize, values: Vec<u32>) -> Result<Self> {
        if x_size == 0 || y_size == 0 || z_size == 0 {
            return Err(Error::domain("function table dimensions must be positive"));
        }
        if values.len() != x_size * y_size {
            return Err(Error::domain(format!(
                "function table has {} values for {x_size}×{y_size} inputs",
                values.len()
            )));
        }
        if values.iter().any(|&v| v as usize >= z_size) {
            return Err(Error::domain("function value outside the output range"));
        }
        Ok(FunctionTable {
            x_size,
            y_size,
            z_size,
            values,
        })
    }

    pub fn from_fn(
        x_size: usize,
        y_size: usize,
        z_size: usize,
        mut f: impl FnMut(usize, usize) -> usize,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(x_size * y_size);
        for x in 0..x_size {
            for y in 0..y_size {
                values.push(f(x, y) as u32);
            }
        }
        Self::new(x_size, y_size, z_size, values)
    }

    pub fn value(&self, x: usize, y: usize) -> usize {
        self.values[x * self.y_size + y] as usize
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }
}

/// Largest input length for which the equality table is built.
pub const MAX_EQUALITY_BITS: u32 = 12;

/// `EQ_n(x, y) = 1` iff `x = y`, on `n`-bit inputs.
pub fn make_equality(n: u32) -> Result<FunctionTable> {
    if n > MAX_EQUALITY_BITS {
        return Err(Error::domain(format!(
            "equality on {n} bits is too large to enumerate (at most {MAX_EQUALITY_BITS})"
        )));
    }
    let size = 1usize << n;
    FunctionTable::from_fn(size, size, 2, |x, y| (x == y) as usize)
}

/// Realizes a stochastic map `x ↦ rows[x]` as a deterministic table over one
/// shared random variable, by refining all row CDFs on a common partition of
/// `[0, 1)`. Returns the cell distribution weights and `map[x][cell]`.
pub fn realize_rows(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<u32>>) {
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    for row in rows {
        let mut c = 0.0;
        for &p in row {
            c += p;
            if c > 0.0 && c < 1.0 {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut weights = Vec::new();
    let mut mids = Vec::new();
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            weights.push(w[1] - w[0]);
            mids.push(0.5 * (w[0] + w[1]));
        }
    }
    let map = rows
        .iter()
        .map(|row| {
            mids.iter()
                .map(|&u| {
                    let mut c = 0.0;
                    let mut last = 0;
                    for (m, &p) in row.iter().enumerate() {
                        if p > 0.0 {
                            last = m;
                        }
                        c += p;
                        if u < c {
                            return m as u32;
                        }
                    }
                    last as u32
                })
                .collect()
        })
        .collect();
    (weights, map)
}

/// Renormalizes refinement weights into a distribution over cell indices.
pub(crate) fn cell_dist(weights: &[f64]) -> Result<Dist> {
    Dist::from_weights(crate::infotheory::Alphabet::indexed(weights.len()), weights)
}

#[cfg(test)]
mod tests;
