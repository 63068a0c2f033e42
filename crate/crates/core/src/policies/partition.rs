use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::Interval;

/// `n` equal cells of `[p_min, 1]`, right-open except the last, which is
/// closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformPartition {
    cells: Vec<Interval>,
}

impl UniformPartition {
    pub fn new(p_min: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("a partition needs at least one cell"));
        }
        Ok(Self {
            cells: Interval::new(p_min, 1.0)?.split(n),
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Interval] {
        &self.cells
    }

    pub fn cell(&self, j: usize) -> &Interval {
        &self.cells[j]
    }

    /// Index of the cell holding `p`, or `None` outside `[p_min, 1]`.
    pub fn locate(&self, p: f64) -> Option<usize> {
        let n = self.cells.len();
        let lo = self.cells[0].a();
        if !(p >= lo && p <= 1.0) {
            return None;
        }
        let w = self.cells[0].width();
        let mut j = (((p - lo) / w).floor() as usize).min(n - 1);
        while j > 0 && p < self.cells[j].a() {
            j -= 1;
        }
        while j + 1 < n && p >= self.cells[j].b() {
            j += 1;
        }
        Some(j)
    }
}
