use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered breakpoints `0 = x_0 < x_1 < … < x_n = 1` splitting `[0,1]`
/// into `n` cells. Cell `i` (0-based) is `[x_i, x_{i+1})`; the last cell is
/// closed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Partition {
    breakpoints: Vec<f64>,
}

impl Partition {
    pub fn equispaced(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("partition needs at least one cell"));
        }
        let nf = n as f64;
        let breakpoints = (0..=n).map(|i| i as f64 / nf).collect();
        Ok(Self { breakpoints })
    }

    pub fn from_breakpoints(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::invalid("partition needs at least two breakpoints"));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::invalid("partition must start at 0 and end at 1"));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite breakpoint"));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Degenerate(format!(
                "breakpoints not strictly increasing at {} -> {} (empty cell)",
                w[0], w[1]
            )));
        }
        Ok(Self { breakpoints })
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `(left, right)` ends of cell `i`.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.breakpoints[i + 1] - self.breakpoints[i]
    }

    /// `δ(n)`, the largest cell width.
    pub fn max_spacing(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the cell containing `x`, clamping to `[0,1]`.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.n();
        if x >= 1.0 {
            return n - 1;
        }
        // number of breakpoints <= x, minus one
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(n - 1)
    }

    pub fn is_equispaced(&self) -> bool {
        let n = self.n() as f64;
        self.breakpoints
            .iter()
            .enumerate()
            .all(|(i, &b)| b == i as f64 / n)
    }
}

impl TryFrom<Vec<f64>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_breakpoints(v)
    }
}

impl From<Partition> for Vec<f64> {
    fn from(p: Partition) -> Self {
        p.breakpoints
    }
}
