use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Partition;
use crate::{Error, Result};

/// Step function on a partition: `values[i]` on cell `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantFn {
    partition: Partition,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    left_breakpoint: f64,
    value: f64,
}

impl PiecewiseConstantFn {
    pub fn new(partition: Partition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.n() {
            return Err(Error::DimensionMismatch {
                expected: partition.n(),
                got: values.len(),
            });
        }
        Ok(Self { partition, values })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.values[self.partition.locate(x)]
    }

    /// `∫_a^b f` for `0 <= a <= b <= 1`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let bps = self.partition.breakpoints();
        let first = self.partition.locate(a);
        let mut acc = 0.0;
        for i in first..self.values.len() {
            let (l, r) = (bps[i], bps[i + 1]);
            if l >= b {
                break;
            }
            let len = r.min(b) - l.max(a);
            if len > 0.0 {
                acc += self.values[i] * len;
            }
        }
        acc
    }

    /// `‖f‖_{L^q}`, `q = ∞` allowed.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.partition.width(i) * v.abs().powf(q))
            .sum();
        s.powf(1.0 / q)
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Write `left_breakpoint,value` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for (i, &value) in self.values.iter().enumerate() {
            wtr.serialize(CsvRow {
                left_breakpoint: self.partition.breakpoints()[i],
                value,
            })?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv); the last cell ends at 1.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut bps = Vec::new();
        let mut values = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: CsvRow = row?;
            bps.push(row.left_breakpoint);
            values.push(row.value);
        }
        bps.push(1.0);
        Self::new(Partition::from_breakpoints(bps)?, values)
    }
}

/// Piecewise-constant injector: the step function equal to `v[i]` on cell `i`.
pub fn inject(v: &[f64], partition: &Partition) -> Result<PiecewiseConstantFn> {
    PiecewiseConstantFn::new(partition.clone(), v.to_vec())
}

/// Exact `‖f - h‖_{L²(0,1)}` by walking the merged breakpoint sets.
pub fn l2_distance_pwc(f: &PiecewiseConstantFn, h: &PiecewiseConstantFn) -> f64 {
    let (bf, bh) = (f.partition.breakpoints(), h.partition.breakpoints());
    let (mut i, mut j) = (0usize, 0usize);
    let mut left = 0.0f64;
    let mut acc = 0.0;
    while i < f.values.len() && j < h.values.len() {
        let right = bf[i + 1].min(bh[j + 1]);
        let d = f.values[i] - h.values[j];
        acc += d * d * (right - left);
        left = right;
        if bf[i + 1] == right {
            i += 1;
        }
        if bh[j + 1] == right {
            j += 1;
        }
    }
    acc.sqrt()
}
