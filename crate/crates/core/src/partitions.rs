//! Interval partitions of `[0, 1]`.
//!
//! Cells are stored left to right and indexed from zero in the API; the
//! text and JSON artifacts written by the CLI number them from one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    breakpoints: Vec<f64>,
    delta: f64,
    ratio_k: f64,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    breakpoints: Vec<f64>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;
    fn try_from(r: PartitionRepr) -> Result<Self> {
        Partition::new(r.breakpoints)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr { breakpoints: p.breakpoints }
    }
}

impl Partition {
    /// Validates `0 = b_0 < b_1 < ... < b_n = 1`.
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidParameter("a partition needs at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidParameter("breakpoints must run from 0 to 1".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(format!(
                "breakpoints not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let (min, max) = breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), l| (lo.min(l), hi.max(l)));
        Ok(Partition { breakpoints, delta: max, ratio_k: max / min })
    }

    /// `n` cells of length `1/n`, breakpoints computed as `i/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("cell count must be positive".into()));
        }
        let breakpoints = (0..=n).map(|i| i as f64 / n as f64).collect();
        Partition::new(breakpoints)
    }

    /// `n` cells with pseudo-random lengths drawn uniformly from
    /// `[1/(n sqrt K), sqrt K / n]`, then rescaled to sum to one. Any two
    /// cells differ in length by a factor of at most `K`.
    pub fn quasi_uniform(n: usize, k: f64, seed: u64) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("ratio bound K must be >= 1, got {k}")));
        }
        if k == 1.0 || n == 1 {
            return Partition::uniform(n);
        }
        if n == 0 {
            return Err(Error::InvalidParameter("cell count must be positive".into()));
        }
        let root = k.sqrt();
        // Shrink the sampling range slightly so the ratio bound survives
        // the rescaling and cumulative sums.
        let lo = (1.0 + 1e-9) / root;
        let hi = root * (1.0 - 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
        let total: f64 = lengths.iter().sum();
        let mut breakpoints = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        breakpoints.push(0.0);
        for l in &lengths[..n - 1] {
            acc += l;
            breakpoints.push(acc / total);
        }
        breakpoints.push(1.0);
        Partition::new(breakpoints)
    }

    /// Splits every cell into `factor` equal pieces.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidParameter("refinement factor must be positive".into()));
        }
        let mut b = Vec::with_capacity(self.n_cells() * factor + 1);
        for w in self.breakpoints.windows(2) {
            for s in 0..factor {
                b.push(w[0] + (w[1] - w[0]) * s as f64 / factor as f64);
            }
        }
        b.push(1.0);
        Partition::new(b)
    }

    pub fn n_cells(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Diameter: the largest cell length.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Largest over smallest cell length.
    pub fn ratio_k(&self) -> f64 {
        self.ratio_k
    }

    pub fn cell(&self, i: usize) -> Interval {
        Interval { lo: self.breakpoints[i], hi: self.breakpoints[i + 1] }
    }

    pub fn cell_len(&self, i: usize) -> f64 {
        self.breakpoints[i + 1] - self.breakpoints[i]
    }

    pub fn cells(&self) -> impl Iterator<Item = Interval> + '_ {
        self.breakpoints.windows(2).map(|w| Interval { lo: w[0], hi: w[1] })
    }

    /// Zero-based index of the cell `[b_i, b_{i+1})` containing `x`; the
    /// last cell is closed.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(x));
        }
        Ok(self.locate_clamped(x))
    }

    pub(crate) fn locate_clamped(&self, x: f64) -> usize {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        idx.saturating_sub(1).min(self.n_cells() - 1)
    }

    /// Cells with a nondegenerate overlap with `iv`, as an index range.
    pub fn overlapping(&self, iv: &Interval) -> std::ops::Range<usize> {
        let start = self.breakpoints[1..].partition_point(|&b| b <= iv.lo);
        let end = self.breakpoints[..self.n_cells()].partition_point(|&b| b < iv.hi);
        start..end.max(start)
    }
}
