//! Balls-in-bins counting process and tie bookkeeping.
//!
//! Basis-vector issues hit coordinates like balls thrown into bins, and the
//! polarization behavior of equal-support states is governed by when bin
//! counts tie at the running maximum. This module simulates the count paths
//! and extracts those tie times.

use super::DiagnosticsError;
use rand::Rng;

/// Full count history of one run: row `t` holds the counts after `t` balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallsInBinsPath {
    bins: usize,
    steps: u64,
    counts: Vec<u64>,
}

impl BallsInBinsPath {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Counts after `t` balls, `t = 0..=steps`.
    pub fn counts_at(&self, t: u64) -> &[u64] {
        let start = usize::try_from(t).expect("path fits in memory") * self.bins;
        &self.counts[start..start + self.bins]
    }
}

/// Throws `steps` balls one at a time. `probs = None` means uniform bins;
/// otherwise one probability per bin.
pub fn balls_in_bins_simulate<R: Rng + ?Sized>(
    bins: usize,
    probs: Option<&[f64]>,
    steps: u64,
    rng: &mut R,
) -> Result<BallsInBinsPath, DiagnosticsError> {
    if bins == 0 {
        return Err(DiagnosticsError::NoBins);
    }
    let cumulative = match probs {
        None => None,
        Some(p) => {
            if p.len() != bins {
                return Err(DiagnosticsError::NotEnoughCategories { got: p.len() });
            }
            let sum: f64 = p.iter().sum();
            if p.iter().any(|q| !q.is_finite() || *q < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(DiagnosticsError::InvalidBinProbabilities { sum });
            }
            let mut acc = 0.0;
            let mut cdf: Vec<f64> = p
                .iter()
                .map(|q| {
                    acc += q;
                    acc
                })
                .collect();
            *cdf.last_mut().expect("bins >= 1") = f64::INFINITY;
            Some(cdf)
        }
    };
    let rows = usize::try_from(steps + 1).expect("path fits in memory");
    let mut counts = vec![0u64; rows * bins];
    let mut current = vec![0u64; bins];
    for t in 1..=steps {
        let bin = match &cumulative {
            None => rng.random_range(0..bins),
            Some(cdf) => {
                let u = rng.random::<f64>();
                cdf.partition_point(|c| *c <= u).min(bins - 1)
            }
        };
        current[bin] += 1;
        let start = usize::try_from(t).expect("checked above") * bins;
        counts[start..start + bins].copy_from_slice(&current);
    }
    Ok(BallsInBinsPath { bins, steps, counts })
}

/// Tie times extracted from a count path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieCensus {
    bins: usize,
    steps: u64,
    /// Per unordered pair `(i, j)`, the last `t` at which both bins hold the
    /// running maximum simultaneously. `t = 0` always qualifies.
    last_joint_max_tie: Vec<Option<u64>>,
    /// Per bin, the last `t` at which it holds the running maximum.
    last_max_time: Vec<Option<u64>>,
}

impl TieCensus {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Last time bins `i` and `j` were jointly at the maximum.
    pub fn joint(&self, i: usize, j: usize) -> Option<u64> {
        assert!(i < j && j < self.bins, "need i < j < bins, got ({i}, {j})");
        self.last_joint_max_tie[pair_index(self.bins, i, j)]
    }

    pub fn last_max_time(&self, bin: usize) -> Option<u64> {
        self.last_max_time[bin]
    }

    /// Last time any two bins were jointly at the maximum.
    pub fn last_any_joint(&self) -> Option<u64> {
        self.last_joint_max_tie.iter().flatten().max().copied()
    }
}

fn pair_index(bins: usize, i: usize, j: usize) -> usize {
    i * bins - i * (i + 1) / 2 + (j - i - 1)
}

/// Scans a path and records, per bin pair, the latest joint-maximum tie.
pub fn tie_event_census(path: &BallsInBinsPath) -> TieCensus {
    let bins = path.bins;
    let mut last_joint_max_tie = vec![None; bins * (bins - 1) / 2];
    let mut last_max_time = vec![None; bins];
    for t in 0..=path.steps {
        let counts = path.counts_at(t);
        let max = *counts.iter().max().expect("bins >= 1");
        for i in 0..bins {
            if counts[i] != max {
                continue;
            }
            last_max_time[i] = Some(t);
            for j in (i + 1)..bins {
                if counts[j] == max {
                    last_joint_max_tie[pair_index(bins, i, j)] = Some(t);
                }
            }
        }
    }
    TieCensus { bins, steps: path.steps, last_joint_max_tie, last_max_time }
}
