//! Empirical transition matrices, global and per temporal chunk.
//!
//! Index ranges are 0-based and half-open. Only consecutive pairs whose both
//! ends fall inside the range are counted, so a chunk of `n` steps contributes
//! exactly `n - 1` transitions and the pair straddling a chunk boundary is
//! counted nowhere.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::binning::StateSequence;
use crate::error::{MtfError, Result};

/// Raw transition tallies for a `bins x bins` state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounts {
    bins: usize,
    counts: Vec<u64>,
    row_totals: Vec<u64>,
}

impl TransitionCounts {
    /// Builds tallies from an explicit row-major count table.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let bins = rows.len();
        if rows.iter().any(|r| r.len() != bins) {
            return Err(MtfError::DimensionMismatch(
                "count table must be square".into(),
            ));
        }
        let counts: Vec<u64> = rows.iter().flatten().copied().collect();
        let row_totals = rows.iter().map(|r| r.iter().sum()).collect();
        Ok(Self {
            bins,
            counts,
            row_totals,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn get(&self, from: usize, to: usize) -> u64 {
        self.counts[from * self.bins + to]
    }

    pub fn row(&self, from: usize) -> &[u64] {
        &self.counts[from * self.bins..(from + 1) * self.bins]
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    /// Number of consecutive pairs that were counted.
    pub fn total(&self) -> u64 {
        self.row_totals.iter().sum()
    }
}

/// Tallies within-range transitions of `states`.
pub fn count_transitions(states: &StateSequence, range: Range<usize>) -> Result<TransitionCounts> {
    let len = states.len();
    if range.start >= range.end || range.end > len {
        return Err(MtfError::InvalidRange {
            start: range.start,
            end: range.end,
            len,
        });
    }
    let bins = states.bins();
    let mut counts = vec![0u64; bins * bins];
    let mut row_totals = vec![0u64; bins];
    for pair in states.states()[range].windows(2) {
        counts[pair[0] * bins + pair[1]] += 1;
        row_totals[pair[0]] += 1;
    }
    Ok(TransitionCounts {
        bins,
        counts,
        row_totals,
    })
}

/// What to do with a state that never leaves within the counted range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    Error,
    Uniform,
    #[default]
    Global,
}

/// Where a matrix row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowProvenance {
    Sampled,
    FallbackGlobal,
    FallbackUniform,
}

/// Row-stochastic `bins x bins` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    bins: usize,
    probs: Vec<f64>,
    provenance: Vec<RowProvenance>,
}

impl TransitionMatrix {
    /// Wraps explicit probabilities; every row is marked as sampled.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let bins = rows.len();
        if bins == 0 || rows.iter().any(|r| r.len() != bins) {
            return Err(MtfError::DimensionMismatch(
                "transition matrix must be square and non-empty".into(),
            ));
        }
        Ok(Self {
            bins,
            probs: rows.iter().flatten().copied().collect(),
            provenance: vec![RowProvenance::Sampled; bins],
        })
    }

    pub fn identity(bins: usize) -> Self {
        let mut probs = vec![0.0; bins * bins];
        for k in 0..bins {
            probs[k * bins + k] = 1.0;
        }
        Self {
            bins,
            probs,
            provenance: vec![RowProvenance::Sampled; bins],
        }
    }

    pub fn uniform(bins: usize) -> Self {
        Self {
            bins,
            probs: vec![1.0 / bins as f64; bins * bins],
            provenance: vec![RowProvenance::Sampled; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.probs[from * self.bins + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.probs[from * self.bins..(from + 1) * self.bins]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.bins)
    }

    pub fn provenance(&self) -> &[RowProvenance] {
        &self.provenance
    }

    /// States whose rows were substituted rather than estimated.
    pub fn fallback_rows(&self) -> Vec<usize> {
        self.provenance
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != RowProvenance::Sampled)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

/// Converts tallies into probabilities, applying `fallback` to empty rows.
pub fn normalize(
    counts: &TransitionCounts,
    fallback: Fallback,
    global: Option<&TransitionMatrix>,
) -> Result<TransitionMatrix> {
    let bins = counts.bins();
    if let Some(g) = global {
        if g.bins() != bins {
            return Err(MtfError::DimensionMismatch(format!(
                "global matrix has {} states, counts have {bins}",
                g.bins()
            )));
        }
    }
    let mut probs = Vec::with_capacity(bins * bins);
    let mut provenance = Vec::with_capacity(bins);
    for k in 0..bins {
        let total = counts.row_totals()[k];
        if total > 0 {
            let total = total as f64;
            probs.extend(counts.row(k).iter().map(|&c| c as f64 / total));
            provenance.push(RowProvenance::Sampled);
            continue;
        }
        match fallback {
            Fallback::Error => return Err(MtfError::UnsampledState { state: k }),
            Fallback::Uniform => {
                probs.extend(std::iter::repeat_n(1.0 / bins as f64, bins));
                provenance.push(RowProvenance::FallbackUniform);
            }
            Fallback::Global => {
                let g = global.ok_or(MtfError::MissingGlobalMatrix)?;
                probs.extend_from_slice(g.row(k));
                provenance.push(RowProvenance::FallbackGlobal);
            }
        }
    }
    Ok(TransitionMatrix {
        bins,
        probs,
        provenance,
    })
}

/// Whole-series transition matrix. A global fallback has nothing further to
/// fall back on, so it degrades to uniform rows here.
pub fn global_matrix(states: &StateSequence, fallback: Fallback) -> Result<TransitionMatrix> {
    let counts = count_transitions(states, 0..states.len())?;
    let policy = match fallback {
        Fallback::Global => Fallback::Uniform,
        other => other,
    };
    normalize(&counts, policy, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ChunkPolicy {
    /// Requires `K | T`.
    #[default]
    Strict,
    /// The first `T mod K` chunks get one extra step.
    NearEqual,
}

/// Partition of `0..len` into contiguous, time-ordered chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    len: usize,
    ranges: Vec<Range<usize>>,
    chunk_of: Vec<usize>,
}

impl ChunkPlan {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn chunks(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    /// Chunk containing time step `t`.
    pub fn chunk_of(&self, t: usize) -> usize {
        self.chunk_of[t]
    }
}

pub fn make_chunks(len: usize, chunks: usize, policy: ChunkPolicy) -> Result<ChunkPlan> {
    if chunks == 0 || chunks > len / 2 {
        return Err(MtfError::ChunkTooSmall { len, chunks });
    }
    if policy == ChunkPolicy::Strict && !len.is_multiple_of(chunks) {
        return Err(MtfError::NotDivisible { len, chunks });
    }
    let base = len / chunks;
    let extra = len % chunks;
    let mut ranges = Vec::with_capacity(chunks);
    let mut chunk_of = Vec::with_capacity(len);
    let mut start = 0;
    for k in 0..chunks {
        let size = base + usize::from(k < extra);
        ranges.push(start..start + size);
        chunk_of.extend(std::iter::repeat_n(k, size));
        start += size;
    }
    Ok(ChunkPlan {
        len,
        ranges,
        chunk_of,
    })
}

/// One matrix per chunk, each estimated from within-chunk pairs only.
pub fn local_matrices(
    states: &StateSequence,
    plan: &ChunkPlan,
    fallback: Fallback,
    global: Option<&TransitionMatrix>,
) -> Result<Vec<TransitionMatrix>> {
    if plan.len() != states.len() {
        return Err(MtfError::DimensionMismatch(format!(
            "chunk plan covers {} steps, state sequence has {}",
            plan.len(),
            states.len()
        )));
    }
    plan.ranges()
        .iter()
        .map(|r| normalize(&count_transitions(states, r.clone())?, fallback, global))
        .collect()
}
