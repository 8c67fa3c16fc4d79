//! Equal-count quantile binning.
//!
//! Observations are ranked by `(value, time index)` and the ranks are cut into
//! `Q` consecutive blocks. The first `T mod Q` blocks receive one extra
//! observation. States are 0-based: state 0 holds the smallest values.
//!
//! Because assignment looks only at ranks, any strictly increasing transform of
//! the values produces the same state sequence, and tied values never break the
//! equal-count property.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{MtfError, Result};

/// A validated univariate series: at least two finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(MtfError::SeriesTooShort { len: values.len() });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(MtfError::NonFinite { index, value });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Applies `f` to every value, revalidating the result.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.0.iter().map(|&v| f(v)).collect())
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = MtfError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    RankBased,
}

/// Bin metadata. `boundaries[0]` is the series minimum and `boundaries[k + 1]`
/// the largest value placed in state `k`. These are reported for inspection
/// only; assignment never consults them. With tied values neighbouring
/// boundaries can coincide, so the sequence is nondecreasing rather than
/// strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub bins: usize,
    pub boundaries: Vec<f64>,
    pub mode: AssignmentMode,
}

impl BinSpec {
    /// Number of observations assigned to `state` for a series of length `len`.
    pub fn block_size(len: usize, bins: usize, state: usize) -> usize {
        len / bins + usize::from(state < len % bins)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    states: Vec<usize>,
    bins: BinSpec,
}

impl StateSequence {
    /// Wraps an explicit state sequence, e.g. one taken from a worked example.
    /// No boundary information is available, so the boundaries are the state
    /// indices themselves.
    pub fn from_states(states: Vec<usize>, bins: usize) -> Result<Self> {
        if bins < 2 || bins > states.len() {
            return Err(MtfError::InvalidBinCount {
                bins,
                len: states.len(),
            });
        }
        if let Some(&bad) = states.iter().find(|&&s| s >= bins) {
            return Err(MtfError::DimensionMismatch(format!(
                "state {bad} outside 0..{bins}"
            )));
        }
        Ok(Self {
            states,
            bins: BinSpec {
                bins,
                boundaries: (0..=bins).map(|k| k as f64).collect(),
                mode: AssignmentMode::RankBased,
            },
        })
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn bins(&self) -> usize {
        self.bins.bins
    }

    pub fn bin_spec(&self) -> &BinSpec {
        &self.bins
    }

    /// How many time steps sit in each state.
    pub fn occupancy(&self) -> Vec<usize> {
        let mut occ = vec![0; self.bins()];
        for &s in &self.states {
            occ[s] += 1;
        }
        occ
    }
}

/// Assigns every observation to one of `bins` equal-count quantile states.
pub fn assign_states(series: &TimeSeries, bins: usize) -> Result<StateSequence> {
    let values = series.values();
    let len = values.len();
    if bins < 2 || bins > len {
        return Err(MtfError::InvalidBinCount { bins, len });
    }

    let mut order: Vec<usize> = (0..len).collect();
    // Values are finite, so partial_cmp never fails; ties fall back to time order.
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut states = vec![0; len];
    let mut boundaries = Vec::with_capacity(bins + 1);
    boundaries.push(values[order[0]]);
    let mut ranks = order.iter();
    for state in 0..bins {
        let mut last = None;
        for &t in ranks.by_ref().take(BinSpec::block_size(len, bins, state)) {
            states[t] = state;
            last = Some(values[t]);
        }
        // Every block is non-empty because bins <= len.
        boundaries.push(last.expect("non-empty bin"));
    }

    Ok(StateSequence {
        states,
        bins: BinSpec {
            bins,
            boundaries,
            mode: AssignmentMode::RankBased,
        },
    })
}
