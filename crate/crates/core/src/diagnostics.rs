//! Regime signatures of transition matrices and the chunk-count guideline.

use serde::{Deserialize, Serialize};

use crate::transition::TransitionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    Persistent,
    MeanReverting,
    TrendingUp,
    TrendingDown,
    UniformLike,
    Mixed,
}

/// Labeling thresholds. Values written as multiples of `1/Q` scale with the
/// bin count; the rest are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelThresholds {
    /// Uniform if every entry is within `uniform_dev_factor / Q` of `1/Q`...
    pub uniform_dev_factor: f64,
    /// ...and the implied lag-1 state correlation is within this of zero.
    pub uniform_max_corr: f64,
    /// Trending needs the backward mass at or below this.
    pub trend_max_reverse: f64,
    /// Trending needs forward mass strictly above this multiple of backward mass.
    pub trend_dominance: f64,
    /// Persistent needs diagonal mass of at least `persistent_diag_factor / Q`.
    pub persistent_diag_factor: f64,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        Self {
            uniform_dev_factor: 0.5,
            uniform_max_corr: 0.05,
            trend_max_reverse: 0.05,
            trend_dominance: 2.0,
            persistent_diag_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    /// Mean of the diagonal.
    pub diag_mass: f64,
    /// Sum of strictly-upper entries over Q.
    pub upper_mass: f64,
    /// Sum of strictly-lower entries over Q.
    pub lower_mass: f64,
    /// Largest `|W_kl - 1/Q|`.
    pub uniformity_dev: f64,
    /// Pearson correlation of `(state_t, state_t+1)` under the joint law
    /// `P(k, l) = W_kl / Q`, i.e. equal occupancy of all states.
    pub lag1_corr: f64,
    pub label: RegimeLabel,
    /// States whose rows were substituted rather than estimated.
    pub fallback_rows: Vec<usize>,
}

pub fn summarize(w: &TransitionMatrix) -> RegimeSummary {
    summarize_with(w, &LabelThresholds::default())
}

pub fn summarize_with(w: &TransitionMatrix, th: &LabelThresholds) -> RegimeSummary {
    let q = w.bins();
    let qf = q as f64;
    let (mut diag, mut upper, mut lower) = (0.0, 0.0, 0.0);
    let mut dev: f64 = 0.0;
    for (k, row) in w.rows().enumerate() {
        for (l, &p) in row.iter().enumerate() {
            match l.cmp(&k) {
                std::cmp::Ordering::Equal => diag += p,
                std::cmp::Ordering::Greater => upper += p,
                std::cmp::Ordering::Less => lower += p,
            }
            dev = dev.max((p - 1.0 / qf).abs());
        }
    }
    let mut summary = RegimeSummary {
        diag_mass: diag / qf,
        upper_mass: upper / qf,
        lower_mass: lower / qf,
        uniformity_dev: dev,
        lag1_corr: lag1_corr(w),
        label: RegimeLabel::Mixed,
        fallback_rows: w.fallback_rows(),
    };
    summary.label = label(&summary, q, th);
    summary
}

fn lag1_corr(w: &TransitionMatrix) -> f64 {
    let q = w.bins();
    let p = 1.0 / q as f64;
    let from_mean = (0..q).map(|k| k as f64 * p).sum::<f64>();
    let to_marginal: Vec<f64> = (0..q)
        .map(|l| (0..q).map(|k| w.get(k, l) * p).sum())
        .collect();
    let to_mean: f64 = to_marginal
        .iter()
        .enumerate()
        .map(|(l, m)| l as f64 * m)
        .sum();
    let from_var: f64 = (0..q).map(|k| p * (k as f64 - from_mean).powi(2)).sum();
    let to_var: f64 = to_marginal
        .iter()
        .enumerate()
        .map(|(l, m)| m * (l as f64 - to_mean).powi(2))
        .sum();
    let mut cov = 0.0;
    for (k, row) in w.rows().enumerate() {
        for (l, &wkl) in row.iter().enumerate() {
            cov += p * wkl * (k as f64 - from_mean) * (l as f64 - to_mean);
        }
    }
    // an absorbing single destination has no spread to correlate with
    if to_var <= f64::EPSILON {
        return 0.0;
    }
    cov / (from_var * to_var).sqrt()
}

/// Pure function of the summary statistics. First match wins:
/// uniform-like, trending up/down, persistent, mean-reverting, mixed.
fn label(s: &RegimeSummary, q: usize, th: &LabelThresholds) -> RegimeLabel {
    let qf = q as f64;
    if s.uniformity_dev <= th.uniform_dev_factor / qf && s.lag1_corr.abs() <= th.uniform_max_corr {
        return RegimeLabel::UniformLike;
    }
    if s.lower_mass <= th.trend_max_reverse && s.upper_mass > th.trend_dominance * s.lower_mass {
        return RegimeLabel::TrendingUp;
    }
    if s.upper_mass <= th.trend_max_reverse && s.lower_mass > th.trend_dominance * s.upper_mass {
        return RegimeLabel::TrendingDown;
    }
    let persistent_floor = th.persistent_diag_factor / qf;
    if s.diag_mass >= persistent_floor && s.diag_mass >= s.upper_mass.max(s.lower_mass) {
        return RegimeLabel::Persistent;
    }
    if s.diag_mass < persistent_floor {
        return RegimeLabel::MeanReverting;
    }
    RegimeLabel::Mixed
}

/// Largest chunk count satisfying `T/K >= 5Q^2 + 1`, never below 1.
pub fn max_chunks(len: usize, bins: usize) -> usize {
    (len / (5 * bins * bins + 1)).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Pass,
    Warn,
}

/// Advisory check of a `(T, Q, K)` configuration against the
/// five-transitions-per-cell rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCheck {
    #[serde(rename = "T")]
    pub len: usize,
    #[serde(rename = "Q")]
    pub bins: usize,
    #[serde(rename = "K")]
    pub chunks: usize,
    /// Transitions in the smallest chunk, `floor(T/K) - 1`.
    pub per_chunk_transitions: usize,
    /// `5 Q^2`.
    pub required_min: usize,
    pub status: PlanStatus,
}

impl PlanCheck {
    pub fn message(&self) -> String {
        format!(
            "T={} Q={} K={}: {} transitions per chunk, guideline asks for {} (max K = {})",
            self.len,
            self.bins,
            self.chunks,
            self.per_chunk_transitions,
            self.required_min,
            max_chunks(self.len, self.bins)
        )
    }
}

pub fn check_plan(len: usize, bins: usize, chunks: usize) -> PlanCheck {
    let per_chunk_transitions = (len / chunks.max(1)).saturating_sub(1);
    let required_min = 5 * bins * bins;
    PlanCheck {
        len,
        bins,
        chunks,
        per_chunk_transitions,
        required_min,
        status: if per_chunk_transitions >= required_min {
            PlanStatus::Pass
        } else {
            PlanStatus::Warn
        },
    }
}
