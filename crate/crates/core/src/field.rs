//! Assembly of global and temporal transition-field images.
//!
//! Every image row is a bitwise copy of a precomputed template: for chunk `c`
//! and state `k`, the template is `(W_c[k][b_j])_j` over all columns `j`.
//! Rows that share a chunk and a state are therefore identical bit for bit,
//! and the chunk only ever selects the matrix for the row index. Columns always
//! index the whole-series state sequence.

use serde::{Deserialize, Serialize};

use crate::binning::{assign_states, StateSequence, TimeSeries};
use crate::error::{MtfError, Result};
use crate::transition::{
    global_matrix, local_matrices, make_chunks, ChunkPlan, ChunkPolicy, Fallback, TransitionMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    GlobalMtf,
    Tmtf,
}

/// Dense row-major square image with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldImage {
    entries: Vec<f64>,
    side: usize,
    kind: FieldKind,
    bins: usize,
    chunks: usize,
}

impl FieldImage {
    /// Wraps raw row-major data. Used for tests and for pooling output.
    pub fn from_entries(
        entries: Vec<f64>,
        side: usize,
        kind: FieldKind,
        bins: usize,
        chunks: usize,
    ) -> Result<Self> {
        if entries.len() != side * side {
            return Err(MtfError::DimensionMismatch(format!(
                "{} entries cannot form a {side}x{side} image",
                entries.len()
            )));
        }
        Ok(Self {
            entries,
            side,
            kind,
            bins,
            chunks,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn chunks(&self) -> usize {
        self.chunks
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.side + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.side..(i + 1) * self.side]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.side)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().sum::<f64>() / self.entries.len() as f64
    }
}

fn check_matrix(states: &StateSequence, w: &TransitionMatrix) -> Result<()> {
    if w.bins() != states.bins() {
        return Err(MtfError::DimensionMismatch(format!(
            "matrix has {} states, sequence uses {}",
            w.bins(),
            states.bins()
        )));
    }
    Ok(())
}

fn template(states: &[usize], w: &TransitionMatrix, from: usize) -> Vec<f64> {
    let row = w.row(from);
    states.iter().map(|&to| row[to]).collect()
}

/// Global MTF: entry `(i, j)` is `W[b_i][b_j]`.
pub fn global_mtf(states: &StateSequence, w: &TransitionMatrix) -> Result<FieldImage> {
    check_matrix(states, w)?;
    let b = states.states();
    let side = b.len();
    let templates: Vec<Vec<f64>> = (0..w.bins()).map(|k| template(b, w, k)).collect();
    let mut entries = Vec::with_capacity(side * side);
    for &k in b {
        entries.extend_from_slice(&templates[k]);
    }
    Ok(FieldImage {
        entries,
        side,
        kind: FieldKind::GlobalMtf,
        bins: states.bins(),
        chunks: 1,
    })
}

/// Temporal MTF: entry `(i, j)` is `W_{chunk(i)}[b_i][b_j]`.
pub fn tmtf(
    states: &StateSequence,
    plan: &ChunkPlan,
    locals: &[TransitionMatrix],
) -> Result<FieldImage> {
    if locals.len() != plan.chunks() {
        return Err(MtfError::DimensionMismatch(format!(
            "{} local matrices for {} chunks",
            locals.len(),
            plan.chunks()
        )));
    }
    if plan.len() != states.len() {
        return Err(MtfError::DimensionMismatch(format!(
            "chunk plan covers {} steps, state sequence has {}",
            plan.len(),
            states.len()
        )));
    }
    for w in locals {
        check_matrix(states, w)?;
    }

    let b = states.states();
    let side = b.len();
    let mut entries = Vec::with_capacity(side * side);
    for (range, w) in plan.ranges().iter().zip(locals) {
        let mut templates: Vec<Option<Vec<f64>>> = vec![None; w.bins()];
        for &k in &b[range.clone()] {
            let row = templates[k].get_or_insert_with(|| template(b, w, k));
            entries.extend_from_slice(row);
        }
    }
    Ok(FieldImage {
        entries,
        side,
        kind: FieldKind::Tmtf,
        bins: states.bins(),
        chunks: plan.chunks(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Global,
    #[default]
    Temporal,
}

/// Pipeline settings shared by every resolution of a stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeOptions {
    pub chunks: usize,
    pub chunk_policy: ChunkPolicy,
    pub fallback: Fallback,
    pub mode: Mode,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            chunks: 4,
            chunk_policy: ChunkPolicy::Strict,
            fallback: Fallback::Global,
            mode: Mode::Temporal,
        }
    }
}

impl EncodeOptions {
    pub fn temporal(chunks: usize) -> Self {
        Self {
            chunks,
            ..Self::default()
        }
    }

    pub fn global() -> Self {
        Self {
            chunks: 1,
            mode: Mode::Global,
            ..Self::default()
        }
    }

    /// Chunk count actually used; global mode always has one chunk.
    pub fn effective_chunks(&self) -> usize {
        match self.mode {
            Mode::Global => 1,
            Mode::Temporal => self.chunks,
        }
    }

    fn plan(&self, len: usize) -> Result<ChunkPlan> {
        make_chunks(len, self.effective_chunks(), self.chunk_policy)
    }
}

/// Runs states -> matrices -> image for an already-binned series.
pub fn encode_states(
    states: &StateSequence,
    plan: &ChunkPlan,
    opts: &EncodeOptions,
) -> Result<FieldImage> {
    let global = global_matrix(states, opts.fallback)?;
    match opts.mode {
        Mode::Global => global_mtf(states, &global),
        Mode::Temporal => {
            let locals = local_matrices(states, plan, opts.fallback, Some(&global))?;
            tmtf(states, plan, &locals)
        }
    }
}

/// Full pipeline for a single bin count.
pub fn encode(series: &TimeSeries, bins: usize, opts: &EncodeOptions) -> Result<FieldImage> {
    let plan = opts.plan(series.len())?;
    let states = assign_states(series, bins)?;
    encode_states(&states, &plan, opts)
}

/// Images of one series at several bin counts, stacked as channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStack {
    channels: Vec<FieldImage>,
    bins: Vec<usize>,
    chunks: usize,
}

impl ChannelStack {
    pub fn channels(&self) -> &[FieldImage] {
        &self.channels
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn chunks(&self) -> usize {
        self.chunks
    }

    pub fn side(&self) -> usize {
        self.channels[0].side()
    }

    /// `(R, T, T)`.
    pub fn shape(&self) -> [usize; 3] {
        [self.channels.len(), self.side(), self.side()]
    }

    /// Channel-major contiguous copy of all entries.
    pub fn to_contiguous(&self) -> Vec<f64> {
        self.channels
            .iter()
            .flat_map(|c| c.entries().iter().copied())
            .collect()
    }

    pub fn into_channels(self) -> Vec<FieldImage> {
        self.channels
    }
}

/// Encodes `series` once per entry of `bins_list`, preserving order. All
/// preconditions are checked before any image is built.
pub fn multi_resolution(
    series: &TimeSeries,
    bins_list: &[usize],
    opts: &EncodeOptions,
) -> Result<ChannelStack> {
    if bins_list.is_empty() {
        return Err(MtfError::InvalidConfig(
            "at least one bin count is required".into(),
        ));
    }
    let len = series.len();
    if let Some(&bins) = bins_list.iter().find(|&&q| q < 2 || q > len) {
        return Err(MtfError::InvalidBinCount { bins, len });
    }
    let plan = opts.plan(len)?;
    let channels = bins_list
        .iter()
        .map(|&q| encode_states(&assign_states(series, q)?, &plan, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelStack {
        channels,
        bins: bins_list.to_vec(),
        chunks: plan.chunks(),
    })
}

/// Area-weighted average pooling down to `size x size`.
///
/// Output cell `a` covers the input interval `[a*T/S, (a+1)*T/S)` along each
/// axis; input cells that straddle a block edge contribute in proportion to
/// their overlap. Overlaps are integers in units of `1/S`, so when `S | T` this
/// is plain block averaging.
pub fn pool(img: &FieldImage, size: usize) -> Result<FieldImage> {
    let side = img.side();
    if size == 0 || size > side {
        return Err(MtfError::PoolSize { size, side });
    }
    if size == side {
        return Ok(img.clone());
    }

    // weights[a] lists (input index, overlap) for output index a
    let weights: Vec<Vec<(usize, usize)>> = (0..size)
        .map(|a| {
            let lo = a * side;
            let hi = (a + 1) * side;
            (lo / size..hi.div_ceil(size))
                .filter_map(|i| {
                    let overlap = hi.min((i + 1) * size).saturating_sub(lo.max(i * size));
                    (overlap > 0).then_some((i, overlap))
                })
                .collect()
        })
        .collect();

    // Reduce rows first, then columns.
    let mut partial = vec![0.0; size * side];
    for (a, wa) in weights.iter().enumerate() {
        let out = &mut partial[a * side..(a + 1) * side];
        for &(i, w) in wa {
            let w = w as f64;
            for (o, &v) in out.iter_mut().zip(img.row(i)) {
                *o += w * v;
            }
        }
    }
    let norm = (side * side) as f64;
    let mut entries = vec![0.0; size * size];
    for a in 0..size {
        let row = &partial[a * side..(a + 1) * side];
        for (b, wb) in weights.iter().enumerate() {
            let s: f64 = wb.iter().map(|&(j, w)| w as f64 * row[j]).sum();
            entries[a * size + b] = (s / norm).clamp(0.0, 1.0);
        }
    }
    FieldImage::from_entries(entries, size, img.kind(), img.bins(), img.chunks())
}

/// Number of row patterns. Rows are grouped greedily: each row joins the first
/// earlier representative whose entrywise difference never exceeds `tol`.
/// With `tol == 0` this is exact equality and classes are true equivalence
/// classes.
pub fn distinct_rows(img: &FieldImage, tol: f64) -> usize {
    if tol == 0.0 {
        let mut seen = std::collections::HashSet::new();
        for row in img.rows() {
            // +0.0 folds -0.0 into 0.0 so bit equality matches numeric equality
            let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
            seen.insert(key);
        }
        return seen.len();
    }
    let mut reps: Vec<&[f64]> = Vec::new();
    for row in img.rows() {
        let matched = reps
            .iter()
            .any(|r| r.iter().zip(row).all(|(a, b)| (a - b).abs() <= tol));
        if !matched {
            reps.push(row);
        }
    }
    reps.len()
}
