//! Markov Transition Field (MTF) and Temporal Markov Transition Field (TMTF)
//! encodings of univariate time series.
//!
//! The pipeline is: [`binning::assign_states`] turns a series into equal-count
//! quantile states, [`transition`] estimates global and per-chunk transition
//! matrices, and [`field`] assembles the `T x T` images. [`diagnostics`] labels
//! matrices by regime signature, [`synth`] generates reproducible test series,
//! and [`io`] handles CSV input plus NPY/PGM/CSV export.
//!
//! ```
//! use tmtf::{encode, EncodeOptions, TimeSeries};
//!
//! let x = TimeSeries::new(vec![12., 85., 45., 18., 78., 42., 15., 22., 55., 48., 82., 91.])?;
//! let img = encode(&x, 3, &EncodeOptions::temporal(2))?;
//! assert_eq!(img.side(), 12);
//! # Ok::<(), tmtf::MtfError>(())
//! ```

pub mod binning;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod io;
pub mod synth;
pub mod transition;

pub use binning::{assign_states, BinSpec, StateSequence, TimeSeries};
pub use diagnostics::{check_plan, max_chunks, summarize, PlanCheck, RegimeLabel, RegimeSummary};
pub use error::{ErrorClass, MtfError, Result};
pub use field::{
    distinct_rows, encode, global_mtf, multi_resolution, pool, tmtf, ChannelStack, EncodeOptions,
    FieldImage, FieldKind, Mode,
};
pub use synth::{generate, GeneratorSpec, Process};
pub use transition::{
    count_transitions, global_matrix, local_matrices, make_chunks, normalize, ChunkPlan,
    ChunkPolicy, Fallback, TransitionCounts, TransitionMatrix,
};
