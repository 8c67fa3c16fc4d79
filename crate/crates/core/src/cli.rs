//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for usage errors (bad flags or parameters that
//! can never work), 2 for data errors (unreadable or invalid input).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::binning::{assign_states, TimeSeries};
use crate::diagnostics::{check_plan, summarize_with, LabelThresholds, PlanStatus};
use crate::error::{ErrorClass, MtfError, Result};
use crate::field::{multi_resolution, pool, EncodeOptions, FieldImage, Mode};
use crate::io;
use crate::synth::{generate, GeneratorSpec, Process};
use crate::transition::{global_matrix, local_matrices, make_chunks, ChunkPolicy, Fallback};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tmtf",
    version,
    about = "Markov transition field images of time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a series as one or more field images.
    Encode(EncodeArgs),
    /// Summarize transition matrices and check the chunk count.
    Diagnose(DiagnoseArgs),
    /// Write a synthetic series as single-column CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file holding the series.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    input: Option<PathBuf>,
    /// Column name or 0-based index (required for multi-column files).
    #[arg(long)]
    column: Option<String>,
    /// JSON generator config used instead of --input.
    #[arg(long)]
    synth: Option<PathBuf>,
    /// Overrides the generator seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Quantile bin count; repeat for a multi-resolution stack.
    #[arg(long = "bins", default_values_t = [6], value_delimiter = ',')]
    bins: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    chunks: usize,
    #[arg(long, value_enum, default_value_t = ChunkPolicy::Strict)]
    chunk_policy: ChunkPolicy,
    #[arg(long, value_enum, default_value_t = Fallback::Global)]
    fallback: Fallback,
    #[arg(long, value_enum, default_value_t = Mode::Temporal)]
    mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Npy,
    Pgm,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Npy => "npy",
            Format::Pgm => "pgm",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Average-pool each image down to this side length.
    #[arg(long)]
    pool: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Npy)]
    format: Format,
    /// Output path. Defaults to `<input stem>.tmtf.<ext>` beside the input.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Ar1,
    RandomWalk,
    WhiteNoise,
    LinearTrend,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Generator kind (ignored when --config is given).
    #[arg(long, value_enum, required_unless_present = "config")]
    kind: Option<Kind>,
    /// JSON generator config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    len: usize,
    #[arg(long, default_value_t = 0.5)]
    phi: f64,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    slope: f64,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Destination CSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Encode(a) => encode(&a, stdout, stderr),
        Command::Diagnose(a) => diagnose(&a, stdout, stderr),
        Command::Synth(a) => synth(&a, stdout, stderr),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e.class() {
                ErrorClass::Usage => EXIT_USAGE,
                ErrorClass::Data => EXIT_DATA,
            }
        }
    }
}

fn load_series(input: &InputArgs) -> Result<(TimeSeries, serde_json::Value)> {
    if let Some(path) = &input.input {
        let series = io::read_csv(path, input.column.as_deref())?;
        let source = json!({ "csv": path, "column": input.column });
        return Ok((series, source));
    }
    let path = input
        .synth
        .as_ref()
        .expect("clap requires --input or --synth");
    let text = std::fs::read_to_string(path).map_err(|source| MtfError::Io {
        path: path.clone(),
        source,
    })?;
    let mut spec = GeneratorSpec::from_json(&text)?;
    if let Some(seed) = input.seed {
        spec.seed = seed;
    }
    let series = generate(&spec)?;
    Ok((series, json!({ "generator": spec })))
}

fn options(p: &PipelineArgs) -> Result<EncodeOptions> {
    if p.bins.is_empty() {
        return Err(MtfError::InvalidConfig(
            "at least one --bins value is required".into(),
        ));
    }
    Ok(EncodeOptions {
        chunks: p.chunks,
        chunk_policy: p.chunk_policy,
        fallback: p.fallback,
        mode: p.mode,
    })
}

fn warn_plans(
    len: usize,
    bins: &[usize],
    chunks: usize,
    stderr: &mut dyn Write,
) -> Vec<serde_json::Value> {
    bins.iter()
        .map(|&q| {
            let check = check_plan(len, q, chunks);
            if check.status == PlanStatus::Warn {
                let _ = writeln!(stderr, "warning: {}", check.message());
            }
            serde_json::to_value(check).expect("plain struct")
        })
        .collect()
}

fn default_output(input: &InputArgs, format: Format) -> PathBuf {
    let ext = format.extension();
    match &input.input {
        Some(p) => {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            p.with_file_name(format!("{stem}.tmtf.{ext}"))
        }
        None => PathBuf::from(format!("synth.tmtf.{ext}")),
    }
}

/// `out.npy` -> `out.q6.npy` for per-channel files.
fn channel_path(base: &Path, bins: usize) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.q{bins}.{}", ext.to_string_lossy()),
        None => format!("{stem}.q{bins}"),
    };
    base.with_file_name(name)
}

fn encode(a: &EncodeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let opts = options(&a.pipeline)?;
    let (series, source) = load_series(&a.input)?;
    let bins = &a.pipeline.bins;
    if let Some(size) = a.pool {
        if size == 0 || size > series.len() {
            return Err(MtfError::PoolSize {
                size,
                side: series.len(),
            });
        }
    }
    let stack = multi_resolution(&series, bins, &opts)?;
    let checks = warn_plans(series.len(), bins, opts.effective_chunks(), stderr);

    let channels: Vec<FieldImage> = match a.pool {
        Some(size) => stack
            .channels()
            .iter()
            .map(|c| pool(c, size))
            .collect::<Result<_>>()?,
        None => stack.channels().to_vec(),
    };

    let output = a
        .output
        .clone()
        .unwrap_or_else(|| default_output(&a.input, a.format));
    let mut outputs = Vec::new();
    match a.format {
        Format::Npy => {
            let side = channels[0].side();
            let data: Vec<f64> = channels
                .iter()
                .flat_map(|c| c.entries().iter().copied())
                .collect();
            let shape = if channels.len() == 1 {
                vec![side, side]
            } else {
                vec![channels.len(), side, side]
            };
            std::fs::write(&output, io::npy_bytes(&shape, &data)).map_err(|source| {
                MtfError::Io {
                    path: output.clone(),
                    source,
                }
            })?;
            outputs.push(output);
        }
        Format::Pgm | Format::Csv => {
            for (img, &q) in channels.iter().zip(bins) {
                let path = if channels.len() == 1 {
                    output.clone()
                } else {
                    channel_path(&output, q)
                };
                if a.format == Format::Pgm {
                    io::write_pgm(img, &path)?;
                } else {
                    io::write_image_csv(img, &path)?;
                }
                outputs.push(path);
            }
        }
    }

    let record = json!({
        "command": "encode",
        "source": source,
        "T": series.len(),
        "bins": bins,
        "chunks": opts.effective_chunks(),
        "chunk_policy": opts.chunk_policy,
        "fallback": opts.fallback,
        "mode": opts.mode,
        "pool": a.pool,
        "format": a.format,
        "side": channels[0].side(),
        "outputs": outputs,
        "plan_checks": checks,
    });
    let _ = writeln!(stdout, "{record}");
    Ok(())
}

fn diagnose(a: &DiagnoseArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let opts = options(&a.pipeline)?;
    let (series, source) = load_series(&a.input)?;
    let len = series.len();
    if let Some(&bins) = a.pipeline.bins.iter().find(|&&q| q < 2 || q > len) {
        return Err(MtfError::InvalidBinCount { bins, len });
    }
    let plan = make_chunks(len, opts.effective_chunks(), opts.chunk_policy)?;
    let thresholds = LabelThresholds::default();

    let mut resolutions = Vec::new();
    for &q in &a.pipeline.bins {
        let states = assign_states(&series, q)?;
        let global = global_matrix(&states, opts.fallback)?;
        let locals = local_matrices(&states, &plan, opts.fallback, Some(&global))?;
        let chunks: Vec<_> = plan
            .ranges()
            .iter()
            .zip(&locals)
            .enumerate()
            .map(|(k, (range, w))| {
                json!({
                    "chunk": k,
                    "start": range.start,
                    "end": range.end,
                    "matrix": w.to_rows(),
                    "summary": summarize_with(w, &thresholds),
                })
            })
            .collect();
        let check = check_plan(len, q, plan.chunks());
        if check.status == PlanStatus::Warn {
            let _ = writeln!(stderr, "warning: {}", check.message());
        }
        resolutions.push(json!({
            "Q": q,
            "global": {
                "matrix": global.to_rows(),
                "summary": summarize_with(&global, &thresholds),
            },
            "chunks": chunks,
            "plan_check": check,
        }));
    }

    let report = json!({
        "command": "diagnose",
        "source": source,
        "T": len,
        "bins": a.pipeline.bins,
        "chunks": plan.chunks(),
        "chunk_policy": opts.chunk_policy,
        "fallback": opts.fallback,
        "thresholds": thresholds,
        "resolutions": resolutions,
    });
    let _ = writeln!(
        stdout,
        "{}",
        serde_json::to_string_pretty(&report).expect("json")
    );
    Ok(())
}

fn synth(a: &SynthArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let mut spec = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| MtfError::Io {
                path: path.clone(),
                source,
            })?;
            GeneratorSpec::from_json(&text)?
        }
        None => {
            let process = match a.kind.expect("clap requires --kind or --config") {
                Kind::Ar1 => Process::Ar1 {
                    phi: a.phi,
                    scale: a.scale.unwrap_or(1.0),
                },
                Kind::RandomWalk => Process::RandomWalk {
                    scale: a.scale.unwrap_or(1.0),
                },
                Kind::WhiteNoise => Process::WhiteNoise {
                    scale: a.scale.unwrap_or(1.0),
                },
                Kind::LinearTrend => Process::LinearTrend {
                    slope: a.slope,
                    start: a.start,
                    scale: a.scale.unwrap_or(0.0),
                },
            };
            GeneratorSpec::new(process, a.len, 0)
        }
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let series = generate(&spec)?;
    let record = json!({ "command": "synth", "generator": spec, "output": a.output });
    match &a.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| MtfError::Io {
                path: path.clone(),
                source,
            })?;
            io::write_series_csv(&series, file).map_err(|source| MtfError::Io {
                path: path.clone(),
                source,
            })?;
            let _ = writeln!(stdout, "{record}");
        }
        None => {
            io::write_series_csv(&series, &mut *stdout).map_err(|source| MtfError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
            let _ = writeln!(stderr, "{record}");
        }
    }
    Ok(())
}
