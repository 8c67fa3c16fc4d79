//! Deterministic synthetic series.
//!
//! Randomness comes from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). A uniform variate is
//! `(next_u64 >> 11) * 2^-53`, and normals use the Box-Muller transform, both
//! outputs of each pair consumed in order (cosine branch first). Any
//! implementation of those published algorithms reproduces the streams exactly.

use std::f64::consts::TAU;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::binning::TimeSeries;
use crate::error::{MtfError, Result};

/// Largest `|phi|` accepted for AR(1) before the process counts as explosive.
pub const MAX_ABS_PHI: f64 = 1.05;

fn default_scale() -> f64 {
    1.0
}

/// Generating process. Every segment starts from a level `x0`, which is 0 for
/// a standalone series and the previous segment's last value inside a regime
/// switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    /// `x_t = phi * x_{t-1} + scale * e_t`, `x_0 = x0`.
    Ar1 {
        phi: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// AR(1) with `phi = 1`.
    RandomWalk {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `x_t = x0 + scale * e_t`.
    WhiteNoise {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `x_t = x0 + start + slope * t + scale * e_t` for `t = 1..=len`.
    LinearTrend {
        slope: f64,
        #[serde(default)]
        start: f64,
        #[serde(default)]
        scale: f64,
    },
    RegimeSwitch {
        segments: Vec<Segment>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub len: usize,
    #[serde(flatten)]
    pub process: Process,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub process: Process,
    /// Total length. For a regime switch it may be omitted (0) and is then
    /// the sum of the segment lengths.
    #[serde(default)]
    pub len: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(process: Process, len: usize, seed: u64) -> Self {
        Self { process, len, seed }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MtfError::InvalidGenerator(e.to_string()))
    }

    /// Length after resolving an omitted regime-switch total.
    pub fn effective_len(&self) -> usize {
        match (&self.process, self.len) {
            (Process::RegimeSwitch { segments }, 0) => segments.iter().map(|s| s.len).sum(),
            (_, len) => len,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.effective_len();
        if len < 2 {
            return Err(MtfError::InvalidGenerator(format!(
                "length {len} is too short (need at least 2)"
            )));
        }
        match &self.process {
            Process::RegimeSwitch { segments } => {
                if segments.is_empty() {
                    return Err(MtfError::InvalidGenerator(
                        "regime switch has no segments".into(),
                    ));
                }
                let total: usize = segments.iter().map(|s| s.len).sum();
                if total != len {
                    return Err(MtfError::InvalidGenerator(format!(
                        "segment lengths sum to {total}, expected {len}"
                    )));
                }
                for seg in segments {
                    if seg.len == 0 {
                        return Err(MtfError::InvalidGenerator("empty segment".into()));
                    }
                    if matches!(seg.process, Process::RegimeSwitch { .. }) {
                        return Err(MtfError::InvalidGenerator(
                            "regime switches cannot be nested".into(),
                        ));
                    }
                    validate_params(&seg.process)?;
                }
                Ok(())
            }
            p => validate_params(p),
        }
    }
}

fn validate_params(p: &Process) -> Result<()> {
    let finite = |name: &str, v: f64| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(MtfError::InvalidGenerator(format!("{name} must be finite")))
        }
    };
    let scale_ok = |v: f64| {
        finite("scale", v)?;
        if v < 0.0 {
            return Err(MtfError::InvalidGenerator(
                "scale must be non-negative".into(),
            ));
        }
        Ok(())
    };
    match *p {
        Process::Ar1 { phi, scale } => {
            finite("phi", phi)?;
            if phi.abs() >= MAX_ABS_PHI {
                return Err(MtfError::InvalidGenerator(format!(
                    "|phi| = {} is explosive (limit {MAX_ABS_PHI})",
                    phi.abs()
                )));
            }
            scale_ok(scale)
        }
        Process::RandomWalk { scale } | Process::WhiteNoise { scale } => scale_ok(scale),
        Process::LinearTrend {
            slope,
            start,
            scale,
        } => {
            finite("slope", slope)?;
            finite("start", start)?;
            scale_ok(scale)
        }
        Process::RegimeSwitch { .. } => Ok(()),
    }
}

/// Standard normal stream: xoshiro256** uniforms through Box-Muller.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the log finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

fn run(process: &Process, len: usize, x0: f64, noise: &mut NormalStream, out: &mut Vec<f64>) {
    match *process {
        Process::Ar1 { phi, scale } => {
            let mut x = x0;
            for _ in 0..len {
                x = phi * x + scale * noise.next_normal();
                out.push(x);
            }
        }
        Process::RandomWalk { scale } => {
            run(&Process::Ar1 { phi: 1.0, scale }, len, x0, noise, out)
        }
        Process::WhiteNoise { scale } => {
            out.extend((0..len).map(|_| x0 + scale * noise.next_normal()));
        }
        Process::LinearTrend {
            slope,
            start,
            scale,
        } => {
            for t in 1..=len {
                let level = x0 + start + slope * t as f64;
                // noiseless trends leave the random stream untouched
                let e = if scale == 0.0 {
                    0.0
                } else {
                    scale * noise.next_normal()
                };
                out.push(level + e);
            }
        }
        Process::RegimeSwitch { ref segments } => {
            let mut level = x0;
            for seg in segments {
                run(&seg.process, seg.len, level, noise, out);
                level = *out.last().expect("segments are non-empty");
            }
        }
    }
}

/// Generates the series described by `spec`. Identical specs give
/// bitwise-identical output.
pub fn generate(spec: &GeneratorSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let len = spec.effective_len();
    let mut noise = NormalStream::new(spec.seed);
    let mut out = Vec::with_capacity(len);
    run(&spec.process, len, 0.0, &mut noise, &mut out);
    TimeSeries::new(out)
}
