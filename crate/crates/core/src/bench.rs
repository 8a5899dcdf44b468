//! Throughput harness: warm up, time repeated runs of one pipeline stage,
//! and report kHz throughput and real-time factor.
//!
//! The clock is injectable so the report arithmetic can be tested without
//! real timing.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{config, input, Error, Result};
use crate::signal::{FrameConfig, Waveform};
use crate::testsignal;
use crate::vocoder::{ClipMode, SpectrogramKind, Vocoder};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Inverse only; the spectrogram is computed before timing starts.
    #[default]
    SynthesizeOnly,
    AnalyzeOnly,
    Roundtrip,
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synth" | "synthesize" | "synthesize_only" => Ok(Stage::SynthesizeOnly),
            "analyze" | "analyze_only" => Ok(Stage::AnalyzeOnly),
            "roundtrip" => Ok(Stage::Roundtrip),
            _ => Err(config(format!(
                "unknown stage `{s}` (expected synth, analyze or roundtrip)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub kind: SpectrogramKind,
    pub frame: FrameConfig,
    pub clip: ClipMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub pipeline: Pipeline,
    /// Seconds of generated audio when no input is supplied.
    pub clip_duration: f64,
    pub sample_rate: u32,
    pub runs: usize,
    pub warmup_runs: usize,
    pub stage: Stage,
    /// Worker threads for per-frame transforms; 1 is single-core.
    pub threads: usize,
}

impl BenchSpec {
    pub fn new(pipeline: Pipeline) -> Self {
        BenchSpec {
            pipeline,
            clip_duration: 10.0,
            sample_rate: 22050,
            runs: 100,
            warmup_runs: 10,
            stage: Stage::SynthesizeOnly,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(config("runs must be >= 1"));
        }
        if !(self.clip_duration > 0.0 && self.clip_duration.is_finite()) {
            return Err(config(format!(
                "clip duration must be positive, got {}",
                self.clip_duration
            )));
        }
        if self.sample_rate == 0 {
            return Err(config("sample rate must be positive"));
        }
        if self.threads == 0 {
            return Err(config("threads must be >= 1"));
        }
        if self.stage != Stage::AnalyzeOnly && self.pipeline.kind == SpectrogramKind::Magnitude {
            return Err(Error::UnsupportedKind(self.pipeline.kind));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub mean_seconds: f64,
    /// Sample standard deviation (n - 1); 0 for a single run.
    pub stddev_seconds: f64,
    pub samples_generated: u64,
    /// Samples per millisecond.
    pub khz: f64,
    /// `khz * 1000 / sample_rate`.
    pub rtf: f64,
    pub spec: BenchSpec,
}

impl BenchReport {
    /// Derives the report from per-run wall times in seconds.
    pub fn from_timings(spec: BenchSpec, samples_generated: u64, timings: &[f64]) -> Result<Self> {
        if timings.is_empty() {
            return Err(Error::Measurement("no timed runs".into()));
        }
        let n = timings.len() as f64;
        let mean = timings.iter().sum::<f64>() / n;
        if mean.is_nan() || mean <= 0.0 {
            return Err(Error::Measurement(format!(
                "mean elapsed time is {mean} s; the clock is too coarse for this workload"
            )));
        }
        let stddev = if timings.len() > 1 {
            (timings.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let khz = samples_generated as f64 / mean / 1000.0;
        let rtf = khz * 1000.0 / spec.sample_rate as f64;
        Ok(BenchReport {
            mean_seconds: mean,
            stddev_seconds: stddev,
            samples_generated,
            khz,
            rtf,
            spec,
        })
    }

    pub const TSV_HEADER: &'static str = "pipeline\twin\thop\tclip\tkhz\trtf\tmean_s\tstd_s";

    fn columns(&self) -> [String; 8] {
        let p = &self.spec.pipeline;
        [
            p.kind.to_string(),
            p.frame.win_length.to_string(),
            p.frame.hop_length.to_string(),
            p.clip.to_string(),
            format!("{:.1}", self.khz),
            format!("{:.1}", self.rtf),
            format!("{:.6}", self.mean_seconds),
            format!("{:.6}", self.stddev_seconds),
        ]
    }

    pub fn tsv_row(&self) -> String {
        self.columns().join("\t")
    }
}

/// Renders reports as a right-aligned text table with a header row.
pub fn render_table(reports: &[BenchReport]) -> String {
    let header = BenchReport::TSV_HEADER
        .split('\t')
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let rows: Vec<Vec<String>> = std::iter::once(header)
        .chain(reports.iter().map(|r| r.columns().to_vec()))
        .collect();
    let widths: Vec<usize> = (0..8)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, w))| {
                if i == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub trait Clock {
    /// Seconds since an arbitrary fixed origin; must be monotonic.
    fn now(&mut self) -> f64;
}

#[derive(Debug)]
pub struct MonotonicClock(Instant);

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock(Instant::now())
    }
}

impl Clock for MonotonicClock {
    fn now(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Runs the benchmark with the system monotonic clock.
///
/// Without `input`, a speech-like signal of `spec.clip_duration` seconds is
/// generated.
pub fn run_bench(spec: &BenchSpec, input: Option<&Waveform>) -> Result<BenchReport> {
    run_bench_with_clock(spec, input, &mut MonotonicClock::default())
}

pub fn run_bench_with_clock<C: Clock>(
    spec: &BenchSpec,
    input_wave: Option<&Waveform>,
    clock: &mut C,
) -> Result<BenchReport> {
    spec.validate()?;
    let generated;
    let x = match input_wave {
        Some(x) => {
            if x.sample_rate() != spec.sample_rate {
                return Err(input(format!(
                    "input is {} Hz but the bench spec says {} Hz",
                    x.sample_rate(),
                    spec.sample_rate
                )));
            }
            x
        }
        None => {
            let n = (spec.clip_duration * spec.sample_rate as f64).round() as usize;
            generated = testsignal::speech_like(n, spec.sample_rate, 0x5eed).wave;
            &generated
        }
    };

    let p = &spec.pipeline;
    let vocoder = Vocoder::new(p.frame, p.kind, p.clip)?.with_threads(spec.threads)?;
    let spectrogram = vocoder.analyze(x)?;

    let run_once = || -> Result<()> {
        match spec.stage {
            Stage::SynthesizeOnly => {
                black_box(vocoder.synthesize(black_box(&spectrogram))?);
            }
            Stage::AnalyzeOnly => {
                black_box(vocoder.analyze(black_box(x))?);
            }
            Stage::Roundtrip => {
                let s = vocoder.analyze(black_box(x))?;
                black_box(vocoder.synthesize(&s)?);
            }
        }
        Ok(())
    };

    for _ in 0..spec.warmup_runs {
        run_once()?;
    }
    let mut timings = Vec::with_capacity(spec.runs);
    for _ in 0..spec.runs {
        let start = clock.now();
        run_once()?;
        timings.push(clock.now() - start);
    }

    let mut echoed = *spec;
    echoed.threads = vocoder.threads();
    echoed.clip_duration = x.duration_secs();
    BenchReport::from_timings(echoed, x.len() as u64, &timings)
}
