//! `specinv` command-line front end.
//!
//! Every subcommand is a thin wrapper over the library: arguments are parsed
//! and validated, inputs are read, and outputs are written only once the
//! whole computation has succeeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specinv::bench::render_table;
use specinv::io::{
    decode_spec, read_spec, read_wav, write_spec, write_wav, OutputEncoding, SpecFileHeader, MAGIC,
};
use specinv::{
    mcd, run_bench, snr_db, BenchReport, BenchSpec, ClipMode, Error, FrameConfig, McdConfig,
    Pipeline, Spectrogram, SpectrogramKind, Stage, Vocoder, Waveform, WindowKind,
};

#[derive(Parser, Debug)]
#[command(
    name = "specinv",
    version,
    about = "Phase-free spectral inversion vocoder",
    long_about = None,
    propagate_version = true
)]
struct Cli {
    /// Worker threads for per-frame transforms (1 = single-core)
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a real spectrogram from a WAV file and store it as MVS1
    Analyze {
        /// Input WAV (pcm16/24/32 or float32; channel 0 is used)
        input: PathBuf,
        /// Output MVS1 spectrogram file
        output: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Reconstruct a waveform from an MVS1 spectrogram
    Synthesize {
        /// Input MVS1 spectrogram file
        input: PathBuf,
        /// Output WAV file
        output: PathBuf,
        /// Output sample encoding
        #[arg(long, default_value = "pcm16", value_parser = parse::<OutputEncoding>)]
        encoding: OutputEncoding,
    },
    /// Analyze and resynthesize a WAV file in one step
    Roundtrip {
        /// Input WAV
        input: PathBuf,
        /// Output WAV
        output: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Output sample encoding
        #[arg(long, default_value = "pcm16", value_parser = parse::<OutputEncoding>)]
        encoding: OutputEncoding,
        /// Print SNR and MCD of the reconstruction (before output quantization)
        #[arg(long)]
        report: bool,
    },
    /// Compare two WAV files: SNR in dB and mel-cepstral distance
    Metrics {
        /// Reference WAV
        reference: PathBuf,
        /// Estimate WAV (same length and sample rate)
        estimate: PathBuf,
        /// Mel bands for MCD
        #[arg(long, default_value_t = 23, value_name = "N")]
        mcd_bands: usize,
        /// Cepstral coefficients c1..cN for MCD
        #[arg(long, default_value_t = 13, value_name = "N")]
        mcd_cepstra: usize,
    },
    /// Time one pipeline stage and report throughput and real-time factor
    Bench {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Seconds of generated speech-like audio
        #[arg(long, default_value_t = 10.0, value_name = "SECONDS")]
        duration: f64,
        /// Sample rate of the generated audio in Hz
        #[arg(long, default_value_t = 22050, value_name = "HZ")]
        rate: u32,
        /// Timed runs
        #[arg(long, default_value_t = 100, value_name = "N")]
        runs: usize,
        /// Untimed warm-up runs
        #[arg(long, default_value_t = 10, value_name = "N")]
        warmup: usize,
        /// Stage to time: synth, analyze or roundtrip
        #[arg(long, default_value = "synth", value_parser = parse::<Stage>)]
        stage: Stage,
        /// Time this WAV instead of generated audio (overrides --duration and --rate)
        #[arg(long, value_name = "WAV")]
        input: Option<PathBuf>,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        /// Omit the header line in tsv output
        #[arg(long)]
        no_header: bool,
    },
    /// Print header or metadata of an MVS1 or WAV file
    Info {
        /// MVS1 or WAV file
        file: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct PipelineArgs {
    /// Algorithm: fft-real, dct, prft or magnitude (analysis only)
    #[arg(long, value_parser = parse::<SpectrogramKind>, value_name = "ALGO")]
    algo: SpectrogramKind,
    /// Window length in samples
    #[arg(long, default_value_t = 1024, value_name = "N")]
    win: usize,
    /// Hop length in samples
    #[arg(long, default_value_t = 256, value_name = "N")]
    hop: usize,
    /// Window: hann, kaiser:BETA or boxcar
    #[arg(long, default_value = "hann", value_parser = parse::<WindowKind>, value_name = "WINDOW")]
    window: WindowKind,
    /// Clipping: none, zero or threshold:TAU (TAU in (0, 1) must be given)
    #[arg(long, default_value = "none", value_parser = parse::<ClipMode>, value_name = "CLIP")]
    clip: ClipMode,
    /// Do not pad by win/2 on each side before framing
    #[arg(long)]
    no_center: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Tsv,
    Table,
    Jsonl,
}

fn parse<T: FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl PipelineArgs {
    fn frame(&self) -> specinv::Result<FrameConfig> {
        FrameConfig::new(self.win, self.hop, self.window, !self.no_center)
    }

    fn vocoder(&self, threads: usize) -> specinv::Result<Vocoder> {
        Vocoder::new(self.frame()?, self.algo, self.clip)?.with_threads(threads)
    }
}

fn load_wav(path: &Path) -> specinv::Result<Waveform> {
    let r = read_wav(path)?;
    if let Some(w) = r.warning {
        eprintln!("warning: {w}");
    }
    Ok(r.wave)
}

fn vocoder_for(spec: &Spectrogram, threads: usize) -> specinv::Result<Vocoder> {
    if spec.kind() == SpectrogramKind::Magnitude {
        return Err(Error::UnsupportedKind(spec.kind()));
    }
    Vocoder::new(*spec.config(), spec.kind(), spec.clip())?.with_threads(threads)
}

fn run(cli: Cli) -> specinv::Result<String> {
    let threads = cli.threads;
    if threads == 0 {
        return Err(Error::InvalidConfig("--threads must be >= 1".into()));
    }
    let mut out = String::new();
    match cli.command {
        Command::Analyze {
            input,
            output,
            pipeline,
        } => {
            let v = pipeline.vocoder(threads)?;
            let x = load_wav(&input)?;
            if x.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "{}: no samples",
                    input.display()
                )));
            }
            let spec = v.analyze(&x)?;
            write_spec(&output, &spec)?;
        }
        Command::Synthesize {
            input,
            output,
            encoding,
        } => {
            let spec = read_spec(&input)?;
            let y = vocoder_for(&spec, threads)?.synthesize(&spec)?;
            write_wav(&output, &y, encoding)?;
        }
        Command::Roundtrip {
            input,
            output,
            pipeline,
            encoding,
            report,
        } => {
            let v = pipeline.vocoder(threads)?;
            if pipeline.algo == SpectrogramKind::Magnitude {
                return Err(Error::UnsupportedKind(pipeline.algo));
            }
            let x = load_wav(&input)?;
            if x.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "{}: no samples",
                    input.display()
                )));
            }
            let y = v.synthesize(&v.analyze(&x)?)?;
            let metrics = if report {
                Some((snr_db(&x, &y)?, mcd(&x, &y, &McdConfig::default())?))
            } else {
                None
            };
            write_wav(&output, &y, encoding)?;
            if let Some((snr, m)) = metrics {
                writeln!(out, "snr_db\t{snr}").unwrap();
                writeln!(out, "mcd\t{m}").unwrap();
            }
        }
        Command::Metrics {
            reference,
            estimate,
            mcd_bands,
            mcd_cepstra,
        } => {
            let cfg = McdConfig {
                n_mel_bands: mcd_bands,
                n_cepstra: mcd_cepstra,
                ..McdConfig::default()
            };
            let x = load_wav(&reference)?;
            let y = load_wav(&estimate)?;
            cfg.validate(x.sample_rate())?;
            let snr = snr_db(&x, &y)?;
            let m = mcd(&x, &y, &cfg)?;
            writeln!(out, "snr_db\t{snr}").unwrap();
            writeln!(out, "mcd\t{m}").unwrap();
        }
        Command::Bench {
            pipeline,
            duration,
            rate,
            runs,
            warmup,
            stage,
            input,
            format,
            no_header,
        } => {
            let spec = BenchSpec {
                pipeline: Pipeline {
                    kind: pipeline.algo,
                    frame: pipeline.frame()?,
                    clip: pipeline.clip,
                },
                clip_duration: duration,
                sample_rate: rate,
                runs,
                warmup_runs: warmup,
                stage,
                threads,
            };
            spec.validate()?;
            let wave = input.as_deref().map(load_wav).transpose()?;
            let report = run_bench(&spec, wave.as_ref())?;
            out = render_report(&report, format, no_header);
        }
        Command::Info { file } => out = info(&file)?,
    }
    Ok(out)
}

fn render_report(report: &BenchReport, format: Format, no_header: bool) -> String {
    match format {
        Format::Tsv if no_header => format!("{}\n", report.tsv_row()),
        Format::Tsv => format!("{}\n{}\n", BenchReport::TSV_HEADER, report.tsv_row()),
        Format::Table => render_table(std::slice::from_ref(report)),
        Format::Jsonl => {
            format!(
                "{}\n",
                serde_json::to_string(report).expect("report serializes")
            )
        }
    }
}

fn info(path: &Path) -> specinv::Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    let mut line = |k: &str, v: &dyn std::fmt::Display| writeln!(out, "{k}\t{v}").unwrap();
    if bytes.starts_with(&MAGIC) {
        let spec = decode_spec(&bytes)?;
        let h = SpecFileHeader::parse(&bytes)?;
        let cfg = spec.config();
        line("format", &"mvs1");
        line("version", &h.version);
        line("kind", &spec.kind());
        line("window", &cfg.window);
        line("clip", &spec.clip());
        line("win_length", &cfg.win_length);
        line("hop_length", &cfg.hop_length);
        line("centered", &cfg.centered);
        line("sample_rate", &spec.sample_rate());
        line("original_length", &spec.original_length());
        line("n_frames", &spec.n_frames());
        line("n_bins", &spec.n_bins());
    } else if bytes.starts_with(b"RIFF") {
        let r = read_wav(path)?;
        line("format", &"wav");
        line("encoding", &r.encoding);
        line("channels", &r.channels);
        line("sample_rate", &r.wave.sample_rate());
        line("samples", &r.wave.len());
        line("duration_s", &r.wave.duration_secs());
    } else {
        return Err(Error::InvalidInput(format!(
            "{}: neither an MVS1 nor a RIFF/WAVE file",
            path.display()
        )));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.code());
            ExitCode::FAILURE
        }
    }
}
