use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ordersynth::analysis::{analyze_recording, load_results, save_results, AnalysisWindow};
use ordersynth::dataset::{self, compare_to_table, generate, load_trace, order_distribution_map, GenerationPlan};
use ordersynth::table::build_table;
use ordersynth::{codec, tracefile, wav};
use ordersynth::{
    AnalysisConfig, AudioBuffer, ControlTrace, Error, FrameSpec, Result, SynthesisParams, TableGrid, TimbreTable,
};

/// Engine-order analysis, timbre tables and annotated engine-sound synthesis.
///
/// Errors print one JSON line on stderr, `{"error": <class>, "message": ...}`,
/// and exit with 3 (input), 4 (format), 5 (parameter) or 6 (io).
#[derive(Parser)]
#[command(name = "ordersynth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment, repitch and order-analyze a recording into per-frame results (JSON lines)
    Analyze(AnalyzeArgs),
    /// Aggregate per-frame results into a timbre table
    BuildTable(BuildTableArgs),
    /// Render a table along a control trace into a 4-channel annotated WAV
    Synth(SynthArgs),
    /// Mux stereo audio and a CSV trace into a 4-channel annotated WAV
    Encode(EncodeArgs),
    /// Extract the control trace of a 4-channel WAV as CSV
    Decode(DecodeArgs),
    /// Render every item of a generation plan and write the manifest
    Generate(GenerateArgs),
    /// Order-magnitude maps of annotated files, optionally checked against a table
    Validate(ValidateArgs),
    /// Write example tables, traces and a generation plan into a directory
    ExamplePlan(ExamplePlanArgs),
    /// Print the default synthesis parameters as JSON
    DefaultParams,
}

#[derive(Args)]
struct AnalysisFlags {
    /// Fundamental periods per analysis window
    #[arg(long, default_value_t = 20)]
    periods: u32,
    /// Zero-padding factor of the FFT
    #[arg(long = "pad", default_value_t = 4)]
    padding: u32,
    /// Frame length in samples at 16 kHz; other input rates keep the same duration
    #[arg(long, default_value_t = 65_536)]
    frame: usize,
    /// Tukey taper fraction of the centroid region
    #[arg(long, default_value_t = 0.5)]
    taper: f64,
    /// Analysis window: blackman-harris or rectangular
    #[arg(long, default_value = "blackman-harris", value_parser = parse_window)]
    window: AnalysisWindow,
}

fn parse_window(s: &str) -> std::result::Result<AnalysisWindow, String> {
    match s {
        "blackman-harris" => Ok(AnalysisWindow::BlackmanHarris),
        "rectangular" => Ok(AnalysisWindow::Rectangular),
        _ => Err(format!("unknown window {s:?} (blackman-harris, rectangular)")),
    }
}

impl AnalysisFlags {
    fn config(&self, sample_rate: u32) -> Result<(FrameSpec, AnalysisConfig)> {
        let cfg = AnalysisConfig {
            periods: self.periods,
            padding: self.padding,
            taper: self.taper,
            window: self.window,
            ..AnalysisConfig::default()
        }
        .with_sample_rate(f64::from(sample_rate));
        cfg.validate()?;
        Ok((FrameSpec::new(self.frame, 16_000)?.at_rate(sample_rate), cfg))
    }
}

#[derive(Args)]
struct GridFlags {
    #[arg(long, default_value_t = 0.0)]
    rpm_min: f64,
    #[arg(long, default_value_t = 8000.0)]
    rpm_max: f64,
    #[arg(long, default_value_t = 250.0)]
    rpm_step: f64,
    #[arg(long, default_value_t = -200.0, allow_hyphen_values = true)]
    torque_min: f64,
    #[arg(long, default_value_t = 800.0)]
    torque_max: f64,
    #[arg(long, default_value_t = 50.0)]
    torque_step: f64,
}

impl GridFlags {
    fn grid(&self) -> Result<TableGrid> {
        TableGrid::uniform(
            (self.rpm_min, self.rpm_max, self.rpm_step),
            (self.torque_min, self.torque_max, self.torque_step),
        )
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// 4-channel annotated WAV, or audio WAV together with --trace
    input: PathBuf,
    /// Control trace (CSV) aligned with the audio
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output results file (JSON lines)
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    analysis: AnalysisFlags,
}

#[derive(Args)]
struct BuildTableArgs {
    /// Per-frame results from `analyze` (several files are concatenated)
    #[arg(required = true)]
    results: Vec<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value = "engine")]
    engine_id: String,
    #[command(flatten)]
    grid: GridFlags,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    table: PathBuf,
    /// Control trace: CSV or 4-channel WAV
    #[arg(long)]
    trace: PathBuf,
    /// Synthesis parameters (JSON); defaults when absent
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override the parameter file's seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    /// Stereo 16-bit WAV
    #[arg(long)]
    audio: PathBuf,
    /// CSV trace at the audio rate and length
    #[arg(long)]
    trace: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    /// Write the CSV here instead of stdout
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also write channels 1-2 as a stereo WAV
    #[arg(long)]
    audio_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    plan: PathBuf,
    /// Worker threads (0 = one per core)
    #[arg(short, long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// 4-channel annotated WAV files
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Reference table to compare the map against
    #[arg(long)]
    table: Option<PathBuf>,
    /// Highest order included in the comparison
    #[arg(long, default_value_t = 8.0)]
    max_order: f64,
    /// Maximum relative magnitude error
    #[arg(long, default_value_t = 0.1)]
    tolerance: f64,
    /// Reference magnitudes at or below this are not compared
    #[arg(long, default_value_t = 1e-6)]
    floor: f64,
    /// Write the order-distribution map (TSV) here instead of stdout
    #[arg(long)]
    map_out: Option<PathBuf>,
    #[command(flatten)]
    grid: GridFlags,
    #[command(flatten)]
    analysis: AnalysisFlags,
}

#[derive(Args)]
struct ExamplePlanArgs {
    dir: PathBuf,
    /// Use the eight illustrative parameter regimes instead of one set
    #[arg(long)]
    all_sets: bool,
}

fn read_audio_and_trace(input: &Path, trace: Option<&Path>) -> Result<(AudioBuffer, ControlTrace)> {
    let audio = wav::read_wav(input)?;
    match trace {
        Some(t) => Ok((audio, tracefile::read_trace_csv(t)?)),
        None if audio.num_channels() == 4 => codec::demux(&audio),
        None => Err(Error::Input(format!(
            "{} has {} channels; pass --trace or use a 4-channel annotated file",
            input.display(),
            audio.num_channels()
        ))),
    }
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let (audio, trace) = read_audio_and_trace(&args.input, args.trace.as_deref())?;
    let (spec, cfg) = args.analysis.config(audio.sample_rate())?;
    let analysis = analyze_recording(&audio, &trace, &spec, &cfg)?;
    save_results(&args.out, &analysis.results)?;
    println!(
        "{}",
        json!({
            "frames": analysis.results.len(),
            "excluded": analysis.excluded,
            "skipped": analysis.skipped.iter().map(|(i, m)| json!({"frame": i, "message": m})).collect::<Vec<_>>(),
        })
    );
    Ok(())
}

fn build(args: BuildTableArgs) -> Result<()> {
    let mut results = Vec::new();
    for path in &args.results {
        results.extend(load_results(path)?);
    }
    let table = build_table(&results, &args.grid.grid()?, args.engine_id)?;
    table.save(&args.out)?;
    let grid = table.grid();
    let observed = (0..grid.rpm_axis.len())
        .flat_map(|r| (0..grid.torque_axis.len()).map(move |t| (r, t)))
        .filter(|&(r, t)| table.is_filled(r, t))
        .count();
    println!("{}", json!({"frames": results.len(), "cells": grid.num_cells(), "observed_cells": observed}));
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let table = TimbreTable::load(&args.table)?;
    let trace = load_trace(&args.trace)?;
    let mut params = match &args.params {
        Some(p) => SynthesisParams::load(p)?,
        None => SynthesisParams::default(),
    };
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    let render = ordersynth::synthesize(&trace, &table, &params)?;
    wav::write_wav(&args.out, &codec::mux(&render.audio, &render.trace)?)?;
    println!(
        "{}",
        json!({
            "samples": render.audio.len(),
            "duration_s": render.audio.duration_secs(),
            "normalization_gain": render.normalization_gain,
            "params_hash": params.fingerprint(),
        })
    );
    Ok(())
}

fn encode(args: EncodeArgs) -> Result<()> {
    let audio = wav::read_wav(&args.audio)?;
    let trace = tracefile::read_trace_csv(&args.trace)?;
    wav::write_wav(&args.out, &codec::mux(&audio, &trace)?)
}

fn decode(args: DecodeArgs) -> Result<()> {
    let (audio, trace) = codec::demux(&wav::read_wav(&args.input)?)?;
    match &args.out {
        Some(path) => tracefile::write_trace_csv(path, &trace)?,
        None => print!("{}", tracefile::format_trace_csv(&trace)),
    }
    if let Some(path) = &args.audio_out {
        wav::write_wav(path, &audio)?;
    }
    Ok(())
}

fn generate_cmd(args: GenerateArgs) -> Result<()> {
    let plan = GenerationPlan::load(&args.plan)?;
    let base = args.plan.parent().unwrap_or(Path::new("."));
    let report = generate(&plan, base, args.jobs)?;
    println!(
        "{}",
        json!({
            "items": report.records.len(),
            "produced": report.produced(),
            "failed": report.failed(),
            "manifest": report.manifest_path,
        })
    );
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<bool> {
    let grid = args.grid.grid()?;
    let mut buffers = Vec::new();
    let mut files = Vec::new();
    for path in &args.files {
        let buffer = wav::read_wav(path)?;
        let (_, trace) = codec::demux(&buffer)?;
        // decoded controls must survive a second encode unchanged
        let stable = codec::encode_controls(&trace)
            .and_then(|c| codec::decode_codes(&c, trace.sample_rate()))
            .map(|t| t == trace)
            .unwrap_or(false);
        files.push(json!({
            "file": path,
            "samples": trace.len(),
            "rpm_min": trace.rpm().iter().copied().fold(f64::INFINITY, f64::min),
            "rpm_max": trace.rpm().iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "controls_round_trip": stable,
        }));
        buffers.push(buffer);
    }
    let rate = buffers[0].sample_rate();
    let (spec, cfg) = args.analysis.config(rate)?;
    let map = order_distribution_map(&buffers, &grid, &spec, &cfg)?;
    match &args.map_out {
        Some(path) => std::fs::write(path, map.to_tsv())?,
        None => print!("{}", map.to_tsv()),
    }
    let mut passed = files.iter().all(|f| f["controls_round_trip"] == true);
    let mut report = json!({"files": files, "frames": map.total_frames()});
    if let Some(table_path) = &args.table {
        let table = TimbreTable::load(table_path)?;
        let cmp = compare_to_table(&map, &table, args.max_order, args.floor, args.tolerance);
        passed &= cmp.passed() && !cmp.orders.is_empty();
        report["comparison"] = json!({
            "tolerance": cmp.tolerance,
            "worst_relative_error": cmp.worst(),
            "orders": cmp.orders.iter().map(|o| json!({
                "order": o.order, "cells": o.cells, "max_relative_error": o.max_relative_error,
            })).collect::<Vec<_>>(),
        });
    }
    report["passed"] = json!(passed);
    eprintln!("{report}");
    Ok(passed)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze(a) => analyze(a)?,
        Command::BuildTable(a) => build(a)?,
        Command::Synth(a) => synth(a)?,
        Command::Encode(a) => encode(a)?,
        Command::Decode(a) => decode(a)?,
        Command::Generate(a) => generate_cmd(a)?,
        Command::Validate(a) => {
            if !validate(a)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::ExamplePlan(a) => {
            let plan = dataset::write_example_project(&a.dir, a.all_sets)?;
            println!("{}", json!({"plan": plan}));
        }
        Command::DefaultParams => println!("{}", SynthesisParams::default().to_json_pretty()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            let class = e.class();
            eprintln!("{}", json!({"error": class.as_str(), "message": e.to_string()}));
            ExitCode::from(class.exit_code() as u8)
        }
    }
}
