//! Command-line harness around the narlab library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 training
//! divergence.

mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use narlab::bench::{
    emit_report, render_markdown, run_matrix, run_scenario, BenchReport, DatasetDescriptor,
    GridCell, ReportFormat, RunManifest, ScenarioRun, SelectionCriterion,
};
use narlab::data::{
    embed_lags, generate_synthetic, load_series, ColumnSelector, SeriesDataset, SplitSpec,
    SyntheticProfile,
};
use narlab::diagnostics::{write_acf_csv, write_histogram_csv, write_response_csv};
use narlab::error::{BenchError, DataError, TrainError};
use narlab::model::NarNetwork;
use narlab::train::Algorithm;

use config::{resolve_settings, SettingsArgs};

const EXIT_USAGE: i32 = 1;
const EXIT_DATA: i32 = 2;
const EXIT_TRAIN: i32 = 3;

/// Process-level error with its exit code.
#[derive(Debug)]
struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_DATA,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        Self {
            message: e.to_string(),
            code: EXIT_TRAIN,
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        let code = match &e {
            BenchError::Train { .. } => EXIT_TRAIN,
            BenchError::InvalidRequest(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

impl From<narlab::error::DiagnosticsError> for CliError {
    fn from(e: narlab::error::DiagnosticsError) -> Self {
        CliError::data(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "narlab",
    version,
    about = "Nonlinear autoregressive forecasting benchmarks on univariate series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic heart-rate-like series as CSV
    Synth(SynthArgs),
    /// Train one algorithm on one split scenario and write all artifacts
    Run(RunArgs),
    /// Run the full algorithm-by-scenario benchmark grid
    Bench(BenchArgs),
    /// Apply a saved network snapshot to a series
    Predict(PredictArgs),
    /// Re-render a saved JSON benchmark report
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file holding the series
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Value column: zero-based index or header name
    #[arg(long, default_value = "0")]
    column: String,
    /// Optional timestamp column (seconds, strictly increasing)
    #[arg(long)]
    timestamp_column: Option<String>,
    /// Use the built-in synthetic generator instead of a file
    #[arg(long)]
    synthetic: bool,
    /// Synthetic length
    #[arg(long, default_value_t = 2000)]
    synth_n: usize,
    /// Synthetic generator seed
    #[arg(long, default_value_t = 1)]
    synth_seed: u64,
    /// Synthetic baseline level (beats/min)
    #[arg(long, default_value_t = 75.0)]
    baseline: f64,
    /// Synthetic drift amplitude (beats/min)
    #[arg(long, default_value_t = 6.0)]
    amplitude: f64,
    /// Synthetic AR(1) innovation noise
    #[arg(long, default_value_t = 1.5)]
    noise: f64,
    /// Synthetic drift period (samples)
    #[arg(long, default_value_t = 900.0)]
    period: f64,
}

impl DataArgs {
    fn profile(&self) -> SyntheticProfile {
        SyntheticProfile {
            baseline: self.baseline,
            drift_amplitude: self.amplitude,
            drift_period: self.period,
            noise_std: self.noise,
        }
    }

    fn load(&self) -> Result<(SeriesDataset, DatasetDescriptor), CliError> {
        if self.synthetic {
            let profile = self.profile();
            let ds = generate_synthetic(self.synth_n, self.synth_seed, &profile)?;
            let descriptor = DatasetDescriptor::Synthetic {
                n: self.synth_n,
                seed: self.synth_seed,
                profile,
            };
            return Ok((ds, descriptor));
        }
        let Some(path) = &self.data else {
            return Err(CliError::usage("pass --data FILE or --synthetic"));
        };
        let column: ColumnSelector = self.column.parse().expect("infallible");
        let ts = self
            .timestamp_column
            .as_ref()
            .map(|s| s.parse::<ColumnSelector>().expect("infallible"));
        let ds = load_series(path, &column, ts.as_ref())?;
        let descriptor = DatasetDescriptor::Csv {
            path: path.display().to_string(),
            column: self.column.clone(),
            n: ds.len(),
            label: ds.source_label().to_string(),
        };
        Ok((ds, descriptor))
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 6312)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 75.0)]
    baseline: f64,
    #[arg(long, default_value_t = 6.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 1.5)]
    noise: f64,
    #[arg(long, default_value_t = 900.0)]
    period: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Training algorithm: lm | br | scg
    #[arg(long)]
    algo: Algorithm,
    /// Split scenario 1..=7 (1 = 90/5/5 ... 7 = 30/35/35)
    #[arg(long)]
    scenario: usize,
    /// Run seed (division shuffle and weight init)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    settings: SettingsArgs,
    /// Output directory for artifacts
    #[arg(long)]
    out: PathBuf,
    /// Restrict the result table to one format (default: csv + markdown)
    #[arg(long)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Algorithms: all or a comma list like lm,scg
    #[arg(long, default_value = "all")]
    algo: String,
    /// Scenarios: all or a comma list like 1,5,7
    #[arg(long, default_value = "all")]
    scenario: String,
    /// Master seed; per-cell seeds derive from it
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Best-row criterion: composite | min_test_mse | max_accuracy | max_r
    #[arg(long, default_value = "composite")]
    criterion: String,
    /// Run grid cells on a thread pool (same output as serial)
    #[arg(long)]
    parallel: bool,
    /// Embed a wall-clock timestamp in the JSON manifest
    #[arg(long)]
    timestamp: bool,
    #[command(flatten)]
    settings: SettingsArgs,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Restrict output to one format (default: csv + json + markdown)
    #[arg(long)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct PredictArgs {
    /// Network snapshot JSON written by `run`
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Output CSV (time,target,prediction,error)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// results.json produced by `bench`
    #[arg(long)]
    input: PathBuf,
    /// Target format
    #[arg(long, default_value = "markdown")]
    format: FormatArg,
    /// Output file
    #[arg(long)]
    out: PathBuf,
}

/// clap-friendly wrapper around the library's report format.
#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    #[value(alias = "md")]
    Markdown,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Markdown => ReportFormat::Markdown,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap routes --help and --version through the error path
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            std::process::exit(code);
        }
    };
    let outcome = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Report(args) => cmd_report(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write '{}': {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::data(format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, &text)
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::data(format!("cannot create '{}': {e}", path.display())))
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let profile = SyntheticProfile {
        baseline: args.baseline,
        drift_amplitude: args.amplitude,
        drift_period: args.period,
        noise_std: args.noise,
    };
    let ds = generate_synthetic(args.n, args.seed, &profile)?;
    let mut csv = String::from("value\n");
    for v in ds.values() {
        csv.push_str(&format!("{v}\n"));
    }
    write_file(&args.out, &csv)?;
    println!("wrote {} points to {}", ds.len(), args.out.display());
    Ok(())
}

fn parse_scenarios(spec: &str) -> Result<Vec<SplitSpec>, CliError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(SplitSpec::all_scenarios());
    }
    spec.split(',')
        .map(|tok| {
            let k: usize = tok
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad scenario '{tok}'")))?;
            SplitSpec::scenario(k)
                .map_err(|_| CliError::usage(format!("scenario {k} out of range 1..=7")))
        })
        .collect()
}

fn parse_algorithms(spec: &str) -> Result<Vec<Algorithm>, CliError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(Algorithm::all().to_vec());
    }
    spec.split(',')
        .map(|tok| tok.trim().parse::<Algorithm>().map_err(CliError::usage))
        .collect()
}

/// Writes the full artifact set for one scenario run.
fn write_run_artifacts(dir: &Path, run: &ScenarioRun) -> Result<(), CliError> {
    write_json(&dir.join("result.json"), &run.result)?;
    write_json(&dir.join("train_report.json"), &run.report)?;
    write_json(&dir.join("network.json"), &run.network)?;
    write_response_csv(&run.response, dir.join("response.csv"))?;
    write_histogram_csv(&run.histogram, dir.join("error_histogram.csv"))?;
    write_acf_csv(&run.test_acf, dir.join("autocorrelation.csv"))?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let settings = resolve_settings(&args.settings)?;
    let (dataset, descriptor) = args.data.load()?;
    let scenario = SplitSpec::scenario(args.scenario)
        .map_err(|_| CliError::usage(format!("scenario {} out of range 1..=7", args.scenario)))?;

    let run = run_scenario(&dataset, args.algo, &scenario, &settings, args.seed)?;
    ensure_dir(&args.out)?;
    write_run_artifacts(&args.out, &run)?;

    // Single-row table rendered through the same report machinery.
    let manifest = RunManifest::new(
        descriptor,
        args.seed,
        vec![args.algo],
        vec![scenario.clone()],
        settings,
    );
    let cell = GridCell {
        algorithm: args.algo,
        scenario: scenario.name.clone(),
        seed: args.seed,
        result: Some(run.result.clone()),
        error: None,
    };
    let report = BenchReport::new(manifest, vec![cell], SelectionCriterion::default())?;
    let formats: Vec<ReportFormat> = match args.format {
        Some(f) => vec![f.into()],
        None => vec![ReportFormat::Csv, ReportFormat::Markdown],
    };
    for format in formats {
        let path = args.out.join(format!("results.{}", format.extension()));
        emit_report(&report, format, &path)?;
    }

    let t = run.result.test_row();
    println!(
        "{} {}: test MSE {:.4}, R {:.4}, accuracy {:.2}%, efficiency {:.2} ({} epochs, stop: {})",
        args.algo,
        run.result.scenario,
        t.mse,
        t.r,
        t.accuracy_percent,
        t.efficiency,
        run.result.epochs_run,
        run.result.stop_reason
    );
    println!("artifacts in {}", args.out.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let settings = resolve_settings(&args.settings)?;
    let (dataset, descriptor) = args.data.load()?;
    let algorithms = parse_algorithms(&args.algo)?;
    let scenarios = parse_scenarios(&args.scenario)?;
    let criterion: SelectionCriterion = args.criterion.parse().map_err(CliError::usage)?;

    let cells = run_matrix(
        &dataset,
        &algorithms,
        &scenarios,
        &settings,
        args.seed,
        args.parallel,
    )?;
    let failed = cells.iter().filter(|c| c.error.is_some()).count();

    let mut manifest = RunManifest::new(descriptor, args.seed, algorithms, scenarios, settings);
    if args.timestamp {
        manifest.generated_at = Some(seconds_since_epoch());
    }
    let report = BenchReport::new(manifest, cells, criterion)?;

    ensure_dir(&args.out)?;
    let formats: Vec<ReportFormat> = match args.format {
        Some(f) => vec![f.into()],
        None => vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown],
    };
    for format in formats {
        let path = args.out.join(format!("results.{}", format.extension()));
        emit_report(&report, format, &path)?;
    }

    // Tolerate a closed pipe (e.g. `narlab bench ... | head`).
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut handle = stdout.lock();
    let _ = handle.write_all(render_markdown(&report).as_bytes());
    if failed > 0 {
        eprintln!("warning: {failed} grid cell(s) failed; see the error column");
    }
    let _ = writeln!(handle, "\nreports in {}", args.out.display());
    Ok(())
}

/// Wall-clock stamp without a date-time dependency; compared runs omit it
/// anyway.
fn seconds_since_epoch() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}s-since-epoch")
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.network)
        .map_err(|e| CliError::data(format!("cannot read '{}': {e}", args.network.display())))?;
    let network: NarNetwork = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("bad network snapshot: {e}")))?;

    let (dataset, _) = args.data.load()?;
    // The snapshot's normalizer travels with the network; never refit it.
    let reg = embed_lags(&dataset, network.lag_count(), network.normalizer())?;
    let idx: Vec<usize> = (0..reg.n_targets()).collect();
    let preds = network
        .predict_targets(&reg, &idx)
        .map_err(|e| CliError::data(e.to_string()))?;

    let mut csv = String::from("time,target,prediction,error\n");
    for (&i, p) in idx.iter().zip(&preds) {
        let t = reg.targets_raw()[i];
        csv.push_str(&format!(
            "{},{},{},{}\n",
            dataset.time_at(reg.target_time(i)),
            t,
            p,
            t - p
        ));
    }
    write_file(&args.out, &csv)?;
    println!(
        "predicted {} targets with d={}, h={} -> {}",
        preds.len(),
        network.lag_count(),
        network.hidden_count(),
        args.out.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::data(format!("cannot read '{}': {e}", args.input.display())))?;
    let report: BenchReport = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("bad report json: {e}")))?;
    emit_report(&report, ReportFormat::from(args.format), &args.out)?;
    println!("rendered {}", args.out.display());
    Ok(())
}
