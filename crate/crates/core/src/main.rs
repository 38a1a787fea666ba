use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fesl::harness::metrics::{check_bounds, check_selection_expectation};
use fesl::harness::presets::step_scale_for;
use fesl::harness::{
    aggregate, derive_seed, format_table, read_records, run_grid, synthetic_stream, trend_csv,
    write_record, MethodKind, RunConfig,
};
use fesl::streams::{
    build_cycle, default_schedule, load_batch, synthesize_second_space, BatchFormat, CycleStream,
    GeneratedProfile, LoadOptions, SourceKind,
};
use fesl::types::{StreamSchedule, Task, DEFAULT_RADIUS};
use fesl::{FeslError, Result};

#[derive(Parser)]
#[command(name = "fesl", version, about = "Learning with feature evolvable streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a cycle stream from a batch file and dump it.
    Synth(SynthArgs),
    /// Build a cycle stream from one of the built-in generated profiles.
    Generate(GenerateArgs),
    /// Run methods over a stream and write one record per (method, seed).
    Run(RunArgs),
    /// Aggregate records into accuracy/loss tables and loss-trend CSV.
    Report(ReportArgs),
    /// Check the ensemble regret bounds on a directory of records.
    Check(CheckArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Batch file holding the old feature space.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "csv")]
    format: BatchFormat,
    /// Second view of the same rows; when absent the new space is a Gaussian image of the input.
    #[arg(long)]
    input_new: Option<PathBuf>,
    /// New-space dimension for the Gaussian image.
    #[arg(long, required_unless_present = "input_new")]
    d2: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Stream name; defaults to the input file stem.
    #[arg(long)]
    name: Option<String>,
    /// Force the task instead of inferring it from the labels.
    #[arg(long)]
    task: Option<Task>,
    /// Declared dimension for sparse input.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    t1: Option<usize>,
    #[arg(long)]
    t2: Option<usize>,
    /// Overlap length.
    #[arg(long)]
    b: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    /// One of the built-in profile names (australian, dna, ...).
    #[arg(long)]
    profile: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    stream: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "nogd,rogdu,rogdf,feslc,fesls")]
    methods: Vec<MethodKind>,
    /// Number of seeds, taken consecutively from `--seed`.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step-size constant; defaults to the preset for the stream name, else 1.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: f64,
    #[arg(long, default_value_t = fesl::recovery::DEFAULT_RIDGE)]
    ridge: f64,
    #[arg(long, value_enum, default_value = "on")]
    clip: Switch,
    /// Fixed-share rate override for FESL-s.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Table output file.
    #[arg(long)]
    out: PathBuf,
    /// Loss-trend CSV; defaults to `<out>.trend.csv`.
    #[arg(long)]
    trend: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| FeslError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| FeslError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn synth(args: SynthArgs) -> Result<()> {
    let opts = LoadOptions {
        task: args.task,
        dim: args.dim,
    };
    let old = load_batch(&args.input, args.format, &opts)?;
    let (new, source) = match &args.input_new {
        Some(path) => {
            let opts = LoadOptions {
                task: Some(old.task),
                dim: None,
            };
            let new = load_batch(path, args.format, &opts)?;
            if new.labels != old.labels {
                return Err(FeslError::InvalidInput(
                    "the two views disagree on labels".into(),
                ));
            }
            (new.features, SourceKind::TwoView)
        }
        None => {
            let d2 = args.d2.expect("clap enforces --d2 without --input-new");
            let new = synthesize_second_space(&old.features, d2, derive_seed(args.seed, 2))?;
            (new, SourceKind::SyntheticGaussian)
        }
    };
    let d2 = new.ncols();
    let base = default_schedule(old.n(), old.dim(), d2, source)?;
    let t1 = args.t1.unwrap_or(base.t1);
    let t2 = args.t2.unwrap_or(old.n().saturating_sub(t1));
    let schedule = StreamSchedule::new(t1, t2, args.b.unwrap_or(base.b), old.dim(), d2)?;
    let name = args.name.unwrap_or_else(|| {
        args.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "stream".into())
    });
    let stream = build_cycle(
        &old.features,
        &new,
        &old.labels,
        old.task,
        schedule,
        derive_seed(args.seed, 3),
    )?
    .with_name(name);
    stream.save(&args.out)?;
    println!(
        "wrote {} (t1={} t2={} b={} d1={} d2={})",
        args.out.display(),
        schedule.t1,
        schedule.t2,
        schedule.b,
        schedule.d1,
        schedule.d2
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let profile = GeneratedProfile::by_name(&args.profile).ok_or_else(|| {
        FeslError::InvalidInput(format!("unknown profile '{}'", args.profile))
    })?;
    let stream = synthetic_stream(profile, args.seed)?;
    stream.save(&args.out)?;
    println!("wrote {} ({})", args.out.display(), profile.name);
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    if args.seeds == 0 {
        return Err(FeslError::InvalidInput("--seeds must be at least 1".into()));
    }
    let stream = CycleStream::load(&args.stream)?;
    let config = RunConfig {
        step_scale: args.c.unwrap_or_else(|| step_scale_for(&stream.name)),
        radius: args.radius,
        ridge: args.ridge,
        seed: args.seed,
        clip_losses: matches!(args.clip, Switch::On),
        delta: args.delta,
    };
    let mut methods = args.methods.clone();
    methods.sort();
    methods.dedup();
    let seeds: Vec<u64> = (0..args.seeds).map(|k| args.seed + k).collect();
    let records = run_grid(&stream, &methods, &seeds, &config)?;
    for r in &records {
        write_record(&args.out, r)?;
    }
    println!(
        "{} records for '{}' (c={}) in {}",
        records.len(),
        stream.name,
        config.step_scale,
        args.out.display()
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let records = read_records(&args.input)?;
    if records.is_empty() {
        return Err(FeslError::InvalidInput(format!(
            "no records in {}",
            args.input.display()
        )));
    }
    let table = format_table(&aggregate(&records));
    write_text(&args.out, &table)?;
    let trend = args.trend.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".trend.csv");
        PathBuf::from(p)
    });
    write_text(&trend, &trend_csv(&records))?;
    print!("{table}");
    Ok(())
}

/// Returns whether every FESL-c record kept its bound.
fn check(args: CheckArgs) -> Result<bool> {
    let records = read_records(&args.input)?;
    let mut all_pass = true;
    let mut checked = 0;
    let mut selection: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for r in records.iter().filter(|r| matches!(r.method, MethodKind::FeslC | MethodKind::FeslS)) {
        let rep = check_bounds(r)?;
        checked += 1;
        match rep.pass {
            Some(pass) => {
                all_pass &= pass;
                println!(
                    "{} {} seed {}: L12 {:.4} <= min(L1, L2) {:.4} + {:.4} ... {}",
                    rep.dataset,
                    rep.method.display_name(),
                    rep.seed,
                    rep.ensemble_loss,
                    rep.comparator,
                    rep.bound,
                    if pass { "ok" } else { "VIOLATED" }
                );
            }
            None => selection.entry(rep.dataset.clone()).or_default().push(rep),
        }
    }
    for reports in selection.values() {
        for rep in reports {
            println!(
                "{} {} seed {}: L12 {:.4} vs min_s L^s {:.4} + {:.4}, excess {:+.4}",
                rep.dataset,
                rep.method.display_name(),
                rep.seed,
                rep.ensemble_loss,
                rep.comparator,
                rep.bound,
                rep.excess
            );
        }
        let exp = check_selection_expectation(reports)?;
        println!(
            "{} FESL-s over {} runs: mean excess {:+.4}, slack {:.4} ... {}",
            exp.dataset,
            exp.runs,
            exp.mean_excess,
            exp.slack,
            if exp.pass { "within slack" } else { "beyond slack" }
        );
    }
    if checked == 0 {
        println!("no ensemble records in {}", args.input.display());
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(a) => synth(a).map(|_| true),
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Run(a) => run(a).map(|_| true),
        Command::Report(a) => report(a).map(|_| true),
        Command::Check(a) => check(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
