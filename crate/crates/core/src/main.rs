use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sadic::dsl;
use sadic::experiment::{CheckpointSpec, ExperimentConfig, OutputFormat};
use sadic::generators::checkpoints;
use sadic::stats::be_dimension;
use sadic::verify::{self, Scale, CRITERIA};
use sadic::{Alphabet, FrequencyVector};

/// Construct, transform and measure s-adic digit expansions.
#[derive(Parser)]
#[command(name = "sadic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pipeline and write its checkpoint trace.
    Stats(StatsArgs),
    /// Hausdorff dimension of the set of numbers with digit frequencies tau.
    Dimension(DimensionArgs),
    /// Run the reproduction battery.
    Verify(VerifyArgs),
    /// Print a pipeline in canonical form.
    Fmt { pipeline: String },
    /// Block counts and digit positions of the oscillating construction.
    Checkpoints {
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckpointKind {
    Geometric,
    PaperL,
}

#[derive(Args)]
struct StatsArgs {
    /// Pipeline text, e.g. "uniform(3, 42) | seven".
    #[arg(long)]
    pipeline: Option<String>,
    /// JSON experiment config; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    checkpoints: Option<CheckpointKind>,
    /// Last checkpoint of the geometric schedule.
    #[arg(long)]
    max_n: Option<u64>,
    /// Number of checkpoint pairs for paper-l.
    #[arg(long)]
    n_max: Option<usize>,
    /// Exponent of the oscillating construction for paper-l.
    #[arg(long)]
    p: Option<f64>,
    /// Verdict tolerance for the mean and every frequency.
    #[arg(long)]
    tol: Option<f64>,
    /// Trace file; the trace goes to stdout and the summary to stderr when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Seed for uniform and iid sources.
    #[arg(long)]
    seed: Option<u64>,
    /// Add raw counts and digit sums to the trace.
    #[arg(long)]
    counts: bool,
}

#[derive(Args)]
struct DimensionArgs {
    /// Comma-separated frequencies; entries may be fractions such as 1/3.
    #[arg(long)]
    tau: String,
    #[arg(long, default_value_t = 3)]
    s: u32,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Scale::Small)]
    scale: Scale,
    /// Run only these criteria (repeatable).
    #[arg(long)]
    criterion: Vec<u32>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of one line per criterion.
    #[arg(long)]
    json: bool,
}

enum Failure {
    Config(String),
    Io(String),
    Verify,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn caret(text: &str, offset: usize) -> String {
    let col = text[..offset.min(text.len())].chars().count();
    format!("  {text}\n  {}^", " ".repeat(col))
}

fn stats(args: StatsArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            ExperimentConfig::from_json(&text).map_err(|e| Failure::Config(e.to_string()))?
        }
        None => ExperimentConfig::from_json(r#"{"pipeline": ""}"#).expect("default config"),
    };
    match (&args.pipeline, &args.config) {
        (Some(p), _) => config.pipeline = p.clone(),
        (None, None) => return Err(Failure::Config("one of --pipeline or --config is required".into())),
        _ => {}
    }
    let kind = args.checkpoints.unwrap_or(match config.checkpoints {
        CheckpointSpec::Geometric { .. } => CheckpointKind::Geometric,
        CheckpointSpec::PaperL { .. } => CheckpointKind::PaperL,
    });
    config.checkpoints = match (kind, config.checkpoints) {
        (CheckpointKind::Geometric, CheckpointSpec::Geometric { max_n }) => {
            CheckpointSpec::Geometric { max_n: args.max_n.unwrap_or(max_n) }
        }
        (CheckpointKind::Geometric, _) => CheckpointSpec::Geometric { max_n: args.max_n.unwrap_or(1_000_000) },
        (CheckpointKind::PaperL, CheckpointSpec::PaperL { n_max, p }) => {
            CheckpointSpec::PaperL { n_max: args.n_max.unwrap_or(n_max), p: args.p.unwrap_or(p) }
        }
        (CheckpointKind::PaperL, _) => {
            CheckpointSpec::PaperL { n_max: args.n_max.unwrap_or(3), p: args.p.unwrap_or(1.0) }
        }
    };
    if let Some(tol) = args.tol {
        config.tolerances.mean = tol;
        config.tolerances.frequency = tol;
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    config.include_counts |= args.counts;

    let experiment = config.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let outcome = experiment.run().map_err(|e| Failure::Config(e.to_string()))?;
    write_output(args.out.as_deref(), &outcome.render(config.format, config.include_counts))?;
    let summary = outcome.summary();
    if args.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn parse_entry(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("invalid frequency `{text}`"));
    match text.split_once('/') {
        Some((a, b)) => Ok(number(a)? / number(b)?),
        None => number(text),
    }
}

fn dimension(args: DimensionArgs) -> Result<(), Failure> {
    let alphabet = Alphabet::new(args.s).map_err(|e| Failure::Config(e.to_string()))?;
    let tau: Vec<f64> = args.tau.split(',').map(parse_entry).collect::<Result<_, _>>().map_err(Failure::Config)?;
    let tau = FrequencyVector::new(tau).map_err(|e| Failure::Config(e.to_string()))?;
    let d = be_dimension(&tau, alphabet).map_err(|e| Failure::Config(e.to_string()))?;
    println!("{d:.6}");
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    if let Some(bad) = args.criterion.iter().find(|id| !CRITERIA.iter().any(|(c, _)| c == *id)) {
        return Err(Failure::Config(format!("unknown criterion {bad}; ids are 1 to {}", CRITERIA.len())));
    }
    let report = verify::run(args.scale, &args.criterion);
    if let Some(path) = &args.out {
        write_output(Some(path), &report.to_json())?;
    }
    if args.json {
        write_output(None, &report.to_json())?;
    } else {
        for c in &report.criteria {
            let status = if c.passed { "PASS" } else { "FAIL" };
            println!("{status} {:>2} {} ({} ms): {}", c.id, c.name, c.elapsed_ms, c.detail);
        }
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn format_pipeline(text: &str) -> Result<(), Failure> {
    match dsl::parse(text) {
        Ok(expr) => {
            println!("{expr}");
            Ok(())
        }
        Err(e) => Err(Failure::Config(format!("{e}\n{}", caret(text, e.offset)))),
    }
}

fn show_checkpoints(n_max: usize, p: f64) -> Result<(), Failure> {
    let c = checkpoints(p, n_max).map_err(|e| Failure::Config(e.to_string()))?;
    println!("n,k,k_star,l,l_star");
    for i in 0..n_max {
        println!("{},{},{},{},{}", i + 1, c.k[i], c.k_star[i], c.l[i], c.l_star[i]);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats(args) => stats(args),
        Command::Dimension(args) => dimension(args),
        Command::Verify(args) => run_verify(args),
        Command::Fmt { pipeline } => format_pipeline(&pipeline),
        Command::Checkpoints { n_max, p } => show_checkpoints(n_max, p),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Config(msg) => eprintln!("error: {msg}"),
                Failure::Io(msg) => eprintln!("I/O error: {msg}"),
                Failure::Verify => eprintln!("verification failed"),
            }
            ExitCode::from(failure.code())
        }
    }
}
