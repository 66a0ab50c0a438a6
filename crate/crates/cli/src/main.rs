use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use aigsynth_core::{bench, synthesize, Aig, Deadline, Error, Method, NegWEncoding, SafetySpec, SynthOptions, SynthReport, Verdict};
use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

const REALIZABLE: u8 = 10;
const UNREALIZABLE: u8 = 20;
const FAILURE: u8 = 1;
const TIMEOUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "aigsynth", version, about = "Synthesize circuits from AIGER safety specifications")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated adder or multiplier specification.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        bits: usize,
        /// Defaults to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Add,
    Mult,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NegW {
    Aux,
    Learn,
}

#[derive(clap::Args, Debug)]
struct SynthArgs {
    /// Specification in AIGER format (aag or aig).
    input: Option<PathBuf>,

    #[arg(long, default_value = "sl", value_parser = parse_method)]
    method: Method,

    #[arg(long, value_enum, default_value = "aux")]
    negw: NegW,

    /// Check the result against the winning region.
    #[arg(long)]
    verify: bool,

    /// Skip the second minimization pass of sl and sln.
    #[arg(long)]
    no_post_minimize: bool,

    /// Seconds.
    #[arg(long)]
    timeout: Option<f64>,

    /// Append one row of statistics to this CSV file.
    #[arg(long)]
    stats: Option<PathBuf>,

    /// Implementation in ASCII AIGER format.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Serialize)]
struct StatsRow {
    benchmark: String,
    method: String,
    time_winning_region_s: f64,
    time_extraction_s: f64,
    time_total_s: f64,
    aig_and_gates: usize,
    per_output_iterations: String,
    verified: String,
}

fn append_stats(path: &Path, row: &StatsRow) -> anyhow::Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

fn stats_row(benchmark: &str, method: Method, r: &SynthReport) -> StatsRow {
    let iters: Vec<String> = r.per_output_iterations().iter().map(|n| n.to_string()).collect();
    StatsRow {
        benchmark: benchmark.into(),
        method: method.to_string(),
        time_winning_region_s: r.timings.winning_region.as_secs_f64(),
        time_extraction_s: r.timings.extraction.as_secs_f64(),
        time_total_s: r.timings.total.as_secs_f64(),
        aig_and_gates: r.gates,
        per_output_iterations: iters.join(";"),
        verified: match &r.verdict {
            None => "skipped".into(),
            Some(v) => v.passed().to_string(),
        },
    }
}

fn run_synth(args: &SynthArgs) -> anyhow::Result<u8> {
    let input = args.input.as_ref().context("no input file given")?;
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let spec = SafetySpec::from_aig(Aig::parse(&bytes)?)?;
    let options = SynthOptions {
        method: args.method,
        negw: match args.negw {
            NegW::Aux => NegWEncoding::Aux,
            NegW::Learn => NegWEncoding::Learn,
        },
        verify: args.verify,
        deadline: args
            .timeout
            .map_or(Deadline::none(), |s| Deadline::after(Duration::from_secs_f64(s))),
        post_minimize: !args.no_post_minimize,
    };
    let report = synthesize(&spec, &options)?;
    let benchmark = input.file_stem().map_or("-".into(), |s| s.to_string_lossy().into_owned());
    if let Some(path) = &args.stats {
        append_stats(path, &stats_row(&benchmark, args.method, &report))?;
    }
    let Some(imp) = &report.implementation else {
        println!("UNREALIZABLE");
        return Ok(UNREALIZABLE);
    };
    if let Some(Verdict::Fail { check, counterexample }) = &report.verdict {
        anyhow::bail!("verification failed at check {check} on {counterexample:?}");
    }
    match &args.output {
        Some(path) => fs::write(path, imp.to_ascii()).with_context(|| format!("writing {}", path.display()))?,
        None => log::info!("no output path given; implementation not written"),
    }
    println!("REALIZABLE");
    log::info!(
        "{benchmark}: {} gates, winning region {:.3}s, extraction {:.3}s",
        report.gates,
        report.timings.winning_region.as_secs_f64(),
        report.timings.extraction.as_secs_f64()
    );
    Ok(REALIZABLE)
}

fn run_gen(kind: Kind, bits: usize, output: Option<&Path>) -> anyhow::Result<u8> {
    let aig = match kind {
        Kind::Add => bench::add(bits)?,
        Kind::Mult => bench::mult(bits)?,
    };
    match output {
        Some(path) => fs::write(path, aig.to_ascii()).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", aig.to_ascii()),
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Some(Command::Gen { kind, bits, output }) => run_gen(*kind, *bits, output.as_deref()),
        None => run_synth(&cli.synth),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let timed_out = matches!(e.downcast_ref::<Error>(), Some(Error::Timeout));
            ExitCode::from(if timed_out { TIMEOUT } else { FAILURE })
        }
    }
}
