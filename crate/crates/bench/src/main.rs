use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use zeus_bench::{emit_report, run_experiment, BenchError, ExperimentConfig};
use zeus_core::graph::{load_instance, save_instance};
use zeus_core::objectives::{evaluate, serde_inf};
use zeus_core::oracle::oracle_lmoc;
use zeus_core::synth::{generate, SynthKind, SynthParams};
use zeus_core::{
    zeus_run, Clustering, Error, FirstCenter, GraphInstance, InstanceFormat, MakeshiftOptions,
    NonExpertRule, ObjectiveSpec, ProblemSpec, SlackVector,
};

#[derive(Parser)]
#[command(name = "zeus-cluster", version, about = "Lexicographic multi-objective clustering with slack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FirstCenterArg {
    Lowest,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum NonExpertArg {
    Expert,
    Center,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Instance file: JSON, or a `u,v,weight` CSV edge list.
    #[arg(long)]
    input: PathBuf,
    /// Distance for pairs a CSV edge list leaves out.
    #[arg(long)]
    fill: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline on one instance.
    Cluster {
        #[command(flatten)]
        input: InputArgs,
        /// Objectives in priority order, e.g. `rs,kc` or `f:2:1,km`.
        #[arg(long)]
        objectives: String,
        /// One slack per objective, e.g. `1,3`.
        #[arg(long)]
        slack: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "lowest")]
        first_center: FirstCenterArg,
        #[arg(long, value_enum, default_value = "center")]
        nonexpert_rule: NonExpertArg,
        /// Flag balanced expert assignments whose radius exceeds this
        /// multiple of the greedy radius.
        #[arg(long)]
        balance_multiplier: Option<f64>,
        /// Accept slack values that cannot be guaranteed.
        #[arg(long)]
        allow_infeasible_slack: bool,
        /// Local search move cap (default 50 per node).
        #[arg(long)]
        move_cap: Option<usize>,
        #[arg(long)]
        output: PathBuf,
        /// Also write the per-stage trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exhaustive lexicographic optimum for a small instance.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        objectives: String,
        #[arg(long)]
        k: usize,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment grid and write its report.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a seeded synthetic instance.
    Gen {
        #[arg(long)]
        kind: SynthKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        edge_radius: Option<f64>,
        #[arg(long, default_value_t = 0.3)]
        blue_fraction: f64,
        #[arg(long, default_value_t = 0.3)]
        expert_fraction: f64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Serialize)]
struct ClusterOutput<'a> {
    objectives: Vec<String>,
    k: usize,
    slack: &'a [f64],
    #[serde(with = "serde_inf::seq")]
    values: Vec<f64>,
    /// Node labels per block.
    clusters: Vec<Vec<&'a str>>,
    centers: Option<Vec<&'a str>>,
    clustering: &'a Clustering,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    objectives: Vec<String>,
    k: usize,
    #[serde(with = "serde_inf::seq")]
    values: Vec<f64>,
    enumerated: u64,
    clusters: Vec<Vec<&'a str>>,
    clustering: &'a Clustering,
}

fn read_input(a: &InputArgs) -> Result<GraphInstance, BenchError> {
    let format = match a.input.extension().and_then(|e| e.to_str()) {
        Some("csv") => InstanceFormat::CsvEdges {
            fill: a
                .fill
                .ok_or_else(|| BenchError::Config("a CSV edge list needs --fill".into()))?,
        },
        _ => InstanceFormat::Json,
    };
    Ok(load_instance(&a.input, format)?)
}

fn labelled<'a>(h: &'a GraphInstance, c: &Clustering) -> Vec<Vec<&'a str>> {
    c.blocks()
        .iter()
        .map(|b| b.iter().map(|&u| h.label(u)).collect())
        .collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), BenchError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Cluster {
            input,
            objectives,
            slack,
            k,
            seed,
            first_center,
            nonexpert_rule,
            balance_multiplier,
            allow_infeasible_slack,
            move_cap,
            output,
            trace,
        } => {
            let h = read_input(&input)?;
            let objectives = ObjectiveSpec::parse_list(&objectives)?;
            let slacks = SlackVector::parse(&slack)?;
            let mut options = MakeshiftOptions {
                first_center: match first_center {
                    FirstCenterArg::Lowest => FirstCenter::LowestIndex,
                    FirstCenterArg::Random => FirstCenter::SeededRandom,
                },
                seed,
                nonexpert_rule: match nonexpert_rule {
                    NonExpertArg::Expert => NonExpertRule::ClosestExpert,
                    NonExpertArg::Center => NonExpertRule::ClosestCenter,
                },
                ..MakeshiftOptions::default()
            };
            if let Some(m) = balance_multiplier {
                options.balance_radius_multiplier = m;
            }
            if slacks.0.len() != objectives.len() {
                return Err(BenchError::Config(format!(
                    "{} slack values for {} objectives",
                    slacks.0.len(),
                    objectives.len()
                )));
            }
            let spec = ProblemSpec {
                objectives,
                slacks,
                k,
                options,
                local_search_cap: move_cap,
                allow_infeasible_slack,
            };
            let (c, state) = zeus_run(&h, &spec)?;
            let pairs = state.pairs();
            let values = spec
                .objectives
                .iter()
                .zip(&pairs)
                .map(|(o, p)| Ok(evaluate(&h, &c, o, *p)?.value))
                .collect::<Result<Vec<f64>, Error>>()?;
            for w in &state.warnings {
                eprintln!("warning: {w}");
            }
            let out = ClusterOutput {
                objectives: spec.objectives.iter().map(|o| o.to_string()).collect(),
                k,
                slack: &spec.slacks.0,
                values,
                clusters: labelled(&h, &c),
                centers: c
                    .centers
                    .as_ref()
                    .map(|cs| cs.iter().map(|&u| h.label(u)).collect()),
                clustering: &c,
                warnings: &state.warnings,
            };
            write_json(&output, &out)?;
            if let Some(t) = trace {
                write_json(&t, &state.trace)?;
            }
        }
        Command::Oracle {
            input,
            objectives,
            k,
            output,
        } => {
            let h = read_input(&input)?;
            let objectives = ObjectiveSpec::parse_list(&objectives)?;
            let r = oracle_lmoc(&h, k, &objectives)?;
            let out = OracleOutput {
                objectives: objectives.iter().map(|o| o.to_string()).collect(),
                k,
                values: r.best_values.clone(),
                enumerated: r.enumerated,
                clusters: labelled(&h, &r.best_clustering),
                clustering: &r.best_clustering,
            };
            match output {
                Some(path) => write_json(&path, &out)?,
                None => println!("{}", serde_json::to_string_pretty(&out)?),
            }
        }
        Command::Bench { config } => {
            let config = ExperimentConfig::load(&config)?;
            let records = run_experiment(&config)?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            for f in emit_report(&records, &config.formats, &config.output_dir)? {
                println!("{}", f.display());
            }
            if failed > 0 {
                eprintln!("{failed} of {} cells failed; see the error column", records.len());
            }
        }
        Command::Gen {
            kind,
            n,
            seed,
            edge_radius,
            blue_fraction,
            expert_fraction,
            output,
        } => {
            let h = generate(&SynthParams {
                kind,
                n,
                seed,
                edge_radius,
                blue_fraction,
                expert_fraction,
            })?;
            save_instance(&h, &output)?;
        }
    }
    Ok(())
}

fn exit_code(e: &BenchError) -> u8 {
    match e {
        BenchError::Core(e) if e.is_infeasible() => 2,
        BenchError::Core(e) => match e.root() {
            Error::InvalidClustering(_) => 3,
            _ => 1,
        },
        BenchError::Csv(_) => 3,
        BenchError::Io { .. } | BenchError::Json(_) | BenchError::Config(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(3),
    }
}
