//! Experiment grids: every (algorithm, k, slack, seed) cell is run and its
//! clustering re-evaluated from scratch.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use zeus_core::graph::load_instance;
use zeus_core::objectives::serde_inf;
use zeus_core::oracle::oracle_lmoc;
use zeus_core::synth::{generate, SynthKind, SynthParams};
use zeus_core::{
    zeus_run, Clustering, GraphInstance, InstanceFormat, MakeshiftOptions, ObjectiveSpec,
    PairStructure, ProblemSpec, StageTrace,
};

use crate::baselines::{
    baseline_b1, baseline_b2, baseline_moc_sweep, evaluate_all, fairness_pairs,
};
use crate::{io_err, BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Zeus,
    B1,
    B2,
    Moc,
    Oracle,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Zeus => "zeus",
            Algorithm::B1 => "b1",
            Algorithm::B2 => "b2",
            Algorithm::Moc => "moc",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zeus" => Ok(Algorithm::Zeus),
            "b1" => Ok(Algorithm::B1),
            "b2" => Ok(Algorithm::B2),
            "moc" => Ok(Algorithm::Moc),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(BenchError::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

/// Either an explicit list or `{"from": 2, "to": 10, "step": 1}` (inclusive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KRange {
    List(Vec<usize>),
    Span {
        from: usize,
        to: usize,
        #[serde(default = "one")]
        step: usize,
    },
}

fn one() -> usize {
    1
}

impl KRange {
    pub fn values(&self) -> Vec<usize> {
        match self {
            KRange::List(v) => v.clone(),
            KRange::Span { from, to, step } if *step > 0 && from <= to => {
                (*from..=*to).step_by(*step).collect()
            }
            KRange::Span { .. } => Vec::new(),
        }
    }
}

/// Seeded synthetic instances; each seed of the experiment draws its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    pub kind: SynthKind,
    pub n: usize,
    #[serde(default)]
    pub edge_radius: Option<f64>,
    #[serde(default = "default_fraction")]
    pub blue_fraction: f64,
    #[serde(default = "default_fraction")]
    pub expert_fraction: f64,
}

fn default_fraction() -> f64 {
    0.3
}

impl SyntheticSource {
    pub fn params(&self, seed: u64) -> SynthParams {
        SynthParams {
            kind: self.kind,
            n: self.n,
            seed,
            edge_radius: self.edge_radius,
            blue_fraction: self.blue_fraction,
            expert_fraction: self.expert_fraction,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn all_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Instance file (`.json`, or `.csv` edge list with `fill`).
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub fill: Option<f64>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSource>,
    /// Comma separated, e.g. `rs,kc`.
    pub objectives: String,
    pub slacks: Vec<Vec<f64>>,
    pub k: KRange,
    /// Instance seeds for synthetic input, makeshift seeds otherwise.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub output_dir: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub options: MakeshiftOptions,
    #[serde(default)]
    pub local_search_cap: Option<usize>,
    #[serde(default)]
    pub allow_infeasible_slack: bool,
}

impl ExperimentConfig {
    /// Reads a JSON config; relative paths in it are taken from the config's
    /// own directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = config.instance.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        Ok(config)
    }

    pub fn objective_list(&self) -> Result<Vec<ObjectiveSpec>> {
        Ok(ObjectiveSpec::parse_list(&self.objectives)?)
    }

    pub fn validate(&self) -> Result<()> {
        let objectives = self.objective_list()?;
        if objectives.is_empty() {
            return Err(BenchError::Config("no objectives".into()));
        }
        if self.k.values().is_empty() {
            return Err(BenchError::Config("empty k range".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithms".into()));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::Config("no seeds".into()));
        }
        if self.slacks.is_empty() {
            return Err(BenchError::Config("no slack settings".into()));
        }
        if let Some(s) = self.slacks.iter().find(|s| s.len() != objectives.len()) {
            return Err(BenchError::Config(format!(
                "slack setting {s:?} does not match {} objectives",
                objectives.len()
            )));
        }
        match (&self.instance, &self.synthetic) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(BenchError::Config(
                "give exactly one of `instance` and `synthetic`".into(),
            )),
        }
    }

    fn load_instance(&self, seed: u64) -> Result<GraphInstance> {
        if let Some(s) = &self.synthetic {
            return Ok(generate(&s.params(seed))?);
        }
        let path = self.instance.as_ref().expect("validated source");
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => InstanceFormat::CsvEdges {
                fill: self.fill.ok_or_else(|| {
                    BenchError::Config("a csv edge list needs `fill`".into())
                })?,
            },
            _ => InstanceFormat::Json,
        };
        Ok(load_instance(path, format)?)
    }
}

/// One cell of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub k: usize,
    pub slack: Vec<f64>,
    pub seed: u64,
    pub objectives: Vec<String>,
    /// Objective values re-evaluated on the returned clustering; empty when
    /// the cell failed.
    #[serde(with = "serde_inf::seq")]
    pub values: Vec<f64>,
    pub wall_ms: f64,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub clustering: Option<Clustering>,
    /// Stage trace of a pipeline run.
    #[serde(default)]
    pub trace: Option<Vec<StageTrace>>,
}

struct Outcome {
    clustering: std::result::Result<Clustering, String>,
    trace: Option<Vec<StageTrace>>,
    wall_ms: f64,
}

fn timed(f: impl FnOnce() -> zeus_core::Result<Clustering>) -> Outcome {
    let start = Instant::now();
    let r = f();
    Outcome {
        clustering: r.map_err(|e| e.to_string()),
        trace: None,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

struct Cell<'a> {
    h: &'a GraphInstance,
    objectives: &'a [ObjectiveSpec],
    names: &'a [String],
    pairs: &'a std::result::Result<Vec<Option<PairStructure>>, String>,
    seed: u64,
}

impl Cell<'_> {
    fn record(&self, algorithm: Algorithm, k: usize, slack: &[f64], out: &Outcome) -> RunRecord {
        let mut rec = RunRecord {
            algorithm,
            k,
            slack: slack.to_vec(),
            seed: self.seed,
            objectives: self.names.to_vec(),
            values: Vec::new(),
            wall_ms: out.wall_ms,
            error: None,
            clustering: None,
            trace: out.trace.clone(),
        };
        let c = match &out.clustering {
            Ok(c) => c,
            Err(e) => {
                rec.error = Some(e.clone());
                return rec;
            }
        };
        let evaluated = self
            .pairs
            .clone()
            .and_then(|p| evaluate_all(self.h, c, self.objectives, &p).map_err(|e| e.to_string()));
        match evaluated {
            Ok(v) => rec.values = v,
            Err(e) => rec.error = Some(format!("evaluation: {e}")),
        }
        rec.clustering = Some(c.clone());
        rec
    }
}

/// Runs every cell of `config`. Failures inside a cell are recorded in its
/// record; only an unusable config or instance aborts the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let objectives = config.objective_list()?;
    let names: Vec<String> = objectives.iter().map(|o| o.to_string()).collect();
    let ks = config.k.values();
    let mut records = Vec::new();
    let file_instance = match config.synthetic {
        None => Some(config.load_instance(0)?),
        Some(_) => None,
    };
    for &seed in &config.seeds {
        let drawn;
        let h = match &file_instance {
            Some(h) => h,
            None => {
                drawn = config.load_instance(seed)?;
                &drawn
            }
        };
        let mut opts = config.options.clone();
        opts.seed.get_or_insert(seed);
        let pairs = fairness_pairs(h, &objectives).map_err(|e| e.to_string());
        let cell = Cell {
            h,
            objectives: &objectives,
            names: &names,
            pairs: &pairs,
            seed,
        };
        let spec_for = |k: usize, slack: &[f64], lenient: bool| ProblemSpec {
            objectives: objectives.clone(),
            slacks: zeus_core::SlackVector(slack.to_vec()),
            k,
            options: opts.clone(),
            local_search_cap: config.local_search_cap,
            allow_infeasible_slack: config.allow_infeasible_slack || lenient,
        };

        let mut moc: BTreeMap<usize, Outcome> = BTreeMap::new();
        if config.algorithms.contains(&Algorithm::Moc) {
            let valid: Vec<usize> = ks.iter().copied().filter(|&k| k >= 1 && k <= h.n()).collect();
            match baseline_moc_sweep(h, &spec_for(1, &config.slacks[0], true), &valid) {
                Ok(snaps) => {
                    for (k, c, ms) in snaps {
                        moc.insert(
                            k,
                            Outcome {
                                clustering: Ok(c),
                                trace: None,
                                wall_ms: ms,
                            },
                        );
                    }
                }
                Err(e) => {
                    for &k in &valid {
                        moc.insert(
                            k,
                            Outcome {
                                clustering: Err(e.to_string()),
                                trace: None,
                                wall_ms: 0.0,
                            },
                        );
                    }
                }
            }
        }

        for &k in &ks {
            for &alg in &config.algorithms {
                // everything but the pipeline ignores slack: run once per k
                let fixed = match alg {
                    Algorithm::Zeus => None,
                    Algorithm::B1 => Some(timed(|| baseline_b1(h, &spec_for(k, &config.slacks[0], true)))),
                    Algorithm::B2 => Some(timed(|| baseline_b2(h, k, &opts))),
                    Algorithm::Oracle => Some(timed(|| {
                        oracle_lmoc(h, k, &objectives).map(|r| r.best_clustering)
                    })),
                    Algorithm::Moc => Some(moc.remove(&k).unwrap_or_else(|| Outcome {
                        clustering: Err(format!("k = {k} must lie in 1..={}", h.n())),
                        trace: None,
                        wall_ms: 0.0,
                    })),
                };
                for slack in &config.slacks {
                    let rec = match &fixed {
                        Some(out) => cell.record(alg, k, slack, out),
                        None => {
                            let start = Instant::now();
                            let r = zeus_run(h, &spec_for(k, slack, false));
                            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                            let out = match r {
                                Ok((c, state)) => Outcome {
                                    clustering: Ok(c),
                                    trace: Some(state.trace),
                                    wall_ms,
                                },
                                Err(e) => Outcome {
                                    clustering: Err(e.to_string()),
                                    trace: None,
                                    wall_ms,
                                },
                            };
                            cell.record(alg, k, slack, &out)
                        }
                    };
                    records.push(rec);
                }
            }
        }
    }
    Ok(records)
}
