//! Lexicographic multi-objective graph clustering with per-objective slack.
//!
//! Objectives are processed one at a time in priority order. Each objective
//! has a *makeshift* that reshapes the clusters produced so far so that the
//! current objective is served while the groups formed by earlier objectives
//! (stars of an edge cover, matched pairs) stay together. After every stage
//! the result is checked against the allowed slack and, if needed, repaired by
//! a local search that never breaks the slack of an earlier objective.
//!
//! The crate is organised as follows:
//!
//! - [`graph`]: instances, metrics and file formats.
//! - [`objectives`]: objective evaluation, lexicographic comparison, slack.
//! - [`makeshifts`]: the per-objective subroutines and their variants.
//! - [`zeus`]: the sequential pipeline and its local search.
//! - [`oracle`]: exhaustive solvers for tiny instances.
//! - [`synth`]: seeded synthetic instance generators.

pub mod clustering;
pub mod error;
pub mod flow;
pub mod graph;
pub mod makeshifts;
pub mod objectives;
pub mod oracle;
pub mod synth;
pub mod zeus;

pub use clustering::{Clustering, PairKind, PairStructure};
pub use error::{Error, Result};
pub use graph::{Color, GraphInstance, InstanceFormat, MetricReport};
pub use makeshifts::{FirstCenter, MakeshiftOptions, NonExpertRule};
pub use objectives::{
    Direction, EstimateKind, LexOutcome, ObjectiveKind, ObjectiveSpec, ObjectiveValue,
    OptimalEstimate, SlackVector,
};
pub use zeus::{zeus_run, PipelineState, ProblemSpec, StageTrace};
