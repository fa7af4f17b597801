//! The sequential pipeline: one makeshift per objective, a slack check after
//! each stage, and local search when the check fails.

mod local_search;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::clustering::{Clustering, PairStructure};
use crate::error::{Error, Result};
use crate::graph::GraphInstance;
use crate::makeshifts::{
    self, makeshift_fairness_ab, makeshift_fairness_min_cost, makeshift_kcenter,
    makeshift_kmedian, makeshift_rs, makeshift_rs_gamma, makeshift_tf_with, MakeshiftOptions,
    TeamVariant,
};
use crate::objectives::{
    estimate_optimal, evaluate, serde_inf, slack_violated_value, EstimateContext, ObjectiveKind,
    ObjectiveSpec, OptimalEstimate, SlackVector,
};

pub use local_search::{local_search, LocalSearchOutcome};

/// Moves allowed per node when no explicit cap is given.
pub const DEFAULT_MOVES_PER_NODE: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub objectives: Vec<ObjectiveSpec>,
    pub slacks: SlackVector,
    pub k: usize,
    #[serde(default)]
    pub options: MakeshiftOptions,
    /// Local search move cap; `50·n` when absent.
    #[serde(default)]
    pub local_search_cap: Option<usize>,
    /// Accept slack values that cannot be met in general.
    #[serde(default)]
    pub allow_infeasible_slack: bool,
}

impl ProblemSpec {
    pub fn new(objectives: Vec<ObjectiveSpec>, slacks: Vec<f64>, k: usize) -> Self {
        ProblemSpec {
            objectives,
            slacks: SlackVector(slacks),
            k,
            options: MakeshiftOptions::default(),
            local_search_cap: None,
            allow_infeasible_slack: false,
        }
    }

    pub fn validate(&self, h: &GraphInstance) -> Result<()> {
        if self.objectives.is_empty() {
            return Err(Error::Config("at least one objective is required".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.k > h.n() {
            return Err(Error::Config(format!(
                "k = {} exceeds the {} nodes of the instance",
                self.k,
                h.n()
            )));
        }
        self.slacks.validate(&self.objectives, self.allow_infeasible_slack)?;
        self.options.validate()
    }

    pub fn move_cap(&self, n: usize) -> usize {
        self.local_search_cap.unwrap_or(DEFAULT_MOVES_PER_NODE * n)
    }
}

/// An objective after its stage ran.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessedObjective {
    pub objective: ObjectiveSpec,
    #[serde(with = "serde_inf")]
    pub value: f64,
    pub estimate: OptimalEstimate,
    pub slack: f64,
    /// Pair set built by the resource sharing or fairness makeshift.
    pub pairs: Option<PairStructure>,
}

/// What happened in one stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: usize,
    pub objective: String,
    /// Value right after the makeshift.
    #[serde(with = "serde_inf")]
    pub makeshift_value: f64,
    /// Value at the end of the stage.
    #[serde(with = "serde_inf")]
    pub value: f64,
    pub estimate: OptimalEstimate,
    pub slack: f64,
    pub violated: bool,
    pub local_search_moves: usize,
    /// Value after each accepted local search move.
    #[serde(with = "serde_inf::seq")]
    pub local_search_values: Vec<f64>,
    pub still_violated: bool,
    pub elapsed_ms: f64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub clustering: Option<Clustering>,
    pub processed: Vec<ProcessedObjective>,
    pub trace: Vec<StageTrace>,
    pub warnings: Vec<String>,
}

impl PipelineState {
    /// Pair structures of the processed objectives, by position.
    pub fn pairs(&self) -> Vec<Option<&PairStructure>> {
        self.processed.iter().map(|p| p.pairs.as_ref()).collect()
    }
}

/// Runs every objective in order, starting from singleton clusters.
pub fn zeus_run(h: &GraphInstance, spec: &ProblemSpec) -> Result<(Clustering, PipelineState)> {
    spec.validate(h)?;
    let n = h.n();
    let k = spec.k;
    let opts = &spec.options;
    let mut c = Clustering::singletons(n);
    let mut state = PipelineState::default();
    let mut experts_pinned: Vec<usize> = Vec::new();
    let mut consolidated = false;

    for (i, o) in spec.objectives.iter().enumerate() {
        let start = Instant::now();
        let delta = spec.slacks.0[i];
        let mut notes = Vec::new();
        let next_is_kmedian = spec.objectives[i + 1..]
            .iter()
            .find(|x| matches!(x.kind, ObjectiveKind::KCenter | ObjectiveKind::KMedian))
            .is_some_and(|x| x.kind == ObjectiveKind::KMedian);
        let stage = |e: Error| e.in_stage(i, o.to_string());

        let mut pairs = None;
        match o.kind {
            ObjectiveKind::ResourceSharing => {
                let f = if o.gamma == 1 {
                    makeshift_rs(h, &c)
                } else {
                    makeshift_rs_gamma(h, &c, o.gamma)
                }
                .map_err(stage)?;
                c = f.clustering;
                pairs = Some(f.pairs);
            }
            ObjectiveKind::Fairness => {
                let f = if next_is_kmedian {
                    notes.push("minimum cost matching for a following k-median".to_string());
                    makeshift_fairness_min_cost(h, &c, o.alpha, o.beta)
                } else {
                    makeshift_fairness_ab(h, &c, o.alpha, o.beta)
                }
                .map_err(stage)?;
                c = f.clustering;
                pairs = Some(f.pairs);
            }
            ObjectiveKind::KCenter | ObjectiveKind::KMedian => {
                c = if c.is_consolidated(k) {
                    makeshifts::refine_assignment(h, &c, &experts_pinned)
                } else if o.kind == ObjectiveKind::KCenter {
                    makeshift_kcenter(h, &c, k, opts).map_err(stage)?
                } else {
                    makeshift_kmedian(h, &c, k, opts).map_err(stage)?
                };
                consolidated = true;
            }
            ObjectiveKind::TeamFormation => {
                if !c.atoms.is_empty() {
                    notes.push(format!(
                        "team formation rebuilds the clustering; {} atoms were dropped",
                        c.atoms.len()
                    ));
                }
                let variant = if next_is_kmedian {
                    TeamVariant::KMedian
                } else {
                    TeamVariant::KCenter
                };
                let experts = o.expert_set(h);
                let (tf, bal) = makeshift_tf_with(h, &experts, k, opts, variant).map_err(stage)?;
                if !bal.within_bound {
                    notes.push(format!(
                        "balanced radius {} exceeds {} times the greedy radius {}",
                        bal.radius, opts.balance_radius_multiplier, bal.greedy_radius
                    ));
                }
                c = tf;
                experts_pinned = experts;
                consolidated = true;
            }
        }

        let value = evaluate(h, &c, o, pairs.as_ref()).map_err(stage)?.value;
        let ctx = EstimateContext {
            k,
            options: opts,
            makeshift_value: Some(value),
        };
        let estimate = estimate_optimal(h, o, &ctx).map_err(stage)?;
        let violated = slack_violated_value(value, o.direction, delta, &estimate).map_err(stage)?;
        state.processed.push(ProcessedObjective {
            objective: o.clone(),
            value,
            estimate,
            slack: delta,
            pairs,
        });

        let mut final_value = value;
        let mut ls_values = Vec::new();
        let mut still_violated = violated;
        if violated {
            if c.is_consolidated(k) {
                let out = local_search(h, &c, &state.processed, i, spec.move_cap(n)).map_err(stage)?;
                c = out.clustering;
                ls_values = out.values;
                still_violated = out.still_violated;
                final_value = ls_values.last().copied().unwrap_or(value);
            } else {
                notes.push("local search skipped: the clustering is still fragmented".into());
            }
            if still_violated {
                notes.push("slack still violated after local search".into());
            }
        }
        state.processed[i].value = final_value;
        state.trace.push(StageTrace {
            stage: i,
            objective: o.to_string(),
            makeshift_value: value,
            value: final_value,
            estimate,
            slack: delta,
            violated,
            local_search_moves: ls_values.len(),
            local_search_values: ls_values,
            still_violated,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            notes,
        });
    }

    // values of earlier objectives may have moved in later stages
    for p in &mut state.processed {
        p.value = evaluate(h, &c, &p.objective, p.pairs.as_ref())?.value;
    }
    if consolidated {
        c.validate(Some(k))?;
    } else {
        state.warnings.push(format!(
            "no objective consolidates the clustering into {k} blocks; returning {} fragments",
            c.num_blocks
        ));
    }
    state.clustering = Some(c.clone());
    Ok((c, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeAttrs;
    use crate::objectives::{eval_kcenter, expert_counts};

    fn explicit(n: usize, weighted: &[(usize, usize, f64)], fill: f64) -> GraphInstance {
        let mut m = vec![fill; n * n];
        for u in 0..n {
            m[u * n + u] = 0.0;
        }
        for &(u, v, w) in weighted {
            m[u * n + v] = w;
            m[v * n + u] = w;
        }
        let edges: Vec<(usize, usize)> = weighted.iter().map(|&(u, v, _)| (u, v)).collect();
        GraphInstance::explicit(
            (0..n).map(|i| i.to_string()).collect(),
            vec![NodeAttrs::default(); n],
            m,
            &edges,
        )
        .unwrap()
    }

    #[test]
    fn kcenter_alone_with_k_equal_n() {
        let h = GraphInstance::from_line(&[0.0, 2.0, 7.0], &[]).unwrap();
        let spec = ProblemSpec::new(vec![ObjectiveSpec::kcenter()], vec![2.0], 3);
        let (c, state) = zeus_run(&h, &spec).unwrap();
        assert_eq!(eval_kcenter(&h, &c).unwrap().value, 0.0);
        assert_eq!(state.trace.len(), 1);
        assert!(!state.trace[0].violated);
    }

    #[test]
    fn rs_then_kc_keeps_stars() {
        // two tight pairs far apart plus a bridge edge
        let h = explicit(
            4,
            &[(0, 1, 1.0), (2, 3, 1.0), (1, 2, 5.0)],
            6.0,
        );
        let spec = ProblemSpec::new(
            vec![ObjectiveSpec::resource_sharing(), ObjectiveSpec::kcenter()],
            vec![1.0, 3.0],
            2,
        );
        let (c, state) = zeus_run(&h, &spec).unwrap();
        assert_eq!(state.processed[0].value, 1.0);
        assert_eq!(c.block_of(0), c.block_of(1));
        assert_eq!(c.block_of(2), c.block_of(3));
        assert_ne!(c.block_of(0), c.block_of(2));
    }

    #[test]
    fn fragments_only_warns() {
        let h = explicit(4, &[(0, 1, 1.0), (2, 3, 1.0)], 5.0);
        let spec = ProblemSpec::new(vec![ObjectiveSpec::resource_sharing()], vec![1.0], 2);
        let (c, state) = zeus_run(&h, &spec).unwrap();
        assert_eq!(c.num_blocks, 2);
        assert_eq!(state.warnings.len(), 1);
    }

    #[test]
    fn team_then_kcenter_keeps_balance() {
        let xs = [0.0, 0.1, 0.2, 0.3, 10.0, 10.1, 5.0, 5.5];
        let attrs: Vec<NodeAttrs> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| NodeAttrs {
                embedding: Some(vec![x]),
                expert: i < 6,
                ..NodeAttrs::default()
            })
            .collect();
        let h = GraphInstance::euclidean((0..8).map(|i| i.to_string()).collect(), attrs, &[])
            .unwrap();
        let spec = ProblemSpec::new(
            vec![ObjectiveSpec::team_formation(), ObjectiveSpec::kcenter()],
            vec![1.0, 10.0],
            3,
        );
        let (c, _) = zeus_run(&h, &spec).unwrap();
        let counts = expert_counts(&c, &h.experts());
        assert_eq!(counts, vec![2, 2, 2]);
    }

    #[test]
    fn local_search_fixes_misassigned_outlier() {
        // blocks {0, 1, 3} and {2} with centers 0 and 2; node 3 sits next to 2
        let h = GraphInstance::from_line(&[0.0, 1.0, 10.0, 9.0], &[]).unwrap();
        let c = Clustering::from_blocks(4, &[vec![0, 1, 3], vec![2]])
            .unwrap()
            .with_centers(vec![0, 2]);
        let processed = vec![ProcessedObjective {
            objective: ObjectiveSpec::kcenter(),
            value: 9.0,
            estimate: OptimalEstimate::lower_bound(1.0),
            slack: 2.0,
            pairs: None,
        }];
        let out = local_search(&h, &c, &processed, 0, 100).unwrap();
        assert_eq!(out.values, vec![1.0]);
        assert_eq!(out.clustering.block_of(3), 1);
        assert!(!out.still_violated);
    }

    #[test]
    fn local_search_leaves_optimum_alone() {
        let h = GraphInstance::from_line(&[0.0, 1.0, 10.0, 11.0], &[]).unwrap();
        let c = Clustering::from_blocks(4, &[vec![0, 1], vec![2, 3]])
            .unwrap()
            .with_centers(vec![0, 2]);
        let processed = vec![ProcessedObjective {
            objective: ObjectiveSpec::kcenter(),
            value: 1.0,
            estimate: OptimalEstimate::lower_bound(1.0),
            slack: 0.5,
            pairs: None,
        }];
        let out = local_search(&h, &c, &processed, 0, 100).unwrap();
        assert_eq!(out.clustering, c);
        assert!(out.values.is_empty());
        assert!(out.still_violated);
    }

    #[test]
    fn rejects_bad_specs() {
        let h = GraphInstance::from_line(&[0.0, 1.0], &[]).unwrap();
        let bad_k = ProblemSpec::new(vec![ObjectiveSpec::kcenter()], vec![2.0], 3);
        assert!(zeus_run(&h, &bad_k).is_err());
        let bad_len = ProblemSpec::new(vec![ObjectiveSpec::kcenter()], vec![2.0, 1.0], 1);
        assert!(zeus_run(&h, &bad_len).is_err());
        let empty = ProblemSpec::new(vec![], vec![], 1);
        assert!(zeus_run(&h, &empty).is_err());
    }

    #[test]
    fn stage_errors_name_the_stage() {
        let h = GraphInstance::from_line(&[0.0, 1.0, 2.0], &[(0, 1)]).unwrap();
        let spec = ProblemSpec::new(
            vec![ObjectiveSpec::resource_sharing(), ObjectiveSpec::kcenter()],
            vec![1.0, 3.0],
            2,
        );
        let err = zeus_run(&h, &spec).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: 0, .. }));
        assert!(err.is_infeasible());
    }
}
