//! Per-objective makeshifts.
//!
//! A makeshift takes the clustering produced by the objectives processed so
//! far and reshapes it for one more objective:
//!
//! - k-center / k-median consolidate fragments into exactly `k` blocks with
//!   centers and keep every atom whole.
//! - resource sharing builds a min-max edge cover whose stars become atoms.
//! - fairness builds a bottleneck B-saturating (b-)matching whose components
//!   become atoms.
//! - team formation splits the experts into balanced blocks and attaches
//!   everyone else.
//!
//! All ties break by lowest node index, lowest block index, or lexicographic
//! pair order, so outputs are a pure function of the inputs and options.

mod fairness;
mod kcenter;
mod kmedian;
mod repair;
mod resource;
mod team;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{merge_groups, normalize_atoms, Clustering, PairStructure};
use crate::error::{Error, Result};
use crate::graph::GraphInstance;

pub use fairness::{makeshift_fairness, makeshift_fairness_ab, makeshift_fairness_min_cost};
pub use kcenter::{assign_nearest, gonzalez, greedy_kcenter, makeshift_kcenter};
pub use kmedian::{makeshift_kmedian, swap_kmedian};
pub use repair::repair_cohesion;
pub use resource::{gamma_threshold, makeshift_rs, makeshift_rs_gamma};
pub use team::{
    balanced_kcenter, balanced_kmedian, makeshift_tf, makeshift_tf_with, BalancedAssignment,
    TeamVariant,
};

pub(crate) use kcenter::refine_assignment;

/// Output of the resource sharing and fairness makeshifts: the reshaped
/// clustering and the pair set that defines its atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fragments {
    pub clustering: Clustering,
    pub pairs: PairStructure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstCenter {
    LowestIndex,
    SeededRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonExpertRule {
    /// Join the block of the nearest expert.
    ClosestExpert,
    /// Join the block of the nearest chosen center.
    ClosestCenter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MakeshiftOptions {
    pub first_center: FirstCenter,
    pub seed: Option<u64>,
    pub nonexpert_rule: NonExpertRule,
    /// Reported bound: balanced assignments are flagged when their radius
    /// exceeds this multiple of the greedy radius on the experts.
    pub balance_radius_multiplier: f64,
}

impl Default for MakeshiftOptions {
    fn default() -> Self {
        MakeshiftOptions {
            first_center: FirstCenter::LowestIndex,
            seed: None,
            nonexpert_rule: NonExpertRule::ClosestCenter,
            balance_radius_multiplier: 4.0,
        }
    }
}

impl MakeshiftOptions {
    pub fn validate(&self) -> Result<()> {
        if self.first_center == FirstCenter::SeededRandom && self.seed.is_none() {
            return Err(Error::Config("seeded random first center needs a seed".into()));
        }
        if !(self.balance_radius_multiplier >= 1.0) {
            return Err(Error::Config(format!(
                "balance radius multiplier {} must be >= 1",
                self.balance_radius_multiplier
            )));
        }
        Ok(())
    }

    /// First greedy center among `nodes` (ascending).
    pub(crate) fn first_of(&self, nodes: &[usize]) -> Result<usize> {
        match self.first_center {
            FirstCenter::LowestIndex => Ok(nodes[0]),
            FirstCenter::SeededRandom => {
                let seed = self
                    .seed
                    .ok_or_else(|| Error::Config("seeded random first center needs a seed".into()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(nodes[rng.gen_range(0..nodes.len())])
            }
        }
    }
}

/// Member minimising the largest distance to the others; ties by lowest id.
pub fn one_center(h: &GraphInstance, members: &[usize]) -> usize {
    best_member(members, |c| members.iter().map(|&u| h.dist(u, c)).fold(0.0, f64::max))
}

/// Member minimising the summed distance to the others; ties by lowest id.
pub fn one_median(h: &GraphInstance, members: &[usize]) -> usize {
    best_member(members, |c| members.iter().map(|&u| h.dist(u, c)).sum())
}

fn best_member(members: &[usize], cost: impl Fn(usize) -> f64) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for &c in members {
        let v = cost(c);
        if v < best.0 || (v == best.0 && c < best.1) {
            best = (v, c);
        }
    }
    best.1
}

/// Folds new co-clustering groups into the incoming clustering.
///
/// When the input is consolidated (some block holds more than one unit) its
/// blocks are kept and the merged atoms are made whole by
/// [`repair_cohesion`]. Otherwise the input is a set of fragments and the
/// result is the connected components of the old blocks together with the
/// new groups. `center_hint(i)` names the center of `groups[i]` when that
/// group survives unchanged as a fragment.
pub(crate) fn compose_fragments(
    h: &GraphInstance,
    c_in: &Clustering,
    groups: &[Vec<usize>],
    center_hint: impl Fn(usize) -> Option<usize>,
) -> Result<Clustering> {
    let n = h.n();
    if c_in.n() != n {
        return Err(Error::InvalidClustering(format!(
            "clustering covers {} nodes, instance has {n}",
            c_in.n()
        )));
    }
    let mut linked: Vec<Vec<usize>> = c_in.atoms.clone();
    linked.extend(groups.iter().cloned());
    if let (Some(centers), false) = (&c_in.centers, c_in.is_fragmented()) {
        let atoms = normalize_atoms(merge_groups(n, &linked));
        let mut assignment = c_in.assignment.clone();
        let mut centers = centers.clone();
        let units = Clustering::singletons(n).with_atoms(atoms.clone()).atom_units();
        repair_cohesion(h, &mut assignment, &mut centers, &units)?;
        return Ok(Clustering {
            assignment,
            num_blocks: c_in.num_blocks,
            centers: Some(centers),
            atoms,
        });
    }
    linked.extend(c_in.blocks().into_iter().filter(|b| b.len() > 1));
    let fragments = merge_groups(n, &linked);
    let mut group_of = vec![usize::MAX; n];
    for (i, g) in groups.iter().enumerate() {
        for &u in g {
            group_of[u] = i;
        }
    }
    let mut assignment = vec![0; n];
    let mut centers = Vec::with_capacity(fragments.len());
    for (b, frag) in fragments.iter().enumerate() {
        for &u in frag {
            assignment[u] = b;
        }
        let g = group_of[frag[0]];
        let hinted = (g != usize::MAX && groups[g].len() == frag.len())
            .then(|| center_hint(g))
            .flatten();
        centers.push(hinted.unwrap_or_else(|| one_center(h, frag)));
    }
    Ok(Clustering {
        assignment,
        num_blocks: fragments.len(),
        centers: Some(centers),
        atoms: normalize_atoms(fragments),
    })
}
