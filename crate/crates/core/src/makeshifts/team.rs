use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::flow::{ArcId, FlowNetwork};
use crate::graph::GraphInstance;

use super::kcenter::{check_k, gonzalez, nearest_center};
use super::kmedian::swap_kmedian;
use super::{MakeshiftOptions, NonExpertRule};

/// Which clustering objective shapes the balanced expert split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeamVariant {
    #[default]
    KCenter,
    KMedian,
}

/// Experts split into `k` blocks whose sizes differ by at most one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancedAssignment {
    /// Experts, ascending.
    pub experts: Vec<usize>,
    /// Block of `experts[i]`.
    pub block_of: Vec<usize>,
    pub centers: Vec<usize>,
    /// Largest expert to center distance.
    pub radius: f64,
    /// Greedy k-center radius on the experts alone.
    pub greedy_radius: f64,
    /// `radius` is within the configured multiple of `greedy_radius`.
    pub within_bound: bool,
}

fn expert_list(h: &GraphInstance, experts: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut x = experts.to_vec();
    x.sort_unstable();
    x.dedup();
    if let Some(&u) = x.iter().find(|&&u| u >= h.n()) {
        return Err(Error::NodeOutOfRange { node: u, n: h.n() });
    }
    check_k(k, x.len(), "experts")?;
    Ok(x)
}

/// Network: source → expert (1) → center (1, allowed pairs only) → sink.
/// Every center keeps `floor` units and at most `rem` centers take one more
/// through a shared overflow node, which forces exact balance once all
/// experts are placed.
struct Balance {
    g: FlowNetwork,
    arcs: Vec<(usize, usize, ArcId)>,
    s: usize,
    t: usize,
}

impl Balance {
    fn build(
        x: &[usize],
        centers: &[usize],
        allowed: impl Fn(usize, usize) -> Option<f64>,
    ) -> Balance {
        let (m, k) = (x.len(), centers.len());
        let (floor, rem) = (m / k, m % k);
        let (s, t, over) = (m + k, m + k + 1, m + k + 2);
        let mut g = FlowNetwork::new(m + k + 3);
        let mut arcs = Vec::new();
        for (i, &u) in x.iter().enumerate() {
            g.add_arc(s, i, 1);
            let own = centers.iter().position(|&c| c == u);
            for (b, &c) in centers.iter().enumerate() {
                if own.is_some_and(|o| o != b) {
                    continue;
                }
                if let Some(cost) = allowed(u, c) {
                    arcs.push((i, b, g.add_arc_with_cost(i, m + b, 1, cost)));
                }
            }
        }
        for b in 0..k {
            g.add_arc(m + b, t, floor as i64);
            if rem > 0 {
                g.add_arc(m + b, over, 1);
            }
        }
        if rem > 0 {
            g.add_arc(over, t, rem as i64);
        }
        Balance { g, arcs, s, t }
    }

    fn blocks(&self, m: usize) -> Vec<usize> {
        let mut block_of = vec![0; m];
        for &(i, b, a) in &self.arcs {
            if self.g.flow(a) > 0 {
                block_of[i] = b;
            }
        }
        block_of
    }
}

fn finish(
    h: &GraphInstance,
    x: Vec<usize>,
    centers: Vec<usize>,
    block_of: Vec<usize>,
    opts: &MakeshiftOptions,
) -> Result<BalancedAssignment> {
    let radius = x
        .iter()
        .zip(&block_of)
        .map(|(&u, &b)| h.dist(u, centers[b]))
        .fold(0.0, f64::max);
    let (_, greedy_radius) = gonzalez(h, &x, centers.len(), opts)?;
    let within_bound = radius <= opts.balance_radius_multiplier * greedy_radius * (1.0 + 1e-9);
    Ok(BalancedAssignment {
        experts: x,
        block_of,
        centers,
        radius,
        greedy_radius,
        within_bound,
    })
}

/// Balanced k-center on the experts: greedy centers among the experts, then
/// the smallest radius (over realized expert to center distances) at which a
/// capacitated assignment with block sizes `⌊|X|/k⌋` or `⌈|X|/k⌉` exists.
pub fn balanced_kcenter(
    h: &GraphInstance,
    experts: &[usize],
    k: usize,
    opts: &MakeshiftOptions,
) -> Result<BalancedAssignment> {
    opts.validate()?;
    let x = expert_list(h, experts, k)?;
    let (centers, _) = gonzalez(h, &x, k, opts)?;
    let mut radii: Vec<f64> = x
        .iter()
        .flat_map(|&u| centers.iter().map(move |&c| (u, c)))
        .map(|(u, c)| h.dist(u, c))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let m = x.len() as i64;
    let solve = |r: f64| {
        let mut bal = Balance::build(&x, &centers, |u, c| (h.dist(u, c) <= r).then_some(0.0));
        let flow = bal.g.max_flow(bal.s, bal.t);
        (flow == m).then(|| bal.blocks(x.len()))
    };
    let (mut lo, mut hi) = (0, radii.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if solve(radii[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let block_of = solve(radii[lo]).ok_or_else(|| {
        Error::Infeasible("no balanced assignment of the experts exists".into())
    })?;
    finish(h, x, centers, block_of, opts)
}

/// Balanced k-median on the experts: swap local search picks the centers and
/// a min-cost flow assigns experts under the same size limits.
pub fn balanced_kmedian(
    h: &GraphInstance,
    experts: &[usize],
    k: usize,
    opts: &MakeshiftOptions,
) -> Result<BalancedAssignment> {
    opts.validate()?;
    let x = expert_list(h, experts, k)?;
    let (centers, _) = swap_kmedian(h, &x, k, opts)?;
    let mut bal = Balance::build(&x, &centers, |u, c| Some(h.dist(u, c)));
    let (flow, _) = bal.g.min_cost_max_flow(bal.s, bal.t);
    if flow != x.len() as i64 {
        return Err(Error::Infeasible("no balanced assignment of the experts exists".into()));
    }
    let block_of = bal.blocks(x.len());
    finish(h, x, centers, block_of, opts)
}

/// Team formation makeshift with the k-center variant.
pub fn makeshift_tf(
    h: &GraphInstance,
    experts: &[usize],
    k: usize,
    opts: &MakeshiftOptions,
) -> Result<Clustering> {
    makeshift_tf_with(h, experts, k, opts, TeamVariant::KCenter).map(|(c, _)| c)
}

/// Splits the experts into balanced blocks and attaches every other node by
/// `opts.nonexpert_rule`. Starts from scratch: earlier atoms are not kept.
pub fn makeshift_tf_with(
    h: &GraphInstance,
    experts: &[usize],
    k: usize,
    opts: &MakeshiftOptions,
    variant: TeamVariant,
) -> Result<(Clustering, BalancedAssignment)> {
    let bal = match variant {
        TeamVariant::KCenter => balanced_kcenter(h, experts, k, opts)?,
        TeamVariant::KMedian => balanced_kmedian(h, experts, k, opts)?,
    };
    let n = h.n();
    let mut assignment = vec![usize::MAX; n];
    for (&u, &b) in bal.experts.iter().zip(&bal.block_of) {
        assignment[u] = b;
    }
    for u in 0..n {
        if assignment[u] != usize::MAX {
            continue;
        }
        assignment[u] = match opts.nonexpert_rule {
            NonExpertRule::ClosestCenter => nearest_center(h, u, &bal.centers).0,
            NonExpertRule::ClosestExpert => {
                let (i, _) = nearest_center(h, u, &bal.experts);
                bal.block_of[i]
            }
        };
    }
    let clustering = Clustering {
        assignment,
        num_blocks: k,
        centers: Some(bal.centers.clone()),
        atoms: Vec::new(),
    };
    Ok((clustering, bal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeAttrs;
    use crate::objectives::{eval_team_formation, expert_counts};

    #[test]
    fn one_expert_per_block() {
        let h = GraphInstance::from_line(&[0.0, 3.0, 7.0], &[]).unwrap();
        let bal = balanced_kcenter(&h, &[0, 1, 2], 3, &Default::default()).unwrap();
        assert_eq!(bal.radius, 0.0);
        let mut blocks = bal.block_of.clone();
        blocks.sort_unstable();
        assert_eq!(blocks, vec![0, 1, 2]);
    }

    #[test]
    fn collinear_pairs() {
        let h = GraphInstance::from_line(&[0.0, 1.0, 10.0, 11.0], &[]).unwrap();
        let bal = balanced_kcenter(&h, &[0, 1, 2, 3], 2, &Default::default()).unwrap();
        assert_eq!(bal.block_of[0], bal.block_of[1]);
        assert_eq!(bal.block_of[2], bal.block_of[3]);
        assert_ne!(bal.block_of[0], bal.block_of[2]);
        assert_eq!(bal.radius, 1.0);
        assert!(bal.within_bound);
    }

    #[test]
    fn uniform_distances_balance_sizes() {
        let n = 7;
        let mut m = vec![1.0; n * n];
        for u in 0..n {
            m[u * n + u] = 0.0;
        }
        let h = GraphInstance::explicit(
            (0..n).map(|i| i.to_string()).collect(),
            vec![NodeAttrs::default(); n],
            m,
            &[],
        )
        .unwrap();
        let all: Vec<usize> = (0..n).collect();
        for k in 1..=n {
            let c = makeshift_tf(&h, &all, k, &Default::default()).unwrap();
            let mut sizes = c.block_sizes();
            sizes.sort_unstable();
            assert!(sizes[k - 1] - sizes[0] <= 1, "k={k}: {sizes:?}");
            let v = eval_team_formation(&h, &c, &all).unwrap().value;
            let want = if n % k == 0 { 1.0 } else { n.div_ceil(k) as f64 / (n / k) as f64 };
            assert_eq!(v, want);
        }
    }

    #[test]
    fn balance_beats_proximity() {
        // three experts crowd the left; balance forces one of them right
        let h = GraphInstance::from_line(&[0.0, 0.5, 1.0, 20.0], &[]).unwrap();
        let c = makeshift_tf(&h, &[0, 1, 2, 3], 2, &Default::default()).unwrap();
        assert_eq!(expert_counts(&c, &[0, 1, 2, 3]), vec![2, 2]);
    }

    #[test]
    fn nonexpert_rules() {
        // experts 0, 1, 2 at 0, 10, 20; node 3 at 9 is 1 from expert 1
        let h = GraphInstance::from_line(&[0.0, 10.0, 20.0, 9.0], &[]).unwrap();
        let by_expert = MakeshiftOptions {
            nonexpert_rule: NonExpertRule::ClosestExpert,
            ..Default::default()
        };
        let c = makeshift_tf(&h, &[0, 1, 2], 3, &by_expert).unwrap();
        assert_eq!(c.block_of(3), c.block_of(1));
        let d = makeshift_tf(&h, &[0, 1, 2], 3, &Default::default()).unwrap();
        for c in [&c, &d] {
            let counts = expert_counts(c, &[0, 1, 2]);
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn kmedian_variant_is_balanced() {
        let xs: Vec<f64> = (0..9).map(|i| (i * i) as f64).collect();
        let h = GraphInstance::from_line(&xs, &[]).unwrap();
        let experts = [0, 2, 3, 5, 7, 8];
        let (c, bal) =
            makeshift_tf_with(&h, &experts, 4, &Default::default(), TeamVariant::KMedian).unwrap();
        let counts = expert_counts(&c, &experts);
        assert!(counts.iter().all(|&x| x == 1 || x == 2), "{counts:?}");
        assert_eq!(bal.centers.len(), 4);
    }

    #[test]
    fn too_few_experts() {
        let h = GraphInstance::from_line(&[0.0, 1.0, 2.0], &[]).unwrap();
        assert!(makeshift_tf(&h, &[1], 2, &Default::default()).unwrap_err().is_infeasible());
    }
}
