//! Exhaustive solvers for tiny instances, used as ground truth in tests.

use serde::{Deserialize, Serialize};

use crate::clustering::{Clustering, PairKind, PairStructure};
use crate::error::{Error, Result};
use crate::graph::{Color, GraphInstance};
use crate::objectives::{
    eval_resource_sharing_gamma, eval_team_formation, lex_compare_values, Direction, LexOutcome,
    ObjectiveKind, ObjectiveSpec,
};

/// Largest instance the partition enumeration accepts.
pub const PARTITION_CAP: usize = 12;
/// Largest instance for edge cover search.
pub const EDGE_COVER_CAP: usize = 10;
/// Largest color class for matching enumeration.
pub const MATCHING_CAP: usize = 6;
/// Edge sets up to this size are also searched subset by subset.
const SUBSET_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_clustering: Clustering,
    pub best_values: Vec<f64>,
    pub enumerated: u64,
}

/// Partitions of `0..n` into exactly `k` non-empty blocks, as restricted
/// growth strings in lexicographic order.
#[derive(Clone, Debug)]
pub struct Partitions {
    k: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Partitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        self.current = successor(&out, self.k);
        Some(out)
    }
}

/// Smallest string with prefix `a[..=i]` that still reaches `k` blocks.
fn fill_from(a: &mut [usize], i: usize, k: usize) -> bool {
    let n = a.len();
    let top = a[..=i].iter().copied().max().unwrap_or(0);
    let missing = k - 1 - top.min(k - 1);
    if n - 1 - i < missing {
        return false;
    }
    for j in i + 1..n {
        let from_end = n - j;
        a[j] = if from_end <= missing { k - from_end } else { 0 };
    }
    true
}

fn successor(a: &[usize], k: usize) -> Option<Vec<usize>> {
    let n = a.len();
    for i in (1..n).rev() {
        let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
        if a[i] + 1 < k && a[i] <= prefix_max {
            let mut next = a.to_vec();
            next[i] += 1;
            if fill_from(&mut next, i, k) {
                return Some(next);
            }
        }
    }
    None
}

pub fn enumerate_partitions(n: usize, k: usize) -> Result<Partitions> {
    if n > PARTITION_CAP {
        return Err(Error::SizeCap {
            what: "n",
            value: n,
            cap: PARTITION_CAP,
        });
    }
    if k == 0 || k > n {
        return Ok(Partitions { k, current: None });
    }
    let mut first = vec![0; n];
    let ok = fill_from(&mut first, 0, k);
    Ok(Partitions {
        k,
        current: ok.then_some(first),
    })
}

/// Best in-block center per block under `cost` (max or sum of distances).
fn best_centers(h: &GraphInstance, blocks: &[Vec<usize>], sum: bool) -> (Vec<usize>, Vec<f64>) {
    let mut centers = Vec::with_capacity(blocks.len());
    let mut costs = Vec::with_capacity(blocks.len());
    for block in blocks {
        let mut best = (f64::INFINITY, usize::MAX);
        for &c in block {
            let dists = block.iter().map(|&u| h.dist(u, c));
            let v = if sum { dists.sum() } else { dists.fold(0.0, f64::max) };
            if v < best.0 {
                best = (v, c);
            }
        }
        centers.push(best.1);
        costs.push(best.0);
    }
    (centers, costs)
}

/// Largest number of Blue nodes that can get `alpha` distinct Purple
/// partners inside their own block, each Purple serving at most `beta`.
fn matchable_blues(h: &GraphInstance, assignment: &[usize], alpha: usize, beta: usize) -> usize {
    // a Blue node counts only with all alpha partners in place
    let blues = h.nodes_with_color(Color::Blue);
    let n = h.n();
    let mut load = vec![0usize; n];
    let mut best = 0;
    let options: Vec<Vec<usize>> = blues
        .iter()
        .map(|&b| {
            h.adj(b)
                .iter()
                .copied()
                .filter(|&p| h.color(p) == Some(Color::Purple) && assignment[p] == assignment[b])
                .collect()
        })
        .collect();
    fn search(
        i: usize,
        served: usize,
        options: &[Vec<usize>],
        alpha: usize,
        beta: usize,
        load: &mut [usize],
        best: &mut usize,
    ) {
        if served + (options.len() - i) <= *best {
            return;
        }
        if i == options.len() {
            *best = served;
            return;
        }
        // serve blue i with every alpha-subset of its free options
        let free: Vec<usize> = options[i].iter().copied().filter(|&p| load[p] < beta).collect();
        if free.len() >= alpha {
            let mut pick = Vec::with_capacity(alpha);
            subsets(&free, alpha, 0, &mut pick, &mut |chosen| {
                for &p in chosen {
                    load[p] += 1;
                }
                search(i + 1, served + 1, options, alpha, beta, load, best);
                for &p in chosen {
                    load[p] -= 1;
                }
            });
        }
        search(i + 1, served, options, alpha, beta, load, best);
    }
    search(0, 0, &options, alpha, beta, &mut load, &mut best);
    best
}

fn subsets(
    items: &[usize],
    size: usize,
    from: usize,
    pick: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if pick.len() == size {
        visit(pick);
        return;
    }
    for i in from..items.len() {
        pick.push(items[i]);
        subsets(items, size, i + 1, pick, visit);
        pick.pop();
    }
}

/// Value of `o` on a partition, with the best in-block centers for k-center
/// and k-median and the best in-block matching for fairness.
fn score(h: &GraphInstance, c: &Clustering, o: &ObjectiveSpec) -> Result<(f64, Option<Vec<usize>>)> {
    Ok(match o.kind {
        ObjectiveKind::KCenter | ObjectiveKind::KMedian => {
            let sum = o.kind == ObjectiveKind::KMedian;
            let (centers, costs) = best_centers(h, &c.blocks(), sum);
            let v = if sum {
                costs.iter().sum()
            } else {
                costs.iter().copied().fold(0.0, f64::max)
            };
            (v, Some(centers))
        }
        ObjectiveKind::ResourceSharing => (eval_resource_sharing_gamma(h, c, o.gamma).value, None),
        ObjectiveKind::Fairness => {
            let blues = h.nodes_with_color(Color::Blue).len();
            if blues == 0 {
                return Err(Error::Degenerate("fairness needs at least one Blue node".into()));
            }
            let m = matchable_blues(h, &c.assignment, o.alpha, o.beta);
            (m as f64 / blues as f64, None)
        }
        ObjectiveKind::TeamFormation => (eval_team_formation(h, c, &o.expert_set(h))?.value, None),
    })
}

/// Lexicographically best `k`-clustering for `objectives`. Among equal
/// tuples the first partition in enumeration order is kept. Fairness is
/// scored as the fraction of Blue nodes that can be matched inside their
/// own block.
pub fn oracle_lmoc(h: &GraphInstance, k: usize, objectives: &[ObjectiveSpec]) -> Result<OracleResult> {
    if objectives.is_empty() {
        return Err(Error::Config("at least one objective is required".into()));
    }
    let n = h.n();
    if k == 0 || k > n {
        return Err(Error::Config(format!("k = {k} must lie in 1..={n}")));
    }
    let dirs: Vec<Direction> = objectives.iter().map(|o| o.direction).collect();
    let mut best: Option<(Vec<f64>, Clustering)> = None;
    let mut enumerated = 0u64;
    for rgs in enumerate_partitions(n, k)? {
        enumerated += 1;
        let mut c = Clustering {
            assignment: rgs,
            num_blocks: k,
            centers: None,
            atoms: Vec::new(),
        };
        let mut values = Vec::with_capacity(objectives.len());
        let mut centers = None;
        for o in objectives {
            let (v, cs) = score(h, &c, o)?;
            values.push(v);
            if centers.is_none() {
                centers = cs;
            }
        }
        let better = match &best {
            None => true,
            Some((bv, _)) => lex_compare_values(&values, bv, &dirs) == LexOutcome::FirstSuperior,
        };
        if better {
            c.centers = centers;
            best = Some((values, c));
        }
    }
    let (best_values, best_clustering) = best.expect("at least one partition for 1 <= k <= n");
    Ok(OracleResult {
        best_clustering,
        best_values,
        enumerated,
    })
}

/// Optimal value of a single objective over all `k`-clusterings.
pub fn oracle_single_objective(h: &GraphInstance, k: usize, o: &ObjectiveSpec) -> Result<f64> {
    Ok(oracle_lmoc(h, k, std::slice::from_ref(o))?.best_values[0])
}

/// Minimum over all edge covers of the largest edge weight, with a cover
/// attaining it.
///
/// Thresholds are scanned in increasing order; the first at which the
/// edges no heavier than it cover every node is the answer. For small edge
/// sets every subset is also tried and the two answers must agree.
pub fn oracle_edge_cover(h: &GraphInstance) -> Result<PairStructure> {
    let n = h.n();
    if n > EDGE_COVER_CAP {
        return Err(Error::SizeCap {
            what: "n",
            value: n,
            cap: EDGE_COVER_CAP,
        });
    }
    let edges: Vec<(usize, usize)> = h.edges().collect();
    let mut weights: Vec<f64> = edges.iter().map(|&(u, v)| h.dist(u, v)).collect();
    weights.sort_by(f64::total_cmp);
    weights.dedup();
    let covers = |set: &[(usize, usize)]| {
        let mut hit = vec![false; n];
        for &(u, v) in set {
            hit[u] = true;
            hit[v] = true;
        }
        hit.iter().all(|&x| x)
    };
    let mut scan = None;
    for &w in &weights {
        let light: Vec<(usize, usize)> = edges.iter().copied().filter(|&(u, v)| h.dist(u, v) <= w).collect();
        if covers(&light) {
            scan = Some((w, light));
            break;
        }
    }
    let (w, light) = scan.ok_or_else(|| Error::Infeasible("no edge cover exists".into()))?;
    if edges.len() <= SUBSET_CAP {
        let mut best = f64::INFINITY;
        for mask in 1u32..(1u32 << edges.len()) {
            let set: Vec<(usize, usize)> = (0..edges.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| edges[i])
                .collect();
            if covers(&set) {
                let top = set.iter().map(|&(u, v)| h.dist(u, v)).fold(0.0, f64::max);
                best = best.min(top);
            }
        }
        if best != w {
            return Err(Error::Degenerate(format!(
                "threshold scan found {w}, subset search found {best}"
            )));
        }
    }
    Ok(PairStructure::new(h, light, PairKind::EdgeCover))
}

/// Minimum over all Blue-saturating matchings in `E` of the largest matched
/// edge weight.
pub fn oracle_matching_radius(h: &GraphInstance) -> Result<f64> {
    let blues = h.nodes_with_color(Color::Blue);
    let purples = h.nodes_with_color(Color::Purple);
    if blues.is_empty() {
        return Err(Error::Degenerate("no Blue nodes to match".into()));
    }
    for (what, len) in [("|B|", blues.len()), ("|P|", purples.len())] {
        if len > MATCHING_CAP {
            return Err(Error::SizeCap {
                what,
                value: len,
                cap: MATCHING_CAP,
            });
        }
    }
    fn assign(i: usize, blues: &[usize], purples: &[usize], used: &mut [bool], top: f64, h: &GraphInstance, best: &mut f64) {
        if i == blues.len() {
            *best = best.min(top);
            return;
        }
        for (j, &p) in purples.iter().enumerate() {
            if !used[j] && h.has_edge(blues[i], p) {
                used[j] = true;
                assign(i + 1, blues, purples, used, top.max(h.dist(blues[i], p)), h, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; purples.len()];
    assign(0, &blues, &purples, &mut used, 0.0, h, &mut best);
    if best.is_infinite() {
        return Err(Error::Infeasible("no matching saturates the Blue nodes".into()));
    }
    Ok(best)
}

/// Optimal k-median cost over all `k`-subsets of centers.
pub fn oracle_kmedian_cost(h: &GraphInstance, k: usize) -> Result<f64> {
    let n = h.n();
    if n > PARTITION_CAP {
        return Err(Error::SizeCap {
            what: "n",
            value: n,
            cap: PARTITION_CAP,
        });
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("k = {k} must lie in 1..={n}")));
    }
    let nodes: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    let mut pick = Vec::with_capacity(k);
    subsets(&nodes, k, 0, &mut pick, &mut |centers| {
        let cost: f64 = (0..n)
            .map(|u| centers.iter().map(|&c| h.dist(u, c)).fold(f64::INFINITY, f64::min))
            .sum();
        best = best.min(cost);
    });
    Ok(best)
}
