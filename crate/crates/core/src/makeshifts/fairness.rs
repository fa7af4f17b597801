use crate::clustering::{Clustering, PairKind, PairStructure};
use crate::error::{Error, Result};
use crate::flow::{ArcId, FlowNetwork};
use crate::graph::{Color, GraphInstance};

use super::kcenter::check_input;
use super::{compose_fragments, Fragments};

/// Blue and Purple nodes plus the `E` edges between them, as `(b, p, d)`.
struct Bipartite {
    blues: Vec<usize>,
    purples: Vec<usize>,
    edges: Vec<(usize, usize, f64)>,
}

impl Bipartite {
    fn new(h: &GraphInstance, alpha: usize, beta: usize) -> Result<Self> {
        if alpha == 0 || beta == 0 {
            return Err(Error::Config("alpha and beta must be positive".into()));
        }
        let blues = h.nodes_with_color(Color::Blue);
        let purples = h.nodes_with_color(Color::Purple);
        if blues.is_empty() {
            return Err(Error::Degenerate("fairness needs at least one Blue node".into()));
        }
        let mut edges = Vec::new();
        for (bi, &b) in blues.iter().enumerate() {
            for &p in h.adj(b) {
                if h.color(p) == Some(Color::Purple) {
                    let pi = purples.binary_search(&p).expect("purple list is sorted");
                    edges.push((bi, pi, h.dist(b, p)));
                }
            }
        }
        Ok(Bipartite {
            blues,
            purples,
            edges,
        })
    }

    /// Network source → Blue (α) → Purple (1 per edge) → sink (β) over the
    /// edges accepted by `keep`.
    fn network(
        &self,
        alpha: usize,
        beta: usize,
        keep: impl Fn(f64) -> bool,
        with_cost: bool,
    ) -> (FlowNetwork, Vec<(usize, ArcId)>, usize, usize) {
        let (nb, np) = (self.blues.len(), self.purples.len());
        let (s, t) = (nb + np, nb + np + 1);
        let mut g = FlowNetwork::new(nb + np + 2);
        for b in 0..nb {
            g.add_arc(s, b, alpha as i64);
        }
        let mut arcs = Vec::new();
        for (i, &(b, p, d)) in self.edges.iter().enumerate() {
            if keep(d) {
                let cost = if with_cost { d } else { 0.0 };
                arcs.push((i, g.add_arc_with_cost(b, nb + p, 1, cost)));
            }
        }
        for p in 0..np {
            g.add_arc(nb + p, t, beta as i64);
        }
        (g, arcs, s, t)
    }

    fn chosen(&self, g: &FlowNetwork, arcs: &[(usize, ArcId)]) -> Vec<(usize, usize)> {
        arcs.iter()
            .filter(|&&(_, a)| g.flow(a) > 0)
            .map(|&(i, _)| {
                let (b, p, _) = self.edges[i];
                (self.blues[b], self.purples[p])
            })
            .collect()
    }
}

fn pair_kind(alpha: usize, beta: usize) -> PairKind {
    if (alpha, beta) == (1, 1) {
        PairKind::Matching
    } else {
        PairKind::BMatching
    }
}

fn infeasible(alpha: usize, beta: usize) -> Error {
    Error::Infeasible(format!(
        "no assignment gives every Blue node {alpha} Purple partners with at most {beta} Blue nodes per Purple node"
    ))
}

/// Bottleneck B-saturating b-matching: the smallest radius `r*` among the
/// Blue–Purple edge weights at which each Blue node gets `alpha` distinct
/// Purple partners within `r*`, each Purple node serving at most `beta`.
fn bottleneck(h: &GraphInstance, alpha: usize, beta: usize) -> Result<Vec<(usize, usize)>> {
    let bp = Bipartite::new(h, alpha, beta)?;
    let need = (alpha * bp.blues.len()) as i64;
    let mut radii: Vec<f64> = bp.edges.iter().map(|e| e.2).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let solve = |r: f64| {
        let (mut g, arcs, s, t) = bp.network(alpha, beta, |d| d <= r, false);
        let flow = g.max_flow(s, t);
        (flow == need).then(|| bp.chosen(&g, &arcs))
    };
    let Some(&top) = radii.last() else {
        return Err(infeasible(alpha, beta));
    };
    if solve(top).is_none() {
        return Err(infeasible(alpha, beta));
    }
    let (mut lo, mut hi) = (0, radii.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if solve(radii[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(solve(radii[lo]).expect("feasible at the located radius"))
}

fn into_fragments(
    h: &GraphInstance,
    c_in: &Clustering,
    pairs: Vec<(usize, usize)>,
    kind: PairKind,
) -> Result<Fragments> {
    let pairs = PairStructure::new(h, pairs, kind);
    let groups: Vec<Vec<usize>> = pairs
        .components(h.n())
        .into_iter()
        .filter(|g| g.len() > 1)
        .collect();
    let clustering = compose_fragments(h, c_in, &groups, |_| None)?;
    Ok(Fragments { clustering, pairs })
}

/// Bottleneck matching that pairs every Blue node with one Purple node; the
/// matched pairs become atoms.
pub fn makeshift_fairness(h: &GraphInstance, c_in: &Clustering) -> Result<Fragments> {
    makeshift_fairness_ab(h, c_in, 1, 1)
}

/// Bottleneck b-matching giving each Blue node `alpha` Purple partners and
/// each Purple node at most `beta` Blue partners. Components of the matching
/// become atoms.
pub fn makeshift_fairness_ab(
    h: &GraphInstance,
    c_in: &Clustering,
    alpha: usize,
    beta: usize,
) -> Result<Fragments> {
    check_input(h, c_in)?;
    let pairs = bottleneck(h, alpha, beta)?;
    into_fragments(h, c_in, pairs, pair_kind(alpha, beta))
}

/// Minimum total weight B-saturating b-matching over all Blue–Purple edges,
/// used when the clustering objective that follows is k-median.
pub fn makeshift_fairness_min_cost(
    h: &GraphInstance,
    c_in: &Clustering,
    alpha: usize,
    beta: usize,
) -> Result<Fragments> {
    check_input(h, c_in)?;
    let bp = Bipartite::new(h, alpha, beta)?;
    let (mut g, arcs, s, t) = bp.network(alpha, beta, |_| true, true);
    let (flow, _) = g.min_cost_max_flow(s, t);
    if flow != (alpha * bp.blues.len()) as i64 {
        return Err(infeasible(alpha, beta));
    }
    let pairs = bp.chosen(&g, &arcs);
    into_fragments(h, c_in, pairs, pair_kind(alpha, beta))
}
