use crate::clustering::{components, Clustering, PairKind, PairStructure};
use crate::error::{Error, Result};
use crate::graph::GraphInstance;

use super::kcenter::check_input;
use super::{compose_fragments, Fragments};

fn require_degree(h: &GraphInstance, gamma: usize) -> Result<()> {
    if gamma == 0 {
        return Err(Error::Config("gamma must be positive".into()));
    }
    if let Some(u) = (0..h.n()).find(|&u| h.adj(u).len() < gamma) {
        return Err(Error::Infeasible(format!(
            "node `{}` has {} neighbours, {gamma} needed for a cover",
            h.label(u),
            h.adj(u).len()
        )));
    }
    Ok(())
}

/// Incident edges of `u` ordered by weight, then neighbour index.
fn sorted_incident(h: &GraphInstance, u: usize) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = h.adj(u).iter().map(|&v| (h.dist(u, v), v)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

/// Min-max edge cover whose stars become atoms.
///
/// Every node contributes its lightest incident edge. Edges are then visited
/// heaviest first (equal weights in pair order) and dropped while both of
/// their endpoints stay covered. The surviving pair graph is a set of stars.
pub fn makeshift_rs(h: &GraphInstance, c_in: &Clustering) -> Result<Fragments> {
    check_input(h, c_in)?;
    require_degree(h, 1)?;
    let n = h.n();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .map(|u| {
            let v = sorted_incident(h, u)[0].1;
            (u.min(v), u.max(v))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs.sort_by(|a, b| {
        h.dist(b.0, b.1)
            .total_cmp(&h.dist(a.0, a.1))
            .then_with(|| a.cmp(b))
    });
    let mut degree = vec![0usize; n];
    for &(u, v) in &pairs {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut kept = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        if degree[u] >= 2 && degree[v] >= 2 {
            degree[u] -= 1;
            degree[v] -= 1;
        } else {
            kept.push((u, v));
        }
    }
    let pairs = PairStructure::new(h, kept, PairKind::EdgeCover);
    let stars = pairs.components(n);
    let centers: Vec<usize> = stars
        .iter()
        .map(|s| s.iter().copied().find(|&u| degree[u] >= 2).unwrap_or(s[0]))
        .collect();
    let clustering = compose_fragments(h, c_in, &stars, |i| Some(centers[i]))?;
    Ok(Fragments { clustering, pairs })
}

/// Cover in which every node keeps its `gamma` lightest incident edges. The
/// radius is the smallest threshold at which every node has `gamma`
/// neighbours; the atoms are the connected components.
pub fn makeshift_rs_gamma(h: &GraphInstance, c_in: &Clustering, gamma: usize) -> Result<Fragments> {
    check_input(h, c_in)?;
    let radius = gamma_threshold(h, gamma)?;
    let n = h.n();
    let mut pairs = Vec::with_capacity(n * gamma);
    for u in 0..n {
        for &(w, v) in sorted_incident(h, u).iter().take(gamma) {
            debug_assert!(w <= radius);
            pairs.push((u, v));
        }
    }
    let pairs = PairStructure::new(h, pairs, PairKind::GammaCover);
    let groups = components(n, pairs.pairs.iter().copied());
    let clustering = compose_fragments(h, c_in, &groups, |_| None)?;
    Ok(Fragments { clustering, pairs })
}

/// Smallest threshold at which every node has `gamma` incident edges,
/// found by binary search over the distinct edge weights.
pub fn gamma_threshold(h: &GraphInstance, gamma: usize) -> Result<f64> {
    require_degree(h, gamma)?;
    let mut weights: Vec<f64> = h.edges().map(|(u, v)| h.dist(u, v)).collect();
    weights.sort_by(f64::total_cmp);
    weights.dedup();
    let ok = |r: f64| (0..h.n()).all(|u| h.adj(u).iter().filter(|&&v| h.dist(u, v) <= r).count() >= gamma);
    let (mut lo, mut hi) = (0, weights.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ok(weights[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(weights[lo])
}
