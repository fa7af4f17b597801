use crate::clustering::Clustering;
use crate::error::Result;
use crate::graph::GraphInstance;

use super::kcenter::{assign_nearest, check_input, check_k, gonzalez, refine_assignment};
use super::repair::repair_with;
use super::{one_median, MakeshiftOptions};

/// Swaps stop once the best one improves the cost by less than this fraction.
const MIN_RELATIVE_GAIN: f64 = 1e-6;

/// Single-swap local search for k-median over `nodes`, started from the
/// greedy k-center centers. Returns the centers and the total cost of
/// serving every node of `nodes` from its nearest center.
pub fn swap_kmedian(
    h: &GraphInstance,
    nodes: &[usize],
    k: usize,
    opts: &MakeshiftOptions,
) -> Result<(Vec<usize>, f64)> {
    let (mut centers, _) = gonzalez(h, nodes, k, opts)?;
    let m = nodes.len();
    // distances within `nodes`, by position
    let d: Vec<f64> = nodes
        .iter()
        .flat_map(|&u| nodes.iter().map(move |&v| (u, v)))
        .map(|(u, v)| h.dist(u, v))
        .collect();
    let pos = |c: usize| nodes.binary_search(&c).expect("center drawn from nodes");
    let mut open: Vec<usize> = centers.iter().map(|&c| pos(c)).collect();
    loop {
        let mut is_open = vec![false; m];
        for &c in &open {
            is_open[c] = true;
        }
        // nearest and second nearest open center per node, by slot in `open`
        let mut near = vec![(0usize, f64::INFINITY); m];
        let mut second = vec![f64::INFINITY; m];
        for u in 0..m {
            for (slot, &c) in open.iter().enumerate() {
                let du = d[u * m + c];
                if du < near[u].1 {
                    second[u] = near[u].1;
                    near[u] = (slot, du);
                } else if du < second[u] {
                    second[u] = du;
                }
            }
        }
        let cost: f64 = near.iter().map(|&(_, x)| x).sum();
        let mut best: Option<(f64, usize, usize)> = None;
        let mut correction = vec![0.0; open.len()];
        for cand in (0..m).filter(|&c| !is_open[c]) {
            correction.iter_mut().for_each(|x| *x = 0.0);
            let mut base = 0.0;
            for u in 0..m {
                let dc = d[u * m + cand];
                let (slot, dn) = near[u];
                let kept = dc.min(dn);
                base += kept;
                correction[slot] += dc.min(second[u]) - kept;
            }
            for (slot, &corr) in correction.iter().enumerate() {
                let total = base + corr;
                if best.is_none_or(|(b, _, _)| total < b) {
                    best = Some((total, slot, cand));
                }
            }
        }
        match best {
            Some((total, slot, cand)) if total < cost - MIN_RELATIVE_GAIN * cost => {
                open[slot] = cand;
            }
            _ => {
                centers = open.iter().map(|&c| nodes[c]).collect();
                return Ok((centers, cost));
            }
        }
    }
}

/// Consolidates `c_in` into exactly `k` blocks for k-median while keeping
/// every atom whole. Mirrors [`super::makeshift_kcenter`] with swap local
/// search choosing the centers and 1-medians replacing lost centers.
pub fn makeshift_kmedian(
    h: &GraphInstance,
    c_in: &Clustering,
    k: usize,
    opts: &MakeshiftOptions,
) -> Result<Clustering> {
    opts.validate()?;
    check_input(h, c_in)?;
    if c_in.is_consolidated(k) {
        return Ok(refine_assignment(h, c_in, &[]));
    }
    let units = c_in.atom_units();
    check_k(k, units.len(), "atoms")?;
    let all: Vec<usize> = (0..h.n()).collect();
    let (mut centers, _) = swap_kmedian(h, &all, k, opts)?;
    let mut assignment = assign_nearest(h, &centers);
    repair_with(h, &mut assignment, &mut centers, &units, one_median)?;
    Ok(Clustering {
        assignment,
        num_blocks: k,
        centers: Some(centers),
        atoms: c_in.atoms.clone(),
    })
}
