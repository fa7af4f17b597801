use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::GraphInstance;

use super::{repair_cohesion, MakeshiftOptions};

pub(crate) fn check_k(k: usize, available: usize, what: &str) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    if k > available {
        return Err(Error::Infeasible(format!(
            "k = {k} exceeds the {available} {what} available"
        )));
    }
    Ok(())
}

/// Farthest-first traversal over `nodes` (ascending). Returns the `k` chosen
/// centers in selection order and the largest distance from a node of
/// `nodes` to its nearest center.
pub fn gonzalez(
    h: &GraphInstance,
    nodes: &[usize],
    k: usize,
    opts: &MakeshiftOptions,
) -> Result<(Vec<usize>, f64)> {
    check_k(k, nodes.len(), "nodes")?;
    let first = opts.first_of(nodes)?;
    let mut centers = vec![first];
    let mut chosen = vec![false; nodes.len()];
    let mut nearest: Vec<f64> = nodes.iter().map(|&u| h.dist(u, first)).collect();
    chosen[nodes.iter().position(|&u| u == first).unwrap_or(0)] = true;
    while centers.len() < k {
        let mut best: Option<usize> = None;
        for (i, &d) in nearest.iter().enumerate() {
            if chosen[i] {
                continue;
            }
            if best.is_none_or(|b| d > nearest[b]) {
                best = Some(i);
            }
        }
        let i = best.expect("fewer candidates than k");
        chosen[i] = true;
        let c = nodes[i];
        centers.push(c);
        for (j, &u) in nodes.iter().enumerate() {
            let d = h.dist(u, c);
            if d < nearest[j] {
                nearest[j] = d;
            }
        }
    }
    let radius = nearest.iter().copied().fold(0.0, f64::max);
    Ok((centers, radius))
}

/// Block index of every node: its nearest center, ties by lowest block
/// index. Each center is placed in its own block.
pub fn assign_nearest(h: &GraphInstance, centers: &[usize]) -> Vec<usize> {
    let mut assignment: Vec<usize> = (0..h.n())
        .map(|u| nearest_center(h, u, centers).0)
        .collect();
    for (b, &c) in centers.iter().enumerate() {
        assignment[c] = b;
    }
    assignment
}

pub(crate) fn nearest_center(h: &GraphInstance, u: usize, centers: &[usize]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (b, &c) in centers.iter().enumerate() {
        let d = h.dist(u, c);
        if d < best.1 {
            best = (b, d);
        }
    }
    best
}

/// Plain greedy k-center over all nodes, without atoms.
pub fn greedy_kcenter(h: &GraphInstance, k: usize, opts: &MakeshiftOptions) -> Result<Clustering> {
    opts.validate()?;
    let all: Vec<usize> = (0..h.n()).collect();
    let (centers, _) = gonzalez(h, &all, k, opts)?;
    Ok(Clustering {
        assignment: assign_nearest(h, &centers),
        num_blocks: k,
        centers: Some(centers),
        atoms: Vec::new(),
    })
}

/// Consolidates `c_in` into exactly `k` blocks for k-center while keeping
/// every atom of `c_in` in one block.
///
/// A clustering that already has `k` blocks with centers keeps its centers;
/// free nodes only move to a strictly nearer center. Anything else is
/// rebuilt: greedy centers over all nodes, nearest-center assignment, then
/// cohesion repair.
pub fn makeshift_kcenter(
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
    let (mut centers, _) = gonzalez(h, &all, k, opts)?;
    let mut assignment = assign_nearest(h, &centers);
    repair_cohesion(h, &mut assignment, &mut centers, &units)?;
    Ok(Clustering {
        assignment,
        num_blocks: k,
        centers: Some(centers),
        atoms: c_in.atoms.clone(),
    })
}

pub(crate) fn check_input(h: &GraphInstance, c_in: &Clustering) -> Result<()> {
    if c_in.n() != h.n() {
        return Err(Error::InvalidClustering(format!(
            "clustering covers {} nodes, instance has {}",
            c_in.n(),
            h.n()
        )));
    }
    c_in.validate(None)
}

/// Moves every free node that is neither a center nor pinned to a strictly
/// nearer center. Centers and block count are unchanged.
pub(crate) fn refine_assignment(h: &GraphInstance, c: &Clustering, pinned: &[usize]) -> Clustering {
    let mut out = c.clone();
    let Some(centers) = c.centers.as_deref() else {
        return out;
    };
    let mut fixed = vec![false; h.n()];
    for atom in &c.atoms {
        for &u in atom {
            fixed[u] = true;
        }
    }
    for &u in pinned.iter().chain(centers) {
        fixed[u] = true;
    }
    for u in (0..h.n()).filter(|&u| !fixed[u]) {
        let current = h.dist(u, centers[c.assignment[u]]);
        let (b, d) = nearest_center(h, u, centers);
        if d < current {
            out.assignment[u] = b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::eval_kcenter;

    fn line(xs: &[f64]) -> GraphInstance {
        GraphInstance::from_line(xs, &[]).unwrap()
    }

    #[test]
    fn greedy_on_three_points() {
        let h = line(&[0.0, 4.0, 5.0]);
        let opts = MakeshiftOptions::default();
        let c = makeshift_kcenter(&h, &Clustering::singletons(3), 2, &opts).unwrap();
        assert_eq!(c.centers, Some(vec![0, 2]));
        assert_eq!(c.assignment, vec![0, 1, 1]);
        assert_eq!(eval_kcenter(&h, &c).unwrap().value, 1.0);
        assert_eq!(greedy_kcenter(&h, 2, &opts).unwrap(), c);
    }

    #[test]
    fn k_equals_n_gives_zero() {
        let h = line(&[3.0, 1.0, 7.0, 2.0]);
        let c = makeshift_kcenter(&h, &Clustering::singletons(4), 4, &Default::default()).unwrap();
        assert_eq!(eval_kcenter(&h, &c).unwrap().value, 0.0);
        assert_eq!(c.num_blocks, 4);
    }

    #[test]
    fn duplicate_points_still_give_distinct_centers() {
        let h = line(&[0.0, 0.0, 0.0]);
        let (centers, r) = gonzalez(&h, &[0, 1, 2], 3, &Default::default()).unwrap();
        assert_eq!(centers, vec![0, 1, 2]);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn atom_moves_to_anchor_block() {
        // centers at 0 and 10; atom {1, 3} with 1 at distance 1 from its
        // center and 3 at distance 4 from the other one
        let h = line(&[0.0, 1.0, 10.0, 6.0]);
        let c_in = Clustering::from_blocks(4, &[vec![0], vec![1, 3], vec![2]])
            .unwrap()
            .with_atoms(vec![vec![1, 3]]);
        let c = makeshift_kcenter(&h, &c_in, 2, &Default::default()).unwrap();
        assert_eq!(c.block_of(3), c.block_of(1));
        assert_eq!(c.block_of(1), c.block_of(0));
        c.validate(Some(2)).unwrap();
    }

    #[test]
    fn too_few_atoms_is_infeasible() {
        let h = line(&[0.0, 1.0, 2.0]);
        let c_in = Clustering::from_blocks(3, &[vec![0, 1, 2]])
            .unwrap()
            .with_atoms(vec![vec![0, 1, 2]]);
        let err = makeshift_kcenter(&h, &c_in, 2, &Default::default()).unwrap_err();
        assert!(err.is_infeasible());
        assert!(makeshift_kcenter(&h, &c_in, 4, &Default::default()).is_err());
        assert!(makeshift_kcenter(&h, &c_in, 0, &Default::default()).is_err());
    }

    #[test]
    fn seeded_first_center_is_reproducible() {
        let h = line(&[0.0, 1.0, 5.0, 9.0, 12.0]);
        let opts = MakeshiftOptions {
            first_center: super::super::FirstCenter::SeededRandom,
            seed: Some(7),
            ..Default::default()
        };
        let a = greedy_kcenter(&h, 2, &opts).unwrap();
        let b = greedy_kcenter(&h, 2, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refine_only_moves_to_strictly_nearer() {
        let h = line(&[0.0, 4.0, 5.0, 10.0]);
        let c = Clustering::from_blocks(4, &[vec![0, 2], vec![1, 3]])
            .unwrap()
            .with_centers(vec![0, 3]);
        let r = refine_assignment(&h, &c, &[]);
        // 2 is equidistant and stays; 1 is nearer 0
        assert_eq!(r.assignment, vec![0, 0, 0, 1]);
        let pinned = refine_assignment(&h, &c, &[1]);
        assert_eq!(pinned.assignment, vec![0, 1, 0, 1]);
    }
}
