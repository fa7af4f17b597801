use crate::error::{Error, Result};
use crate::graph::GraphInstance;

use super::one_center;

/// Makes every unit whole and every block non-empty, in place.
///
/// A split unit joins the block of its anchor: the member closest to its own
/// block's center, ties by lowest index. A block left without its center gets
/// the 1-center of what remains. An empty block takes the unit farthest from
/// the center of the widest block that still holds two or more units.
pub fn repair_cohesion(
    h: &GraphInstance,
    assignment: &mut [usize],
    centers: &mut [usize],
    units: &[Vec<usize>],
) -> Result<()> {
    repair_with(h, assignment, centers, units, one_center)
}

pub(crate) fn repair_with(
    h: &GraphInstance,
    assignment: &mut [usize],
    centers: &mut [usize],
    units: &[Vec<usize>],
    recenter: fn(&GraphInstance, &[usize]) -> usize,
) -> Result<()> {
    let k = centers.len();
    if units.len() < k {
        return Err(Error::Infeasible(format!(
            "{} atoms cannot fill {k} non-empty blocks",
            units.len()
        )));
    }
    for unit in units.iter().filter(|u| u.len() > 1) {
        let b0 = assignment[unit[0]];
        if unit.iter().all(|&u| assignment[u] == b0) {
            continue;
        }
        let mut anchor = (f64::INFINITY, usize::MAX);
        for &u in unit {
            let d = h.dist(u, centers[assignment[u]]);
            if d < anchor.0 || (d == anchor.0 && u < anchor.1) {
                anchor = (d, u);
            }
        }
        let target = assignment[anchor.1];
        for &u in unit {
            assignment[u] = target;
        }
    }

    let mut blocks = vec![Vec::new(); k];
    for (u, &b) in assignment.iter().enumerate() {
        blocks[b].push(u);
    }
    for b in 0..k {
        if !blocks[b].is_empty() && assignment[centers[b]] != b {
            centers[b] = recenter(h, &blocks[b]);
        }
    }

    let mut unit_of = vec![0; assignment.len()];
    for (i, unit) in units.iter().enumerate() {
        for &u in unit {
            unit_of[u] = i;
        }
    }
    while let Some(empty) = blocks.iter().position(Vec::is_empty) {
        let mut donor: Option<(f64, usize)> = None;
        for (b, members) in blocks.iter().enumerate() {
            let first = unit_of[members.first().copied().unwrap_or(0)];
            if members.is_empty() || members.iter().all(|&u| unit_of[u] == first) {
                continue;
            }
            let diam = diameter(h, members);
            if donor.is_none_or(|(d, _)| diam > d) {
                donor = Some((diam, b));
            }
        }
        let (_, src) = donor.ok_or_else(|| {
            Error::Infeasible("no block can give up an atom to fill an empty block".into())
        })?;
        let center = centers[src];
        let keep = unit_of[center];
        let mut pick: Option<(f64, usize)> = None;
        for &u in &blocks[src] {
            let i = unit_of[u];
            if i == keep || units[i][0] != u {
                continue;
            }
            let far = units[i]
                .iter()
                .map(|&v| h.dist(v, center))
                .fold(0.0, f64::max);
            if pick.is_none_or(|(d, _)| far > d) {
                pick = Some((far, i));
            }
        }
        let (_, i) = pick.expect("donor block holds a second unit");
        for &u in &units[i] {
            assignment[u] = empty;
        }
        blocks[src].retain(|&u| unit_of[u] != i);
        blocks[empty] = units[i].clone();
        centers[empty] = recenter(h, &units[i]);
    }
    Ok(())
}

fn diameter(h: &GraphInstance, members: &[usize]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[i + 1..] {
            best = best.max(h.dist(u, v));
        }
    }
    best
}
