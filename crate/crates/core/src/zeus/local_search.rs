//! Best-improvement relocation of whole atoms between blocks.

use crate::clustering::Clustering;
use crate::error::Result;
use crate::graph::GraphInstance;
use crate::makeshifts::{one_center, one_median};
use crate::objectives::{evaluate, slack_violated_value, Direction, ObjectiveKind};

use super::ProcessedObjective;

/// Result of one local search invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSearchOutcome {
    pub clustering: Clustering,
    /// Value of the repaired objective after each accepted move.
    pub values: Vec<f64>,
    /// Whether the repaired objective still violates its slack.
    pub still_violated: bool,
}

#[derive(Clone, Copy, Debug)]
enum Move {
    /// Unit index and target block.
    Relocate(usize, usize),
    /// Block and its new center.
    Recenter(usize, usize),
}

struct Search<'a> {
    h: &'a GraphInstance,
    processed: &'a [ProcessedObjective],
    target: usize,
    units: Vec<Vec<usize>>,
    c: Clustering,
}

impl Search<'_> {
    fn value(&self, c: &Clustering, j: usize) -> Result<f64> {
        let p = &self.processed[j];
        Ok(evaluate(self.h, c, &p.objective, p.pairs.as_ref())?.value)
    }

    fn violated(&self, j: usize, value: f64) -> Result<bool> {
        let p = &self.processed[j];
        slack_violated_value(value, p.objective.direction, p.slack, &p.estimate)
    }

    fn centers(&self) -> &[usize] {
        self.c.centers.as_deref().expect("local search runs on centered clusterings")
    }

    fn applied(&self, m: Move) -> Clustering {
        let mut c = self.c.clone();
        match m {
            Move::Relocate(i, t) => {
                for &u in &self.units[i] {
                    c.assignment[u] = t;
                }
            }
            Move::Recenter(b, center) => {
                if let Some(cs) = c.centers.as_mut() {
                    cs[b] = center;
                }
            }
        }
        c
    }

    /// Units that may leave their block: those not holding its center.
    fn movable(&self) -> Vec<usize> {
        let centers = self.centers();
        (0..self.units.len())
            .filter(|&i| {
                let b = self.c.assignment[self.units[i][0]];
                !self.units[i].contains(&centers[b])
            })
            .collect()
    }

    fn relocations(&self, current: f64) -> Result<Vec<(f64, Move)>> {
        let o = &self.processed[self.target].objective;
        let dir = o.direction;
        let natural = dir == o.kind.natural_direction();
        let mut out = Vec::new();
        let k = self.c.num_blocks;
        let centers = self.centers().to_vec();
        match o.kind {
            ObjectiveKind::KCenter if natural => {
                let h = self.h;
                let d: Vec<f64> = (0..h.n())
                    .map(|u| h.dist(u, centers[self.c.assignment[u]]))
                    .collect();
                let cutoff = current * (1.0 - crate::objectives::REL_TOL);
                let mut owner = None;
                for i in self.movable() {
                    if self.units[i].iter().any(|&u| d[u] >= cutoff) {
                        owner = Some(i);
                        break;
                    }
                }
                // only a move of the unit holding every farthest node can help
                let Some(i) = owner else { return Ok(out) };
                let mut in_unit = vec![false; h.n()];
                for &u in &self.units[i] {
                    in_unit[u] = true;
                }
                if (0..h.n()).any(|u| !in_unit[u] && d[u] >= cutoff) {
                    return Ok(out);
                }
                let rest = (0..h.n())
                    .filter(|&u| !in_unit[u])
                    .map(|u| d[u])
                    .fold(0.0, f64::max);
                let s = self.c.assignment[self.units[i][0]];
                for t in (0..k).filter(|&t| t != s) {
                    let moved = self.units[i]
                        .iter()
                        .map(|&u| h.dist(u, centers[t]))
                        .fold(0.0, f64::max);
                    let v = rest.max(moved);
                    if dir.better(v, current) {
                        out.push((v, Move::Relocate(i, t)));
                    }
                }
            }
            ObjectiveKind::KMedian if natural => {
                let h = self.h;
                for i in self.movable() {
                    let s = self.c.assignment[self.units[i][0]];
                    let here: f64 = self.units[i].iter().map(|&u| h.dist(u, centers[s])).sum();
                    for t in (0..k).filter(|&t| t != s) {
                        let there: f64 =
                            self.units[i].iter().map(|&u| h.dist(u, centers[t])).sum();
                        let v = current + there - here;
                        if dir.better(v, current) {
                            out.push((v, Move::Relocate(i, t)));
                        }
                    }
                }
            }
            _ => {
                for i in self.movable() {
                    let s = self.c.assignment[self.units[i][0]];
                    for t in (0..k).filter(|&t| t != s) {
                        let m = Move::Relocate(i, t);
                        let v = self.value(&self.applied(m), self.target)?;
                        if dir.better(v, current) {
                            out.push((v, m));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn recenterings(&self, current: f64) -> Result<Vec<(f64, Move)>> {
        let o = &self.processed[self.target].objective;
        let pick: fn(&GraphInstance, &[usize]) -> usize = match o.kind {
            ObjectiveKind::KCenter => one_center,
            ObjectiveKind::KMedian => one_median,
            _ => return Ok(Vec::new()),
        };
        let mut out = Vec::new();
        for (b, members) in self.c.blocks().iter().enumerate() {
            let center = pick(self.h, members);
            if center == self.centers()[b] {
                continue;
            }
            let m = Move::Recenter(b, center);
            let v = self.value(&self.applied(m), self.target)?;
            if o.direction.better(v, current) {
                out.push((v, m));
            }
        }
        Ok(out)
    }

    /// Keeps every other processed objective within slack, or no worse
    /// than before when it already was outside.
    fn admissible(&self, next: &Clustering, before: &[f64]) -> Result<bool> {
        for j in (0..self.processed.len()).filter(|&j| j != self.target) {
            let v = self.value(next, j)?;
            if self.violated(j, v)? {
                let dir: Direction = self.processed[j].objective.direction;
                if !self.violated(j, before[j])? || dir.better(before[j], v) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn first_admissible(
        &self,
        mut candidates: Vec<(f64, Move)>,
        before: &[f64],
    ) -> Result<Option<(f64, Clustering)>> {
        let dir = self.processed[self.target].objective.direction;
        // best value first; equal values keep generation order (unit, block)
        candidates.sort_by(|a, b| match dir {
            Direction::Minimize => a.0.total_cmp(&b.0),
            Direction::Maximize => b.0.total_cmp(&a.0),
        });
        for (v, m) in candidates {
            let next = self.applied(m);
            if self.admissible(&next, before)? {
                return Ok(Some((v, next)));
            }
        }
        Ok(None)
    }
}

/// Repairs the slack violation of `processed[target]` by moving whole atoms
/// (or, for k-center and k-median, re-choosing a block's center) one step at
/// a time. Each step takes the admissible move that improves the target the
/// most; ties go to the lowest unit, then the lowest block. Stops when the
/// slack holds, no admissible move improves, or `cap` moves were made.
pub fn local_search(
    h: &GraphInstance,
    clustering: &Clustering,
    processed: &[ProcessedObjective],
    target: usize,
    cap: usize,
) -> Result<LocalSearchOutcome> {
    let mut search = Search {
        h,
        processed,
        target,
        units: clustering.atom_units(),
        c: clustering.clone(),
    };
    let mut values = Vec::new();
    let mut current = search.value(&search.c, target)?;
    if search.c.centers.is_none() {
        let still_violated = search.violated(target, current)?;
        return Ok(LocalSearchOutcome {
            clustering: search.c,
            values,
            still_violated,
        });
    }
    while values.len() < cap && search.violated(target, current)? {
        let before: Vec<f64> = (0..processed.len())
            .map(|j| search.value(&search.c, j))
            .collect::<Result<_>>()?;
        let mut step = search.first_admissible(search.relocations(current)?, &before)?;
        if step.is_none() {
            step = search.first_admissible(search.recenterings(current)?, &before)?;
        }
        let Some((_, next)) = step else { break };
        search.c = next;
        current = search.value(&search.c, target)?;
        values.push(current);
    }
    let still_violated = search.violated(target, current)?;
    Ok(LocalSearchOutcome {
        clustering: search.c,
        values,
        still_violated,
    })
}
