//! Comparison algorithms: the first objective alone (B1), plain greedy
//! k-center (B2), and an agglomerative equal-weight stand-in for MOC.

use std::time::Instant;

use zeus_core::makeshifts::{
    greedy_kcenter, makeshift_fairness_ab, makeshift_fairness_min_cost, makeshift_rs, makeshift_rs_gamma, makeshift_tf,
    one_center, one_median,
};
use zeus_core::objectives::{evaluate, Direction};
use zeus_core::{
    Clustering, Color, Error, GraphInstance, MakeshiftOptions, ObjectiveKind, ObjectiveSpec,
    PairStructure, ProblemSpec, Result,
};

/// Center rule for the blocks a baseline returns: in-block 1-median when the
/// objectives ask for k-median and not k-center, 1-center otherwise.
fn center_rule(objectives: &[ObjectiveSpec]) -> fn(&GraphInstance, &[usize]) -> usize {
    let has = |k| objectives.iter().any(|o| o.kind == k);
    if has(ObjectiveKind::KMedian) && !has(ObjectiveKind::KCenter) {
        one_median
    } else {
        one_center
    }
}

fn finish(
    h: &GraphInstance,
    mut blocks: Vec<Vec<usize>>,
    atoms: Vec<Vec<usize>>,
    rule: fn(&GraphInstance, &[usize]) -> usize,
) -> Result<Clustering> {
    for b in blocks.iter_mut() {
        b.sort_unstable();
    }
    blocks.sort_by_key(|b| b[0]);
    let centers = blocks.iter().map(|b| rule(h, b)).collect();
    Ok(Clustering::from_blocks(h.n(), &blocks)?
        .with_centers(centers)
        .with_atoms(atoms))
}

/// Optimises the first objective only. Resource sharing and fairness
/// fragments are merged, closest centers first, until `k` blocks remain;
/// team formation is returned as its makeshift built it.
pub fn baseline_b1(h: &GraphInstance, spec: &ProblemSpec) -> Result<Clustering> {
    spec.validate(h)?;
    let o1 = &spec.objectives[0];
    let start = Clustering::singletons(h.n());
    let fragments = match o1.kind {
        ObjectiveKind::ResourceSharing if o1.gamma == 1 => makeshift_rs(h, &start)?,
        ObjectiveKind::ResourceSharing => makeshift_rs_gamma(h, &start, o1.gamma)?,
        ObjectiveKind::Fairness => makeshift_fairness_ab(h, &start, o1.alpha, o1.beta)?,
        ObjectiveKind::TeamFormation => {
            return makeshift_tf(h, &o1.expert_set(h), spec.k, &spec.options)
        }
        _ => {
            return Err(Error::Config(format!(
                "B1 needs resource sharing, fairness or team formation first, got {o1}"
            )))
        }
    };
    let c = fragments.clustering;
    let rule = center_rule(&spec.objectives);
    let mut blocks = c.blocks();
    if blocks.len() < spec.k {
        return Err(Error::Infeasible(format!(
            "{} fragments cannot fill {} blocks",
            blocks.len(),
            spec.k
        )));
    }
    let mut centers: Vec<usize> = blocks.iter().map(|b| rule(h, b)).collect();
    while blocks.len() > spec.k {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                let d = h.dist(centers[i], centers[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (_, i, j) = best;
        let moved = blocks.swap_remove(j);
        centers.swap_remove(j);
        blocks[i].extend(moved);
        blocks[i].sort_unstable();
        centers[i] = rule(h, &blocks[i]);
        // keep blocks ordered by smallest member so ties stay index based
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by_key(|&b| blocks[b][0]);
        blocks = order.iter().map(|&b| std::mem::take(&mut blocks[b])).collect();
        centers = order.iter().map(|&b| centers[b]).collect();
    }
    finish(h, blocks, c.atoms, rule)
}

/// Farthest-first k-center on all nodes with no atoms and no repair.
pub fn baseline_b2(h: &GraphInstance, k: usize, opts: &MakeshiftOptions) -> Result<Clustering> {
    greedy_kcenter(h, k, opts)
}

/// Per-block state the merge scorer reads.
struct Agglomeration<'a> {
    h: &'a GraphInstance,
    objectives: &'a [ObjectiveSpec],
    pairs: &'a [Option<PairStructure>],
    /// Active block ids, ascending; a block's id is its smallest member.
    active: Vec<usize>,
    members: Vec<Vec<usize>>,
    block: Vec<usize>,
    center: Vec<usize>,
    radius: Vec<f64>,
    cost: Vec<f64>,
    /// In-block neighbour count per node.
    inner: Vec<usize>,
    /// Fairness partners per Blue node, per objective position.
    partners: Vec<Vec<Vec<usize>>>,
    experts: Vec<Vec<usize>>,
    expert_count: Vec<Vec<usize>>,
    center_by_sum: bool,
}

/// Largest of `values[b]` over active blocks other than `skip`.
fn extreme_excluding(top: &[(f64, usize)], skip: [usize; 2]) -> Option<f64> {
    top.iter().find(|(_, b)| !skip.contains(b)).map(|&(v, _)| v)
}

impl<'a> Agglomeration<'a> {
    fn new(
        h: &'a GraphInstance,
        objectives: &'a [ObjectiveSpec],
        pairs: &'a [Option<PairStructure>],
    ) -> Self {
        let n = h.n();
        let has = |k| objectives.iter().any(|o| o.kind == k);
        let mut partners = Vec::new();
        for (o, p) in objectives.iter().zip(pairs) {
            let mut list = vec![Vec::new(); n];
            if let (ObjectiveKind::Fairness, Some(p)) = (o.kind, p) {
                for &(u, v) in &p.pairs {
                    match (h.color(u), h.color(v)) {
                        (Some(Color::Blue), Some(Color::Purple)) => list[u].push(v),
                        (Some(Color::Purple), Some(Color::Blue)) => list[v].push(u),
                        _ => {}
                    }
                }
            }
            partners.push(list);
        }
        let experts: Vec<Vec<usize>> = objectives
            .iter()
            .map(|o| match o.kind {
                ObjectiveKind::TeamFormation => o.expert_set(h),
                _ => Vec::new(),
            })
            .collect();
        let expert_count = experts
            .iter()
            .map(|xs| {
                let mut c = vec![0; n];
                for &x in xs {
                    c[x] += 1;
                }
                c
            })
            .collect();
        Agglomeration {
            h,
            objectives,
            pairs,
            active: (0..n).collect(),
            members: (0..n).map(|u| vec![u]).collect(),
            block: (0..n).collect(),
            center: (0..n).collect(),
            radius: vec![0.0; n],
            cost: vec![0.0; n],
            inner: vec![0; n],
            partners,
            experts,
            expert_count,
            center_by_sum: has(ObjectiveKind::KMedian) && !has(ObjectiveKind::KCenter),
        }
    }

    fn far(&self, b: usize, c: usize) -> f64 {
        self.members[b].iter().map(|&u| self.h.dist(u, c)).fold(0.0, f64::max)
    }

    fn sum(&self, b: usize, c: usize) -> f64 {
        self.members[b].iter().map(|&u| self.h.dist(u, c)).sum()
    }

    /// Merged radius and which center (`i`'s or `j`'s) attains it.
    fn merged_radius(&self, i: usize, j: usize) -> (f64, usize) {
        let with_i = self.radius[i].max(self.far(j, self.center[i]));
        let with_j = self.radius[j].max(self.far(i, self.center[j]));
        if with_j < with_i {
            (with_j, self.center[j])
        } else {
            (with_i, self.center[i])
        }
    }

    fn merged_cost(&self, i: usize, j: usize) -> (f64, usize) {
        let with_i = self.cost[i] + self.sum(j, self.center[i]);
        let with_j = self.cost[j] + self.sum(i, self.center[j]);
        if with_j < with_i {
            (with_j, self.center[j])
        } else {
            (with_i, self.center[i])
        }
    }

    /// Nodes of `i` whose neighbours in `j` lift them to `gamma`.
    fn rs_gain(&self, i: usize, j: usize, gamma: usize) -> usize {
        let mut gain = 0;
        for (a, b) in [(i, j), (j, i)] {
            for &u in &self.members[a] {
                if self.inner[u] >= gamma {
                    continue;
                }
                let cross = self.h.adj(u).iter().filter(|&&v| self.block[v] == b).count();
                if self.inner[u] + cross >= gamma {
                    gain += 1;
                }
            }
        }
        gain
    }

    fn fair(&self, pos: usize, u: usize, inside: impl Fn(usize) -> bool) -> bool {
        let p = &self.partners[pos][u];
        !p.is_empty() && p.iter().all(|&v| inside(v))
    }

    fn f_gain(&self, pos: usize, i: usize, j: usize) -> usize {
        let mut gain = 0;
        for b in [i, j] {
            for &u in &self.members[b] {
                let own = self.fair(pos, u, |v| self.block[v] == b);
                if !own && self.fair(pos, u, |v| self.block[v] == i || self.block[v] == j) {
                    gain += 1;
                }
            }
        }
        gain
    }

    /// Values of both objectives for every candidate merge, in pair order.
    fn candidates(&self) -> Result<Vec<(usize, usize, Vec<f64>)>> {
        let n = self.h.n() as f64;
        let act = &self.active;
        let mut per_obj: Vec<Box<dyn Fn(usize, usize) -> f64 + '_>> = Vec::new();
        for (pos, o) in self.objectives.iter().enumerate() {
            match o.kind {
                ObjectiveKind::KCenter => {
                    let mut top: Vec<(f64, usize)> = act.iter().map(|&b| (self.radius[b], b)).collect();
                    top.sort_by(|a, b| b.0.total_cmp(&a.0));
                    top.truncate(3);
                    per_obj.push(Box::new(move |i, j| {
                        let rest = extreme_excluding(&top, [i, j]).unwrap_or(0.0);
                        rest.max(self.merged_radius(i, j).0)
                    }));
                }
                ObjectiveKind::KMedian => {
                    let total: f64 = act.iter().map(|&b| self.cost[b]).sum();
                    per_obj.push(Box::new(move |i, j| {
                        total - self.cost[i] - self.cost[j] + self.merged_cost(i, j).0
                    }));
                }
                ObjectiveKind::ResourceSharing => {
                    let gamma = o.gamma;
                    let covered = self.inner.iter().filter(|&&c| c >= gamma).count();
                    per_obj.push(Box::new(move |i, j| {
                        (covered + self.rs_gain(i, j, gamma)) as f64 / n
                    }));
                }
                ObjectiveKind::Fairness => {
                    if self.pairs[pos].is_none() {
                        return Err(Error::Config("fairness needs its matched pairs".into()));
                    }
                    let blues = self.h.nodes_with_color(Color::Blue);
                    if blues.is_empty() {
                        return Err(Error::Degenerate("fairness needs at least one Blue node".into()));
                    }
                    let ok = blues
                        .iter()
                        .filter(|&&u| self.fair(pos, u, |v| self.block[v] == self.block[u]))
                        .count();
                    let total = blues.len() as f64;
                    per_obj.push(Box::new(move |i, j| (ok + self.f_gain(pos, i, j)) as f64 / total));
                }
                ObjectiveKind::TeamFormation => {
                    if self.experts[pos].is_empty() {
                        return Err(Error::Degenerate("team formation needs experts".into()));
                    }
                    let counts = &self.expert_count[pos];
                    let mut desc: Vec<(f64, usize)> = act.iter().map(|&b| (counts[b] as f64, b)).collect();
                    desc.sort_by(|a, b| b.0.total_cmp(&a.0));
                    let mut asc = desc.clone();
                    asc.reverse();
                    desc.truncate(3);
                    asc.truncate(3);
                    per_obj.push(Box::new(move |i, j| {
                        let merged = (counts[i] + counts[j]) as f64;
                        let max = extreme_excluding(&desc, [i, j]).unwrap_or(merged).max(merged);
                        let min = extreme_excluding(&asc, [i, j]).unwrap_or(merged).min(merged);
                        if min == 0.0 {
                            f64::INFINITY
                        } else {
                            max / min
                        }
                    }));
                }
            }
        }
        let mut out = Vec::with_capacity(act.len() * act.len().saturating_sub(1) / 2);
        for (x, &i) in act.iter().enumerate() {
            for &j in &act[x + 1..] {
                out.push((i, j, per_obj.iter().map(|f| f(i, j)).collect()));
            }
        }
        Ok(out)
    }

    fn merge(&mut self, i: usize, j: usize) {
        let (radius, by_radius) = self.merged_radius(i, j);
        let (cost, by_cost) = self.merged_cost(i, j);
        let moved = std::mem::take(&mut self.members[j]);
        for &u in &moved {
            self.block[u] = i;
        }
        self.members[i].extend(moved);
        self.members[i].sort_unstable();
        self.center[i] = if self.center_by_sum { by_cost } else { by_radius };
        self.radius[i] = if self.center_by_sum {
            self.far(i, self.center[i])
        } else {
            radius
        };
        self.cost[i] = if self.center_by_sum {
            cost
        } else {
            self.sum(i, self.center[i])
        };
        for idx in 0..self.members[i].len() {
            let u = self.members[i][idx];
            self.inner[u] = self.h.adj(u).iter().filter(|&&v| self.block[v] == i).count();
        }
        for counts in self.expert_count.iter_mut() {
            counts[i] += counts[j];
            counts[j] = 0;
        }
        self.active.retain(|&b| b != j);
    }

    fn snapshot(&self, rule: fn(&GraphInstance, &[usize]) -> usize) -> Result<Clustering> {
        let blocks: Vec<Vec<usize>> = self.active.iter().map(|&b| self.members[b].clone()).collect();
        finish(self.h, blocks, Vec::new(), rule)
    }
}

/// Maps each candidate's value into `[0, 1]` by this round's min and max,
/// after negating maximised objectives. `+inf` maps to 1; when every value is
/// `+inf`, or all finite values agree, the finite ones map to 0.
fn normalize(values: &[f64], direction: Direction) -> Vec<f64> {
    let t: Vec<f64> = values
        .iter()
        .map(|&v| if direction == Direction::Maximize { -v } else { v })
        .collect();
    let finite = t.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    t.iter()
        .map(|&v| {
            if !v.is_finite() {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.0
            }
        })
        .collect()
}

/// The matching each fairness objective is scored against: the one the
/// pipeline builds, minimum cost when the next clustering objective is
/// k-median and bottleneck otherwise.
pub fn fairness_pairs(h: &GraphInstance, objectives: &[ObjectiveSpec]) -> Result<Vec<Option<PairStructure>>> {
    let start = Clustering::singletons(h.n());
    (0..objectives.len())
        .map(|i| {
            let o = &objectives[i];
            if o.kind != ObjectiveKind::Fairness {
                return Ok(None);
            }
            let next_is_kmedian = objectives[i + 1..]
                .iter()
                .find(|x| matches!(x.kind, ObjectiveKind::KCenter | ObjectiveKind::KMedian))
                .is_some_and(|x| x.kind == ObjectiveKind::KMedian);
            let f = if next_is_kmedian {
                makeshift_fairness_min_cost(h, &start, o.alpha, o.beta)?
            } else {
                makeshift_fairness_ab(h, &start, o.alpha, o.beta)?
            };
            Ok(Some(f.pairs))
        })
        .collect()
}

/// Equal-weight agglomerative clustering for two objectives. Starting from
/// singletons, each round applies the merge whose normalised values sum to
/// the least; ties go to the lowest pair of block ids.
pub fn baseline_moc(h: &GraphInstance, spec: &ProblemSpec) -> Result<Clustering> {
    let (_, c, _) = baseline_moc_sweep(h, spec, &[spec.k])?
        .pop()
        .expect("one snapshot per requested k");
    Ok(c)
}

/// Runs one agglomeration down to the smallest requested `k` and returns a
/// snapshot, with the elapsed milliseconds, at every requested `k`
/// (descending).
pub fn baseline_moc_sweep(
    h: &GraphInstance,
    spec: &ProblemSpec,
    ks: &[usize],
) -> Result<Vec<(usize, Clustering, f64)>> {
    if spec.objectives.len() != 2 {
        return Err(Error::Config(format!(
            "MOC takes exactly two objectives, got {}",
            spec.objectives.len()
        )));
    }
    let mut ks: Vec<usize> = ks.to_vec();
    ks.sort_unstable_by(|a, b| b.cmp(a));
    ks.dedup();
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > h.n()) {
        return Err(Error::Config(format!("k = {k} must lie in 1..={}", h.n())));
    }
    let start = Instant::now();
    let pairs = fairness_pairs(h, &spec.objectives)?;
    let rule = center_rule(&spec.objectives);
    let mut agg = Agglomeration::new(h, &spec.objectives, &pairs);
    let mut out = Vec::with_capacity(ks.len());
    for &k in &ks {
        while agg.active.len() > k {
            let cands = agg.candidates()?;
            let mut score = vec![0.0; cands.len()];
            for (pos, o) in spec.objectives.iter().enumerate() {
                let vals: Vec<f64> = cands.iter().map(|c| c.2[pos]).collect();
                for (s, x) in score.iter_mut().zip(normalize(&vals, o.direction)) {
                    *s += x;
                }
            }
            let mut best = 0;
            for (x, &s) in score.iter().enumerate() {
                if s < score[best] {
                    best = x;
                }
            }
            let (i, j, _) = cands[best];
            agg.merge(i, j);
        }
        out.push((k, agg.snapshot(rule)?, start.elapsed().as_secs_f64() * 1e3));
    }
    Ok(out)
}

/// Values of `objectives` on `c`, fairness scored against `pairs`.
pub fn evaluate_all(
    h: &GraphInstance,
    c: &Clustering,
    objectives: &[ObjectiveSpec],
    pairs: &[Option<PairStructure>],
) -> Result<Vec<f64>> {
    objectives
        .iter()
        .zip(pairs)
        .map(|(o, p)| Ok(evaluate(h, c, o, p.as_ref())?.value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use zeus_core::objectives::eval_kcenter;

    fn spec(objs: &str, k: usize) -> ProblemSpec {
        let objectives = ObjectiveSpec::parse_list(objs).unwrap();
        let slacks = objectives
            .iter()
            .map(|o| if o.kind == ObjectiveKind::KCenter { 3.0 } else { 1.0 })
            .collect();
        ProblemSpec::new(objectives, slacks, k)
    }

    #[test]
    fn normalization_edges() {
        assert_eq!(normalize(&[1.0, 3.0, 2.0], Direction::Minimize), vec![0.0, 1.0, 0.5]);
        assert_eq!(normalize(&[1.0, 3.0], Direction::Maximize), vec![1.0, 0.0]);
        assert_eq!(normalize(&[2.0, f64::INFINITY], Direction::Minimize), vec![0.0, 1.0]);
        assert_eq!(normalize(&[f64::INFINITY; 2], Direction::Minimize), vec![1.0, 1.0]);
        assert_eq!(normalize(&[5.0, 5.0], Direction::Minimize), vec![0.0, 0.0]);
    }

    #[test]
    fn b1_merges_nearest_fragments() {
        // stars {0,1}, {2,3}, {10,11}; k = 2 merges the two left stars
        let h = GraphInstance::from_line(&[0.0, 1.0, 3.0, 4.0, 10.0, 11.0], &[(0, 1), (2, 3), (4, 5)])
            .unwrap();
        let c = baseline_b1(&h, &spec("rs,kc", 2)).unwrap();
        assert_eq!(c.assignment, vec![0, 0, 0, 0, 1, 1]);
        assert_eq!(c.num_blocks, 2);
        let c3 = baseline_b1(&h, &spec("rs,kc", 3)).unwrap();
        assert_eq!(c3.num_blocks, 3);
        assert!(baseline_b1(&h, &spec("rs,kc", 4)).unwrap_err().is_infeasible());
    }

    #[test]
    fn b1_rejects_kcenter_first() {
        let h = GraphInstance::from_line(&[0.0, 1.0], &[(0, 1)]).unwrap();
        let mut s = spec("kc,rs", 1);
        s.slacks.0 = vec![2.0, 1.0];
        assert!(matches!(baseline_b1(&h, &s), Err(Error::Config(_))));
    }

    #[test]
    fn b2_single_block() {
        let h = GraphInstance::from_line(&[0.0, 2.0, 5.0], &[]).unwrap();
        let c = baseline_b2(&h, 1, &Default::default()).unwrap();
        assert_eq!(eval_kcenter(&h, &c).unwrap().value, 5.0);
    }

    #[test]
    fn moc_identity_and_constant_objectives() {
        let h = GraphInstance::from_line(&[0.0, 1.0, 5.0, 6.0], &[(0, 1), (2, 3)]).unwrap();
        let c = baseline_moc(&h, &spec("rs,kc", 4)).unwrap();
        assert_eq!(c.assignment, vec![0, 1, 2, 3]);
        // no relation and every node an expert-free block: only lowest pairs merge
        let flat = GraphInstance::from_line(&[0.0, 0.0, 0.0, 0.0], &[]).unwrap();
        let c = baseline_moc(&flat, &spec("rs,kc", 2)).unwrap();
        assert_eq!(c.assignment, vec![0, 0, 0, 1]);
    }

    #[test]
    fn moc_pairs_related_nodes() {
        let h = GraphInstance::from_line(&[0.0, 1.0, 5.0, 6.0], &[(0, 1), (2, 3)]).unwrap();
        let c = baseline_moc(&h, &spec("rs,kc", 2)).unwrap();
        assert_eq!(c.assignment, vec![0, 0, 1, 1]);
    }

    #[test]
    fn moc_needs_two_objectives() {
        let h = GraphInstance::from_line(&[0.0, 1.0], &[(0, 1)]).unwrap();
        assert!(matches!(baseline_moc(&h, &spec("rs", 1)), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_matches_single_runs() {
        let h = GraphInstance::from_line(
            &[0.0, 1.0, 2.5, 4.0, 7.0, 7.5, 12.0],
            &[(0, 1), (2, 3), (4, 5), (5, 6)],
        )
        .unwrap();
        let s = spec("rs,kc", 2);
        let sweep = baseline_moc_sweep(&h, &s, &[2, 3, 5]).unwrap();
        assert_eq!(sweep.iter().map(|x| x.0).collect::<Vec<_>>(), vec![5, 3, 2]);
        for (k, c, _) in sweep {
            assert_eq!(c, baseline_moc(&h, &spec("rs,kc", k)).unwrap());
        }
    }
}
