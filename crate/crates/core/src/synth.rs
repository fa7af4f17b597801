//! Seeded synthetic instances: uniform points in the unit square with a
//! relation, a two-color split, or expert flags.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::graph::{Color, GraphInstance, NodeAttrs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// Random geometric relation for resource sharing.
    Rs,
    /// Blue/Purple coloring with Blue–Purple edges for fairness.
    F,
    /// Expert flags, no relation.
    Tf,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rs" => Ok(SynthKind::Rs),
            "f" => Ok(SynthKind::F),
            "tf" => Ok(SynthKind::Tf),
            other => Err(Error::Config(format!("unknown instance kind `{other}`"))),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::Rs => "rs",
            SynthKind::F => "f",
            SynthKind::Tf => "tf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub kind: SynthKind,
    pub n: usize,
    pub seed: u64,
    /// Pairs closer than this are related; defaults to a radius giving
    /// about two neighbours per node.
    pub edge_radius: Option<f64>,
    /// Share of Blue nodes for fairness instances (at most one half).
    pub blue_fraction: f64,
    /// Probability that a node is an expert.
    pub expert_fraction: f64,
}

impl SynthParams {
    pub fn new(kind: SynthKind, n: usize, seed: u64) -> Self {
        SynthParams {
            kind,
            n,
            seed,
            edge_radius: None,
            blue_fraction: 0.3,
            expert_fraction: 0.3,
        }
    }

    fn radius(&self) -> f64 {
        self.edge_radius
            .unwrap_or_else(|| (2.0 / (std::f64::consts::PI * self.n.max(1) as f64)).sqrt())
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn generate(p: &SynthParams) -> Result<GraphInstance> {
    if p.n == 0 {
        return Err(Error::Config("instance needs at least one node".into()));
    }
    if !(0.0..=0.5).contains(&p.blue_fraction) || !(0.0..=1.0).contains(&p.expert_fraction) {
        return Err(Error::Config("fractions out of range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.n;
    let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let mut attrs: Vec<NodeAttrs> = points
        .iter()
        .map(|pt| NodeAttrs {
            embedding: Some(pt.clone()),
            ..NodeAttrs::default()
        })
        .collect();
    let r = p.radius();
    let mut edges = Vec::new();
    match p.kind {
        SynthKind::Rs => {
            if n < 2 {
                return Err(Error::Config("a related instance needs two nodes".into()));
            }
            let mut degree = vec![0; n];
            for u in 0..n {
                for v in u + 1..n {
                    if dist(&points[u], &points[v]) <= r {
                        edges.push((u, v));
                        degree[u] += 1;
                        degree[v] += 1;
                    }
                }
            }
            for u in (0..n).filter(|&u| degree[u] == 0) {
                let v = (0..n)
                    .filter(|&v| v != u)
                    .min_by(|&a, &b| dist(&points[u], &points[a]).total_cmp(&dist(&points[u], &points[b])))
                    .expect("two nodes");
                edges.push((u.min(v), u.max(v)));
            }
        }
        SynthKind::F => {
            let blues = ((n as f64 * p.blue_fraction).round() as usize).clamp(1, n / 2);
            if blues == 0 {
                return Err(Error::Config("a colored instance needs two nodes".into()));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut is_blue = vec![false; n];
            for &u in &order[..blues] {
                is_blue[u] = true;
            }
            for (u, a) in attrs.iter_mut().enumerate() {
                a.color = Some(if is_blue[u] { Color::Blue } else { Color::Purple });
            }
            let b_list: Vec<usize> = (0..n).filter(|&u| is_blue[u]).collect();
            let p_list: Vec<usize> = (0..n).filter(|&u| !is_blue[u]).collect();
            let mut adj = vec![vec![false; p_list.len()]; b_list.len()];
            for (i, &b) in b_list.iter().enumerate() {
                for (j, &q) in p_list.iter().enumerate() {
                    adj[i][j] = dist(&points[b], &points[q]) <= r;
                }
            }
            // add each unmatched Blue node's nearest missing edge until a
            // matching covers every Blue node
            while let Some(unmatched) = unsaturated(&adj, p_list.len()) {
                for i in unmatched {
                    let b = b_list[i];
                    let best = (0..p_list.len()).filter(|&j| !adj[i][j]).min_by(|&x, &y| {
                        dist(&points[b], &points[p_list[x]]).total_cmp(&dist(&points[b], &points[p_list[y]]))
                    });
                    if let Some(j) = best {
                        adj[i][j] = true;
                    }
                }
            }
            for (i, &b) in b_list.iter().enumerate() {
                for (j, &q) in p_list.iter().enumerate() {
                    if adj[i][j] {
                        edges.push((b.min(q), b.max(q)));
                    }
                }
            }
        }
        SynthKind::Tf => {
            for a in attrs.iter_mut() {
                a.expert = rng.gen_bool(p.expert_fraction);
            }
            if attrs.iter().all(|a| !a.expert) {
                let u = rng.gen_range(0..n);
                attrs[u].expert = true;
            }
        }
    }
    GraphInstance::euclidean((0..n).map(|i| i.to_string()).collect(), attrs, &edges)
}

/// Blue rows left unmatched by a maximum matching, or `None` when every Blue
/// row is matched.
fn unsaturated(adj: &[Vec<bool>], purples: usize) -> Option<Vec<usize>> {
    let blues = adj.len();
    let (s, t) = (blues + purples, blues + purples + 1);
    let mut g = FlowNetwork::new(blues + purples + 2);
    let source_arcs: Vec<_> = (0..blues).map(|i| g.add_arc(s, i, 1)).collect();
    for (i, row) in adj.iter().enumerate() {
        for (j, &on) in row.iter().enumerate() {
            if on {
                g.add_arc(i, blues + j, 1);
            }
        }
    }
    for j in 0..purples {
        g.add_arc(blues + j, t, 1);
    }
    let flow = g.max_flow(s, t);
    if flow as usize == blues {
        return None;
    }
    Some((0..blues).filter(|&i| g.flow(source_arcs[i]) == 0).collect())
}
