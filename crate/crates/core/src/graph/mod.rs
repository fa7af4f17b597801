//! Immutable graph instances: nodes, the relation `E`, a distance metric and
//! per-node attributes.

mod io;

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_instance, parse_csv_edges, parse_json, save_instance, to_json, InstanceFormat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Purple,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeAttrs {
    pub color: Option<Color>,
    pub expert: bool,
    pub embedding: Option<Vec<f64>>,
    pub attrs: Option<BTreeSet<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Explicit,
    Euclidean,
    Jaccard,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Explicit => "explicit",
            MetricKind::Euclidean => "euclidean",
            MetricKind::Jaccard => "jaccard",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Metric {
    /// Row-major n×n matrix.
    Explicit(Vec<f64>),
    Euclidean,
    Jaccard,
}

/// A graph instance `H = (V, E, d)` with node attributes.
///
/// Nodes are dense indices `0..n` in file order; the original ids are kept as
/// labels. Every tie-break in the crate uses this order.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphInstance {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    attrs: Vec<NodeAttrs>,
    metric: Metric,
    adjacency: Vec<Vec<usize>>,
}

impl GraphInstance {
    /// Euclidean instance over the given embeddings.
    pub fn euclidean(
        labels: Vec<String>,
        attrs: Vec<NodeAttrs>,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        Self::build(labels, attrs, Metric::Euclidean, edges)
    }

    /// Jaccard instance over per-node token sets.
    pub fn jaccard(
        labels: Vec<String>,
        attrs: Vec<NodeAttrs>,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        Self::build(labels, attrs, Metric::Jaccard, edges)
    }

    /// Instance over an explicit row-major `n×n` distance matrix.
    pub fn explicit(
        labels: Vec<String>,
        attrs: Vec<NodeAttrs>,
        matrix: Vec<f64>,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        Self::build(labels, attrs, Metric::Explicit(matrix), edges)
    }

    /// Points on a line, labelled by index. Mostly useful in tests.
    pub fn from_line(xs: &[f64], edges: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..xs.len()).map(|i| i.to_string()).collect();
        let attrs = xs
            .iter()
            .map(|&x| NodeAttrs {
                embedding: Some(vec![x]),
                ..NodeAttrs::default()
            })
            .collect();
        Self::euclidean(labels, attrs, edges)
    }

    fn build(
        labels: Vec<String>,
        attrs: Vec<NodeAttrs>,
        metric: Metric,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let n = labels.len();
        if attrs.len() != n {
            return Err(Error::Parse(format!(
                "{} labels but {} attribute records",
                n,
                attrs.len()
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateNode(label.clone()));
            }
        }
        match &metric {
            Metric::Explicit(m) => {
                if m.len() != n * n {
                    return Err(Error::MetricDeclaration(format!(
                        "explicit matrix has {} entries, expected {}",
                        m.len(),
                        n * n
                    )));
                }
                for u in 0..n {
                    for v in 0..n {
                        let d = m[u * n + v];
                        if !d.is_finite() || d < 0.0 || (u == v && d != 0.0) {
                            return Err(Error::InvalidDistance {
                                u: labels[u].clone(),
                                v: labels[v].clone(),
                                value: d,
                            });
                        }
                        if d != m[v * n + u] {
                            return Err(Error::AsymmetricDistance(
                                labels[u].clone(),
                                labels[v].clone(),
                            ));
                        }
                    }
                }
            }
            Metric::Euclidean => {
                let mut dim = None;
                for (label, a) in labels.iter().zip(&attrs) {
                    let e = a.embedding.as_ref().ok_or_else(|| {
                        Error::MetricDeclaration(format!("node `{label}` has no embedding"))
                    })?;
                    if e.iter().any(|x| !x.is_finite()) {
                        return Err(Error::MetricDeclaration(format!(
                            "node `{label}` has a non-finite embedding coordinate"
                        )));
                    }
                    match dim {
                        None => dim = Some(e.len()),
                        Some(d) if d != e.len() => {
                            return Err(Error::MetricDeclaration(format!(
                                "node `{label}` has embedding dimension {}, expected {d}",
                                e.len()
                            )))
                        }
                        _ => {}
                    }
                }
            }
            Metric::Jaccard => {
                for (label, a) in labels.iter().zip(&attrs) {
                    if a.attrs.is_none() {
                        return Err(Error::MetricDeclaration(format!(
                            "node `{label}` has no attribute set"
                        )));
                    }
                }
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { node: u.max(v), n });
            }
            if u == v {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(GraphInstance {
            labels,
            index,
            attrs,
            metric,
            adjacency,
        })
    }

    /// Same nodes and metric with a different relation `E`.
    pub fn with_edges(&self, edges: &[(usize, usize)]) -> Result<Self> {
        Self::build(
            self.labels.clone(),
            self.attrs.clone(),
            self.metric.clone(),
            edges,
        )
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn metric_kind(&self) -> MetricKind {
        match self.metric {
            Metric::Explicit(_) => MetricKind::Explicit,
            Metric::Euclidean => MetricKind::Euclidean,
            Metric::Jaccard => MetricKind::Jaccard,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, u: usize) -> &str {
        &self.labels[u]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn attrs(&self, u: usize) -> &NodeAttrs {
        &self.attrs[u]
    }

    pub fn color(&self, u: usize) -> Option<Color> {
        self.attrs[u].color
    }

    pub fn is_expert(&self, u: usize) -> bool {
        self.attrs[u].expert
    }

    /// Expert node ids in ascending order.
    pub fn experts(&self) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.attrs[u].expert).collect()
    }

    pub fn nodes_with_color(&self, color: Color) -> Vec<usize> {
        (0..self.n())
            .filter(|&u| self.attrs[u].color == Some(color))
            .collect()
    }

    fn check(&self, u: usize) -> Result<()> {
        if u < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: u, n: self.n() })
        }
    }

    /// Checked distance lookup.
    pub fn distance(&self, u: usize, v: usize) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.dist(u, v))
    }

    /// Distance without bounds reporting; panics on an out-of-range id.
    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        match &self.metric {
            Metric::Explicit(m) => m[u * self.n() + v],
            Metric::Euclidean => {
                let a = self.attrs[u].embedding.as_deref().unwrap_or(&[]);
                let b = self.attrs[v].embedding.as_deref().unwrap_or(&[]);
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
            Metric::Jaccard => {
                let empty = BTreeSet::new();
                let a = self.attrs[u].attrs.as_ref().unwrap_or(&empty);
                let b = self.attrs[v].attrs.as_ref().unwrap_or(&empty);
                let inter = a.intersection(b).count();
                let union = a.len() + b.len() - inter;
                if union == 0 {
                    0.0
                } else {
                    1.0 - inter as f64 / union as f64
                }
            }
        }
    }

    /// Neighbours of `u` under `E`, ascending.
    pub fn neighbors(&self, u: usize) -> Result<&[usize]> {
        self.check(u)?;
        Ok(&self.adjacency[u])
    }

    #[inline]
    pub fn adj(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Largest distance over all pairs.
    pub fn diameter(&self) -> f64 {
        let n = self.n();
        let mut best: f64 = 0.0;
        for u in 0..n {
            for v in u + 1..n {
                best = best.max(self.dist(u, v));
            }
        }
        best
    }
}

/// Triangle-inequality check result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub is_metric: bool,
    /// `(u, v, w)` with `d(u, w) > d(u, v) + d(v, w)`.
    pub violations: Vec<(usize, usize, usize)>,
    /// Largest `d(u, w) / (d(u, v) + d(v, w))` among violations, 0 when none.
    pub max_violation_ratio: f64,
    pub triples_checked: u64,
    pub exhaustive: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct MetricCheck {
    /// Exhaustive check up to this many nodes.
    pub exhaustive_cap: usize,
    /// Number of sampled triples above the cap.
    pub samples: usize,
    pub seed: u64,
}

impl Default for MetricCheck {
    fn default() -> Self {
        MetricCheck {
            exhaustive_cap: 500,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

const TRIANGLE_TOL: f64 = 1e-9;

pub fn validate_metric(h: &GraphInstance, check: &MetricCheck) -> MetricReport {
    let n = h.n();
    let mut violations = Vec::new();
    let mut worst: f64 = 0.0;
    let mut test = |u: usize, v: usize, w: usize, violations: &mut Vec<_>| {
        let direct = h.dist(u, w);
        let detour = h.dist(u, v) + h.dist(v, w);
        if direct > detour + TRIANGLE_TOL * direct.max(1.0) {
            violations.push((u, v, w));
            let ratio = if detour > 0.0 { direct / detour } else { f64::INFINITY };
            worst = worst.max(ratio);
        }
    };
    let (checked, exhaustive) = if n <= check.exhaustive_cap {
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    if u != v && v != w && u != w {
                        test(u, v, w, &mut violations);
                    }
                }
            }
        }
        let n = n as u64;
        (n * n.saturating_sub(1) * n.saturating_sub(2), true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
        for _ in 0..check.samples {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            let w = rng.gen_range(0..n);
            if u != v && v != w && u != w {
                test(u, v, w, &mut violations);
            }
        }
        (check.samples as u64, false)
    };
    MetricReport {
        is_metric: violations.is_empty(),
        violations,
        max_violation_ratio: worst,
        triples_checked: checked,
        exhaustive,
    }
}
