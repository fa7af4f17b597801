//! JSON and CSV edge-list instance files.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Color, GraphInstance, Metric, MetricKind, NodeAttrs};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InstanceFormat {
    Json,
    /// `u,v,weight` rows; every unlisted pair gets `fill`.
    CsvEdges { fill: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fill: Option<f64>,
    /// When `edges` is absent, `E` is every pair within this distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_threshold: Option<f64>,
    nodes: Vec<NodeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    distances: Vec<Vec<Value>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRecord {
    id: Value,
    #[serde(default)]
    color: Option<String>,
    #[serde(default)]
    expert: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attrs: Option<Vec<String>>,
}

fn id_string(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Parse(format!("node id must be a string or number, got {other}"))),
    }
}

fn parse_color(s: &str) -> Result<Color> {
    match s {
        "B" | "b" | "Blue" | "blue" => Ok(Color::Blue),
        "P" | "p" | "Purple" | "purple" => Ok(Color::Purple),
        other => Err(Error::Parse(format!("unknown color `{other}`"))),
    }
}

pub fn load_instance(path: impl AsRef<Path>, format: InstanceFormat) -> Result<GraphInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        InstanceFormat::Json => parse_json(&text),
        InstanceFormat::CsvEdges { fill } => parse_csv_edges(&text, fill),
    }
}

pub fn save_instance(h: &GraphInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(h)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Weighted pair list resolved to dense ids.
struct PairTable {
    labels: Vec<String>,
    entries: HashMap<(usize, usize), f64>,
}

impl PairTable {
    fn insert(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        if !w.is_finite() || w < 0.0 || (u == v && w != 0.0) {
            return Err(Error::InvalidDistance {
                u: self.labels[u].clone(),
                v: self.labels[v].clone(),
                value: w,
            });
        }
        if let Some(&prev) = self.entries.get(&(u, v)) {
            if prev != w {
                return Err(Error::Parse(format!(
                    "conflicting distances for (`{}`, `{}`)",
                    self.labels[u], self.labels[v]
                )));
            }
        }
        if let Some(&rev) = self.entries.get(&(v, u)) {
            if rev != w {
                return Err(Error::AsymmetricDistance(
                    self.labels[u].clone(),
                    self.labels[v].clone(),
                ));
            }
        }
        self.entries.insert((u, v), w);
        Ok(())
    }

    fn into_matrix(self, fill: Option<f64>) -> Result<Vec<f64>> {
        let n = self.labels.len();
        if let Some(f) = fill {
            if !f.is_finite() || f < 0.0 {
                return Err(Error::Parse(format!("invalid fill distance {f}")));
            }
        }
        let mut m = vec![f64::NAN; n * n];
        for (&(u, v), &w) in &self.entries {
            m[u * n + v] = w;
            m[v * n + u] = w;
        }
        for u in 0..n {
            m[u * n + u] = 0.0;
            for v in u + 1..n {
                if m[u * n + v].is_nan() {
                    let f = fill.ok_or_else(|| {
                        Error::MissingDistance(self.labels[u].clone(), self.labels[v].clone())
                    })?;
                    m[u * n + v] = f;
                    m[v * n + u] = f;
                }
            }
        }
        Ok(m)
    }
}

pub fn parse_json(text: &str) -> Result<GraphInstance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let kind = match file.metric.as_deref() {
        Some("explicit") => MetricKind::Explicit,
        Some("euclidean") => MetricKind::Euclidean,
        Some("jaccard") => MetricKind::Jaccard,
        Some(other) => {
            return Err(Error::MetricDeclaration(format!("unknown metric `{other}`")))
        }
        None => return Err(Error::MetricDeclaration("missing `metric` field".into())),
    };

    let mut labels = Vec::with_capacity(file.nodes.len());
    let mut attrs = Vec::with_capacity(file.nodes.len());
    let mut index = HashMap::new();
    for rec in &file.nodes {
        let id = id_string(&rec.id)?;
        if index.insert(id.clone(), labels.len()).is_some() {
            return Err(Error::DuplicateNode(id));
        }
        labels.push(id);
        attrs.push(NodeAttrs {
            color: rec.color.as_deref().map(parse_color).transpose()?,
            expert: rec.expert,
            embedding: rec.embedding.clone(),
            attrs: rec
                .attrs
                .as_ref()
                .map(|a| a.iter().cloned().collect::<BTreeSet<_>>()),
        });
    }
    let resolve = |v: &Value| -> Result<usize> {
        let id = id_string(v)?;
        index.get(&id).copied().ok_or(Error::UnknownNode(id))
    };
    let weight = |v: &Value| -> Result<f64> {
        v.as_f64()
            .ok_or_else(|| Error::Parse(format!("weight must be a number, got {v}")))
    };

    let mut table = PairTable {
        labels: labels.clone(),
        entries: HashMap::new(),
    };
    if kind != MetricKind::Explicit {
        if !file.distances.is_empty() {
            return Err(Error::MetricDeclaration(format!(
                "`distances` given for a {} metric",
                kind.as_str()
            )));
        }
        if file.fill.is_some() {
            return Err(Error::MetricDeclaration(format!(
                "`fill` given for a {} metric",
                kind.as_str()
            )));
        }
    }
    for row in &file.distances {
        if row.len() != 3 {
            return Err(Error::Parse(format!("distance row {row:?} is not [u, v, w]")));
        }
        table.insert(resolve(&row[0])?, resolve(&row[1])?, weight(&row[2])?)?;
    }
    let mut edges = Vec::new();
    if let Some(rows) = &file.edges {
        for row in rows {
            let (u, v) = match row.len() {
                2 | 3 => (resolve(&row[0])?, resolve(&row[1])?),
                _ => return Err(Error::Parse(format!("edge row {row:?} is not [u, v, w?]"))),
            };
            if row.len() == 3 && !row[2].is_null() {
                if kind != MetricKind::Explicit {
                    return Err(Error::MetricDeclaration(format!(
                        "edge weights given for a {} metric",
                        kind.as_str()
                    )));
                }
                table.insert(u, v, weight(&row[2])?)?;
            }
            edges.push((u, v));
        }
    }

    let h = match kind {
        MetricKind::Explicit => {
            let m = table.into_matrix(file.fill)?;
            GraphInstance::build(labels, attrs, Metric::Explicit(m), &[])?
        }
        MetricKind::Euclidean => GraphInstance::build(labels, attrs, Metric::Euclidean, &[])?,
        MetricKind::Jaccard => GraphInstance::build(labels, attrs, Metric::Jaccard, &[])?,
    };
    if file.edges.is_none() {
        let n = h.n();
        for u in 0..n {
            for v in u + 1..n {
                if file.edge_threshold.is_none_or(|t| h.dist(u, v) <= t) {
                    edges.push((u, v));
                }
            }
        }
    }
    h.with_edges(&edges)
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    u: String,
    v: String,
    weight: f64,
}

pub fn parse_csv_edges(text: &str, fill: f64) -> Result<GraphInstance> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["u", "v", "weight"] {
        return Err(Error::Parse(format!(
            "expected header `u,v,weight`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rows = Vec::new();
    for rec in reader.deserialize::<CsvRow>() {
        let row = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let mut id = |label: &str| -> usize {
            *index.entry(label.to_string()).or_insert_with(|| {
                labels.push(label.to_string());
                labels.len() - 1
            })
        };
        let (u, v) = (id(&row.u), id(&row.v));
        rows.push((u, v, row.weight));
    }
    let mut table = PairTable {
        labels: labels.clone(),
        entries: HashMap::new(),
    };
    let mut edges = Vec::with_capacity(rows.len());
    for (u, v, w) in rows {
        table.insert(u, v, w)?;
        edges.push((u, v));
    }
    let n = labels.len();
    let m = table.into_matrix(Some(fill))?;
    GraphInstance::build(labels, vec![NodeAttrs::default(); n], Metric::Explicit(m), &edges)
}

/// Serialises an instance so that [`parse_json`] rebuilds it exactly.
///
/// Explicit matrices are written as a full pair list, never with `fill`, and
/// the relation `E` is always written out.
pub fn to_json(h: &GraphInstance) -> String {
    let n = h.n();
    let nodes = (0..n)
        .map(|u| {
            let a = h.attrs(u);
            NodeRecord {
                id: Value::String(h.label(u).to_string()),
                color: a.color.map(|c| match c {
                    Color::Blue => "B".to_string(),
                    Color::Purple => "P".to_string(),
                }),
                expert: a.expert,
                embedding: a.embedding.clone(),
                attrs: a.attrs.as_ref().map(|s| s.iter().cloned().collect()),
            }
        })
        .collect();
    let label = |u: usize| Value::String(h.label(u).to_string());
    let edges = h.edges().map(|(u, v)| vec![label(u), label(v)]).collect();
    let distances = match h.metric_kind() {
        MetricKind::Explicit => (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .map(|(u, v)| vec![label(u), label(v), Value::from(h.dist(u, v))])
            .collect(),
        _ => Vec::new(),
    };
    let file = InstanceFile {
        metric: Some(h.metric_kind().as_str().to_string()),
        fill: None,
        edge_threshold: None,
        nodes,
        edges: Some(edges),
        distances,
    };
    serde_json::to_string_pretty(&file).expect("instance serialises")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The carpool figure: six friends, listed pairs carry their distance and
    /// everything else is 67 apart.
    const CARPOOL: &str = r#"{
        "metric": "explicit",
        "fill": 67,
        "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}, {"id": "d"}, {"id": "e"}, {"id": "f"}],
        "edges": [["a", "b", 2], ["b", "c", 3], ["c", "a", 4], ["d", "e", 2], ["e", "f", 3], ["f", "d", 4], ["c", "d", 10]]
    }"#;

    #[test]
    fn fill_covers_unlisted_pairs() {
        let h = parse_json(CARPOOL).unwrap();
        assert_eq!(h.n(), 6);
        assert_eq!(h.dist(0, 1), 2.0);
        assert_eq!(h.dist(2, 3), 10.0);
        for (u, v) in [(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5)] {
            assert_eq!(h.dist(u, v), 67.0, "pair ({u},{v})");
        }
        assert_eq!(h.edge_count(), 7);
    }

    #[test]
    fn single_node() {
        let h = parse_json(r#"{"metric": "explicit", "nodes": [{"id": "solo"}]}"#).unwrap();
        assert_eq!(h.n(), 1);
        assert_eq!(h.dist(0, 0), 0.0);
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn euclidean_line() {
        let h = parse_json(
            r#"{"metric": "euclidean", "nodes": [
                {"id": 0, "embedding": [0]}, {"id": 1, "embedding": [3]}, {"id": 2, "embedding": [4]}
            ]}"#,
        )
        .unwrap();
        assert_eq!(h.dist(0, 1), 3.0);
        assert_eq!(h.dist(1, 2), 1.0);
        assert_eq!(h.dist(0, 2), 4.0);
        // no `edges` and no threshold: every pair is related
        assert_eq!(h.edge_count(), 3);
    }

    #[test]
    fn edge_threshold_builds_relation() {
        let h = parse_json(
            r#"{"metric": "euclidean", "edge_threshold": 3.5, "nodes": [
                {"id": "x", "embedding": [0]}, {"id": "y", "embedding": [3]}, {"id": "z", "embedding": [4]}
            ]}"#,
        )
        .unwrap();
        assert!(h.has_edge(0, 1));
        assert!(h.has_edge(1, 2));
        assert!(!h.has_edge(0, 2));
    }

    #[test]
    fn load_errors() {
        let missing_fill = r#"{"metric": "explicit", "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
            "distances": [["a", "b", 1]]}"#;
        assert!(matches!(parse_json(missing_fill), Err(Error::MissingDistance(..))));

        let asym = r#"{"metric": "explicit", "fill": 1, "nodes": [{"id": "a"}, {"id": "b"}],
            "distances": [["a", "b", 1], ["b", "a", 2]]}"#;
        assert!(matches!(parse_json(asym), Err(Error::AsymmetricDistance(..))));

        let negative = r#"{"metric": "explicit", "fill": 1, "nodes": [{"id": "a"}, {"id": "b"}],
            "distances": [["a", "b", -3]]}"#;
        assert!(matches!(parse_json(negative), Err(Error::InvalidDistance { .. })));

        let dup = r#"{"metric": "explicit", "fill": 1, "nodes": [{"id": "a"}, {"id": "a"}]}"#;
        assert!(matches!(parse_json(dup), Err(Error::DuplicateNode(_))));

        let absent = r#"{"nodes": [{"id": "a"}]}"#;
        assert!(matches!(parse_json(absent), Err(Error::MetricDeclaration(_))));

        let mixed = r#"{"metric": "euclidean", "nodes": [{"id": "a", "embedding": [0]}, {"id": "b", "embedding": [1]}],
            "distances": [["a", "b", 1]]}"#;
        assert!(matches!(parse_json(mixed), Err(Error::MetricDeclaration(_))));

        let no_attrs = r#"{"metric": "jaccard", "nodes": [{"id": "a", "attrs": ["t"]}, {"id": "b"}]}"#;
        assert!(matches!(parse_json(no_attrs), Err(Error::MetricDeclaration(_))));

        assert!(matches!(parse_json("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn csv_edges_use_fill() {
        let h = parse_csv_edges("u,v,weight\na,b,2\nb,c,3\n", 67.0).unwrap();
        assert_eq!(h.labels(), &["a", "b", "c"]);
        assert_eq!(h.dist(0, 2), 67.0);
        assert_eq!(h.dist(1, 2), 3.0);
        assert_eq!(h.edge_count(), 2);
        assert!(parse_csv_edges("a,b,c\n1,2,3\n", 1.0).is_err());
    }

    #[test]
    fn json_round_trip_on_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("carpool.json");
        let h = parse_json(CARPOOL).unwrap();
        save_instance(&h, &path).unwrap();
        let back = load_instance(&path, InstanceFormat::Json).unwrap();
        assert_eq!(h, back);
    }
}
