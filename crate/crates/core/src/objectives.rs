//! Objective functions, lexicographic comparison and slack checks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{Clustering, PairStructure};
use crate::error::{Error, Result};
use crate::graph::{Color, GraphInstance};
use crate::makeshifts::{self, MakeshiftOptions};

/// Relative tolerance used for equality of objective values.
pub const REL_TOL: f64 = 1e-9;

/// Approximation factor of single-swap local search for k-median.
pub const KMEDIAN_SWAP_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Minimize => Direction::Maximize,
            Direction::Maximize => Direction::Minimize,
        }
    }

    /// True when `a` is strictly better than `b`, beyond tolerance.
    pub fn better(self, a: f64, b: f64) -> bool {
        if approx_eq(a, b) {
            return false;
        }
        match self {
            Direction::Minimize => a < b,
            Direction::Maximize => a > b,
        }
    }
}

/// Equality up to [`REL_TOL`]; infinities equal only themselves.
pub fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveKind {
    #[serde(rename = "kc")]
    KCenter,
    #[serde(rename = "km")]
    KMedian,
    #[serde(rename = "rs")]
    ResourceSharing,
    #[serde(rename = "f")]
    Fairness,
    #[serde(rename = "tf")]
    TeamFormation,
}

impl ObjectiveKind {
    pub fn natural_direction(self) -> Direction {
        match self {
            ObjectiveKind::ResourceSharing | ObjectiveKind::Fairness => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            ObjectiveKind::KCenter => "kc",
            ObjectiveKind::KMedian => "km",
            ObjectiveKind::ResourceSharing => "rs",
            ObjectiveKind::Fairness => "f",
            ObjectiveKind::TeamFormation => "tf",
        }
    }

    /// Objectives whose makeshift yields exactly `k` blocks with centers.
    pub fn consolidates(self) -> bool {
        matches!(
            self,
            ObjectiveKind::KCenter | ObjectiveKind::KMedian | ObjectiveKind::TeamFormation
        )
    }
}

/// One entry of the ordered objective list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub direction: Direction,
    /// Required co-clustered neighbours for resource sharing.
    pub gamma: usize,
    /// Partners per Blue node for fairness.
    pub alpha: usize,
    /// Blue nodes per Purple node for fairness.
    pub beta: usize,
    /// Expert set for team formation; the instance's expert flags when absent.
    pub experts: Option<Vec<usize>>,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind) -> Self {
        ObjectiveSpec {
            kind,
            direction: kind.natural_direction(),
            gamma: 1,
            alpha: 1,
            beta: 1,
            experts: None,
        }
    }

    pub fn kcenter() -> Self {
        Self::new(ObjectiveKind::KCenter)
    }

    pub fn kmedian() -> Self {
        Self::new(ObjectiveKind::KMedian)
    }

    pub fn resource_sharing() -> Self {
        Self::new(ObjectiveKind::ResourceSharing)
    }

    pub fn fairness() -> Self {
        Self::new(ObjectiveKind::Fairness)
    }

    pub fn team_formation() -> Self {
        Self::new(ObjectiveKind::TeamFormation)
    }

    /// The same objective optimised in the opposite direction.
    pub fn negated(&self) -> Self {
        ObjectiveSpec {
            direction: self.direction.reversed(),
            ..self.clone()
        }
    }

    pub fn expert_set(&self, h: &GraphInstance) -> Vec<usize> {
        match &self.experts {
            Some(x) => {
                let mut x = x.clone();
                x.sort_unstable();
                x.dedup();
                x
            }
            None => h.experts(),
        }
    }

    /// Parses a comma separated list such as `rs,kc` or `f:2:1,kc`.
    pub fn parse_list(s: &str) -> Result<Vec<ObjectiveSpec>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for ObjectiveSpec {
    type Err = Error;

    /// `kc`, `km`, `rs`, `rs:<gamma>`, `f`, `f:<alpha>:<beta>`, `tf`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let kind = match head.as_str() {
            "kc" => ObjectiveKind::KCenter,
            "km" => ObjectiveKind::KMedian,
            "rs" => ObjectiveKind::ResourceSharing,
            "f" => ObjectiveKind::Fairness,
            "tf" => ObjectiveKind::TeamFormation,
            other => return Err(Error::Config(format!("unknown objective `{other}`"))),
        };
        let params: Vec<usize> = parts
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad objective parameter `{p}` in `{s}`")))
            })
            .collect::<Result<_>>()?;
        let mut spec = ObjectiveSpec::new(kind);
        match (kind, params.as_slice()) {
            (_, []) => {}
            (ObjectiveKind::ResourceSharing, [g]) if *g >= 1 => spec.gamma = *g,
            (ObjectiveKind::Fairness, [a, b]) if *a >= 1 && *b >= 1 => {
                spec.alpha = *a;
                spec.beta = *b;
            }
            _ => return Err(Error::Config(format!("bad parameters for objective `{s}`"))),
        }
        Ok(spec)
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.code())?;
        match self.kind {
            ObjectiveKind::ResourceSharing if self.gamma != 1 => write!(f, ":{}", self.gamma)?,
            ObjectiveKind::Fairness if (self.alpha, self.beta) != (1, 1) => {
                write!(f, ":{}:{}", self.alpha, self.beta)?
            }
            _ => {}
        }
        if self.direction != self.kind.natural_direction() {
            f.write_str("(reversed)")?;
        }
        Ok(())
    }
}

/// Serialises `f64` with non-finite values as strings (`"inf"`), which JSON
/// numbers cannot carry.
pub mod serde_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Repr::deserialize(d)?.into_f64()
    }

    impl Repr {
        fn into_f64<E: serde::de::Error>(self) -> Result<f64, E> {
            match self {
                Repr::Num(x) => Ok(x),
                Repr::Str(s) => s
                    .parse::<f64>()
                    .map_err(|_| E::custom(format!("not a number: {s}"))),
            }
        }
    }

    /// The same encoding for a sequence of values.
    pub mod seq {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        struct One(f64);

        impl Serialize for One {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                super::serialize(&self.0, s)
            }
        }

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for &x in v {
                seq.serialize_element(&One(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<super::Repr>::deserialize(d)?
                .into_iter()
                .map(super::Repr::into_f64)
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    /// `+inf` only for team formation with an expert-free block.
    #[serde(with = "serde_inf")]
    pub value: f64,
    pub direction: Direction,
}

impl ObjectiveValue {
    pub fn minimize(value: f64) -> Self {
        ObjectiveValue {
            value,
            direction: Direction::Minimize,
        }
    }

    pub fn maximize(value: f64) -> Self {
        ObjectiveValue {
            value,
            direction: Direction::Maximize,
        }
    }
}

/// Per-objective slack `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackVector(pub Vec<f64>);

impl SlackVector {
    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad slack value `{t}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(SlackVector)
    }

    /// Length and sign checks always apply; the infeasible ranges (`δ > 1`
    /// when maximising, `δ < 2` for k-center, `δ < 1` for other minimised
    /// objectives) are rejected unless `allow_infeasible`.
    pub fn validate(&self, objectives: &[ObjectiveSpec], allow_infeasible: bool) -> Result<()> {
        if self.0.len() != objectives.len() {
            return Err(Error::Config(format!(
                "{} slack values for {} objectives",
                self.0.len(),
                objectives.len()
            )));
        }
        for (d, o) in self.0.iter().zip(objectives) {
            if !d.is_finite() || *d < 0.0 {
                return Err(Error::Config(format!("slack {d} for {o} must be >= 0")));
            }
            if allow_infeasible {
                continue;
            }
            let problem = match (o.direction, o.kind) {
                (Direction::Maximize, _) if *d > 1.0 => Some("exceeds 1 for a maximised objective"),
                (Direction::Minimize, ObjectiveKind::KCenter) if *d < 2.0 => {
                    Some("is below 2 for k-center")
                }
                (Direction::Minimize, _) if *d < 1.0 => Some("is below 1 for a minimised objective"),
                _ => None,
            };
            if let Some(p) = problem {
                return Err(Error::Config(format!(
                    "slack {d} for {o} {p}; pass --allow-infeasible-slack to run anyway"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Exact,
    LowerBound,
    UpperBound,
}

/// Stand-in for the unknown optimum when checking slack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalEstimate {
    pub kind: EstimateKind,
    #[serde(with = "serde_inf")]
    pub value: f64,
}

impl OptimalEstimate {
    pub fn exact(value: f64) -> Self {
        OptimalEstimate { kind: EstimateKind::Exact, value }
    }

    pub fn lower_bound(value: f64) -> Self {
        OptimalEstimate { kind: EstimateKind::LowerBound, value }
    }

    pub fn upper_bound(value: f64) -> Self {
        OptimalEstimate { kind: EstimateKind::UpperBound, value }
    }
}

fn require_centers(c: &Clustering) -> Result<&[usize]> {
    c.centers
        .as_deref()
        .ok_or_else(|| Error::InvalidClustering("k-center/k-median need block centers".into()))
}

/// Largest distance from a node to the center of its own block.
pub fn eval_kcenter(h: &GraphInstance, c: &Clustering) -> Result<ObjectiveValue> {
    let centers = require_centers(c)?;
    let value = (0..h.n())
        .map(|u| h.dist(u, centers[c.assignment[u]]))
        .fold(0.0, f64::max);
    Ok(ObjectiveValue::minimize(value))
}

/// Sum of distances from nodes to the center of their own block.
pub fn eval_kmedian(h: &GraphInstance, c: &Clustering) -> Result<ObjectiveValue> {
    let centers = require_centers(c)?;
    let value = (0..h.n())
        .map(|u| h.dist(u, centers[c.assignment[u]]))
        .sum();
    Ok(ObjectiveValue::minimize(value))
}

pub fn eval_resource_sharing(h: &GraphInstance, c: &Clustering) -> ObjectiveValue {
    eval_resource_sharing_gamma(h, c, 1)
}

/// Fraction of nodes with at least `gamma` `E`-neighbours in their block.
pub fn eval_resource_sharing_gamma(h: &GraphInstance, c: &Clustering, gamma: usize) -> ObjectiveValue {
    let n = h.n();
    if n == 0 {
        return ObjectiveValue::maximize(0.0);
    }
    let covered = (0..n)
        .filter(|&u| {
            let b = c.assignment[u];
            h.adj(u).iter().filter(|&&v| c.assignment[v] == b).count() >= gamma
        })
        .count();
    ObjectiveValue::maximize(covered as f64 / n as f64)
}

/// Fraction of Blue nodes whose matched Purple partners all share their block.
pub fn eval_fairness(h: &GraphInstance, c: &Clustering, matched: &PairStructure) -> Result<ObjectiveValue> {
    let blues = h.nodes_with_color(Color::Blue);
    if blues.is_empty() {
        return Err(Error::Degenerate("fairness needs at least one Blue node".into()));
    }
    let n = h.n();
    let mut partners = vec![0usize; n];
    let mut together = vec![0usize; n];
    for &(u, v) in &matched.pairs {
        let (b, p) = match (h.color(u), h.color(v)) {
            (Some(Color::Blue), Some(Color::Purple)) => (u, v),
            (Some(Color::Purple), Some(Color::Blue)) => (v, u),
            _ => continue,
        };
        partners[b] += 1;
        if c.assignment[b] == c.assignment[p] {
            together[b] += 1;
        }
    }
    let ok = blues
        .iter()
        .filter(|&&b| partners[b] > 0 && together[b] == partners[b])
        .count();
    Ok(ObjectiveValue::maximize(ok as f64 / blues.len() as f64))
}

/// Per-block expert counts.
pub fn expert_counts(c: &Clustering, experts: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; c.num_blocks];
    for &x in experts {
        counts[c.assignment[x]] += 1;
    }
    counts
}

/// Largest block expert count over the smallest; `+inf` when a block has none.
pub fn eval_team_formation(h: &GraphInstance, c: &Clustering, experts: &[usize]) -> Result<ObjectiveValue> {
    if experts.is_empty() {
        return Err(Error::Degenerate("team formation needs a non-empty expert set".into()));
    }
    if let Some(&x) = experts.iter().find(|&&x| x >= h.n()) {
        return Err(Error::NodeOutOfRange { node: x, n: h.n() });
    }
    let counts = expert_counts(c, experts);
    let max = *counts.iter().max().unwrap_or(&0);
    let min = *counts.iter().min().unwrap_or(&0);
    let value = if min == 0 {
        f64::INFINITY
    } else {
        max as f64 / min as f64
    };
    Ok(ObjectiveValue::minimize(value))
}

/// Evaluates `o` on `c`. Fairness needs the pair structure its makeshift built.
pub fn evaluate(
    h: &GraphInstance,
    c: &Clustering,
    o: &ObjectiveSpec,
    pairs: Option<&PairStructure>,
) -> Result<ObjectiveValue> {
    let mut v = match o.kind {
        ObjectiveKind::KCenter => eval_kcenter(h, c)?,
        ObjectiveKind::KMedian => eval_kmedian(h, c)?,
        ObjectiveKind::ResourceSharing => eval_resource_sharing_gamma(h, c, o.gamma),
        ObjectiveKind::Fairness => {
            let pairs = pairs.ok_or_else(|| {
                Error::Config("fairness evaluation needs the matched pair structure".into())
            })?;
            eval_fairness(h, c, pairs)?
        }
        ObjectiveKind::TeamFormation => eval_team_formation(h, c, &o.expert_set(h))?,
    };
    v.direction = o.direction;
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LexOutcome {
    FirstSuperior,
    SecondSuperior,
    Equal,
}

/// First-difference comparison of two value tuples under the given directions.
pub fn lex_compare_values(a: &[f64], b: &[f64], directions: &[Direction]) -> LexOutcome {
    for ((&x, &y), &d) in a.iter().zip(b).zip(directions) {
        if d.better(x, y) {
            return LexOutcome::FirstSuperior;
        }
        if d.better(y, x) {
            return LexOutcome::SecondSuperior;
        }
    }
    LexOutcome::Equal
}

/// Lexicographic comparison of two clusterings. `pairs[i]` supplies the
/// pair structure for a fairness objective at position `i`.
pub fn lex_compare(
    h: &GraphInstance,
    c1: &Clustering,
    c2: &Clustering,
    objectives: &[ObjectiveSpec],
    pairs: &[Option<&PairStructure>],
) -> Result<LexOutcome> {
    let mut a = Vec::with_capacity(objectives.len());
    let mut b = Vec::with_capacity(objectives.len());
    for (i, o) in objectives.iter().enumerate() {
        let p = pairs.get(i).copied().flatten();
        a.push(evaluate(h, c1, o, p)?.value);
        b.push(evaluate(h, c2, o, p)?.value);
    }
    let dirs: Vec<Direction> = objectives.iter().map(|o| o.direction).collect();
    Ok(lex_compare_values(&a, &b, &dirs))
}

/// Whether `value` falls outside `delta` times the estimated optimum.
pub fn slack_violated_value(
    value: f64,
    direction: Direction,
    delta: f64,
    est: &OptimalEstimate,
) -> Result<bool> {
    match (direction, est.kind) {
        (Direction::Maximize, EstimateKind::LowerBound)
        | (Direction::Minimize, EstimateKind::UpperBound) => {
            return Err(Error::Config(format!(
                "{:?} estimate cannot bound a {:?} objective",
                est.kind, direction
            )))
        }
        _ => {}
    }
    let target = delta * est.value;
    let tol = REL_TOL * target.abs();
    Ok(match direction {
        Direction::Maximize => value < target - tol,
        Direction::Minimize => value > target + tol,
    })
}

pub fn slack_violated(
    h: &GraphInstance,
    c: &Clustering,
    o: &ObjectiveSpec,
    pairs: Option<&PairStructure>,
    delta: f64,
    est: &OptimalEstimate,
) -> Result<bool> {
    let v = evaluate(h, c, o, pairs)?;
    slack_violated_value(v.value, o.direction, delta, est)
}

/// What the estimator may use besides the instance.
#[derive(Clone, Debug)]
pub struct EstimateContext<'a> {
    pub k: usize,
    pub options: &'a MakeshiftOptions,
    /// Value reached by the objective's own makeshift, for objectives whose
    /// makeshift is optimal.
    pub makeshift_value: Option<f64>,
}

pub fn estimate_optimal(
    h: &GraphInstance,
    o: &ObjectiveSpec,
    ctx: &EstimateContext<'_>,
) -> Result<OptimalEstimate> {
    match o.kind {
        ObjectiveKind::ResourceSharing | ObjectiveKind::Fairness => ctx
            .makeshift_value
            .map(OptimalEstimate::exact)
            .ok_or_else(|| Error::Config(format!("no makeshift value recorded for {o}"))),
        ObjectiveKind::KCenter => {
            let all: Vec<usize> = (0..h.n()).collect();
            let (_, radius) = makeshifts::gonzalez(h, &all, ctx.k, ctx.options)?;
            Ok(OptimalEstimate::lower_bound(radius / 2.0))
        }
        ObjectiveKind::KMedian => {
            let all: Vec<usize> = (0..h.n()).collect();
            let (_, cost) = makeshifts::swap_kmedian(h, &all, ctx.k, ctx.options)?;
            Ok(OptimalEstimate::lower_bound(cost / KMEDIAN_SWAP_FACTOR))
        }
        ObjectiveKind::TeamFormation => {
            let x = o.expert_set(h).len();
            if ctx.k == 0 {
                return Err(Error::Config("k must be positive".into()));
            }
            let floor = x / ctx.k;
            if floor == 0 {
                return Err(Error::Degenerate(format!(
                    "{x} experts cannot give every one of {} blocks an expert",
                    ctx.k
                )));
            }
            let ceil = x.div_ceil(ctx.k);
            Ok(OptimalEstimate::lower_bound(ceil as f64 / floor as f64))
        }
    }
}
