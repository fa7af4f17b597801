//! Partitions of the node set and the auxiliary pair structures that
//! makeshifts leave behind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphInstance;

/// A partition of `V` into `num_blocks` blocks.
///
/// `centers[b]` is the center of block `b` when present. `atoms` lists groups
/// of nodes that must remain in one block through later stages; nodes not in
/// any listed atom are free singletons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub assignment: Vec<usize>,
    pub num_blocks: usize,
    pub centers: Option<Vec<usize>>,
    pub atoms: Vec<Vec<usize>>,
}

impl Clustering {
    /// Every node in its own block.
    pub fn singletons(n: usize) -> Self {
        Clustering {
            assignment: (0..n).collect(),
            num_blocks: n,
            centers: None,
            atoms: Vec::new(),
        }
    }

    /// Builds a clustering from explicit blocks; block order is kept.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &u in block {
                if u >= n {
                    return Err(Error::NodeOutOfRange { node: u, n });
                }
                if assignment[u] != usize::MAX {
                    return Err(Error::InvalidClustering(format!("node {u} in two blocks")));
                }
                assignment[u] = b;
            }
        }
        if let Some(u) = assignment.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidClustering(format!("node {u} unassigned")));
        }
        Ok(Clustering {
            assignment,
            num_blocks: blocks.len(),
            centers: None,
            atoms: Vec::new(),
        })
    }

    pub fn with_centers(mut self, centers: Vec<usize>) -> Self {
        self.centers = Some(centers);
        self
    }

    pub fn with_atoms(mut self, atoms: Vec<Vec<usize>>) -> Self {
        self.atoms = normalize_atoms(atoms);
        self
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn block_of(&self, u: usize) -> usize {
        self.assignment[u]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks];
        for (u, &b) in self.assignment.iter().enumerate() {
            blocks[b].push(u);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_blocks];
        for &b in &self.assignment {
            sizes[b] += 1;
        }
        sizes
    }

    pub fn center_of(&self, u: usize) -> Option<usize> {
        self.centers.as_ref().map(|c| c[self.assignment[u]])
    }

    /// All co-clustering units: the listed atoms plus a singleton for every
    /// node outside them, ordered by smallest member.
    pub fn atom_units(&self) -> Vec<Vec<usize>> {
        let mut covered = vec![false; self.n()];
        let mut units: Vec<Vec<usize>> = self.atoms.clone();
        for atom in &self.atoms {
            for &u in atom {
                covered[u] = true;
            }
        }
        units.extend((0..self.n()).filter(|&u| !covered[u]).map(|u| vec![u]));
        units.sort_by_key(|a| a[0]);
        units
    }

    /// Every block is exactly one atom unit.
    pub fn is_fragmented(&self) -> bool {
        let units = self.atom_units();
        units.len() == self.num_blocks
            && units
                .iter()
                .all(|u| u.iter().all(|&v| self.assignment[v] == self.assignment[u[0]]))
    }

    /// Has exactly `k` blocks and a center per block.
    pub fn is_consolidated(&self, k: usize) -> bool {
        self.num_blocks == k && self.centers.as_ref().is_some_and(|c| c.len() == k)
    }

    /// Checks the partition invariants; `k` additionally requires exactly `k`
    /// non-empty blocks.
    pub fn validate(&self, k: Option<usize>) -> Result<()> {
        if self.assignment.iter().any(|&b| b >= self.num_blocks) {
            return Err(Error::InvalidClustering("block index out of range".into()));
        }
        if let Some(k) = k {
            if self.num_blocks != k {
                return Err(Error::InvalidClustering(format!(
                    "{} blocks, expected {k}",
                    self.num_blocks
                )));
            }
            if let Some(b) = self.block_sizes().iter().position(|&s| s == 0) {
                return Err(Error::InvalidClustering(format!("block {b} is empty")));
            }
        }
        if let Some(centers) = &self.centers {
            if centers.len() != self.num_blocks {
                return Err(Error::InvalidClustering("one center per block required".into()));
            }
            for (b, &c) in centers.iter().enumerate() {
                if c >= self.n() || self.assignment[c] != b {
                    return Err(Error::InvalidClustering(format!(
                        "center {c} is not in its block {b}"
                    )));
                }
            }
        }
        for atom in &self.atoms {
            let b = self.assignment[atom[0]];
            if atom.iter().any(|&u| self.assignment[u] != b) {
                return Err(Error::InvalidClustering(format!("atom {atom:?} is split")));
            }
        }
        Ok(())
    }

    /// Relabels blocks by smallest member and drops empty ones.
    pub fn canonicalized(&self) -> Clustering {
        let mut relabel = vec![usize::MAX; self.num_blocks];
        let mut next = 0;
        for &b in &self.assignment {
            if relabel[b] == usize::MAX {
                relabel[b] = next;
                next += 1;
            }
        }
        let centers = self.centers.as_ref().map(|cs| {
            let mut out = vec![0; next];
            for (b, &c) in cs.iter().enumerate() {
                if relabel[b] != usize::MAX {
                    out[relabel[b]] = c;
                }
            }
            out
        });
        Clustering {
            assignment: self.assignment.iter().map(|&b| relabel[b]).collect(),
            num_blocks: next,
            centers,
            atoms: self.atoms.clone(),
        }
    }
}

/// Sorts members, drops singletons, and orders atoms by smallest member.
pub(crate) fn normalize_atoms(atoms: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = atoms
        .into_iter()
        .filter(|a| a.len() > 1)
        .map(|mut a| {
            a.sort_unstable();
            a.dedup();
            a
        })
        .filter(|a| a.len() > 1)
        .collect();
    out.sort_by_key(|a| a[0]);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    EdgeCover,
    Matching,
    BMatching,
    GammaCover,
}

/// The auxiliary edge set `E′` built by a makeshift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStructure {
    /// `(u, v)` with `u < v`, sorted.
    pub pairs: Vec<(usize, usize)>,
    /// Largest pair distance.
    pub realized_radius: f64,
    pub kind: PairKind,
}

impl PairStructure {
    pub(crate) fn new(h: &GraphInstance, mut pairs: Vec<(usize, usize)>, kind: PairKind) -> Self {
        for p in &mut pairs {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let realized_radius = pairs
            .iter()
            .map(|&(u, v)| h.dist(u, v))
            .fold(0.0, f64::max);
        PairStructure {
            pairs,
            realized_radius,
            kind,
        }
    }

    pub fn degrees(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for &(u, v) in &self.pairs {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Connected components of `(V, pairs)`, each sorted, ordered by smallest member.
    pub fn components(&self, n: usize) -> Vec<Vec<usize>> {
        components(n, self.pairs.iter().copied())
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller id as root so component order is stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components over `0..n` for an edge list.
pub fn components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut sets = DisjointSets::new(n);
    for (u, v) in edges {
        sets.union(u, v);
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n {
        let r = sets.find(u);
        by_root[r].push(u);
    }
    let mut out: Vec<Vec<usize>> = by_root.into_iter().filter(|c| !c.is_empty()).collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Components of the union of several groupings (each group links its members).
pub fn merge_groups(n: usize, groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    components(
        n,
        groups
            .iter()
            .flat_map(|g| g.windows(2).map(|w| (w[0], w[1]))),
    )
}
