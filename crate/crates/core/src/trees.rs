//! Spanning trees: enumeration, greedy σ-trees, tree paths and the
//! Boltzmann distribution over trees.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, IntChain};

pub const DEFAULT_TREE_CAP: usize = 1_000_000;

/// A spanning tree, stored as its sorted edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpanningTree {
    edges: Vec<usize>,
}

impl SpanningTree {
    /// Wraps an edge set after checking it is a spanning tree of `g`.
    pub fn new(g: &Graph, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        if edges.len() + 1 != g.vertex_count()
            || edges.iter().any(|&a| a >= g.edge_count() || g.is_loop(a))
            || !g.is_spanning_connected(&edges)
        {
            return Err(Error::InvalidArgument(format!(
                "{edges:?} is not a spanning tree"
            )));
        }
        Ok(SpanningTree { edges })
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains(&self, alpha: usize) -> bool {
        self.edges.binary_search(&alpha).is_ok()
    }

    /// The chain `Q_i^{T,j}`; see [`path_chain`].
    pub fn path_chain(&self, g: &Graph, i: usize, j: usize) -> IntChain {
        path_chain(g, &self.edges, i, j).expect("spanning tree connects all vertices")
    }
}

/// A total order of the edges, listed lowest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TotalEdgeOrder(Vec<usize>);

impl TotalEdgeOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &a in &order {
            if a >= order.len() || std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidArgument(format!(
                    "{order:?} is not a permutation"
                )));
            }
        }
        Ok(TotalEdgeOrder(order))
    }

    pub fn identity(edge_count: usize) -> Self {
        TotalEdgeOrder((0..edge_count).collect())
    }

    /// Order induced by barrier values; equal values are broken by index.
    pub fn from_values(w: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..w.len()).collect();
        order.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
        TotalEdgeOrder(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Position of each edge in the order (0 = lowest).
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![0; self.0.len()];
        for (pos, &a) in self.0.iter().enumerate() {
            r[a] = pos;
        }
        r
    }
}

/// Lists every spanning tree in lexicographic order of sorted edge sets.
///
/// Works by include/exclude recursion over the edges (deletion–contraction),
/// pruning branches that can no longer span. Loop edges are never included.
pub fn enumerate_spanning_trees(g: &Graph, cap: usize) -> Result<Vec<SpanningTree>> {
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(g.vertex_count());
    let labels: Vec<usize> = (0..g.vertex_count()).collect();
    enumerate_rec(g, 0, &mut chosen, labels, &mut out, cap)?;
    Ok(out)
}

fn enumerate_rec(
    g: &Graph,
    idx: usize,
    chosen: &mut Vec<usize>,
    labels: Vec<usize>,
    out: &mut Vec<SpanningTree>,
    cap: usize,
) -> Result<()> {
    let needed = g.vertex_count() - 1 - chosen.len();
    if needed == 0 {
        if out.len() >= cap {
            return Err(Error::CountLimitExceeded { limit: cap });
        }
        out.push(SpanningTree {
            edges: chosen.clone(),
        });
        return Ok(());
    }
    if g.edge_count() - idx < needed {
        return Ok(());
    }
    let (a, b) = g.edge(idx);
    if labels[a] != labels[b] {
        let (keep, drop) = (labels[a].min(labels[b]), labels[a].max(labels[b]));
        let merged = labels
            .iter()
            .map(|&l| if l == drop { keep } else { l })
            .collect();
        chosen.push(idx);
        enumerate_rec(g, idx + 1, chosen, merged, out, cap)?;
        chosen.pop();
    }
    let mut rest: Vec<usize> = chosen.clone();
    rest.extend(idx + 1..g.edge_count());
    if g.is_spanning_connected(&rest) {
        enumerate_rec(g, idx + 1, chosen, labels, out, cap)?;
    }
    Ok(())
}

/// The σ-spanning tree: walk the order from the top, discarding each edge
/// whose removal keeps the remaining graph connected.
pub fn sigma_tree(g: &Graph, order: &TotalEdgeOrder) -> SpanningTree {
    let mut kept = vec![true; g.edge_count()];
    for &alpha in order.as_slice().iter().rev() {
        kept[alpha] = false;
        let remaining: Vec<usize> = (0..g.edge_count()).filter(|&b| kept[b]).collect();
        if !g.is_spanning_connected(&remaining) {
            kept[alpha] = true;
        }
    }
    SpanningTree {
        edges: (0..g.edge_count()).filter(|&b| kept[b]).collect(),
    }
}

/// `w(T, W)`: total barrier of the edges *not* in the tree.
pub fn tree_weight(tree: &SpanningTree, w: &[f64]) -> f64 {
    w.iter()
        .enumerate()
        .filter(|(a, _)| !tree.contains(*a))
        .map(|(_, x)| x)
        .sum()
}

/// Signed path chain from `i` to `j` inside the edge set `edges`.
///
/// An edge enters with `+1` when the path traverses it from `d0` to `d1`, so
/// the boundary of the result is `δ_i − δ_j`. Returns `None` when `i` and `j`
/// are not joined by `edges`; `edges` must be a forest.
pub fn path_chain(g: &Graph, edges: &[usize], i: usize, j: usize) -> Option<IntChain> {
    let mut chain = IntChain::zeros(g.edge_count());
    if i == j {
        return Some(chain);
    }
    let n = g.vertex_count();
    let mut adjacency = vec![Vec::new(); n];
    for &alpha in edges {
        let (a, b) = g.edge(alpha);
        if a != b {
            adjacency[a].push((b, alpha, 1i64));
            adjacency[b].push((a, alpha, -1i64));
        }
    }
    let mut via: Vec<Option<(usize, usize, i64)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[i] = true;
    let mut queue = VecDeque::from([i]);
    while let Some(v) = queue.pop_front() {
        if v == j {
            break;
        }
        for &(u, alpha, sign) in &adjacency[v] {
            if !seen[u] {
                seen[u] = true;
                via[u] = Some((v, alpha, sign));
                queue.push_back(u);
            }
        }
    }
    if !seen[j] {
        return None;
    }
    let mut v = j;
    while v != i {
        let (prev, alpha, sign) = via[v].expect("BFS parent");
        chain.0[alpha] += sign;
        v = prev;
    }
    Some(chain)
}

/// Boltzmann weights over trees, energy `Σ_{α∈T} W_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDistribution(pub Vec<f64>);

pub fn tree_boltzmann(trees: &[SpanningTree], w: &[f64], beta: f64) -> TreeDistribution {
    let energies: Vec<f64> = trees
        .iter()
        .map(|t| t.edges().iter().map(|&a| w[a]).sum::<f64>())
        .collect();
    TreeDistribution(crate::params::boltzmann_weights(&energies, beta))
}

/// A tree living inside the graph, possibly a single vertex with no edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tree {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Tree {
    pub fn single(v: usize) -> Self {
        Tree {
            vertices: vec![v],
            edges: Vec::new(),
        }
    }

    pub fn spanning(g: &Graph, t: &SpanningTree) -> Self {
        Tree {
            vertices: (0..g.vertex_count()).collect(),
            edges: t.edges().to_vec(),
        }
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn path_chain(&self, g: &Graph, i: usize, j: usize) -> Option<IntChain> {
        if !self.contains_vertex(i) || !self.contains_vertex(j) {
            return None;
        }
        path_chain(g, &self.edges, i, j)
    }
}

/// A spanning forest, stored with its connected components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forest {
    pub edges: Vec<usize>,
    pub components: Vec<Tree>,
    component_of: Vec<usize>,
}

impl Forest {
    pub fn new(g: &Graph, mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        let labels = g.component_labels(&edges);
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut components = vec![
            Tree {
                vertices: Vec::new(),
                edges: Vec::new(),
            };
            count
        ];
        for (v, &l) in labels.iter().enumerate() {
            components[l].vertices.push(v);
        }
        for &alpha in &edges {
            components[labels[g.edge(alpha).0]].edges.push(alpha);
        }
        Forest {
            edges,
            components,
            component_of: labels,
        }
    }

    pub fn component_of(&self, v: usize) -> &Tree {
        &self.components[self.component_of[v]]
    }

    pub fn same_component(&self, vertices: &[usize]) -> bool {
        vertices
            .windows(2)
            .all(|p| self.component_of[p[0]] == self.component_of[p[1]])
    }
}
