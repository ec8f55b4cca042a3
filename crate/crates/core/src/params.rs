//! Parameter points, Boltzmann distributions, height functions and the
//! combinatorics of discriminant cells.

use itertools::Itertools;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, IntChain};
use crate::trees::{sigma_tree, Forest, SpanningTree, TotalEdgeOrder, Tree};

pub const DEFAULT_RESOLUTION_CAP: usize = 100_000;
pub const DEFAULT_CELL_CAP: usize = 1_000_000;
pub const DEFAULT_DELTA_E: f64 = 1e-6;
pub const DEFAULT_DELTA_W: f64 = 1e-6;

/// Well energies `E` per vertex and barrier energies `W` per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub e: Vec<f64>,
    pub w: Vec<f64>,
}

impl ParamPoint {
    pub fn new(g: &Graph, e: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        Error::check_len(g.vertex_count(), e.len())?;
        Error::check_len(g.edge_count(), w.len())?;
        Ok(ParamPoint { e, w })
    }

    pub fn zeros(g: &Graph) -> Self {
        ParamPoint {
            e: vec![0.0; g.vertex_count()],
            w: vec![0.0; g.edge_count()],
        }
    }

    pub fn check(&self, g: &Graph) -> Result<()> {
        Error::check_len(g.vertex_count(), self.e.len())?;
        Error::check_len(g.edge_count(), self.w.len())
    }
}

/// Normalized `e^{−β x}` over a finite list, shifted by the minimum.
pub fn boltzmann_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = energies.iter().map(|&x| (-beta * (x - min)).exp()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / z).collect()
}

pub fn boltzmann(e: &[f64], beta: f64) -> DVector<f64> {
    DVector::from_vec(boltzmann_weights(e, beta))
}

/// Time derivative of the Boltzmann distribution along `Ė`:
/// `ρ̇_i = β ρ_i (Σ_j ρ_j Ė_j − Ė_i)`.
pub fn boltzmann_derivative(e: &[f64], e_dot: &[f64], beta: f64) -> DVector<f64> {
    let rho = boltzmann(e, beta);
    let mean: f64 = rho.iter().zip(e_dot).map(|(r, d)| r * d).sum();
    DVector::from_iterator(
        e.len(),
        rho.iter().zip(e_dot).map(|(r, d)| beta * r * (mean - d)),
    )
}

/// Combinatorial degeneracy record `(h0, h1)`.
///
/// `h0[i] == 1` marks minima. `h1` ranks the barriers, with equal values for
/// tied edges, and is surjective onto `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeightFunction {
    pub h0: Vec<u8>,
    pub h1: Vec<usize>,
}

impl HeightFunction {
    pub fn new(h0: Vec<u8>, h1: Vec<usize>) -> Result<Self> {
        if h0.iter().any(|&x| x != 1 && x != 2) {
            return Err(Error::InvalidArgument("h0 values must be 1 or 2".into()));
        }
        let n = h1.iter().copied().max().unwrap_or(0);
        if (1..=n).any(|level| !h1.contains(&level)) || h1.contains(&0) {
            return Err(Error::InvalidArgument(
                "h1 must be surjective onto 1..=n".into(),
            ));
        }
        Ok(HeightFunction { h0, h1 })
    }

    /// Extended form for the region where `j` is the unique minimum.
    pub fn unique_minimum(g: &Graph, j: usize) -> Self {
        let mut h0 = vec![2; g.vertex_count()];
        h0[j] = 1;
        HeightFunction {
            h0,
            h1: vec![1; g.edge_count()],
        }
    }

    /// Extended form for the region of an injective barrier ranking.
    pub fn barrier_order(g: &Graph, order: &TotalEdgeOrder) -> Self {
        HeightFunction {
            h0: vec![2; g.vertex_count()],
            h1: order.ranks().into_iter().map(|r| r + 1).collect(),
        }
    }

    pub fn minima(&self) -> Vec<usize> {
        (0..self.h0.len()).filter(|&i| self.h0[i] == 1).collect()
    }

    /// Number of barrier levels `n`.
    pub fn levels(&self) -> usize {
        self.h1.iter().copied().max().unwrap_or(0)
    }

    pub fn is_barrier_injective(&self) -> bool {
        self.levels() == self.h1.len()
    }

    /// Cell dimension `m + n` with `m = 1 + #non-minima`.
    pub fn dimension(&self) -> usize {
        1 + self.h0.iter().filter(|&&x| x == 2).count() + self.levels()
    }

    /// Edges grouped by level, lowest level first.
    pub fn barrier_groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.levels()];
        for (alpha, &level) in self.h1.iter().enumerate() {
            groups[level - 1].push(alpha);
        }
        groups
    }
}

/// Classifies a parameter point with absolute tolerances.
///
/// Minima are the vertices within `delta_e` of the lowest well. Barriers are
/// grouped by chaining sorted values whose gaps are at most `delta_w`; a gap
/// strictly between `delta_w` and `2 delta_w`, or a group wider than
/// `2 delta_w`, has no consistent grouping.
pub fn height_function(p: &ParamPoint, delta_e: f64, delta_w: f64) -> Result<HeightFunction> {
    if !(delta_e > 0.0 && delta_w > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let min_e = p.e.iter().copied().fold(f64::INFINITY, f64::min);
    let h0 = p
        .e
        .iter()
        .map(|&x| if x <= min_e + delta_e { 1 } else { 2 })
        .collect();

    let mut order: Vec<usize> = (0..p.w.len()).collect();
    order.sort_by(|&a, &b| p.w[a].total_cmp(&p.w[b]));
    let mut h1 = vec![0; p.w.len()];
    let mut level = 0;
    let mut group_start = f64::NAN;
    for (k, &alpha) in order.iter().enumerate() {
        let value = p.w[alpha];
        let gap = if k == 0 {
            f64::INFINITY
        } else {
            value - p.w[order[k - 1]]
        };
        if gap > delta_w && gap < 2.0 * delta_w {
            return Err(Error::AmbiguousGrouping { value });
        }
        if gap > delta_w {
            level += 1;
            group_start = value;
        } else if value - group_start > 2.0 * delta_w {
            return Err(Error::AmbiguousGrouping { value });
        }
        h1[alpha] = level;
    }
    Ok(HeightFunction { h0, h1 })
}

fn factorial_capped(n: usize, cap: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k).filter(|&x| x <= cap))
}

/// Every total order refining `h1`, i.e. all permutations inside each tie.
pub fn barrier_resolutions(h: &HeightFunction, cap: usize) -> Result<Vec<TotalEdgeOrder>> {
    let groups = h.barrier_groups();
    let count = groups.iter().try_fold(1usize, |acc, grp| {
        factorial_capped(grp.len(), cap)
            .and_then(|f| acc.checked_mul(f))
            .filter(|&x| x <= cap)
    });
    if count.is_none() {
        return Err(Error::CountLimitExceeded { limit: cap });
    }
    if groups.is_empty() {
        return Ok(vec![TotalEdgeOrder::identity(0)]);
    }
    Ok(groups
        .iter()
        .map(|grp| grp.iter().copied().permutations(grp.len()))
        .multi_cartesian_product()
        .map(|parts| TotalEdgeOrder::new(parts.concat()).expect("refinement is a permutation"))
        .collect())
}

/// `F_h`, the intersection of the σ-trees over all barrier resolutions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightForest {
    pub forest: Forest,
    /// Distinct σ-trees, sorted.
    pub trees: Vec<SpanningTree>,
}

pub fn forest_of(g: &Graph, h: &HeightFunction, cap: usize) -> Result<HeightForest> {
    Error::check_len(g.edge_count(), h.h1.len())?;
    let mut trees: Vec<SpanningTree> = barrier_resolutions(h, cap)?
        .iter()
        .map(|r| sigma_tree(g, r))
        .collect();
    trees.sort();
    trees.dedup();
    let common: Vec<usize> = trees[0]
        .edges()
        .iter()
        .copied()
        .filter(|&a| trees.iter().all(|t| t.contains(a)))
        .collect();
    Ok(HeightForest {
        forest: Forest::new(g, common),
        trees,
    })
}

/// Returns the tree `T_{C(h)}` when all minima share a component of `F_h`,
/// and `None` when the cell is essential. With no minima marked (the
/// extended barrier form) every vertex must share a component.
pub fn is_inessential(g: &Graph, h: &HeightFunction, cap: usize) -> Result<Option<Tree>> {
    Error::check_len(g.vertex_count(), h.h0.len())?;
    let hf = forest_of(g, h, cap)?;
    let mut minima = h.minima();
    if minima.is_empty() {
        minima = (0..g.vertex_count()).collect();
    }
    Ok(hf
        .forest
        .same_component(&minima)
        .then(|| hf.forest.component_of(minima[0]).clone()))
}

/// Order refining `h1` with `first` ranked directly below `second`.
fn tie_broken_order(h1: &[usize], first: usize, second: usize) -> TotalEdgeOrder {
    let key = |a: usize| (h1[a], if a == first { 0 } else if a == second { 1 } else { 2 }, a);
    let mut order: Vec<usize> = (0..h1.len()).collect();
    order.sort_by_key(|&a| key(a));
    TotalEdgeOrder::new(order).expect("sorted indices form a permutation")
}

/// Current around the small loop linking a top cell with minima `(i, j)` and
/// barrier tie `(α, β)`: `Q_i^{T_α,j} − Q_i^{T_β,j}`, where `T_α` resolves the
/// tie with `α` below `β`.
pub fn top_cell_current(
    g: &Graph,
    minima: (usize, usize),
    tie: (usize, usize),
    h1: &[usize],
) -> Result<IntChain> {
    let (i, j) = minima;
    let (alpha, beta) = tie;
    Error::check_len(g.edge_count(), h1.len())?;
    if i == j || alpha == beta || i.max(j) >= g.vertex_count() || alpha.max(beta) >= g.edge_count() {
        return Err(Error::InvalidArgument("top cell needs distinct minima and distinct tied edges".into()));
    }
    if h1[alpha] != h1[beta] {
        return Err(Error::InvalidArgument(format!(
            "edges {alpha} and {beta} are not tied"
        )));
    }
    let t_alpha = sigma_tree(g, &tie_broken_order(h1, alpha, beta));
    let t_beta = sigma_tree(g, &tie_broken_order(h1, beta, alpha));
    Ok(&t_alpha.path_chain(g, i, j) - &t_beta.path_chain(g, i, j))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDescriptor {
    pub height: HeightFunction,
    pub dimension: usize,
    pub minima: (usize, usize),
    pub tie: (usize, usize),
    pub current: IntChain,
    /// Nonvanishing of the linking current.
    pub essential: bool,
    /// Whether the forest criterion gives the same verdict.
    pub forest_agrees: bool,
    pub forest: Forest,
    pub tree: Option<Tree>,
}

/// All top-dimensional cells: a pair of minima, a tied pair of edges and an
/// ordering of the `|Γ1| − 1` barrier levels.
pub fn enumerate_top_cells(g: &Graph, cap: usize) -> Result<Vec<CellDescriptor>> {
    let (v, e) = (g.vertex_count(), g.edge_count());
    if v < 2 || e < 2 {
        return Ok(Vec::new());
    }
    let count = factorial_capped(e - 1, cap)
        .and_then(|f| f.checked_mul(v * (v - 1) / 2))
        .and_then(|f| f.checked_mul(e * (e - 1) / 2))
        .filter(|&x| x <= cap);
    if count.is_none() {
        return Err(Error::CountLimitExceeded { limit: cap });
    }

    let mut cells = Vec::new();
    for (i, j) in (0..v).tuple_combinations() {
        let mut h0 = vec![2u8; v];
        h0[i] = 1;
        h0[j] = 1;
        for (alpha, beta) in (0..e).tuple_combinations() {
            let mut blocks: Vec<Vec<usize>> = vec![vec![alpha, beta]];
            blocks.extend((0..e).filter(|&a| a != alpha && a != beta).map(|a| vec![a]));
            for arrangement in blocks.iter().permutations(blocks.len()) {
                let mut h1 = vec![0; e];
                for (level, block) in arrangement.iter().enumerate() {
                    for &a in block.iter() {
                        h1[a] = level + 1;
                    }
                }
                let height = HeightFunction {
                    h0: h0.clone(),
                    h1,
                };
                let current = top_cell_current(g, (i, j), (alpha, beta), &height.h1)?;
                let hf = forest_of(g, &height, cap)?;
                let tree = hf
                    .forest
                    .same_component(&[i, j])
                    .then(|| hf.forest.component_of(i).clone());
                let essential = !current.is_zero();
                cells.push(CellDescriptor {
                    dimension: height.dimension(),
                    height,
                    minima: (i, j),
                    tie: (alpha, beta),
                    forest_agrees: essential == tree.is_none(),
                    current,
                    essential,
                    forest: hf.forest,
                    tree,
                });
            }
        }
    }
    Ok(cells)
}
