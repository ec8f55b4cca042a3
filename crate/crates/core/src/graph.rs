//! Finite multigraphs and their cellular chain complex.
//!
//! Vertices are `0..vertex_count`; edge `α` joins `d0(α) ≤ d1(α)`. Loop edges
//! (`d0 == d1`) and parallel edges are allowed. The boundary of an edge is
//! `∂α = d0(α) − d1(α)`, so loop edges have zero boundary: they never carry
//! probability flux but still generate first homology.

use std::ops::{Add, AddAssign, Index, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A connected finite multigraph with fixed vertex and edge orderings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Validates a raw vertex count and edge list.
    ///
    /// Each edge must be given as `(d0, d1)` with `d0 ≤ d1`; the orientation
    /// is never flipped. Fails if any endpoint is out of range or the graph
    /// is not connected.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        for (index, &(a, b)) in edges.iter().enumerate() {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::IndexOutOfRange {
                        edge: index,
                        vertex: v,
                        vertex_count,
                    });
                }
            }
        }
        if let Some(index) = edges.iter().position(|&(a, b)| a > b) {
            return Err(Error::InvalidArgument(format!(
                "edge {index} has d0 > d1; edges must be listed as (d0, d1) with d0 <= d1"
            )));
        }
        let graph = Graph {
            vertex_count,
            edges,
        };
        let all: Vec<usize> = (0..graph.edge_count()).collect();
        if graph.component_labels(&all).iter().any(|&c| c != 0) {
            return Err(Error::Disconnected);
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Face maps `(d0, d1)` of an edge.
    pub fn edge(&self, alpha: usize) -> (usize, usize) {
        self.edges[alpha]
    }

    pub fn is_loop(&self, alpha: usize) -> bool {
        let (a, b) = self.edges[alpha];
        a == b
    }

    /// First Betti number `|Γ1| − |Γ0| + 1`.
    pub fn betti_number(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count
    }

    /// Dense incidence matrix of `∂` (vertices × edges).
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.vertex_count, self.edge_count());
        for (alpha, &(a, b)) in self.edges.iter().enumerate() {
            d[(a, alpha)] += 1.0;
            d[(b, alpha)] -= 1.0;
        }
        d
    }

    pub fn boundary(&self, chain: &DVector<f64>) -> Result<DVector<f64>> {
        Error::check_len(self.edge_count(), chain.len())?;
        let mut out = DVector::zeros(self.vertex_count);
        for (alpha, &(a, b)) in self.edges.iter().enumerate() {
            out[a] += chain[alpha];
            out[b] -= chain[alpha];
        }
        Ok(out)
    }

    pub fn boundary_int(&self, chain: &IntChain) -> Result<Vec<i64>> {
        Error::check_len(self.edge_count(), chain.len())?;
        let mut out = vec![0i64; self.vertex_count];
        for (alpha, &(a, b)) in self.edges.iter().enumerate() {
            out[a] += chain[alpha];
            out[b] -= chain[alpha];
        }
        Ok(out)
    }

    /// Formal adjoint of the boundary: `(∂*v)_α = v[d0(α)] − v[d1(α)]`.
    pub fn coboundary(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Error::check_len(self.vertex_count, v.len())?;
        Ok(DVector::from_iterator(
            self.edge_count(),
            self.edges.iter().map(|&(a, b)| v[a] - v[b]),
        ))
    }

    /// Connected-component label per vertex of the spanning subgraph using
    /// only `edge_subset`. Labels are assigned in order of first vertex.
    pub fn component_labels(&self, edge_subset: &[usize]) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertex_count);
        for &alpha in edge_subset {
            let (a, b) = self.edges[alpha];
            uf.union(a, b);
        }
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut root_label = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        for v in 0..self.vertex_count {
            let r = uf.find(v);
            if root_label[r] == usize::MAX {
                root_label[r] = next;
                next += 1;
            }
            label[v] = root_label[r];
        }
        label
    }

    pub fn is_spanning_connected(&self, edge_subset: &[usize]) -> bool {
        self.component_labels(edge_subset).iter().all(|&c| c == 0)
    }
}

/// Small fixtures used across tests, examples and the CLI.
pub mod fixtures {
    use super::Graph;

    /// Two vertices joined by two parallel edges.
    pub fn g2() -> Graph {
        Graph::new(2, vec![(0, 1), (0, 1)]).unwrap()
    }

    /// Triangle with edges (0,1), (1,2), (0,2).
    pub fn c3() -> Graph {
        Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    /// Bridge (0,1) followed by a double edge between 1 and 2.
    pub fn g3() -> Graph {
        Graph::new(3, vec![(0, 1), (1, 2), (1, 2)]).unwrap()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// An integer-valued edge chain, an element of `C1(Γ; Z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntChain(pub Vec<i64>);

impl IntChain {
    pub fn zeros(edge_count: usize) -> Self {
        IntChain(vec![0; edge_count])
    }

    /// The elementary chain `sign · α`.
    pub fn basis(edge_count: usize, alpha: usize, sign: i64) -> Self {
        let mut c = Self::zeros(edge_count);
        c.0[alpha] = sign;
        c
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn to_real(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|&x| x as f64))
    }

    pub fn scaled(&self, k: i64) -> Self {
        IntChain(self.0.iter().map(|&x| k * x).collect())
    }
}

impl Index<usize> for IntChain {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl AddAssign<&IntChain> for IntChain {
    fn add_assign(&mut self, rhs: &IntChain) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Add<&IntChain> for &IntChain {
    type Output = IntChain;
    fn add(self, rhs: &IntChain) -> IntChain {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&IntChain> for &IntChain {
    type Output = IntChain;
    fn sub(self, rhs: &IntChain) -> IntChain {
        IntChain(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for IntChain {
    type Output = IntChain;
    fn neg(self) -> IntChain {
        IntChain(self.0.into_iter().map(|x| -x).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(Graph::new(2, vec![(0, 1), (0, 1)]).is_ok());
        assert_eq!(Graph::new(3, vec![(0, 1)]), Err(Error::Disconnected));
        assert!(matches!(
            Graph::new(2, vec![(0, 3)]),
            Err(Error::IndexOutOfRange { vertex: 3, .. })
        ));
        // single vertex with a loop is connected
        assert!(Graph::new(1, vec![(0, 0)]).is_ok());
    }

    #[test]
    fn boundary_of_basis_edges() {
        let g = fixtures::g2();
        let b = g.boundary(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(b.as_slice(), &[1.0, -1.0]);

        let l = Graph::new(2, vec![(0, 1), (1, 1)]).unwrap();
        let b = l.boundary(&DVector::from_vec(vec![0.0, 1.0])).unwrap();
        assert_eq!(b.as_slice(), &[0.0, 0.0]);

        assert!(matches!(
            g.boundary(&DVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn boundary_matches_incidence_multiply() {
        let g = fixtures::c3();
        let d = g.incidence();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let c = DVector::from_fn(3, |_, _| rng.gen_range(-5i64..=5) as f64);
            assert_eq!(g.boundary(&c).unwrap(), &d * &c);
        }
    }

    #[test]
    fn coboundary_formula_and_adjointness() {
        let g = fixtures::g2();
        let v = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(g.coboundary(&v).unwrap().as_slice(), &[1.0, 1.0]);
        let c = DVector::from_element(2, 3.5);
        assert!(g.coboundary(&c).unwrap().iter().all(|&x| x == 0.0));

        let g = fixtures::c3();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let c = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let v = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let lhs = g.boundary(&c).unwrap().dot(&v);
            let rhs = c.dot(&g.coboundary(&v).unwrap());
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn components() {
        let g = fixtures::g3();
        assert_eq!(g.component_labels(&[]), vec![0, 1, 2]);
        assert_eq!(g.component_labels(&[1]), vec![0, 1, 1]);
        assert!(g.is_spanning_connected(&[0, 2]));
        assert_eq!(g.betti_number(), 1);
    }
}
