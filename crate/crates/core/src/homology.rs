//! Fundamental cycle basis of `H1(Γ)` and current reports expressed in it.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, IntChain};
use crate::trees::{sigma_tree, SpanningTree, TotalEdgeOrder};

/// Fundamental cycles relative to the σ-tree of the identity edge order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleBasis {
    pub reference_tree: SpanningTree,
    /// Non-tree edges, ascending; one basis cycle each.
    pub generators: Vec<usize>,
    pub cycles: Vec<IntChain>,
    edge_count: usize,
}

impl CycleBasis {
    pub fn new(g: &Graph) -> Self {
        let tree = sigma_tree(g, &TotalEdgeOrder::identity(g.edge_count()));
        let generators: Vec<usize> = (0..g.edge_count()).filter(|&a| !tree.contains(a)).collect();
        let cycles = generators
            .iter()
            .map(|&alpha| {
                let (a, b) = g.edge(alpha);
                let mut z = IntChain::basis(g.edge_count(), alpha, 1);
                if a != b {
                    z = &z - &tree.path_chain(g, a, b);
                }
                z
            })
            .collect();
        CycleBasis {
            reference_tree: tree,
            generators,
            cycles,
            edge_count: g.edge_count(),
        }
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Coordinates of a real conserved chain; fails if `‖∂c‖∞ > tol`.
    pub fn coords(&self, g: &Graph, c: &DVector<f64>, tol: f64) -> Result<Vec<f64>> {
        let residual = g.boundary(c)?.amax();
        if residual > tol {
            return Err(Error::NotConserved { residual });
        }
        Ok(self.coords_unchecked(c))
    }

    /// Reads off the non-tree components without checking conservation.
    pub fn coords_unchecked(&self, c: &DVector<f64>) -> Vec<f64> {
        self.generators.iter().map(|&a| c[a]).collect()
    }

    pub fn coords_int(&self, g: &Graph, c: &IntChain) -> Result<Vec<i64>> {
        let b = g.boundary_int(c)?;
        if let Some(&r) = b.iter().find(|&&x| x != 0) {
            return Err(Error::NotConserved {
                residual: r.abs() as f64,
            });
        }
        Ok(self.generators.iter().map(|&a| c[a]).collect())
    }

    pub fn reconstruct(&self, coords: &[f64]) -> DVector<f64> {
        let n = self.edge_count;
        let mut out = DVector::zeros(n);
        for (k, z) in coords.iter().zip(&self.cycles) {
            out += z.to_real() * *k;
        }
        out
    }

    pub fn reconstruct_int(&self, coords: &[i64]) -> IntChain {
        let mut out = IntChain::zeros(self.edge_count);
        for (&k, z) in coords.iter().zip(&self.cycles) {
            out += &z.scaled(k);
        }
        out
    }
}

/// A real current with its cycle coordinates and the tree fixing them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentReport {
    pub chain: Vec<f64>,
    pub coordinates: Vec<f64>,
    /// `‖∂Q‖∞`.
    pub boundary_residual: f64,
    pub reference_tree: Vec<usize>,
}

impl CurrentReport {
    pub fn new(g: &Graph, basis: &CycleBasis, chain: DVector<f64>) -> Result<Self> {
        let boundary_residual = g.boundary(&chain)?.amax();
        Ok(CurrentReport {
            coordinates: basis.coords_unchecked(&chain),
            chain: chain.iter().copied().collect(),
            boundary_residual,
            reference_tree: basis.reference_tree.edges().to_vec(),
        })
    }

    /// Euclidean distance from the coordinates to the nearest lattice point.
    pub fn lattice_distance(&self) -> f64 {
        self.coordinates
            .iter()
            .map(|x| (x - x.round()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn nearest_lattice_point(&self) -> Vec<i64> {
        self.coordinates.iter().map(|x| x.round() as i64).collect()
    }
}

/// An exact integer current.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntCurrentReport {
    pub chain: IntChain,
    pub coordinates: Vec<i64>,
    pub reference_tree: Vec<usize>,
}

impl IntCurrentReport {
    pub fn new(g: &Graph, basis: &CycleBasis, chain: IntChain) -> Result<Self> {
        Ok(IntCurrentReport {
            coordinates: basis.coords_int(g, &chain)?,
            chain,
            reference_tree: basis.reference_tree.edges().to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{c3, g2, g3};
    use crate::testutil::random_connected_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixture_bases() {
        let g = g2();
        let b = CycleBasis::new(&g);
        assert_eq!(b.reference_tree.edges(), &[0]);
        assert_eq!(b.cycles, vec![IntChain(vec![-1, 1])]);

        let c = c3();
        let b = CycleBasis::new(&c);
        assert_eq!(b.cycles, vec![IntChain(vec![-1, -1, 1])]);
        assert_eq!(c.boundary_int(&b.cycles[0]).unwrap(), vec![0, 0, 0]);

        let tree = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert!(CycleBasis::new(&tree).is_empty());

        let looped = Graph::new(2, vec![(0, 1), (1, 1)]).unwrap();
        assert_eq!(CycleBasis::new(&looped).cycles, vec![IntChain(vec![0, 1])]);
    }

    #[test]
    fn coordinates() {
        let g = g2();
        let b = CycleBasis::new(&g);
        assert_eq!(b.coords_int(&g, &IntChain(vec![1, -1])).unwrap(), vec![-1]);
        assert_eq!(b.coords_int(&g, &IntChain(vec![0, 0])).unwrap(), vec![0]);
        assert!(matches!(
            b.coords_int(&g, &IntChain(vec![1, 0])),
            Err(Error::NotConserved { .. })
        ));
        assert!(matches!(
            b.coords(&g, &DVector::from_vec(vec![1.0, 0.0]), 1e-12),
            Err(Error::NotConserved { .. })
        ));
    }

    #[test]
    fn betti_count_and_reconstruction_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut graphs = vec![g2(), c3(), g3()];
        for _ in 0..50 {
            let v = rng.gen_range(1..=7);
            let e = rng.gen_range(v - 1..=v + 4);
            graphs.push(random_connected_graph(&mut rng, v, e));
        }
        for g in graphs {
            let b = CycleBasis::new(&g);
            assert_eq!(b.len(), g.betti_number());
            for (k, z) in b.cycles.iter().enumerate() {
                assert!(g.boundary_int(z).unwrap().iter().all(|&x| x == 0));
                for (l, &alpha) in b.generators.iter().enumerate() {
                    assert_eq!(z[alpha], i64::from(k == l));
                }
            }
            let coeffs: Vec<i64> = (0..b.len()).map(|_| rng.gen_range(-4..=4)).collect();
            let c = b.reconstruct_int(&coeffs);
            assert_eq!(b.coords_int(&g, &c).unwrap(), coeffs);
            let real: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let c = b.reconstruct(&real);
            let back = b.coords(&g, &c, 1e-12).unwrap();
            assert!((b.reconstruct(&back) - c).amax() <= 1e-12);
        }
    }
}
