use rand::Rng;

use crate::graph::Graph;

/// Random connected multigraph: a random tree plus extra edges, which may be
/// parallel edges or loops.
pub fn random_connected_graph<R: Rng>(rng: &mut R, vertices: usize, edges: usize) -> Graph {
    let edges = edges.max(vertices - 1);
    let mut list = Vec::with_capacity(edges);
    for v in 1..vertices {
        let u = rng.gen_range(0..v);
        list.push((u, v));
    }
    while list.len() < edges {
        let a = rng.gen_range(0..vertices);
        let b = rng.gen_range(0..vertices);
        list.push((a.min(b), a.max(b)));
    }
    for i in (1..list.len()).rev() {
        list.swap(i, rng.gen_range(0..=i));
    }
    Graph::new(vertices, list).unwrap()
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}
