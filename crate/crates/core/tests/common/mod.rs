#![allow(dead_code)]

use rand::Rng;
use stochpump::protocol::Fourier;
use stochpump::{Graph, Protocol};

/// Random connected multigraph: a random tree plus extra edges, which may be
/// parallel edges or loops.
pub fn random_connected_graph<R: Rng>(rng: &mut R, vertices: usize, edges: usize) -> Graph {
    let edges = edges.max(vertices - 1);
    let mut list: Vec<(usize, usize)> = (1..vertices).map(|v| (rng.gen_range(0..v), v)).collect();
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

/// A smooth loop on the graph with vertices `{0, 1, 2}` and edges
/// `(0,1), (1,2), (1,2)`.
pub fn g3_loop() -> Protocol {
    let f = |constant: f64, cos: f64, sin: f64| Fourier {
        constant,
        cos: vec![cos],
        sin: vec![sin],
    };
    Protocol {
        e: vec![f(0.0, 1.0, 0.0), f(0.0, 0.0, 0.0), f(0.2, 0.0, 0.6)],
        w: vec![f(0.0, 0.0, 1.0), f(0.1, 0.0, 0.0), f(0.0, 0.4, 0.0)],
    }
}
