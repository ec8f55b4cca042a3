//! JSON formats for graphs and protocols.
//!
//! A graph is `{"vertices": n, "edges": [[d0, d1], ...]}` with `d0 ≤ d1`.
//! A protocol is `{"E": [coeffs per vertex], "W": [coeffs per edge]}` where
//! each coefficient object is `{"const": a0, "cos": [...], "sin": [...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::protocol::Protocol;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let file: GraphFile = serde_json::from_str(text).map_err(json_error)?;
    for (k, &[a, b]) in file.edges.iter().enumerate() {
        if a > b {
            return Err(Error::Parse {
                location: format!("edges[{k}]"),
                message: format!("edge [{a}, {b}] must be written with the smaller vertex first"),
            });
        }
    }
    Graph::new(file.vertices, file.edges.into_iter().map(|[a, b]| (a, b)).collect())
}

pub fn graph_to_json(g: &Graph) -> String {
    let file = GraphFile {
        vertices: g.vertex_count(),
        edges: g.edges().iter().map(|&(a, b)| [a, b]).collect(),
    };
    serde_json::to_string(&file).expect("graph serializes")
}

/// Parses a protocol, checking its arity against `g` when given.
pub fn parse_protocol(text: &str, g: Option<&Graph>) -> Result<Protocol> {
    let protocol: Protocol = serde_json::from_str(text).map_err(json_error)?;
    if let Some(g) = g {
        protocol.check_arity(g)?;
    }
    Ok(protocol)
}

pub fn protocol_to_json(p: &Protocol) -> String {
    serde_json::to_string(p).expect("protocol serializes")
}
