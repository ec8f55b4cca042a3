//! Stochastic pump currents on finite multigraphs.
//!
//! A continuous-time Markov chain on the vertices of a graph is driven by a
//! periodic loop of well energies `E` and barrier energies `W`. This crate
//! simulates the average probability current per period, computes its
//! adiabatic limit, and computes the integer current predicted in the joint
//! adiabatic and low-temperature limit from the combinatorics of spanning
//! trees.

pub mod adiabatic;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod homology;
pub mod integrator;
pub mod io;
pub mod params;
pub mod protocol;
pub mod sweep;
pub mod topo;
pub mod trees;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use graph::{Graph, IntChain};
pub use homology::{CurrentReport, CycleBasis, IntCurrentReport};
pub use params::{HeightFunction, ParamPoint};
pub use protocol::{DrivingLoop, Fourier, Protocol};
pub use sweep::{Period, SweepReport};
pub use topo::{ArcDecomposition, TopoOptions, TwistAngles, TwistConvention};
pub use trees::{SpanningTree, TotalEdgeOrder};
