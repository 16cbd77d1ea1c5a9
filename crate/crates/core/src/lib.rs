//! Samplers, embeddings and statistical tests for unimodular random rooted
//! trees and networks.
//!
//! The crate is organised around [`RootedNetwork`], a finite connected marked
//! multigraph with a root and a radius up to which it is known to be exact.
//! Random rooted networks are produced by [`RootedLawSampler`]s, which return
//! exact balls of a requested radius. On top of that sit
//!
//! * [`generators`]: the canopy tree, point masses, regular tree balls, the
//!   Sierpinski gasket graphs, stars and universal covers of random chains;
//! * [`embed`]: the construction that places a bounded-degree unimodular tree
//!   as the open cluster of an invariant percolation on a regular tree;
//! * [`stats`]: empirical ball statistics, total variation distance,
//!   mass-transport and involution tests, tightness diagnostics;
//! * [`hyperbolic`]: Ford horoballs in the upper half-plane and horocyclic
//!   forests whose rays converge with zero speed.

#![allow(clippy::needless_range_loop)]

pub mod canon;
pub mod cli;
pub mod embed;
pub mod error;
pub mod format;
pub mod generators;
pub mod hyperbolic;
pub mod iso;
pub mod metric;
pub mod network;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use canon::{canonical_code, canonical_code_doubly, CanonicalCode};
pub use error::{Result, UrtError};
pub use iso::rooted_isomorphic;
pub use metric::{local_distance, Exactness};
pub use network::{ball, DoublyRootedNetwork, Edge, Mark, NetworkBuilder, RootedNetwork, Validity};
pub use rng::{SeedStream, SimRng};
pub use sampler::{RootedLawSampler, SharedSampler};
