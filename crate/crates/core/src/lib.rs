//! Dynamic correlation clustering over node streams.
//!
//! [`dcc::DynamicAgreement`] maintains a sparse subgraph whose connected
//! components form the clustering, using sampled agreement probes
//! ([`probes`]) and a notification scheme ([`notify`]) so that each update
//! costs polylogarithmic work in expectation. [`baselines`] holds the
//! reference algorithms and the cost function, [`stream`] the inputs, and
//! [`bench`] the experiment harness behind the `dyncc` binary.

pub mod baselines;
pub mod bench;
pub mod dcc;
pub mod error;
pub mod extraction;
pub mod graph_store;
pub mod notify;
pub mod probes;
pub mod registry;
pub mod stream;

pub use dcc::{DccConfig, DynamicAgreement, SparseSolution};
pub use error::{Error, GraphError, Result};
pub use extraction::ClusterLabels;
pub use graph_store::{DynamicGraph, NodeId};
pub use stream::StreamEvent;

use rand::SeedableRng;

/// The generator used everywhere a seed is taken.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
