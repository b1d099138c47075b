//! Popular matchings in house allocation problems.
//!
//! Three problem variants are modelled by a single [`Instance`] type:
//!
//! * **HA**: strictly ordered preference lists, every house has capacity one;
//! * **HAT**: preference lists may contain ties, every house has capacity one;
//! * **CHA**: strictly ordered preference lists, houses carry capacities.
//!
//! The crate finds popular matchings and counts them:
//!
//! * [`hat`] characterizes popular matchings with ties through the
//!   Gallai-Edmonds decomposition of the first-choice graph;
//! * [`fpras`] reduces counting for HAT to counting perfect matchings of a
//!   bipartite graph, then counts those exactly (Ryser) or estimates them;
//! * [`switching`] builds the switching graph of a capacitated instance and
//!   counts popular matchings by enumerating switching sets;
//! * [`hardness`] maps any bipartite graph to a capacitated instance whose
//!   popular matchings are in bijection with the graph's matchings;
//! * [`oracle`] is brute-force ground truth used to cross-check everything else.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bipartite;
pub mod count;
mod error;
pub mod fpras;
pub mod hardness;
pub mod hat;
pub mod instance;
pub mod oracle;
pub mod switching;

pub use bipartite::{BipartiteGraph, BipartiteMatching, GeDecomposition, Parity};
pub use count::{CountMethod, CountResult, CountValue};
pub use error::Error;
pub use instance::{AgentId, House, HouseId, Instance, Kind, Matching, Popularity, PreferenceList};
pub use num_bigint::BigUint;

pub type Result<T, E = Error> = core::result::Result<T, E>;
