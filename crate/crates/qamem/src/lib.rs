//! Associative memory in open quantum systems: block-structured CPTP
//! retrieval channels, their Lindbladian continuous-time counterparts, and
//! the storage-capacity bookkeeping that goes with them.

pub mod builder;
pub mod capacity;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod linalg;
pub mod models;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
