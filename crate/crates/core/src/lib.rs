//! Excited random walk against a wall.
//!
//! The walker lives in the half-space `z >= 0` of Z^3. On the floor it moves
//! up or sideways with probability 1/5 each, on a previously visited vertex it
//! takes a simple random walk step, and on a fresh vertex it steps down. This
//! crate provides the exact walk dynamics, compact visited-set storage, the
//! downward coupling of two walks, exact birth-death chain computations, and
//! ensemble estimators for return counts, range, floor hits and tails.

pub mod bdchain;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod legal;
pub mod rng;
pub mod site;
pub mod stats;
pub mod store;
pub mod walk;

pub use error::{Error, Result};
pub use legal::{is_legal_configuration, Connectivity, Verdict};
pub use rng::{replica_rng, MoveSource, ReplicaRng, Scripted};
pub use site::{Dir, Site, StepKind};
pub use store::{ColumnStore, NaiveSet, VisitedStore};
pub use walk::{classify, fold, Counters, StepRule, Walk};
