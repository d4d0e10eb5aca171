//! Ensemble choice aggregation under the microscope.
//!
//! This crate implements the usual ensemble aggregators (soft, hard and
//! weighted voting, Borda, a dictator and pairwise majority) as set-valued
//! choice rules over exact rational score profiles, and checks them against
//! four stability axioms: insertion/deletion consistency, nondegeneracy,
//! ensemble unanimity and model choice reversal.
//!
//! - [`axioms`] decides each axiom on explicit profiles and returns
//!   self-verifying [`axioms::Witness`] records.
//! - [`search`] enumerates profile families, hunts for witnesses and runs
//!   the pivot argument showing that an aggregator satisfying all the stability
//!   axioms must have a dictator.
//! - [`trees`] rebuilds a three-tree ensemble whose soft vote changes its
//!   mind between two points although no tree does.
//! - [`consistency`] simulates fully consistent histogram estimators and
//!   measures how the reversal rate vanishes as training data grows.

pub mod aggregator;
pub mod axioms;
pub mod consistency;
pub mod error;
pub mod exec;
pub mod labels;
pub mod order;
pub mod profile;
pub mod rational;
pub mod search;
pub mod trees;

pub use aggregator::Aggregator;
pub use axioms::{Axiom, Verdict, Witness};
pub use error::{Error, Result};
pub use exec::Execution;
pub use labels::{LabelSet, LabelSubset};
pub use order::{OrderKind, OrderOnLabels};
pub use profile::ScoreProfile;
pub use rational::Rational;
