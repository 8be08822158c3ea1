//! Similarity-aware puncturing of eMBB traffic by URLLC traffic.
//!
//! The crate is organised bottom-up:
//!
//! * [`constellation`] builds Gray-mapped QAM constellations, performs ML
//!   detection and evaluates channel symbol error rates.
//! * [`similarity`] partitions a pair of overlaid constellations into
//!   similarity regions and classifies region members.
//! * [`analytic`] evaluates the closed-form eMBB/URLLC error, similarity and
//!   loss expressions.
//! * [`scheduler`] selects the mapper and searches the eMBB load for the
//!   block most similar to a URLLC block.
//! * [`simulator`] runs the end-to-end Monte Carlo link simulation.

pub mod analytic;
pub mod constellation;
pub mod error;
pub mod numeric;
pub mod scheduler;
pub mod similarity;
pub mod simulator;

pub use constellation::{Channel, Constellation, SnrPoint};
pub use error::{Error, Result};
pub use scheduler::Mapper;
pub use similarity::{EpsilonPolicy, SimilarityAtlas, SimilarityMap};
