//! Exact and asymptotic dynamics for generalized Markov triples: mutation
//! chains over big integers, the matching Euclid and tropical recursions,
//! log-domain growth estimation, cluster-seed mutation with deformed
//! exchange polynomials, and uniqueness scanning over solution trees.

pub mod conjecture;
pub mod dynamics;
pub mod euclid;
pub mod gca;
pub mod markov;
pub mod seq;
pub mod trop;
pub mod types;

pub use conjecture::{CandidateHit, ConjectureError, QRow, QTable, ScanReport, ViolationPair};
pub use dynamics::{
    ComparisonState, ComparisonTriple, DynamicsError, ExactQEstimate, LogQEstimate, NoConvergence,
    RatioMode, RatioSeries,
};
pub use euclid::EuclidParams;
pub use gca::{ExchangeMatrix, ExchangePoly, GcaError, GenSeed};
pub use markov::{MarkovChain, MarkovError};
pub use seq::{ReducedSeq, SeqError, TailClass, TailInfo};
pub use trop::{CorrespondenceReport, TropError, TropTriple};
pub use types::{BigTriple, LambdaParams, LogTriple, RatTriple};
