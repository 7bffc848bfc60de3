//! Discovery of recurring persuasive-element combinations in SAFE-coded
//! message corpora, and estimation of the engagement effects of peripheral
//! elements added to each pattern's core baseline.
//!
//! Pipeline: [`corpus`] ingestion and encoding, [`cluster`] (HDBSCAN over binary
//! feature vectors), [`patterns`] (cluster profiles, pattern assignment, cosine
//! validation), [`synergy`] (baseline/peripheral ΔE sweeps with bootstrap CIs),
//! [`tiers`] (follower-tier conditioning), with [`synthgen`] providing planted
//! ground truth and [`pipeline`] orchestrating report bundles.

pub mod cluster;
pub mod corpus;
pub mod error;
pub mod patterns;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synergy;
pub mod synthgen;
pub mod tiers;

pub use error::{Error, Result};
