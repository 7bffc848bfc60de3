//! Synthetic corpora with planted patterns, label noise, follower tiers and
//! engagement effects, plus the ground truth needed to score recovery.

mod generate;
mod spec;

pub use generate::{account_id, generate, GroundTruth, SyntheticCorpus, TruthRecord, TRUTH_FORMAT};
pub use spec::{EngagementModel, FlipMode, GeneratorSpec, LogNormal, PlantedEffect, Population};
