//! Cluster profiles, nearest-prototype pattern assignment and centroid
//! cosine validation.

mod assign;
mod config;
mod profile;
mod similarity;

pub use assign::{assign_patterns, PatternAssignment};
pub use config::{PatternConfig, PatternDef, DEFAULT_DOMINANCE, DEFAULT_REPORT_THRESHOLD};
pub use profile::{profile_clusters, ClusterProfile};
pub use similarity::{similarity_report, PatternSimilarity, SimilarPair, SimilarityReport};
