//! Follower tiers: percentile assignment, per-tier synergy sweeps and the
//! cross-tier comparison of combination sizes.

mod partition;
mod sweep;

pub use partition::{
    account_followers, assign_tiers, Tier, TierPartition, TierSummary, MIDDLE_PERCENTILE,
    TOP_PERCENTILE,
};
pub use sweep::{
    complexity_comparison, complexity_from_sizes, tier_records, tier_sweep, tier_table,
    write_tier_table_csv, MinNScaling, TierComplexityStats, TierEffects, TierSizes,
    COMPLEXITY_ORDER,
};
