//! HDBSCAN over SAFE feature vectors: seeded subsample fit, condensed tree,
//! excess-of-mass selection and approximate prediction for the full corpus.

mod hierarchy;
mod model;
mod predict;
mod stability;

pub use hierarchy::{level_lambda, CondensedRow, MAX_LEVEL, ZERO_LEVEL_LAMBDA};
pub use model::{
    fit, ClusterInfo, ClusterModel, ClusterParams, FittedPoint, Membership, Metric, Selection,
    MODEL_FORMAT, MODEL_VERSION, NOISE,
};
pub use predict::{approximate_predict, assign_records, ClusterAssignment};
pub use stability::{repeat_seeds, stability_with_seeds, subsample_stability, StabilityReport};

#[cfg(test)]
pub(crate) mod tests;
