//! Numeric primitives: group means and bootstrap intervals, rank tests,
//! ANOVA, rater agreement, cosine similarity and the adjusted Rand index.

mod agreement;
mod anova;
mod ari;
mod bootstrap;
mod descriptive;
mod rank;
mod similarity;
pub mod special;

pub use agreement::{cohen_kappa, AgreementResult};
pub use anova::{anova_f, AnovaResult};
pub use ari::adjusted_rand_index;
pub use bootstrap::{bootstrap_ci, mean_log_diff, BootstrapCI, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
pub use descriptive::{mean, sample_sd, std_error};
pub use rank::{
    dunn_posthoc, kruskal_wallis, Adjustment, PairwiseComparison, PairwiseTestResult,
    RankTestResult,
};
pub use similarity::cosine_similarity;
