//! Trajectory metrics and the statistics run on them.

pub mod anova;
pub mod metrics;
pub mod permutation;
pub mod trend;

pub use anova::{anova_from_summaries, anova_raw, f_upper_tail, AnovaResult, GroupSummary};
pub use metrics::{
    avoidance_of_path, compute_avoidance, compute_path_length, metrics_csv, path_length,
    AvoidanceSeries, TaskMetrics, TrialMetrics,
};
pub use permutation::{
    holm_adjust, ks_uniform, pairwise_comparisons, permutation_p, PairwiseResult,
    DEFAULT_PERMUTATIONS,
};
pub use trend::{
    avoidance_trend_table, fit_hierarchical, split_rhat, synthetic_trend_data, HierarchicalData,
    McmcConfig, ParamSummary, PosteriorSummary, SyntheticSpec, TrendRecord,
};
