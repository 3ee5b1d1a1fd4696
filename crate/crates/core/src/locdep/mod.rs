//! Local dependence: graphical rules on point sets, k-nearest-neighbour
//! interaction graphs, the degree statistic `δ`, and bound reports for
//! nearest-neighbour statistics.

pub mod cones;
pub mod features;
pub mod knn;
pub mod report;

pub use cones::{alpha_cones, greedy_cap_cover, ConeCover};
pub use features::KnnBallFeatures;
pub use knn::{
    delta_statistic, interaction_rule_graph, knn_graph, knn_union_graph, noninteracting,
    InteractionGraph, KnnLists,
};
pub use report::{knn_bound_report, KnnReportConfig, LocalDependenceReport};
