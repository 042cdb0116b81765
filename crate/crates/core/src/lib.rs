//! Social-network analysis for a student cohort.
//!
//! Build a directed friendship network from survey nominations, find
//! friendship communities with Girvan–Newman and modularity selection, rank
//! class representatives by betweenness, classify communities by mean mark,
//! and plan assignment groups that keep high-performing communities intact
//! while dispersing low-performing ones among them.
//!
//! ```
//! use cohort_sna::prelude::*;
//!
//! let demo = cohort_sna::synthetic::demo_cohort();
//! let view = symmetrize(&demo.network, SymmetrizeRule::Union);
//! let (best, _curve, _trace) = detect_communities(&view, DEFAULT_K_MAX).unwrap();
//! assert!(best.q > 0.5);
//! ```

pub mod centrality;
pub mod community;
pub mod intervention;
pub mod io;
pub mod network;
mod par;
pub mod stats;
pub mod synthetic;

pub mod prelude {
    pub use crate::centrality::{
        betweenness, closeness, degree, eigenvector, rank_representatives, CentralityError,
        CentralityScores, Measure, Mode,
    };
    pub use crate::community::{
        best_partition, detect_communities, edge_betweenness, girvan_newman, modularity,
        CommunityError, DivisionTrace, ModularityCurve, Partition, DEFAULT_K_MAX,
    };
    pub use crate::intervention::{
        plan_intervention, predicted_group_profile, AssignmentPlan, InterventionError,
        InterventionPolicy, Role,
    };
    pub use crate::network::{
        build_network, pendant_vertices, reciprocity_rate, symmetrize, weak_components,
        FriendshipNetwork, Gender, NetworkError, Student, StudentId, SymmetrizeRule,
        UndirectedView,
    };
    pub use crate::stats::{
        cluster_performance, compare_groups, skewness, summarize, PerformanceClass, StatsError,
        Thresholds, DEFAULT_BIN_WIDTH,
    };
}
