//! Decides whether a normal network and a tree-child network on the same
//! leaf set display the same trees, in time quadratic in the leaf count,
//! alongside the supporting machinery: network model and validation,
//! extended-Newick and arc-list I/O, structural analysis, a brute-force
//! display-set oracle, and random network generation.

pub mod analysis;
pub mod display;
pub mod equivalence;
pub mod gen;
pub mod network;
pub mod newick;
pub mod perf;

pub use analysis::{
    cluster_of, cluster_sets, find_cherry, is_normal, is_shortcut, is_tree_child,
    is_trivial_shortcut, reachable, visibility_set, AnalysisError, CherryShape, ClusterMap,
    LeafSet,
};
pub use display::{
    apply_switching, display_sets_equal_bruteforce, displays, enumerate_display_set,
    enumerate_display_set_with_stats, switchings, CanonicalTree, DisplaySet, EnumerationStats,
    OracleError, Switching, DEFAULT_MAX_RETICULATIONS,
};
pub use equivalence::{
    same_display_set, Decision, DeletionEvent, EquivError, IterationRecord, MatchResult,
    NoMatchReason, StepCase,
};
pub use gen::{insert_trivial_shortcut, random_network, GenError, GenSpec, NetworkClass};
pub use network::{
    Arc, IdMap, Network, NetworkError, PhyloTree, Subject, ValidationReport, VertexId,
    VertexKind, Violation,
};
pub use newick::{parse_arclist, parse_enewick, serialize_enewick, ParseError};
pub use perf::{equivalent_pair, fit_loglog_exponent, measure_scaling, time_decision, BenchPoint};
