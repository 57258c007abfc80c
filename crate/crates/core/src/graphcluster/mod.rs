//! Directed-graph structure extracted from a balanced matrix: threshold
//! digraphs, strong and weak components, component censuses, and the
//! descending-threshold strong-component hierarchy.

mod census;
mod components;
mod dendrogram;
mod digraph;

pub use census::{census_to_json, component_census, ComponentCensus, IsolatedKind};
pub use components::{strong_components, weak_components, Partition};
pub use dendrogram::{
    cosmopolitan_ranking, cut_dendrogram, strong_component_hierarchy, Dendrogram, MergeLevel,
};
pub use digraph::{threshold_digraph, unit_entry_digraph, Arc, ThresholdDigraph};
