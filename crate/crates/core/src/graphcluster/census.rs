use std::collections::BTreeMap;

use serde::Serialize;

use super::components::Partition;
use super::digraph::ThresholdDigraph;
use crate::error::{Error, Result};
use crate::flowmatrix::FlowMatrix;

/// Classification of a singleton component by where its unit entries sit in
/// the balanced matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IsolatedKind {
    /// Some row entry and some column entry of the node are units.
    UnitInRowAndColumn,
    /// Exactly one of the two.
    UnitInRowXorColumn,
    /// The node's row and column contain no unit entry at all.
    NoUnit,
}

/// Size and composition census of a component partition.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentCensus {
    /// Component size -> number of components of that size.
    pub size_histogram: BTreeMap<usize, usize>,
    /// Ids of components whose members span at least two distinct state
    /// prefixes, ascending.
    pub interstate_components: Vec<usize>,
    /// Node index -> classification, for every singleton component.
    pub isolated_classification: BTreeMap<usize, IsolatedKind>,
}

/// Census of `p` over the digraph `g` extracted from balanced matrix `b`.
///
/// All three views must describe the same node set: same n, and g's labels
/// must equal b's.
pub fn component_census(
    p: &Partition,
    g: &ThresholdDigraph,
    b: &FlowMatrix,
    unit_tolerance: f64,
) -> Result<ComponentCensus> {
    if p.n() != g.n() || g.n() != b.n() {
        return Err(Error::InconsistentInputs {
            what: format!(
                "partition over {} nodes, digraph over {}, matrix over {}",
                p.n(),
                g.n(),
                b.n()
            ),
        });
    }
    if g.labels() != b.labels() {
        return Err(Error::InconsistentInputs {
            what: "digraph and matrix label sequences differ".to_string(),
        });
    }
    if !(unit_tolerance >= 0.0) {
        return Err(Error::NegativeThreshold {
            value: unit_tolerance,
        });
    }

    let mut size_histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut interstate_components = Vec::new();
    let mut isolated_classification = BTreeMap::new();
    let n = b.n();
    let labels = b.labels();

    for (&id, members) in p.components() {
        *size_histogram.entry(members.len()).or_insert(0) += 1;

        let first_prefix = labels[members[0]].state_prefix();
        if members
            .iter()
            .any(|&v| labels[v].state_prefix() != first_prefix)
        {
            interstate_components.push(id);
        }

        if members.len() == 1 {
            let v = members[0];
            let is_unit = |x: f64| (x - 1.0).abs() <= unit_tolerance;
            let row_unit = b.dense().row(v).iter().any(|&x| is_unit(x));
            let col_unit = (0..n).any(|i| is_unit(b.get(i, v)));
            let kind = match (row_unit, col_unit) {
                (true, true) => IsolatedKind::UnitInRowAndColumn,
                (false, false) => IsolatedKind::NoUnit,
                _ => IsolatedKind::UnitInRowXorColumn,
            };
            isolated_classification.insert(v, kind);
        }
    }

    Ok(ComponentCensus {
        size_histogram,
        interstate_components,
        isolated_classification,
    })
}

/// JSON document for a census: the census fields plus per-component member
/// code lists, keyed by component id.
pub fn census_to_json(
    census: &ComponentCensus,
    p: &Partition,
    b: &FlowMatrix,
) -> serde_json::Value {
    let labels = b.labels();
    let mut components = serde_json::Map::new();
    for (&id, members) in p.components() {
        let codes: Vec<serde_json::Value> = members
            .iter()
            .map(|&v| serde_json::Value::String(labels[v].code().to_string()))
            .collect();
        components.insert(id.to_string(), serde_json::Value::Array(codes));
    }

    let size_histogram: BTreeMap<String, usize> = census
        .size_histogram
        .iter()
        .map(|(&k, &v)| (k.to_string(), v))
        .collect();
    let isolated: BTreeMap<String, &'static str> = census
        .isolated_classification
        .iter()
        .map(|(&v, kind)| {
            let s = match kind {
                IsolatedKind::UnitInRowAndColumn => "unit_in_row_and_column",
                IsolatedKind::UnitInRowXorColumn => "unit_in_row_xor_column",
                IsolatedKind::NoUnit => "no_unit",
            };
            (labels[v].code().to_string(), s)
        })
        .collect();

    serde_json::json!({
        "component_count": p.len(),
        "size_histogram": size_histogram,
        "interstate_components": census.interstate_components,
        "isolated_classification": isolated,
        "components": serde_json::Value::Object(components),
    })
}
