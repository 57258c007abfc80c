//! Strong-component hierarchy under a descending threshold sweep.
//!
//! Scanning every distinct positive off-diagonal value t of a balanced matrix
//! from largest to smallest, the strong components of the threshold digraph
//! at t form a partition that only coarsens as t falls: a strong component at
//! a higher threshold stays inside a single strong component at any lower
//! one. Recording each fusion of two or more previous clusters yields a
//! dendrogram. The threshold at which a node first joins a non-singleton
//! cluster ranks nodes by attachment strength: a node that merges only far
//! down the sweep has no dominant exchange partner, the "cosmopolitan" end
//! of the ranking.

use std::collections::BTreeMap;

use super::components::{strong_components_adj, Partition, UnionFind};
use crate::flowmatrix::{FlowMatrix, RegionId};

/// All merge events at one threshold. `clusters` holds the member lists of
/// the clusters formed at this level, each sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeLevel {
    pub threshold: f64,
    pub clusters: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
enum TreeNode {
    Leaf(usize),
    Internal { threshold: f64, children: Vec<usize> },
}

/// Merge history of the descending threshold sweep.
///
/// `merges` is ordered by strictly decreasing threshold. Leaves that never
/// merge stay roots of their own single-node trees and have no first merge
/// level.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    leaves: Vec<RegionId>,
    merges: Vec<MergeLevel>,
    first_merge_level: Vec<Option<f64>>,
    nodes: Vec<TreeNode>,
    roots: Vec<usize>,
}

impl Dendrogram {
    pub fn leaves(&self) -> &[RegionId] {
        &self.leaves
    }

    pub fn merges(&self) -> &[MergeLevel] {
        &self.merges
    }

    /// Largest threshold at which each leaf sits in a component of size >= 2,
    /// `None` for leaves that never merge.
    pub fn first_merge_level(&self) -> &[Option<f64>] {
        &self.first_merge_level
    }

    /// Nested tree document. Internal nodes carry `threshold` and `members`
    /// (their child nodes); leaves carry `code`. Forest roots are listed
    /// under `roots`, and `first_merge_level` maps each code to its level or
    /// null.
    pub fn to_json(&self) -> serde_json::Value {
        fn node_json(d: &Dendrogram, id: usize) -> serde_json::Value {
            match &d.nodes[id] {
                TreeNode::Leaf(v) => serde_json::json!({ "code": d.leaves[*v].code() }),
                TreeNode::Internal {
                    threshold,
                    children,
                } => {
                    let members: Vec<serde_json::Value> =
                        children.iter().map(|&c| node_json(d, c)).collect();
                    serde_json::json!({ "threshold": threshold, "members": members })
                }
            }
        }
        let roots: Vec<serde_json::Value> =
            self.roots.iter().map(|&r| node_json(self, r)).collect();
        let levels: BTreeMap<&str, serde_json::Value> = self
            .leaves
            .iter()
            .zip(&self.first_merge_level)
            .map(|(l, lvl)| {
                let v = match lvl {
                    Some(t) => serde_json::json!(t),
                    None => serde_json::Value::Null,
                };
                (l.code(), v)
            })
            .collect();
        serde_json::json!({ "roots": roots, "first_merge_level": levels })
    }

    /// Newick forest, one tree per line. Internal nodes are annotated with
    /// their merge threshold as `[&level=...]`. Assumes codes contain no
    /// Newick metacharacters, which holds for FIPS-style identifiers.
    pub fn to_newick(&self) -> String {
        fn node_newick(d: &Dendrogram, id: usize, out: &mut String) {
            match &d.nodes[id] {
                TreeNode::Leaf(v) => out.push_str(d.leaves[*v].code()),
                TreeNode::Internal {
                    threshold,
                    children,
                } => {
                    out.push('(');
                    for (k, &c) in children.iter().enumerate() {
                        if k > 0 {
                            out.push(',');
                        }
                        node_newick(d, c, out);
                    }
                    out.push(')');
                    out.push_str(&format!("[&level={threshold}]"));
                }
            }
        }
        let mut out = String::new();
        for &r in &self.roots {
            node_newick(self, r, &mut out);
            out.push_str(";\n");
        }
        out
    }
}

/// Runs the full descending-threshold sweep over the distinct positive
/// off-diagonal values of `b`.
pub fn strong_component_hierarchy(b: &FlowMatrix) -> Dendrogram {
    let n = b.n();
    let mut arcs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for (j, &v) in b.dense().row(i).iter().enumerate() {
            if i != j && v > 0.0 {
                arcs.push((i, j, v));
            }
        }
    }
    // Largest weight first; ties keep (src, dst) order for a deterministic
    // build (component results do not depend on it).
    arcs.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .expect("finite weights")
            .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
    });
    let mut thresholds: Vec<f64> = arcs.iter().map(|a| a.2).collect();
    thresholds.dedup();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut uf = UnionFind::new(n);
    // Tree handle and minimum member for the cluster rooted at each
    // union-find representative.
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut min_of: Vec<usize> = (0..n).collect();
    let mut nodes: Vec<TreeNode> = (0..n).map(TreeNode::Leaf).collect();

    let mut merges: Vec<MergeLevel> = Vec::new();
    let mut first_merge_level: Vec<Option<f64>> = vec![None; n];
    let mut next_arc = 0usize;
    let mut cluster_count = n;

    for &t in &thresholds {
        while next_arc < arcs.len() && arcs[next_arc].2 >= t {
            let (i, j, _) = arcs[next_arc];
            adj[i].push(j);
            next_arc += 1;
        }

        let p = strong_components_adj(&adj);
        let mut events: Vec<Vec<usize>> = Vec::new();
        for members in p.components().values() {
            if members.len() < 2 {
                continue;
            }
            let mut cluster_roots: Vec<usize> = members.iter().map(|&v| uf.find(v)).collect();
            cluster_roots.sort_unstable();
            cluster_roots.dedup();
            if cluster_roots.len() < 2 {
                continue;
            }

            let mut children: Vec<(usize, usize)> = cluster_roots
                .iter()
                .map(|&r| (min_of[r], node_of[r]))
                .collect();
            children.sort_unstable();
            let child_ids: Vec<usize> = children.into_iter().map(|(_, id)| id).collect();
            let new_node = nodes.len();
            nodes.push(TreeNode::Internal {
                threshold: t,
                children: child_ids,
            });

            let new_min = cluster_roots.iter().map(|&r| min_of[r]).min().unwrap();
            let mut it = cluster_roots.iter();
            let first = *it.next().unwrap();
            for &r in it {
                uf.union(first, r);
                cluster_count -= 1;
            }
            let root = uf.find(first);
            node_of[root] = new_node;
            min_of[root] = new_min;

            for &v in members {
                if first_merge_level[v].is_none() {
                    first_merge_level[v] = Some(t);
                }
            }
            events.push(members.clone());
        }
        if !events.is_empty() {
            merges.push(MergeLevel {
                threshold: t,
                clusters: events,
            });
        }
        if cluster_count == 1 {
            break;
        }
    }

    let mut roots: Vec<(usize, usize)> = Vec::new();
    let mut seen = vec![false; n];
    for v in 0..n {
        let r = uf.find(v);
        if !seen[r] {
            seen[r] = true;
            roots.push((min_of[r], node_of[r]));
        }
    }
    roots.sort_unstable();
    let roots: Vec<usize> = roots.into_iter().map(|(_, id)| id).collect();

    Dendrogram {
        leaves: b.labels().to_vec(),
        merges,
        first_merge_level,
        nodes,
        roots,
    }
}

/// Partition implied by the dendrogram at threshold `t`: all merges with
/// threshold >= t applied, everything else left separate. Component ids
/// follow the smallest-member convention.
pub fn cut_dendrogram(d: &Dendrogram, t: f64) -> Partition {
    let n = d.leaves.len();
    let mut uf = UnionFind::new(n);
    for level in &d.merges {
        if level.threshold < t {
            break;
        }
        for cluster in &level.clusters {
            let first = cluster[0];
            for &v in &cluster[1..] {
                uf.union(first, v);
            }
        }
    }
    uf.to_partition()
}

/// Leaves ordered from most to least cosmopolitan: ascending first merge
/// level, never-merged leaves last, ties broken by leaf order.
pub fn cosmopolitan_ranking(d: &Dendrogram) -> Vec<(RegionId, Option<f64>)> {
    let mut idx: Vec<usize> = (0..d.leaves.len()).collect();
    idx.sort_by(|&a, &b| {
        match (d.first_merge_level[a], d.first_merge_level[b]) {
            (Some(x), Some(y)) => x.partial_cmp(&y).expect("finite levels").then(a.cmp(&b)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.cmp(&b),
        }
    });
    idx.into_iter()
        .map(|i| (d.leaves[i].clone(), d.first_merge_level[i]))
        .collect()
}
