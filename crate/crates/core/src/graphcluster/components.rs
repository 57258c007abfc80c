use std::collections::BTreeMap;

use super::digraph::ThresholdDigraph;

/// Partition of node indices into components. The id of a component is the
/// smallest node index it contains, which makes partitions from different
/// algorithms directly comparable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    components: BTreeMap<usize, Vec<usize>>,
}

impl Partition {
    /// Builds from a raw component label per node; labels are renumbered to
    /// the smallest-member convention.
    pub(crate) fn from_raw_assignment(raw: &[usize]) -> Partition {
        let n = raw.len();
        let mut min_member: BTreeMap<usize, usize> = BTreeMap::new();
        for (v, &c) in raw.iter().enumerate() {
            min_member.entry(c).or_insert(v);
        }
        let mut assignment = vec![0; n];
        let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &c) in raw.iter().enumerate() {
            let id = min_member[&c];
            assignment[v] = id;
            components.entry(id).or_default().push(v);
        }
        Partition {
            assignment,
            components,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Component id of a node.
    #[inline]
    pub fn component_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    /// Component id -> ascending member list; iteration order is by id.
    pub fn components(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Sizes of all components, ascending ids.
    pub fn sizes(&self) -> Vec<usize> {
        self.components.values().map(|m| m.len()).collect()
    }
}

/// Union-find with path halving and union by size.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns true when the two were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }

    pub fn to_partition(&mut self) -> Partition {
        let n = self.parent.len();
        let raw: Vec<usize> = (0..n).map(|v| self.find(v)).collect();
        Partition::from_raw_assignment(&raw)
    }
}

/// Tarjan's strongly connected components over explicit stacks, safe for
/// deep recursion chains. `adj` gives out-neighbors per node.
pub(crate) fn strong_components_adj(adj: &[Vec<usize>]) -> Partition {
    let n = adj.len();
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut raw = vec![UNSET; n];
    let mut comp_count = 0usize;

    // Call frames: (node, position in its adjacency list).
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));

        while let Some(&mut (v, ref mut ei)) = frames.last_mut() {
            if *ei < adj[v].len() {
                let w = adj[v][*ei];
                *ei += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack invariant");
                        on_stack[w] = false;
                        raw[w] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }

    Partition::from_raw_assignment(&raw)
}

/// Strongly connected components: maximal node sets where every ordered pair
/// is joined by a directed path. Isolated nodes are singleton components.
pub fn strong_components(g: &ThresholdDigraph) -> Partition {
    strong_components_adj(&g.adjacency())
}

/// Weakly connected components: connectivity ignoring arc direction.
pub fn weak_components(g: &ThresholdDigraph) -> Partition {
    let mut uf = UnionFind::new(g.n());
    for a in g.arcs() {
        uf.union(a.src, a.dst);
    }
    uf.to_partition()
}
